#include "mpsim/handover.hpp"

namespace mpsim {

HandoverCm::HandoverCm(Simulator& sim, RadioMedium& medium, MptcpEngine& engine,
                       CmParams params)
    : sim_(sim), medium_(medium), engine_(engine), params_(params) {
  params_.validate();
}

void HandoverCm::emit(std::string_view event, int subflow_id, const std::string& detail) {
  if (on_event) on_event(sim_.now(), event, subflow_id, detail);
}

void HandoverCm::arm_timer(int rsu_id) {
  RsuEntry& e = live_.at(rsu_id);
  sim_.cancel(e.timer);
  e.timer = sim_.schedule(sim_.now() + params_.loss_timeout, "cm_liveness_timeout",
                          [this, rsu_id] { on_liveness_timeout(rsu_id); });
}

void HandoverCm::on_beacon(const Beacon& beacon) {
  auto it = live_.find(beacon.rsu_id);
  if (it != live_.end()) {
    arm_timer(beacon.rsu_id);  // known RSU: refresh liveness only
    return;
  }

  LinkParams lp;
  if (auto pit = link_params_.find(beacon.rsu_id); pit != link_params_.end()) {
    lp = pit->second;
  }
  LinkId link = medium_.attach_link(beacon.rsu_id, lp.prop_delay, lp.extra_delay);
  emit("link_up", 0, "rsu=" + std::to_string(beacon.rsu_id) +
                         ";link=" + std::to_string(link));
  int subflow;
  if (!engine_.is_open()) {
    engine_.open(link);
    subflow = engine_.live_subflow_ids().front();
  } else {
    subflow = engine_.add_subflow(link);
  }
  live_.emplace(beacon.rsu_id, RsuEntry{link, subflow, {}});
  arm_timer(beacon.rsu_id);
}

void HandoverCm::on_liveness_timeout(int rsu_id) {
  auto it = live_.find(rsu_id);
  if (it == live_.end()) return;
  RsuEntry e = it->second;
  live_.erase(it);
  // Subflow first, then tunnel: reinjection accounting happens in the
  // engine before in-flight frames are discarded by the medium.
  engine_.remove_subflow(e.subflow);
  medium_.detach_link(e.link);
  emit("link_down", e.subflow, "rsu=" + std::to_string(rsu_id) +
                                   ";link=" + std::to_string(e.link));
}

std::optional<int> HandoverCm::subflow_for_rsu(int rsu_id) const {
  auto it = live_.find(rsu_id);
  if (it == live_.end()) return std::nullopt;
  return it->second.subflow;
}

}  // namespace mpsim
