#include "mpsim/medium.hpp"

#include <cassert>
#include <utility>

namespace mpsim {

void MediumConfig::validate() const {
  if (phy_rate_bps <= 0) throw SimError("medium.phy_rate must be > 0");
  if (frame_overhead_bytes < 0) throw SimError("medium.frame_overhead must be >= 0");
  if (background_occupancy < 0 || background_occupancy >= 1) {
    throw SimError("medium.background_occupancy must be in [0, 1)");
  }
  if (wired_delay < SimTime{}) throw SimError("medium.wired_delay must be >= 0");
  if (queue_capacity < 1) throw SimError("medium.queue_capacity must be >= 1");
}

RadioMedium::RadioMedium(Simulator& sim, MediumConfig cfg)
    : sim_(sim), cfg_(std::move(cfg)) {
  cfg_.validate();
}

RadioMedium::LinkState& RadioMedium::must_get(LinkId id) {
  auto it = links_.find(id);
  if (it == links_.end()) throw SimError("unknown link id " + std::to_string(id));
  return it->second;
}

const RadioMedium::LinkState& RadioMedium::must_get(LinkId id) const {
  auto it = links_.find(id);
  if (it == links_.end()) throw SimError("unknown link id " + std::to_string(id));
  return it->second;
}

LinkId RadioMedium::attach_link(int rsu_id, SimTime prop_delay, SimTime extra_delay) {
  if (extra_delay < SimTime{}) throw SimError("extra_delay must be >= 0");
  for (const auto& [id, st] : links_) {
    if (st.up && st.rsu_id == rsu_id) {
      throw SimError("link to rsu " + std::to_string(rsu_id) + " already attached");
    }
  }
  LinkId id = next_link_id_++;
  LinkState st;
  st.rsu_id = rsu_id;
  st.up = true;
  st.prop_delay = prop_delay;
  st.extra_delay = extra_delay;
  links_.emplace(id, std::move(st));
  return id;
}

std::vector<Frame> RadioMedium::detach_link(LinkId id) {
  LinkState& st = must_get(id);
  if (!st.up) throw SimError("link " + std::to_string(id) + " already down");
  std::vector<Frame> dropped;

  // Frame currently on the air, if it belongs to this link.
  if (busy_ && tx_frame_ && tx_frame_->link_id == id) {
    sim_.cancel(tx_done_);
    dropped.push_back(*tx_frame_);
    tx_frame_.reset();
    busy_ = false;
  }
  for (auto& q : st.queue) {
    for (auto& f : q) dropped.push_back(std::move(f));
    q.clear();
  }
  // Frames already propagating towards their endpoint.
  for (uint64_t tag : st.pending_deliveries) {
    auto it = in_flight_.find(tag);
    if (it != in_flight_.end()) {
      sim_.cancel(it->second.handle);
      dropped.push_back(std::move(it->second.frame));
      in_flight_.erase(it);
    }
  }
  st.pending_deliveries.clear();
  st.up = false;
  maybe_start_tx();
  return dropped;
}

bool RadioMedium::send_frame(LinkId id, Frame frame) {
  LinkState& st = must_get(id);
  if (!st.up) throw LinkDownError("send on down link " + std::to_string(id));
  auto& q = st.queue[static_cast<int>(frame.direction)];
  if (static_cast<int>(q.size()) >= cfg_.queue_capacity) return false;  // drop-tail
  frame.link_id = id;
  q.push_back(std::move(frame));
  maybe_start_tx();
  return true;
}

SimTime RadioMedium::airtime_for_payload(int payload_bytes) const {
  double bits = static_cast<double>(payload_bytes + cfg_.frame_overhead_bytes) * 8.0;
  double seconds = bits / (cfg_.phy_rate_bps * (1.0 - cfg_.background_occupancy));
  return SimTime::from_seconds(seconds);
}

void RadioMedium::maybe_start_tx() {
  if (busy_) return;

  // Cyclic order over (link asc, Uplink then Downlink), starting just
  // after the last served slot.
  std::vector<std::pair<LinkId, Direction>> slots;
  for (const auto& [id, st] : links_) {
    if (!st.up) continue;
    slots.emplace_back(id, Direction::Uplink);
    slots.emplace_back(id, Direction::Downlink);
  }
  if (slots.empty()) return;

  size_t start = 0;
  if (cursor_) {
    for (size_t i = 0; i < slots.size(); ++i) {
      if (slots[i] <= *cursor_) start = i + 1;
    }
  }
  for (size_t k = 0; k < slots.size(); ++k) {
    auto [id, dir] = slots[(start + k) % slots.size()];
    auto& q = links_.at(id).queue[static_cast<int>(dir)];
    if (q.empty()) continue;

    Frame frame = std::move(q.front());
    q.pop_front();
    cursor_ = std::make_pair(id, dir);
    busy_ = true;
    tx_frame_ = std::move(frame);

    SimTime airtime = airtime_for_payload(tx_frame_->payload_bytes);
    assert(sim_.now().us() >= last_tx_end_us_);
    last_tx_end_us_ = (sim_.now() + airtime).us();
    busy_airtime_s_ += airtime.seconds();
    tx_done_ = sim_.schedule(sim_.now() + airtime, "tx_done",
                             [this] { on_tx_complete(); });
    return;
  }
}

void RadioMedium::on_tx_complete() {
  busy_ = false;
  Frame frame = std::move(*tx_frame_);
  tx_frame_.reset();

  auto it = links_.find(frame.link_id);
  if (it != links_.end() && it->second.up) {
    LinkState& st = it->second;
    SimTime deliver_at = sim_.now() + st.prop_delay + st.extra_delay + cfg_.wired_delay;
    LinkId link = frame.link_id;
    uint64_t tag = next_delivery_tag_++;
    in_flight_.emplace(tag, InFlight{link, std::move(frame), {}});
    EventHandle ev = sim_.schedule(deliver_at, "frame_deliver", [this, tag, link] {
      auto fit = in_flight_.find(tag);
      if (fit == in_flight_.end()) return;
      Frame f = std::move(fit->second.frame);
      in_flight_.erase(fit);
      auto lit = links_.find(link);
      if (lit != links_.end()) {
        lit->second.pending_deliveries.erase(tag);
        lit->second.delivered_payload += static_cast<uint64_t>(f.payload_bytes);
      }
      delivered_payload_total_ += static_cast<uint64_t>(f.payload_bytes);
      if (deliver_) deliver_(sim_.now(), f);
    });
    in_flight_.at(tag).handle = ev;
    st.pending_deliveries.insert(tag);
  }
  maybe_start_tx();
}

bool RadioMedium::link_up(LinkId id) const {
  auto it = links_.find(id);
  return it != links_.end() && it->second.up;
}

int RadioMedium::rsu_of(LinkId id) const { return must_get(id).rsu_id; }

std::optional<LinkId> RadioMedium::up_link_for_rsu(int rsu_id) const {
  for (const auto& [id, st] : links_) {
    if (st.up && st.rsu_id == rsu_id) return id;
  }
  return std::nullopt;
}

int RadioMedium::up_link_count() const {
  int n = 0;
  for (const auto& [id, st] : links_) n += st.up ? 1 : 0;
  return n;
}

SimTime RadioMedium::post_airtime_latency(LinkId id) const {
  const LinkState& st = must_get(id);
  return st.prop_delay + st.extra_delay + cfg_.wired_delay;
}

uint64_t RadioMedium::delivered_payload_bytes(LinkId id) const {
  return must_get(id).delivered_payload;
}

}  // namespace mpsim
