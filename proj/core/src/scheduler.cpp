#include "mpsim/scheduler.hpp"

#include "mpsim/sim.hpp"

namespace mpsim {

std::optional<int> MinRttScheduler::select(
    const std::vector<SubflowCandidate>& candidates, int needed_bytes) {
  const SubflowCandidate* best = nullptr;
  for (const auto& c : candidates) {
    if (c.cwnd_space < needed_bytes) continue;
    if (!best || c.srtt < best->srtt ||
        (c.srtt == best->srtt && c.subflow_id < best->subflow_id)) {
      best = &c;
    }
  }
  if (!best) return std::nullopt;
  return best->subflow_id;
}

std::optional<int> RoundRobinScheduler::select(
    const std::vector<SubflowCandidate>& candidates, int needed_bytes) {
  // Smallest eligible id strictly greater than the last pick, wrapping.
  const SubflowCandidate* wrap = nullptr;
  const SubflowCandidate* next = nullptr;
  for (const auto& c : candidates) {
    if (c.cwnd_space < needed_bytes) continue;
    if (!wrap || c.subflow_id < wrap->subflow_id) wrap = &c;
    if (c.subflow_id > last_id_ && (!next || c.subflow_id < next->subflow_id)) next = &c;
  }
  const SubflowCandidate* pick = next ? next : wrap;
  if (!pick) return std::nullopt;
  last_id_ = pick->subflow_id;
  return pick->subflow_id;
}

std::unique_ptr<Scheduler> make_scheduler(const std::string& kind) {
  if (kind == "minrtt") return std::make_unique<MinRttScheduler>();
  if (kind == "roundrobin") return std::make_unique<RoundRobinScheduler>();
  throw SimError("unknown scheduler '" + kind + "' (expected minrtt or roundrobin)");
}

}  // namespace mpsim
