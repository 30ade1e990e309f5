#include "mpsim/sim.hpp"

#include <utility>

namespace mpsim {

EventHandle Simulator::schedule(SimTime fire_at, std::string kind,
                                std::function<void()> action) {
  if (fire_at < now_) {
    throw SimError("event '" + kind + "' scheduled in the past: fire_at=" +
                   std::to_string(fire_at.us()) + "us, now=" +
                   std::to_string(now_.us()) + "us");
  }
  Key key{fire_at.us(), next_seq_++};
  uint64_t id = next_id_++;
  queue_.emplace(key, Pending{id, std::move(kind), std::move(action)});
  by_id_.emplace(id, key);
  return EventHandle{id};
}

bool Simulator::cancel(EventHandle h) {
  auto it = by_id_.find(h.id);
  if (it == by_id_.end()) return false;
  queue_.erase(it->second);
  by_id_.erase(it);
  return true;
}

Simulator::RunStats Simulator::run_until(SimTime t_end) {
  RunStats stats;
  while (!queue_.empty() && queue_.begin()->first.at_us <= t_end.us()) {
    auto node = queue_.extract(queue_.begin());
    by_id_.erase(node.mapped().id);
    now_ = SimTime::from_us(node.key().at_us);
    if (tracing_) {
      trace_.push_back(TraceEntry{now_, node.key().seq, node.mapped().kind});
    }
    node.mapped().action();
    ++stats.events_processed;
  }
  if (t_end > now_) now_ = t_end;
  return stats;
}

}  // namespace mpsim
