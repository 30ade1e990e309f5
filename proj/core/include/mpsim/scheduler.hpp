#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpsim/time.hpp"

namespace mpsim {

struct SubflowCandidate {
  int subflow_id = 0;
  SimTime srtt;        // smoothed RTT, or the link's base-RTT estimate pre-sample
  int cwnd_space = 0;  // cwnd - inflight, bytes
};

// Picks the subflow for the next segment. Candidates are the Up,
// activation-complete subflows; returning nullopt means every window is full.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::optional<int> select(const std::vector<SubflowCandidate>& candidates,
                                    int needed_bytes) = 0;
  virtual std::string_view name() const = 0;
};

// Lowest smoothed RTT wins among candidates with room for the segment;
// ties go to the lowest subflow id.
class MinRttScheduler final : public Scheduler {
 public:
  std::optional<int> select(const std::vector<SubflowCandidate>& candidates,
                            int needed_bytes) override;
  std::string_view name() const override { return "minrtt"; }
};

// Cycles over subflows with room; differential-testing alternative.
class RoundRobinScheduler final : public Scheduler {
 public:
  std::optional<int> select(const std::vector<SubflowCandidate>& candidates,
                            int needed_bytes) override;
  std::string_view name() const override { return "roundrobin"; }

 private:
  int last_id_ = -1;
};

// kind: "minrtt" | "roundrobin"
std::unique_ptr<Scheduler> make_scheduler(const std::string& kind);

}  // namespace mpsim
