#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpsim/interval_set.hpp"
#include "mpsim/lia.hpp"
#include "mpsim/medium.hpp"
#include "mpsim/scheduler.hpp"
#include "mpsim/sim.hpp"

namespace mpsim {

struct EngineParams {
  int mss = 1400;
  SimTime min_rto = SimTime::from_ms(200);
  int dupack_threshold = 3;
  int initial_cwnd_segments = 10;
  // Caps slow-start overshoot on a ~100-frame bottleneck queue.
  int initial_ssthresh_segments = 64;

  void validate() const;
};

enum class SubflowRole { Main, Joined };

// DSN<->SSN association: the unit of (re)transmission and reinjection.
struct SegmentMapping {
  uint64_t dsn_start = 0;
  int length = 0;
  uint64_t ssn_start = 0;
  SimTime send_time;
  bool retransmitted = false;
};

struct Subflow {
  int id = 0;
  LinkId link = -1;
  int rsu_id = 0;
  SubflowRole role = SubflowRole::Main;
  bool active = false;  // handshake (one RTT) completed

  uint64_t next_ssn = 0;
  uint64_t acked_ssn = 0;
  double cwnd = 0;
  double ssthresh = 0;

  SimTime srtt;
  SimTime rttvar;
  bool has_rtt_sample = false;
  SimTime rto;
  SimTime base_rtt;  // cold-start RTT estimate from link delays

  int dup_acks = 0;
  bool in_recovery = false;
  uint64_t recover_ssn = 0;

  std::deque<SegmentMapping> mappings;  // unacked, SSN-ascending
  EventHandle rto_timer;
  EventHandle activation_timer;

  int inflight_bytes() const { return static_cast<int>(next_ssn - acked_ssn); }
  int cwnd_space() const {
    double space = cwnd - inflight_bytes();
    return space > 0 ? static_cast<int>(space) : 0;
  }
  SimTime srtt_estimate() const { return has_rtt_sample ? srtt : base_rtt; }
};

// RFC 6298-style smoothing: gains 1/8 and 1/4, RTO = srtt + 4*rttvar
// clamped to >= min_rto. Free function so the update rule is unit-testable.
void update_rtt_estimate(Subflow& sf, SimTime sample, SimTime min_rto);

// Server-side endpoint: per-connection reorder buffer plus per-subflow
// cumulative acks; one ack per received segment, duplicates discarded
// idempotently.
class MptcpReceiver {
 public:
  struct AckOut {
    uint64_t ssn_ack = 0;
    uint64_t data_ack = 0;
    uint64_t new_unique_bytes = 0;
  };

  AckOut on_segment(const SegmentInfo& seg);
  void forget_subflow(int subflow_id);

  uint64_t data_ack() const { return dsn_received_.prefix_end(); }
  uint64_t unique_bytes() const { return dsn_received_.total(); }

 private:
  IntervalSet dsn_received_;
  std::map<int, IntervalSet> ssn_received_;
};

// One MPTCP connection, both endpoints: greedy (iPerf-like) sender on the
// OBU side, reordering receiver on the server side, wired to the shared
// radio. Handshakes are abstracted to a one-RTT activation delay.
class MptcpEngine {
 public:
  struct Hooks {
    std::function<void(SimTime, std::string_view event, int subflow_id,
                       const std::string& detail)> on_event;
    // Receiver side: first-time bytes attributed to the carrying subflow.
    std::function<void(SimTime, int subflow_id, uint64_t bytes)> on_unique_bytes;
    // Receiver side: in-order prefix advanced.
    std::function<void(SimTime, uint64_t data_ack)> on_progress;
    std::function<void(SimTime, int subflow_id, SimTime srtt)> on_rtt_sample;
    std::function<void(SimTime, const std::vector<SubflowCandidate>&, int needed_bytes,
                       std::optional<int> chosen)> on_decision;
  };

  MptcpEngine(Simulator& sim, RadioMedium& medium, Scheduler& scheduler,
              EngineParams params, CongestionMode mode);

  // Creates the main subflow; data starts flowing one RTT later.
  void open(LinkId initial_link);
  int add_subflow(LinkId link);
  // Re-queues every not-fully-data-acked mapping for the remaining
  // subflows; returns the reinjected byte count. Removing the last subflow
  // stalls (not an error) until a subflow is added.
  uint64_t remove_subflow(int subflow_id);

  // Pulls from the scheduler until every window is full; reinjection queue
  // drains before new application data.
  void try_send();

  // Ack-path entry points, normally invoked via the medium's deliver
  // handler; public so loss recovery is testable in isolation.
  void on_ack(const AckInfo& ack, SimTime recv_time);
  void on_rto(int subflow_id);

  bool is_open() const { return opened_; }
  std::vector<int> live_subflow_ids() const;
  const Subflow* subflow(int id) const;
  int subflow_count() const { return static_cast<int>(subflows_.size()); }
  uint64_t next_dsn() const { return next_dsn_; }
  uint64_t data_acked() const { return data_acked_; }
  uint64_t reinjection_backlog_bytes() const;
  uint64_t total_retransmits() const { return retransmit_count_; }

  const MptcpReceiver& receiver() const { return receiver_; }
  const EngineParams& params() const { return params_; }

  Hooks hooks;

 private:
  struct ReinjectChunk {
    uint64_t dsn_start = 0;
    int length = 0;
  };

  int create_subflow(LinkId link, SubflowRole role);
  void activate(int subflow_id);
  void on_frame(SimTime t, const Frame& frame);
  void on_segment_at_server(SimTime t, const Frame& frame);
  void send_segment(Subflow& sf, const SegmentMapping& m, bool is_retransmit);
  void retransmit_front(Subflow& sf);
  void rearm_rto(Subflow& sf);
  std::vector<SubflowCandidate> candidates() const;
  std::vector<PathState> coupling_snapshot(const std::vector<int>& ids) const;
  void emit(std::string_view event, int subflow_id, const std::string& detail);

  Simulator& sim_;
  RadioMedium& medium_;
  Scheduler& scheduler_;
  EngineParams params_;
  CongestionMode mode_;

  bool opened_ = false;
  uint64_t next_dsn_ = 0;    // app source is backlogged: bytes exist on demand
  uint64_t data_acked_ = 0;  // sender's view of the connection-level ack
  int next_subflow_id_ = 1;
  std::map<int, Subflow> subflows_;
  std::deque<ReinjectChunk> reinject_queue_;

  MptcpReceiver receiver_;
  uint64_t last_progress_prefix_ = 0;
  uint64_t retransmit_count_ = 0;
  bool in_try_send_ = false;
};

}  // namespace mpsim
