#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "mpsim/sim.hpp"

namespace mpsim {

using LinkId = int;

enum class Direction { Uplink, Downlink };

// Payload descriptors carried by frames. The medium itself never inspects
// them; they are routed to the transport endpoints on delivery.
struct SegmentInfo {
  int subflow_id = 0;
  uint64_t dsn_start = 0;
  uint64_t ssn_start = 0;
  int length = 0;
  bool retransmitted = false;
};

struct AckInfo {
  int subflow_id = 0;
  uint64_t ssn_ack = 0;   // cumulative subflow-level ack
  uint64_t data_ack = 0;  // cumulative connection-level ack
};

struct Frame {
  LinkId link_id = -1;
  Direction direction = Direction::Uplink;
  int payload_bytes = 0;
  std::variant<std::monostate, SegmentInfo, AckInfo> body;
};

struct MediumConfig {
  double phy_rate_bps = 9e6;
  int frame_overhead_bytes = 82;     // MAC + IP + GRE + transport headers
  double background_occupancy = 0;   // airtime fraction taken by foreign stations
  SimTime wired_delay = SimTime::from_ms(5);  // one-way RSU <-> server
  int queue_capacity = 100;          // frames per (link, direction)

  void validate() const;
};

struct LinkDownError : SimError {
  using SimError::SimError;
};

// The single shared half-duplex radio. Every logical OBU<->RSU link (the
// GRE-tunnel abstraction) contends for the one channel in both directions;
// arbitration is per-frame round-robin over nonempty (link, direction)
// queues. A delivered frame additionally crosses the wired RSU<->server
// segment, so its latency after the airtime slot is
// prop_delay + extra_delay + wired_delay.
class RadioMedium {
 public:
  RadioMedium(Simulator& sim, MediumConfig cfg);

  LinkId attach_link(int rsu_id, SimTime prop_delay = SimTime::from_ms(2),
                     SimTime extra_delay = {});

  // Takes the link down. Queued and in-flight frames are dropped and
  // returned so the transport can account for reinjection.
  std::vector<Frame> detach_link(LinkId id);

  // False means drop-tail loss (queue full). Sending on a Down link throws
  // LinkDownError; unknown links throw SimError.
  bool send_frame(LinkId id, Frame frame);

  void set_deliver_handler(std::function<void(SimTime, const Frame&)> h) {
    deliver_ = std::move(h);
  }

  bool link_up(LinkId id) const;
  int rsu_of(LinkId id) const;
  std::optional<LinkId> up_link_for_rsu(int rsu_id) const;
  int up_link_count() const;
  SimTime post_airtime_latency(LinkId id) const;  // prop + extra + wired
  SimTime airtime_for_payload(int payload_bytes) const;

  // Channel accounting for metrics and property tests.
  double busy_airtime_seconds() const { return busy_airtime_s_; }
  uint64_t delivered_payload_total() const { return delivered_payload_total_; }
  uint64_t delivered_payload_bytes(LinkId id) const;

  const MediumConfig& config() const { return cfg_; }

 private:
  struct LinkState {
    int rsu_id = 0;
    bool up = false;
    SimTime prop_delay;
    SimTime extra_delay;
    std::deque<Frame> queue[2];  // indexed by Direction
    std::set<uint64_t> pending_deliveries;
    uint64_t delivered_payload = 0;
  };

  LinkState& must_get(LinkId id);
  const LinkState& must_get(LinkId id) const;
  void maybe_start_tx();
  void on_tx_complete();

  Simulator& sim_;
  MediumConfig cfg_;
  std::map<LinkId, LinkState> links_;
  LinkId next_link_id_ = 1;

  bool busy_ = false;
  std::optional<Frame> tx_frame_;
  EventHandle tx_done_{};
  // round-robin cursor: last served (link, direction)
  std::optional<std::pair<LinkId, Direction>> cursor_;

  struct InFlight {
    LinkId link;
    Frame frame;
    EventHandle handle;
  };

  std::function<void(SimTime, const Frame&)> deliver_;
  double busy_airtime_s_ = 0;
  uint64_t delivered_payload_total_ = 0;
  std::map<uint64_t, InFlight> in_flight_;  // delivery tag -> propagating frame
  uint64_t next_delivery_tag_ = 1;
  int64_t last_tx_end_us_ = 0;  // half-duplex invariant check
};

}  // namespace mpsim
