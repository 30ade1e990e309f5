#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "mpsim/mptcp.hpp"

namespace mpsim {

// C-ITS awareness message from an RSU. Position and signal strength are
// carried for completeness; reachability decisions use beacon receipt only.
struct Beacon {
  int rsu_id = 0;
  SimTime sent_at;
  double pos_x = 0;
  double pos_y = 0;
  double signal_dbm = 0;
};

struct CmParams {
  SimTime beacon_period = SimTime::from_seconds(1.0);
  SimTime loss_timeout = SimTime::from_seconds(3.0);  // 3 missed beacons

  void validate() const {
    if (beacon_period <= SimTime{}) throw SimError("cm.beacon_period must be > 0");
    if (loss_timeout < beacon_period) {
      throw SimError("cm.loss_timeout must be >= cm.beacon_period");
    }
  }
};

// The Handover Connection Manager. MPTCP does not track connectivity
// changes itself, so the CM turns beacon receipt into path management:
// first beacon from an RSU attaches the logical link and creates a subflow
// (tunnel before subflow); a liveness timeout removes the subflow and
// detaches the link, letting the engine reinject unacked data.
class HandoverCm {
 public:
  struct LinkParams {
    SimTime prop_delay = SimTime::from_ms(2);
    SimTime extra_delay;
  };

  HandoverCm(Simulator& sim, RadioMedium& medium, MptcpEngine& engine, CmParams params);

  void set_link_params(int rsu_id, LinkParams p) { link_params_[rsu_id] = p; }
  void on_beacon(const Beacon& beacon);

  int live_rsu_count() const { return static_cast<int>(live_.size()); }
  bool rsu_live(int rsu_id) const { return live_.count(rsu_id) > 0; }
  std::optional<int> subflow_for_rsu(int rsu_id) const;

  std::function<void(SimTime, std::string_view event, int subflow_id,
                     const std::string& detail)> on_event;

 private:
  struct RsuEntry {
    LinkId link = -1;
    int subflow = 0;
    EventHandle timer;
  };

  void on_liveness_timeout(int rsu_id);
  void arm_timer(int rsu_id);
  void emit(std::string_view event, int subflow_id, const std::string& detail);

  Simulator& sim_;
  RadioMedium& medium_;
  MptcpEngine& engine_;
  CmParams params_;
  std::map<int, RsuEntry> live_;
  std::map<int, LinkParams> link_params_;
};

}  // namespace mpsim
