#pragma once

#include <span>
#include <utility>

#include "mpsim/sim.hpp"

namespace mpsim {

enum class LossCause { FastRetransmit, Timeout };
enum class CongestionMode { Lia, Uncoupled };

// One subflow's view in a coupling snapshot.
struct PathState {
  double cwnd_bytes = 0;
  double srtt_s = 0;
};

// RFC 6356 aggressiveness factor:
//   alpha = cwnd_total * max_i(cwnd_i / srtt_i^2) / (sum_i cwnd_i / srtt_i)^2
// Reduces to 1 for a single path and to 1/n for n identical paths.
double lia_alpha(std::span<const PathState> paths);

// Per-ACK window growth. Slow start below ssthresh; otherwise either the
// coupled increase capped by the uncoupled single-path increase (Lia) or
// plain per-subflow congestion avoidance (Uncoupled). Returns the new cwnd.
double increase_on_ack(double cwnd, double ssthresh, int bytes_acked, int mss,
                       std::span<const PathState> paths, size_t self_index,
                       CongestionMode mode);

// Multiplicative decrease, unchanged by the coupling:
//   ssthresh = max(cwnd/2, 2*MSS); cwnd = ssthresh on fast retransmit,
//   2*MSS on timeout. Returns {cwnd, ssthresh}.
std::pair<double, double> decrease_on_loss(double cwnd, int mss, LossCause cause);

}  // namespace mpsim
