#include "mpsim/lia.hpp"

#include <algorithm>

namespace mpsim {

double lia_alpha(std::span<const PathState> paths) {
  if (paths.empty()) throw SimError("lia_alpha: empty coupling snapshot");
  double cwnd_total = 0;
  double best_rate2 = 0;  // max_i cwnd_i / srtt_i^2
  double sum_rate = 0;    // sum_i cwnd_i / srtt_i
  for (const PathState& p : paths) {
    if (p.srtt_s <= 0) throw SimError("lia_alpha: srtt must be > 0");
    if (p.cwnd_bytes <= 0) throw SimError("lia_alpha: cwnd must be > 0");
    cwnd_total += p.cwnd_bytes;
    best_rate2 = std::max(best_rate2, p.cwnd_bytes / (p.srtt_s * p.srtt_s));
    sum_rate += p.cwnd_bytes / p.srtt_s;
  }
  return cwnd_total * best_rate2 / (sum_rate * sum_rate);
}

double increase_on_ack(double cwnd, double ssthresh, int bytes_acked, int mss,
                       std::span<const PathState> paths, size_t self_index,
                       CongestionMode mode) {
  if (cwnd < ssthresh) return cwnd + bytes_acked;  // slow start

  double uncoupled = static_cast<double>(bytes_acked) * mss / cwnd;
  if (mode == CongestionMode::Uncoupled) return cwnd + uncoupled;

  if (self_index >= paths.size()) throw SimError("increase_on_ack: bad self index");
  double cwnd_total = 0;
  for (const PathState& p : paths) cwnd_total += p.cwnd_bytes;
  double coupled = lia_alpha(paths) * bytes_acked * mss / cwnd_total;
  return cwnd + std::min(coupled, uncoupled);
}

std::pair<double, double> decrease_on_loss(double cwnd, int mss, LossCause cause) {
  double floor = 2.0 * mss;
  double ssthresh = std::max(cwnd / 2.0, floor);
  double new_cwnd = (cause == LossCause::FastRetransmit) ? ssthresh : floor;
  return {new_cwnd, ssthresh};
}

}  // namespace mpsim
