#include "mpsim/mptcp.hpp"

#include <algorithm>
#include <cassert>

namespace mpsim {

void EngineParams::validate() const {
  if (mss <= 0) throw SimError("engine.mss must be > 0");
  if (min_rto <= SimTime{}) throw SimError("engine.min_rto must be > 0");
  if (dupack_threshold < 1) throw SimError("engine.dupack_threshold must be >= 1");
  if (initial_cwnd_segments < 2) throw SimError("engine.initial_cwnd_segments must be >= 2");
  if (initial_ssthresh_segments < 2) throw SimError("engine.initial_ssthresh_segments must be >= 2");
}

void update_rtt_estimate(Subflow& sf, SimTime sample, SimTime min_rto) {
  if (!sf.has_rtt_sample) {
    sf.srtt = sample;
    sf.rttvar = SimTime::from_us(sample.us() / 2);
    sf.has_rtt_sample = true;
  } else {
    int64_t err = sf.srtt.us() - sample.us();
    if (err < 0) err = -err;
    sf.rttvar = SimTime::from_us((3 * sf.rttvar.us() + err) / 4);
    sf.srtt = SimTime::from_us((7 * sf.srtt.us() + sample.us()) / 8);
  }
  SimTime rto = sf.srtt + sf.rttvar * 4;
  sf.rto = std::max(rto, min_rto);
}

MptcpReceiver::AckOut MptcpReceiver::on_segment(const SegmentInfo& seg) {
  AckOut out;
  auto& ssn = ssn_received_[seg.subflow_id];
  ssn.insert(seg.ssn_start, seg.ssn_start + seg.length);
  out.new_unique_bytes = dsn_received_.insert(seg.dsn_start, seg.dsn_start + seg.length);
  out.ssn_ack = ssn.prefix_end();
  out.data_ack = dsn_received_.prefix_end();
  return out;
}

void MptcpReceiver::forget_subflow(int subflow_id) { ssn_received_.erase(subflow_id); }

MptcpEngine::MptcpEngine(Simulator& sim, RadioMedium& medium, Scheduler& scheduler,
                         EngineParams params, CongestionMode mode)
    : sim_(sim), medium_(medium), scheduler_(scheduler), params_(params), mode_(mode) {
  params_.validate();
  medium_.set_deliver_handler(
      [this](SimTime t, const Frame& f) { on_frame(t, f); });
}

void MptcpEngine::emit(std::string_view event, int subflow_id, const std::string& detail) {
  if (hooks.on_event) hooks.on_event(sim_.now(), event, subflow_id, detail);
}

int MptcpEngine::create_subflow(LinkId link, SubflowRole role) {
  if (!medium_.link_up(link)) {
    throw SimError("cannot create subflow: link " + std::to_string(link) + " is not up");
  }
  for (const auto& [id, sf] : subflows_) {
    if (sf.link == link) {
      throw SimError("subflow already exists on link " + std::to_string(link));
    }
  }
  int id = next_subflow_id_++;
  Subflow sf;
  sf.id = id;
  sf.link = link;
  sf.rsu_id = medium_.rsu_of(link);
  sf.role = role;
  sf.cwnd = static_cast<double>(params_.initial_cwnd_segments) * params_.mss;
  sf.ssthresh = static_cast<double>(params_.initial_ssthresh_segments) * params_.mss;
  sf.base_rtt = medium_.post_airtime_latency(link) * 2;
  sf.rto = params_.min_rto;
  auto [it, ok] = subflows_.emplace(id, std::move(sf));
  (void)ok;
  // MP_CAPABLE / MP_JOIN abstracted as one RTT before the subflow carries data.
  it->second.activation_timer =
      sim_.schedule(sim_.now() + it->second.base_rtt, "subflow_activate",
                    [this, id] { activate(id); });
  emit("subflow_add", id, "rsu=" + std::to_string(it->second.rsu_id));
  return id;
}

void MptcpEngine::open(LinkId initial_link) {
  if (opened_) throw SimError("connection already open");
  create_subflow(initial_link, SubflowRole::Main);
  opened_ = true;
}

int MptcpEngine::add_subflow(LinkId link) {
  if (!opened_) throw SimError("add_subflow before open");
  return create_subflow(link, SubflowRole::Joined);
}

void MptcpEngine::activate(int subflow_id) {
  auto it = subflows_.find(subflow_id);
  if (it == subflows_.end()) return;
  it->second.active = true;
  try_send();
}

uint64_t MptcpEngine::remove_subflow(int subflow_id) {
  auto it = subflows_.find(subflow_id);
  if (it == subflows_.end()) throw SimError("remove of unknown subflow " + std::to_string(subflow_id));
  Subflow& sf = it->second;
  sim_.cancel(sf.rto_timer);
  sim_.cancel(sf.activation_timer);

  uint64_t reinjected = 0;
  for (const SegmentMapping& m : sf.mappings) {
    uint64_t dsn_end = m.dsn_start + static_cast<uint64_t>(m.length);
    if (dsn_end <= data_acked_) continue;
    uint64_t start = std::max(m.dsn_start, data_acked_);
    int len = static_cast<int>(dsn_end - start);
    reinject_queue_.push_back(ReinjectChunk{start, len});
    reinjected += static_cast<uint64_t>(len);
  }
  receiver_.forget_subflow(subflow_id);
  subflows_.erase(it);
  emit("subflow_remove", subflow_id, "reinjected=" + std::to_string(reinjected));
  if (reinjected > 0) emit("reinjection", subflow_id, "bytes=" + std::to_string(reinjected));
  try_send();
  return reinjected;
}

std::vector<SubflowCandidate> MptcpEngine::candidates() const {
  std::vector<SubflowCandidate> out;
  out.reserve(subflows_.size());
  for (const auto& [id, sf] : subflows_) {
    if (!sf.active) continue;
    out.push_back(SubflowCandidate{id, sf.srtt_estimate(), sf.cwnd_space()});
  }
  return out;
}

std::vector<PathState> MptcpEngine::coupling_snapshot(const std::vector<int>& ids) const {
  std::vector<PathState> out;
  out.reserve(ids.size());
  for (int id : ids) {
    const Subflow& sf = subflows_.at(id);
    out.push_back(PathState{sf.cwnd, sf.srtt_estimate().seconds()});
  }
  return out;
}

void MptcpEngine::send_segment(Subflow& sf, const SegmentMapping& m, bool is_retransmit) {
  Frame frame;
  frame.direction = Direction::Uplink;
  frame.payload_bytes = m.length;
  frame.body = SegmentInfo{sf.id, m.dsn_start, m.ssn_start, m.length, is_retransmit};
  // False return is a drop-tail loss: the segment stays charged against the
  // window and is recovered by dup-acks or RTO like any other loss.
  (void)medium_.send_frame(sf.link, std::move(frame));
  if (!sf.rto_timer.valid()) rearm_rto(sf);
}

void MptcpEngine::try_send() {
  if (in_try_send_) return;
  in_try_send_ = true;
  while (true) {
    // Reinjected data precedes new data; skip chunks the receiver already has.
    while (!reinject_queue_.empty()) {
      ReinjectChunk& c = reinject_queue_.front();
      uint64_t end = c.dsn_start + static_cast<uint64_t>(c.length);
      if (end <= data_acked_) {
        reinject_queue_.pop_front();
        continue;
      }
      if (c.dsn_start < data_acked_) {
        c.length = static_cast<int>(end - data_acked_);
        c.dsn_start = data_acked_;
      }
      break;
    }
    bool reinject = !reinject_queue_.empty();
    int needed = reinject ? std::min(reinject_queue_.front().length, params_.mss)
                          : params_.mss;

    auto cands = candidates();
    auto chosen = scheduler_.select(cands, needed);
    if (hooks.on_decision) hooks.on_decision(sim_.now(), cands, needed, chosen);
    if (!chosen) break;

    Subflow& sf = subflows_.at(*chosen);
    assert(sf.cwnd_space() >= needed);

    SegmentMapping m;
    if (reinject) {
      ReinjectChunk c = reinject_queue_.front();
      reinject_queue_.pop_front();
      m.dsn_start = c.dsn_start;
      m.length = c.length;
    } else {
      m.dsn_start = next_dsn_;
      m.length = params_.mss;
      next_dsn_ += static_cast<uint64_t>(m.length);
    }
    m.ssn_start = sf.next_ssn;
    m.send_time = sim_.now();
    sf.next_ssn += static_cast<uint64_t>(m.length);
    sf.mappings.push_back(m);
    send_segment(sf, m, false);
  }
  in_try_send_ = false;
}

void MptcpEngine::on_frame(SimTime t, const Frame& frame) {
  if (std::holds_alternative<SegmentInfo>(frame.body)) {
    on_segment_at_server(t, frame);
  } else if (std::holds_alternative<AckInfo>(frame.body)) {
    on_ack(std::get<AckInfo>(frame.body), t);
  }
}

void MptcpEngine::on_segment_at_server(SimTime t, const Frame& frame) {
  const auto& seg = std::get<SegmentInfo>(frame.body);
  MptcpReceiver::AckOut out = receiver_.on_segment(seg);
  if (out.new_unique_bytes > 0 && hooks.on_unique_bytes) {
    hooks.on_unique_bytes(t, seg.subflow_id, out.new_unique_bytes);
  }
  if (out.data_ack > last_progress_prefix_) {
    last_progress_prefix_ = out.data_ack;
    if (hooks.on_progress) hooks.on_progress(t, out.data_ack);
  }
  // One cumulative ack per segment, no delayed acks; ack frames carry no
  // payload but still cost airtime on the downlink.
  if (medium_.link_up(frame.link_id)) {
    Frame ack;
    ack.direction = Direction::Downlink;
    ack.payload_bytes = 0;
    ack.body = AckInfo{seg.subflow_id, out.ssn_ack, out.data_ack};
    (void)medium_.send_frame(frame.link_id, std::move(ack));
  }
}

void MptcpEngine::on_ack(const AckInfo& ack, SimTime recv_time) {
  auto it = subflows_.find(ack.subflow_id);
  if (it == subflows_.end()) return;  // stale ack for a removed subflow
  Subflow& sf = it->second;

  data_acked_ = std::max(data_acked_, ack.data_ack);

  if (ack.ssn_ack > sf.acked_ssn) {
    int bytes_acked = static_cast<int>(ack.ssn_ack - sf.acked_ssn);
    sf.acked_ssn = ack.ssn_ack;
    sf.dup_acks = 0;

    std::optional<SimTime> sample;
    while (!sf.mappings.empty()) {
      const SegmentMapping& m = sf.mappings.front();
      if (m.ssn_start + static_cast<uint64_t>(m.length) > sf.acked_ssn) break;
      if (!m.retransmitted && !sample) sample = recv_time - m.send_time;  // Karn
      sf.mappings.pop_front();
    }
    if (sample) {
      update_rtt_estimate(sf, *sample, params_.min_rto);
      if (hooks.on_rtt_sample) hooks.on_rtt_sample(recv_time, sf.id, sf.srtt);
    }

    if (sf.in_recovery) {
      if (sf.acked_ssn >= sf.recover_ssn) {
        sf.in_recovery = false;
      } else if (!sf.mappings.empty()) {
        retransmit_front(sf);  // NewReno partial ack
      }
    } else {
      auto ids = live_subflow_ids();
      size_t self = 0;
      std::vector<int> active_ids;
      for (int id : ids) {
        if (!subflows_.at(id).active) continue;
        if (id == sf.id) self = active_ids.size();
        active_ids.push_back(id);
      }
      sf.cwnd = increase_on_ack(sf.cwnd, sf.ssthresh, bytes_acked, params_.mss,
                                coupling_snapshot(active_ids), self, mode_);
    }
    rearm_rto(sf);
    try_send();
    return;
  }

  if (ack.ssn_ack == sf.acked_ssn && sf.inflight_bytes() > 0 && !sf.in_recovery) {
    if (++sf.dup_acks >= params_.dupack_threshold) {
      auto [cwnd, ssthresh] = decrease_on_loss(sf.cwnd, params_.mss, LossCause::FastRetransmit);
      sf.cwnd = cwnd;
      sf.ssthresh = ssthresh;
      sf.in_recovery = true;
      sf.recover_ssn = sf.next_ssn;
      sf.dup_acks = 0;
      if (!sf.mappings.empty()) retransmit_front(sf);
      rearm_rto(sf);
    }
  }
}

void MptcpEngine::retransmit_front(Subflow& sf) {
  SegmentMapping& m = sf.mappings.front();
  m.retransmitted = true;
  m.send_time = sim_.now();
  ++retransmit_count_;
  emit("retransmit", sf.id, "ssn=" + std::to_string(m.ssn_start));
  send_segment(sf, m, true);
}

void MptcpEngine::rearm_rto(Subflow& sf) {
  sim_.cancel(sf.rto_timer);
  sf.rto_timer = EventHandle{};
  if (sf.inflight_bytes() <= 0) {
    // Quiescent subflow: restore the base timeout for the next burst.
    sf.rto = std::max(sf.srtt + sf.rttvar * 4, params_.min_rto);
    return;
  }
  int id = sf.id;
  sf.rto_timer = sim_.schedule(sim_.now() + sf.rto, "rto", [this, id] { on_rto(id); });
}

void MptcpEngine::on_rto(int subflow_id) {
  auto it = subflows_.find(subflow_id);
  if (it == subflows_.end()) return;
  Subflow& sf = it->second;
  sf.rto_timer = EventHandle{};
  if (sf.inflight_bytes() <= 0) return;

  auto [unused_cwnd, ssthresh] = decrease_on_loss(sf.cwnd, params_.mss, LossCause::Timeout);
  (void)unused_cwnd;
  sf.ssthresh = ssthresh;
  sf.cwnd = 2.0 * params_.mss;
  sf.in_recovery = false;
  sf.dup_acks = 0;
  if (!sf.mappings.empty()) retransmit_front(sf);
  sf.rto = sf.rto * 2;  // exponential backoff until the next valid sample
  rearm_rto(sf);
  try_send();
}

std::vector<int> MptcpEngine::live_subflow_ids() const {
  std::vector<int> out;
  out.reserve(subflows_.size());
  for (const auto& [id, sf] : subflows_) out.push_back(id);
  return out;
}

const Subflow* MptcpEngine::subflow(int id) const {
  auto it = subflows_.find(id);
  return it == subflows_.end() ? nullptr : &it->second;
}

uint64_t MptcpEngine::reinjection_backlog_bytes() const {
  uint64_t total = 0;
  for (const auto& c : reinject_queue_) total += static_cast<uint64_t>(c.length);
  return total;
}

}  // namespace mpsim
