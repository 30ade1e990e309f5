#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpsim/time.hpp"

namespace mpsim {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Seeded PRNG with a fixed, documented algorithm (mt19937_64):
// identical seed => identical draw sequence.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }
  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(gen_);
  }

 private:
  std::mt19937_64 gen_;
};

struct EventHandle {
  uint64_t id = 0;
  bool valid() const { return id != 0; }
};

struct TraceEntry {
  SimTime at;
  uint64_t seq;
  std::string kind;
};

// Single-threaded discrete-event engine. Events are processed in strict
// lexicographic (fire_at, insertion seq) order; ties never depend on payload.
class Simulator {
 public:
  struct RunStats {
    uint64_t events_processed = 0;
  };

  SimTime now() const { return now_; }

  // Throws SimError when fire_at < now(): scheduling in the past is a
  // contract violation, not a recoverable condition.
  EventHandle schedule(SimTime fire_at, std::string kind, std::function<void()> action);

  // True iff the event had not fired (nor been cancelled) and is now inert.
  bool cancel(EventHandle h);

  // Processes every event with fire_at <= t_end, then advances the clock
  // to t_end.
  RunStats run_until(SimTime t_end);

  void set_tracing(bool on) { tracing_ = on; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  size_t pending_events() const { return queue_.size(); }

 private:
  struct Key {
    int64_t at_us;
    uint64_t seq;
    auto operator<=>(const Key&) const = default;
  };
  struct Pending {
    uint64_t id;
    std::string kind;
    std::function<void()> action;
  };

  SimTime now_;
  uint64_t next_seq_ = 0;
  uint64_t next_id_ = 1;
  std::map<Key, Pending> queue_;
  std::unordered_map<uint64_t, Key> by_id_;
  bool tracing_ = false;
  std::vector<TraceEntry> trace_;
};

}  // namespace mpsim
