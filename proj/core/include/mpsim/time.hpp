#pragma once

#include <compare>
#include <cstdint>

namespace mpsim {

// Virtual simulation time: integer microseconds since run start.
// Integer ticks keep event ordering and trace comparison exact.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_us(int64_t us) { return SimTime{us}; }
  static constexpr SimTime from_ms(int64_t ms) { return SimTime{ms * 1000}; }
  static constexpr SimTime from_seconds(double s) {
    return SimTime{static_cast<int64_t>(s * 1e6 + (s >= 0 ? 0.5 : -0.5))};
  }

  constexpr int64_t us() const { return us_; }
  constexpr double seconds() const { return static_cast<double>(us_) * 1e-6; }
  constexpr double millis() const { return static_cast<double>(us_) * 1e-3; }

  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.us_ + b.us_}; }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.us_ - b.us_}; }
  friend constexpr SimTime operator*(SimTime a, int64_t k) { return SimTime{a.us_ * k}; }
  SimTime& operator+=(SimTime o) { us_ += o.us_; return *this; }

  constexpr auto operator<=>(const SimTime&) const = default;

 private:
  explicit constexpr SimTime(int64_t us) : us_(us) {}
  int64_t us_ = 0;
};

}  // namespace mpsim
