#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>

#include "mgpusim/error.hpp"

namespace mgpusim {

/// Simulated time in integer picoseconds.
class SimTime {
 public:
  constexpr SimTime() = default;
  constexpr explicit SimTime(std::int64_t ps) : ps_(ps) {}

  static constexpr SimTime ps(std::int64_t v) { return SimTime(v); }
  static constexpr SimTime ns(std::int64_t v) { return SimTime(v * 1000); }
  static constexpr SimTime us(std::int64_t v) { return SimTime(v * 1000000); }
  static constexpr SimTime max() { return SimTime(std::numeric_limits<std::int64_t>::max()); }

  constexpr std::int64_t count() const { return ps_; }
  constexpr double seconds() const { return static_cast<double>(ps_) * 1e-12; }

  constexpr SimTime& operator+=(SimTime o) {
    ps_ += o.ps_;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime(a.ps_ + b.ps_); }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime(a.ps_ - b.ps_); }
  friend constexpr auto operator<=>(SimTime, SimTime) = default;

  friend std::ostream& operator<<(std::ostream& os, SimTime t) { return os << t.ps_ << "ps"; }

 private:
  std::int64_t ps_ = 0;
};

constexpr SimTime max(SimTime a, SimTime b) { return a < b ? b : a; }

/// Time to push `bytes` through a channel of `bytes_per_sec`, rounded up to the
/// next picosecond so a transfer never finishes early.
inline SimTime serialization_time(std::uint64_t bytes, double bytes_per_sec) {
  if (!(bytes_per_sec > 0.0)) fail(ErrorCategory::Integrity, "bandwidth must be positive");
  // bytes * 1e12 / bw, computed in integer arithmetic when the rate is integral.
  const auto bw = static_cast<std::uint64_t>(bytes_per_sec);
  if (static_cast<double>(bw) == bytes_per_sec) {
    const unsigned __int128 num = static_cast<unsigned __int128>(bytes) * 1000000000000ULL;
    const unsigned __int128 q = (num + bw - 1) / bw;
    return SimTime(static_cast<std::int64_t>(q));
  }
  const long double exact = static_cast<long double>(bytes) * 1e12L / bytes_per_sec;
  auto q = static_cast<std::int64_t>(exact);
  if (static_cast<long double>(q) < exact) ++q;
  return SimTime(q);
}

}  // namespace mgpusim
