#pragma once

#include <cstdint>

#include "mgpusim/sim_time.hpp"

namespace mgpusim {

/// One DRAM bank: a FIFO server with a fixed access latency and a data
/// occupancy of ceil(bytes / bw). Row buffers and refresh are not modeled.
class DramBank {
 public:
  DramBank() = default;
  DramBank(std::uint64_t capacity_bytes, SimTime access_latency, double service_bw,
           bool latency_occupies_bank)
      : capacity_(capacity_bytes),
        latency_(access_latency),
        bw_(service_bw),
        latency_occupies_(latency_occupies_bank) {}

  /// Serves `bytes` arriving at `arrival`; returns the completion time.
  ///
  /// The bank is held for the data occupancy, or for latency + occupancy when
  /// the latency is configured as non-pipelined.
  SimTime service(std::uint64_t bytes, SimTime arrival) {
    const SimTime start = max(arrival, busy_until_);
    const SimTime occ = serialization_time(bytes, bw_);
    const SimTime done = start + latency_ + occ;
    busy_until_ = latency_occupies_ ? done : start + occ;
    ++accesses_;
    bytes_ += bytes;
    return done;
  }

  SimTime busy_until() const { return busy_until_; }
  std::uint64_t capacity_bytes() const { return capacity_; }
  std::uint64_t accesses() const { return accesses_; }
  std::uint64_t bytes() const { return bytes_; }

 private:
  std::uint64_t capacity_ = 0;
  SimTime latency_;
  double bw_ = 1.0;
  bool latency_occupies_ = false;
  SimTime busy_until_;
  std::uint64_t accesses_ = 0;
  std::uint64_t bytes_ = 0;
};

}  // namespace mgpusim
