// Seeded pulse-level simulation of attacked and honest sessions.
#pragma once

#include <array>
#include <cstdint>

#include "pixelguard/model.hpp"

namespace pixelguard {

struct SimOutcome {
  ClickCounts counts;
  std::int64_t n_eve_known = 0;   // clicks caused by faked states
  std::int64_t n_eve_events = 0;  // pulses with at least one faked-state click
  double true_eve_info = 0.0;     // n_eve_known / (n_s1 + n_s2)
  double true_eve_event_info = 0.0;  // n_eve_events / pulses with any click
  std::uint64_t seed = 0;
};

struct SimOptions {
  unsigned workers = 1;
  // Above this pulse count, sample per-chunk outcome tallies from the exact
  // multinomial law instead of drawing every pulse.
  std::int64_t fast_path_above = 100'000'000;
};

/// xoshiro256** seeded through splitmix64.  One independent stream per
/// (seed, chunk) pair, so results do not depend on how chunks are shared
/// out among threads.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;
  Xoshiro256(std::uint64_t seed, std::uint64_t stream);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();
  /// Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

SimOutcome simulate(const AttackStrategy& strategy, double p_e, double alpha, std::int64_t n_pulses,
                    std::uint64_t seed, const SimOptions& options = {});

/// Frequencies n_x / n_pulses.
DetectionStats empirical_stats(const ClickCounts& counts);

}  // namespace pixelguard
