// Forward detection model for a two-pixel receiver under a detector-blinding
// attack.
//
// Eve intercepts a fraction p_a of the pulses.  An intercepted pulse yields a
// detectable faked state with probability p_E (non-empty pulse at Eve's
// measurement times basis match); Bob's pixel i then fires with the
// strategy-dependent probability p_di.  Pulses Eve lets through make pixel
// 1 (2) click with (1 + alpha) p_B ((1 - alpha) p_B), independently.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace pixelguard {

/// Physical scenario.  All optical quantities are per pulse.
struct SystemParams {
  double mu = 0.5;               // mean photon number
  double pulse_rate_hz = 1e10;   // Alice's emission rate
  double loss_db_per_km = 0.2;   // fibre attenuation
  double distance_km = 0.0;      // Alice-Bob channel length
  double t_eve = 1.0;            // Alice -> Eve's detectors transmission
  double q = 0.5;                // basis-match probability
  double eta = 0.5;              // per-pixel quantum efficiency
  double alpha = 0.0;            // pixel efficiency mismatch
  // When set, replaces the 1 - exp(-eta mu t / 4) honest click model.
  std::optional<double> p_b_override;

  /// Throws std::invalid_argument if any field is out of range.
  void validate() const;
};

/// Which pixel is assumed to fire more often on every faked state.
enum class PixelOrder {
  second_dominant,  // p_d2 >= p_d1 for all strategies (default)
  first_dominant,   // p_d1 >= p_d2 for all strategies
};

/// One faked-state strategy lambda, used with probability `weight`.
struct FakedState {
  double weight = 1.0;
  double p_d1 = 0.0;
  double p_d2 = 0.0;
};

struct AttackStrategy {
  double p_a = 0.0;  // attack probability
  double p_b = 0.0;  // honest average per-pixel click probability
  std::vector<FakedState> strategies;

  /// Range checks, unit total weight, and a common sign of p_d1 - p_d2.
  void validate() const;
  /// True if every strategy honours `order` (ties allowed).
  [[nodiscard]] bool honours(PixelOrder order) const;
};

/// Per-pulse click probabilities.  p_s* include coincidences.
struct DetectionStats {
  double p_s1 = 0.0;
  double p_s2 = 0.0;
  double p_c = 0.0;

  /// Probabilities in [0,1] and p_c <= min(p_s1, p_s2).
  [[nodiscard]] bool consistent() const;
};

/// Observed integer counts over n_pulses pulses.
struct ClickCounts {
  std::int64_t n_pulses = 0;
  std::int64_t n_s1 = 0;
  std::int64_t n_s2 = 0;
  std::int64_t n_c = 0;

  /// 0 <= n_c <= min(n_s1, n_s2) <= n_pulses.
  void validate() const;
};

/// 10^(-loss * distance / 10).
double channel_transmission(const SystemParams& params);

/// (1 - exp(-mu t_eve)) q.
double compute_p_e(const SystemParams& params);

double honest_pixel_prob(const SystemParams& params);

/// Expected single and coincidence probabilities produced by `strategy`.
/// Throws std::invalid_argument if the strategies mix orderings.
DetectionStats expected_stats(const AttackStrategy& strategy, double p_e, double alpha);

/// Fraction of pixel clicks that come from faked states (Eve-known clicks
/// over all clicks).
double eve_click_fraction(const AttackStrategy& strategy, double p_e, double alpha);

/// Same, counting pulses with at least one click instead of clicks.
double eve_event_fraction(const AttackStrategy& strategy, double p_e, double alpha);

}  // namespace pixelguard
