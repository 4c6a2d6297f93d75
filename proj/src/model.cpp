#include "pixelguard/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pixelguard {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool is_probability(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// +1 if p_d1 > p_d2 somewhere, -1 if p_d1 < p_d2 somewhere, 0 if all equal,
// nullopt if both signs occur.
std::optional<int> common_sign(const std::vector<FakedState>& strategies) {
  bool pos = false;
  bool neg = false;
  for (const auto& s : strategies) {
    if (s.p_d1 > s.p_d2) pos = true;
    if (s.p_d1 < s.p_d2) neg = true;
  }
  if (pos && neg) return std::nullopt;
  return pos ? 1 : (neg ? -1 : 0);
}

}  // namespace

void SystemParams::validate() const {
  require(std::isfinite(mu) && mu > 0.0, "mu must be > 0");
  require(std::isfinite(pulse_rate_hz) && pulse_rate_hz > 0.0, "pulse_rate_hz must be > 0");
  require(std::isfinite(loss_db_per_km) && loss_db_per_km >= 0.0, "loss_db_per_km must be >= 0");
  require(std::isfinite(distance_km) && distance_km >= 0.0, "distance_km must be >= 0");
  require(std::isfinite(t_eve) && t_eve > 0.0 && t_eve <= 1.0, "t_eve must be in (0,1]");
  require(std::isfinite(q) && q > 0.0 && q <= 1.0, "q must be in (0,1]");
  require(std::isfinite(eta) && eta > 0.0 && eta <= 1.0, "eta must be in (0,1]");
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha < 1.0, "alpha must be in [0,1)");
  if (p_b_override) require(is_probability(*p_b_override), "p_b_override must be in [0,1]");
  const double t = channel_transmission(*this);
  require(t > 0.0 && t <= 1.0, "channel transmission underflows to 0");
}

void AttackStrategy::validate() const {
  require(is_probability(p_a), "p_a must be in [0,1]");
  require(is_probability(p_b), "p_b must be in [0,1]");
  require(!strategies.empty(), "at least one faked-state strategy is required");
  double total = 0.0;
  for (const auto& s : strategies) {
    require(is_probability(s.weight), "strategy weight must be in [0,1]");
    require(is_probability(s.p_d1) && is_probability(s.p_d2), "p_d1/p_d2 must be in [0,1]");
    total += s.weight;
  }
  require(std::abs(total - 1.0) <= 1e-12, "strategy weights must sum to 1");
  require(common_sign(strategies).has_value(),
          "sign(p_d1 - p_d2) must be the same for every strategy");
}

bool AttackStrategy::honours(PixelOrder order) const {
  return std::all_of(strategies.begin(), strategies.end(), [order](const FakedState& s) {
    return order == PixelOrder::second_dominant ? s.p_d2 >= s.p_d1 : s.p_d1 >= s.p_d2;
  });
}

bool DetectionStats::consistent() const {
  return is_probability(p_s1) && is_probability(p_s2) && is_probability(p_c) &&
         p_c <= std::min(p_s1, p_s2);
}

void ClickCounts::validate() const {
  require(n_pulses >= 1, "n_pulses must be >= 1");
  require(n_s1 >= 0 && n_s2 >= 0 && n_c >= 0, "counts must be >= 0");
  require(n_s1 <= n_pulses && n_s2 <= n_pulses, "single counts cannot exceed n_pulses");
  require(n_c <= std::min(n_s1, n_s2), "n_c must not exceed min(n_s1, n_s2)");
}

double channel_transmission(const SystemParams& params) {
  return std::pow(10.0, -params.loss_db_per_km * params.distance_km / 10.0);
}

double compute_p_e(const SystemParams& params) {
  return -std::expm1(-params.mu * params.t_eve) * params.q;
}

double honest_pixel_prob(const SystemParams& params) {
  if (params.p_b_override) return *params.p_b_override;
  // Half the light reaches each detector on average, split over two pixels.
  const double t = channel_transmission(params);
  return -std::expm1(-params.eta * params.mu * t / 4.0);
}

DetectionStats expected_stats(const AttackStrategy& strategy, double p_e, double alpha) {
  strategy.validate();
  require(is_probability(p_e), "p_E must be in [0,1]");
  require(std::isfinite(alpha) && std::abs(alpha) < 1.0, "alpha must be in (-1,1)");
  require(strategy.p_a == 1.0 || (1.0 + std::abs(alpha)) * strategy.p_b <= 1.0,
          "(1 + |alpha|) p_B must not exceed 1");

  double m1 = 0.0;
  double m2 = 0.0;
  double mc = 0.0;
  for (const auto& s : strategy.strategies) {
    m1 += s.weight * s.p_d1;
    m2 += s.weight * s.p_d2;
    mc += s.weight * s.p_d1 * s.p_d2;
  }
  const double attack = strategy.p_a * p_e;
  const double honest = 1.0 - strategy.p_a;
  const double pb = strategy.p_b;
  return DetectionStats{
      .p_s1 = attack * m1 + honest * (1.0 + alpha) * pb,
      .p_s2 = attack * m2 + honest * (1.0 - alpha) * pb,
      .p_c = attack * mc + honest * (1.0 - alpha * alpha) * pb * pb,
  };
}

double eve_click_fraction(const AttackStrategy& strategy, double p_e, double alpha) {
  const DetectionStats st = expected_stats(strategy, p_e, alpha);
  const double clicks = st.p_s1 + st.p_s2;
  if (clicks <= 0.0) return 0.0;
  double m = 0.0;
  for (const auto& s : strategy.strategies) m += s.weight * (s.p_d1 + s.p_d2);
  return std::clamp(strategy.p_a * p_e * m / clicks, 0.0, 1.0);
}

double eve_event_fraction(const AttackStrategy& strategy, double p_e, double alpha) {
  const DetectionStats st = expected_stats(strategy, p_e, alpha);
  const double events = st.p_s1 + st.p_s2 - st.p_c;
  if (events <= 0.0) return 0.0;
  double m = 0.0;
  for (const auto& s : strategy.strategies) m += s.weight * (s.p_d1 + s.p_d2 - s.p_d1 * s.p_d2);
  return std::clamp(strategy.p_a * p_e * m / events, 0.0, 1.0);
}

}  // namespace pixelguard
