// Upper bounds on the fraction of raw-key bits an eavesdropper can know,
// given single and coincidence statistics of a two-pixel detector.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "pixelguard/finite_key.hpp"
#include "pixelguard/model.hpp"

namespace pixelguard {

enum class Regime { no_attack_evidence, partial_attack, full_attack, infeasible_stats };

/// "no-attack-evidence", "partial-attack", ...
std::string to_string(Regime regime);

/// What counts as Eve's knowledge.
enum class Objective {
  clicks,  // faked-state clicks over all clicks, both pixels summed (default)
  events,  // pulses with a faked-state click over pulses with any click
};

std::string to_string(Objective objective);

struct EveInfoBound {
  double value = 0.0;  // in [0,1]
  Regime regime = Regime::no_attack_evidence;
  std::optional<AttackStrategy> optimum;
  double residuals = 0.0;  // max |expected_stats(optimum) - input|

  // Diagnostics.
  double unclamped_value = 0.0;
  std::string active;  // which constraints are tight at the optimum
  std::string note;
};

/// Raised when the protocol must abort instead of producing a bound.
class SecurityAbort : public std::runtime_error {
 public:
  enum class Reason { pixel_imbalance, infeasible_stats };
  SecurityAbort(Reason reason, const std::string& what) : std::runtime_error(what), reason_(reason) {}
  [[nodiscard]] Reason reason() const { return reason_; }
  /// "pixel-imbalance" or "infeasible-stats".
  [[nodiscard]] std::string reason_name() const;

 private:
  Reason reason_;
};

/// p_c / p_s^2.  Throws std::invalid_argument for p_s <= 0.
double ratio_r(double p_s, double p_c);

/// Closed form for alpha = 0 and p_s1 = p_s2 = p_s.
EveInfoBound symmetric_bound(double p_e, double p_s, double p_c);

/// The unique single-strategy optimum behind symmetric_bound.  Throws
/// SecurityAbort(infeasible_stats) if it leaves the unit box.
AttackStrategy symmetric_optimum(double p_e, double p_s, double p_c);

struct SolverOptions {
  PixelOrder order = PixelOrder::second_dominant;
  Objective objective = Objective::clicks;
};

/// Maximum over p_a, p_B and two faked-state strategies reproducing `stats`.
/// Throws SecurityAbort on |p_s1 - p_s2| > imbalance_threshold or when no
/// attack reproduces the statistics.
EveInfoBound general_bound(double p_e, const DetectionStats& stats, double alpha,
                           double imbalance_threshold, const SolverOptions& options = {});

/// Options for the grid oracle.
struct OracleOptions {
  int strategies = 2;  // 1..3
  unsigned workers = 1;
  Objective objective = Objective::clicks;
};

/// Exhaustive grid search over the free attack parameters, solving the
/// remaining ones exactly.  Second-pixel-dominant ordering.
EveInfoBound brute_force_bound(double p_e, const DetectionStats& stats, double alpha,
                               double grid_resolution, const OracleOptions& options = {});

/// 2 alpha p_B + 5 sigma, sigma the honest-model standard deviation of
/// (n_s1 - n_s2) / N estimated from the observed frequencies.
double default_imbalance_threshold(const ClickCounts& counts, double alpha);

struct FiniteKeyOptions {
  SolverOptions solver;
  // Use the closed form (requires alpha = 0); the smaller of the two
  // single-pixel lower bounds stands in for p_s.
  bool symmetric = false;
};

/// Worst-case corner of the confidence region fed to the asymptotic bound.
struct FiniteKeyCorner {
  double p_s1_lower = 0.0;
  double p_s2_lower = 0.0;
  double p_c_upper = 0.0;
};

FiniteKeyCorner finite_key_corner(const ClickCounts& counts, const FiniteKeyParams& fk);

/// I_E,max evaluated at the corner.  fk.n_pulses must equal counts.n_pulses.
/// The three bounds fail with total probability at most 3 epsilon.
EveInfoBound finite_key_bound(const ClickCounts& counts, const FiniteKeyParams& fk, double p_e,
                              double alpha, double imbalance_threshold,
                              const FiniteKeyOptions& options = {});

}  // namespace pixelguard
