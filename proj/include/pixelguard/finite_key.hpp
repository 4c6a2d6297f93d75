// Exact one-sided binomial confidence bounds built on the regularized
// incomplete beta function.
#pragma once

#include <cstdint>

namespace pixelguard {

struct FiniteKeyParams {
  std::int64_t n_pulses = 1;  // N
  double epsilon = 1e-10;     // per-bound failure probability

  void validate() const;
};

/// I_x(a,b).  a, b > 0, x in [0,1].
double reg_inc_beta(double a, double b, double x);

/// 1 - I_x(a,b), evaluated without cancellation in the upper tail.
double reg_inc_beta_complement(double a, double b, double x);

/// x with I_x(a,b) = p.  Relative accuracy is kept in both tails.
double inv_reg_inc_beta(double a, double b, double p);

/// x with 1 - I_x(a,b) = q.
double inv_reg_inc_beta_complement(double a, double b, double q);

/// Largest p_c compatible with the observed coincidence frequency at
/// confidence 1 - epsilon:  1 - I^{-1}_eps(N(1 - p_c), N p_c + 1).
double upper_bound_pc(double p_c, const FiniteKeyParams& fk);

/// Smallest p_s compatible with the observed click frequency:
/// I^{-1}_eps(N p_s, N(1 - p_s) + 1).
double lower_bound_ps(double p_s, const FiniteKeyParams& fk);

/// Count-based forms of the two bounds above (k successes out of N).
double upper_bound_count(std::int64_t k, const FiniteKeyParams& fk);
double lower_bound_count(std::int64_t k, const FiniteKeyParams& fk);

/// Rounds N p to an integer count, rejecting frequencies that are not
/// (within 1e-9 relative) a count over N.
std::int64_t count_from_frequency(double p, std::int64_t n_pulses);

}  // namespace pixelguard
