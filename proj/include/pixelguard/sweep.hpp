// Distance / acquisition-time and ratio sweeps behind the CLI's CSV output.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pixelguard/eve_bound.hpp"

namespace pixelguard {

struct SweepRow {
  double distance_km = 0.0;
  double acquisition_time_s = 0.0;
  std::int64_t n_pulses = 0;
  double p_s1_expected = 0.0;
  double p_s2_expected = 0.0;
  double p_c_expected = 0.0;
  double p_c_upper = 0.0;
  double p_s_lower = 0.0;  // min of the two single-pixel lower bounds
  double i_e_upper = 1.0;
  std::string status = "ok";  // or the abort reason; not part of the CSV
};

struct DistanceSweep {
  std::vector<double> acquisition_times_s{1.0, 60.0, 3600.0, 86400.0};
  double d_min = 0.0;
  double d_max = 300.0;
  double step = 5.0;
  double epsilon = 1e-10;
  unsigned workers = 1;
  SolverOptions solver;
};

/// Honest expected statistics per (AT, distance), finite-key corner with
/// N = round(rate AT), and the resulting bound.  Counts are N p rounded to
/// integers.  An aborted bound is reported as i_e_upper = 1.  Rows come out
/// in (AT, distance) order.
std::vector<SweepRow> sweep_distance(const SystemParams& params, const DistanceSweep& sweep);

/// Bound for one row; exposed for cross-checks.
SweepRow sweep_row(const SystemParams& params, double distance_km, double acquisition_time_s,
                   double epsilon, const SolverOptions& solver);

/// Grid points d_min, d_min + step, ... <= d_max (with 1e-9 step slack).
std::vector<double> linear_grid(double lo, double hi, double step);

struct RatioRow {
  double r = 1.0;
  double i_e_max = 0.0;
};

/// sqrt(p_E)/(1 - sqrt(p_E)) (sqrt(r) - 1) clamped to [0,1].
std::vector<RatioRow> sweep_ratio(double p_e, double r_min, double r_max, double step);

/// "%.12g" fields, '\n' line endings, header first.
std::string distance_csv(const std::vector<SweepRow>& rows);
std::string ratio_csv(const std::vector<RatioRow>& rows);
std::string format_number(double v);

}  // namespace pixelguard
