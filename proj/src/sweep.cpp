#include "pixelguard/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

namespace pixelguard {

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(step > 0.0) || !(hi >= lo))
    throw std::invalid_argument("grid needs finite lo <= hi and step > 0");
  std::vector<double> out;
  for (std::int64_t i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + 1e-9 * step) break;
    out.push_back(std::min(v, hi));
    if (out.size() > 10'000'000) throw std::invalid_argument("grid has too many points");
  }
  return out;
}

SweepRow sweep_row(const SystemParams& base, double distance_km, double acquisition_time_s, double epsilon,
                   const SolverOptions& solver) {
  SystemParams params = base;
  params.distance_km = distance_km;
  params.validate();
  if (!(acquisition_time_s > 0.0)) throw std::invalid_argument("acquisition time must be > 0");

  SweepRow row;
  row.distance_km = distance_km;
  row.acquisition_time_s = acquisition_time_s;
  const double n = std::round(params.pulse_rate_hz * acquisition_time_s);
  if (!(n >= 1.0 && n < 9.2e18)) throw std::invalid_argument("rate * AT must give 1 <= N < 2^63 pulses");
  row.n_pulses = static_cast<std::int64_t>(n);

  const double p_b = honest_pixel_prob(params);
  const AttackStrategy honest{0.0, p_b, {FakedState{1.0, 0.0, 0.0}}};
  const DetectionStats st = expected_stats(honest, 0.0, params.alpha);
  row.p_s1_expected = st.p_s1;
  row.p_s2_expected = st.p_s2;
  row.p_c_expected = st.p_c;

  ClickCounts counts{row.n_pulses, std::llround(st.p_s1 * n), std::llround(st.p_s2 * n),
                     std::llround(st.p_c * n)};
  counts.n_c = std::min({counts.n_c, counts.n_s1, counts.n_s2});
  const FiniteKeyParams fk{row.n_pulses, epsilon};
  const FiniteKeyCorner corner = finite_key_corner(counts, fk);
  row.p_c_upper = corner.p_c_upper;
  row.p_s_lower = std::min(corner.p_s1_lower, corner.p_s2_lower);

  if (counts.n_s1 + counts.n_s2 == 0) {
    row.i_e_upper = 1.0;
    row.status = "no-detections";
    return row;
  }
  try {
    FiniteKeyOptions opt;
    opt.solver = solver;
    opt.symmetric = params.alpha == 0.0;
    const double p_e = compute_p_e(params);
    const EveInfoBound b =
        finite_key_bound(counts, fk, p_e, params.alpha, default_imbalance_threshold(counts, params.alpha), opt);
    row.i_e_upper = b.value;
  } catch (const SecurityAbort& e) {
    row.i_e_upper = 1.0;
    row.status = e.reason_name();
  }
  return row;
}

std::vector<SweepRow> sweep_distance(const SystemParams& params, const DistanceSweep& sweep) {
  params.validate();
  if (!(sweep.d_min >= 0.0 && sweep.d_min < sweep.d_max)) throw std::invalid_argument("need 0 <= d_min < d_max");
  if (!(sweep.step > 0.0)) throw std::invalid_argument("step must be > 0");
  if (sweep.acquisition_times_s.empty()) throw std::invalid_argument("no acquisition times");
  for (double at : sweep.acquisition_times_s)
    if (!(at > 0.0) || !std::isfinite(at)) throw std::invalid_argument("acquisition times must be > 0");
  FiniteKeyParams{1, sweep.epsilon}.validate();

  const std::vector<double> distances = linear_grid(sweep.d_min, sweep.d_max, sweep.step);
  const std::size_t total = distances.size() * sweep.acquisition_times_s.size();
  std::vector<SweepRow> rows(total);
  auto compute = [&](std::size_t i) {
    const double at = sweep.acquisition_times_s[i / distances.size()];
    const double d = distances[i % distances.size()];
    rows[i] = sweep_row(params, d, at, sweep.epsilon, sweep.solver);
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(sweep.workers, static_cast<unsigned>(total)));
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) compute(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < total && !failed;) {
        try {
          compute(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

std::vector<RatioRow> sweep_ratio(double p_e, double r_min, double r_max, double step) {
  if (!(p_e > 0.0 && p_e < 1.0)) throw std::invalid_argument("p_E must be in (0,1)");
  if (!(r_min >= 1.0)) throw std::invalid_argument("r_min must be >= 1");
  if (!(r_max >= r_min)) throw std::invalid_argument("r_max must be >= r_min");
  const double root_e = std::sqrt(p_e);
  const double slope = root_e / (1.0 - root_e);
  std::vector<RatioRow> out;
  for (double r : linear_grid(r_min, r_max, step))
    out.push_back({r, std::clamp(slope * (std::sqrt(r) - 1.0), 0.0, 1.0)});
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string distance_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "distance_km,acquisition_time_s,n_pulses,p_s1_expected,p_s2_expected,p_c_expected,p_c_upper,p_s_lower,"
      "i_e_upper\n";
  for (const auto& r : rows) {
    out += format_number(r.distance_km) + ',' + format_number(r.acquisition_time_s) + ',' +
           std::to_string(r.n_pulses) + ',' + format_number(r.p_s1_expected) + ',' +
           format_number(r.p_s2_expected) + ',' + format_number(r.p_c_expected) + ',' +
           format_number(r.p_c_upper) + ',' + format_number(r.p_s_lower) + ',' + format_number(r.i_e_upper) +
           '\n';
  }
  return out;
}

std::string ratio_csv(const std::vector<RatioRow>& rows) {
  std::string out = "r,i_e_max\n";
  for (const auto& r : rows) out += format_number(r.r) + ',' + format_number(r.i_e_max) + '\n';
  return out;
}

}  // namespace pixelguard
