#include "pixelguard/eve_bound.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace pixelguard {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

double max_residual(const AttackStrategy& s, double p_e, double alpha, const DetectionStats& st) {
  const DetectionStats e = expected_stats(s, p_e, alpha);
  return std::max({std::abs(e.p_s1 - st.p_s1), std::abs(e.p_s2 - st.p_s2), std::abs(e.p_c - st.p_c)});
}

void check_stats(const DetectionStats& st) {
  if (!in_unit(st.p_s1) || !in_unit(st.p_s2) || !in_unit(st.p_c))
    throw std::invalid_argument("detection probabilities must be in [0,1]");
  if (st.p_s1 + st.p_s2 <= 0.0) throw std::invalid_argument("no detections: nothing to bound");
}

// Two faked states in {x <= y} with means (m1, m2) and E[xy] = c, assuming
// 0 <= m1 <= m2 <= 1 and m1^2 / (1 - m2 + m1) <= c <= m1 (clamped otherwise).
//
// Two-point laws along a direction u with P = M - t u, Q = M + s u and
// weights s/(s+t), t/(s+t) have E[xy] = m1 m2 + s t u_x u_y.  Along (1,1)
// from (0, m2 - m1) to (1 - m2 + m1, 1) this reaches the largest c = m1;
// along (1, -(1 - m2)/m1) from the vertex (0,1) to the diagonal, the smallest.
// Shrinking either segment by k scales the covariance term by k^2.
std::vector<FakedState> two_point(double m1, double m2, double c) {
  m1 = std::clamp(m1, 0.0, 1.0);
  m2 = std::clamp(m2, m1, 1.0);
  const double base = m1 * m2;
  double ux = 1.0;
  double uy = 1.0;
  double t = m1;
  double s = 1.0 - m2;
  if (c < base && m1 > 0.0) {
    uy = -(1.0 - m2) / m1;
    t = m1;
    s = (m2 - m1) / (1.0 - uy);
  }
  const double spread = s * t * ux * uy;
  if (!(std::abs(spread) > 0.0) || s + t <= 0.0) return {FakedState{1.0, m1, m2}};
  const double k = std::sqrt(std::clamp((c - base) / spread, 0.0, 1.0));
  const double w_p = s / (s + t);
  auto point = [&](double step) {
    const double x = std::clamp(m1 + step * ux, 0.0, 1.0);
    const double y = std::clamp(m2 + step * uy, x, 1.0);
    return std::pair{x, y};
  };
  const auto [px, py] = point(-k * t);
  const auto [qx, qy] = point(k * s);
  if (w_p <= 0.0) return {FakedState{1.0, qx, qy}};
  if (w_p >= 1.0) return {FakedState{1.0, px, py}};
  return {FakedState{w_p, px, py}, FakedState{1.0 - w_p, qx, qy}};
}

// ---------------------------------------------------------------------------
// General solver.
//
// With h = (1 - p_a) p_B and A = p_a p_E the constraints read
//   A M1 = s1 - (1+alpha) h,  A M2 = s2 - (1-alpha) h,
//   A C  = c - (1-alpha^2) h^2 / (1 - p_a),
// where M1, M2, C are the strategy means of p_d1, p_d2, p_d1 p_d2.  With
// p_d1 <= p_d2 and two strategies, (M1, M2, C) is achievable exactly when
// 0 <= M1 <= M2 <= 1 and M1^2/(1 - M2 + M1) <= C <= M1.  Both objectives
// decrease in h at fixed p_a, so each p_a contributes its smallest feasible h.

struct Problem {
  double s1, s2, c, alpha, p_e;
  Objective objective;
  [[nodiscard]] double k() const { return 1.0 - alpha * alpha; }
  [[nodiscard]] double total() const { return s1 + s2; }

  [[nodiscard]] double value(double p_a, double h) const {
    const double clicks = total();
    if (objective == Objective::clicks) return (clicks - 2.0 * h) / clicks;
    const double honest_c = p_a < 1.0 ? k() * h * h / (1.0 - p_a) : 0.0;
    return (clicks - 2.0 * h - c + honest_c) / (clicks - c);
  }
};

// C <= M1, scaled by (1 - p_a).
double g_upper(const Problem& pr, double q, double h) {
  return pr.k() * h * h - q * (1.0 + pr.alpha) * h + q * (pr.s1 - pr.c);
}

// C >= M1^2 / (1 - M2 + M1), scaled by A^2 (1 - p_a).
double g_lower(const Problem& pr, double q, double a, double h) {
  const double x1 = pr.s1 - (1.0 + pr.alpha) * h;
  return (pr.c * q - pr.k() * h * h) * (a + pr.s1 - pr.s2 - 2.0 * pr.alpha * h) - q * x1 * x1;
}

// Magnitudes used as absolute tolerances for the sign tests above.
double g_upper_scale(const Problem& pr, double q, double h) {
  return pr.k() * h * h + q * (1.0 + pr.alpha) * h + q * (pr.s1 + pr.c);
}
double g_lower_scale(const Problem& pr, double q, double a, double h) {
  const double x1 = pr.s1 + (1.0 + pr.alpha) * h;
  return (pr.c * q + pr.k() * h * h) * (a + pr.s1 + pr.s2 + 2.0 * std::abs(pr.alpha) * h) + q * x1 * x1;
}

// Real roots of c2 x^2 + c1 x + c0 (any coefficient may vanish).
void quadratic_roots(double c2, double c1, double c0, std::vector<double>& out) {
  if (c2 == 0.0) {
    if (c1 != 0.0) out.push_back(-c0 / c1);
    return;
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  const double qq = -0.5 * (c1 + std::copysign(sq, c1));
  if (qq != 0.0) {
    out.push_back(qq / c2);
    out.push_back(c0 / qq);
  } else {
    out.push_back(0.0);
  }
}

// Bisection for a sign change of f on [u, v].
template <class F>
double bisect(F&& f, double u, double v) {
  double fu = f(u);
  for (int i = 0; i < 200 && v - u > 0.0; ++i) {
    const double m = 0.5 * (u + v);
    if (m <= u || m >= v) break;
    const double fm = f(m);
    if ((fm < 0.0) == (fu < 0.0)) {
      u = m;
      fu = fm;
    } else {
      v = m;
    }
  }
  return 0.5 * (u + v);
}

struct HSlice {
  double h = kInf;
  bool feasible = false;
};

// Smallest feasible h at fixed p_a in (0, 1).
HSlice min_h(const Problem& pr, double p_a) {
  const double q = 1.0 - p_a;
  const double a = p_a * pr.p_e;
  const double al = pr.alpha;
  double lo = std::max({0.0, (pr.s2 - a) / (1.0 - al), (pr.s1 - a) / (1.0 + al)});
  // (1 + |alpha|) p_B <= 1 keeps both honest click probabilities in [0,1].
  double hi = std::min({pr.s1 / (1.0 + al), pr.s2 / (1.0 - al), q / (1.0 + std::abs(al)), std::sqrt(pr.c * q / pr.k())});
  if (al > 0.0) lo = std::max(lo, (pr.s1 - pr.s2) / (2.0 * al));
  if (al < 0.0) hi = std::min(hi, (pr.s1 - pr.s2) / (2.0 * al));
  if (!(lo <= hi)) return {};

  std::vector<double> cuts{lo, hi};
  auto add_roots = [&](const std::vector<double>& rs) {
    for (double r : rs)
      if (r > lo && r < hi) cuts.push_back(r);
  };

  std::vector<double> roots;
  quadratic_roots(pr.k(), -q * (1.0 + al), q * (pr.s1 - pr.c), roots);
  add_roots(roots);

  // g_lower is cubic: d3 h^3 + d2 h^2 + d1 h + d0.
  const double b0 = a + pr.s1 - pr.s2;
  const double b1 = -2.0 * al;
  const double d3 = -pr.k() * b1;
  const double d2 = -pr.k() * b0 - q * (1.0 + al) * (1.0 + al);
  const double d1 = pr.c * q * b1 + 2.0 * q * pr.s1 * (1.0 + al);
  std::vector<double> crit;
  quadratic_roots(3.0 * d3, 2.0 * d2, d1, crit);
  std::vector<double> mono{lo, hi};
  for (double r : crit)
    if (r > lo && r < hi) mono.push_back(r);
  std::sort(mono.begin(), mono.end());
  auto gl = [&](double h) { return g_lower(pr, q, a, h); };
  for (std::size_t i = 0; i + 1 < mono.size(); ++i) {
    const double u = mono[i];
    const double v = mono[i + 1];
    if ((gl(u) < 0.0) != (gl(v) < 0.0)) cuts.push_back(bisect(gl, u, v));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto strictly_ok = [&](double h) { return g_upper(pr, q, h) >= 0.0 && g_lower(pr, q, a, h) >= 0.0; };
  auto nearly_ok = [&](double h) {
    return g_upper(pr, q, h) >= -1e-13 * g_upper_scale(pr, q, h) &&
           g_lower(pr, q, a, h) >= -1e-12 * g_lower_scale(pr, q, a, h);
  };
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (nearly_ok(cuts[i])) return {cuts[i], true};
    if (i + 1 < cuts.size() && strictly_ok(0.5 * (cuts[i] + cuts[i + 1]))) return {cuts[i], true};
  }
  return {};
}

// Face p_a = 1: h = 0 and the means are fixed.
bool full_attack_feasible(const Problem& pr) {
  const double m1 = pr.s1 / pr.p_e;
  const double m2 = pr.s2 / pr.p_e;
  const double cc = pr.c / pr.p_e;
  const double tol = 1e-12;
  if (m2 > 1.0 + tol || m1 > m2 * (1.0 + tol) + tol * 1e-3) return false;
  if (cc > m1 * (1.0 + tol)) return false;
  const double room = 1.0 - std::min(m2, 1.0) + std::min(m1, m2);
  return cc * room >= m1 * m1 * (1.0 - tol);
}

// Face p_a = 0: the honest model must explain the statistics by itself.
bool honest_feasible(const Problem& pr, double& p_b) {
  p_b = 0.5 * pr.total();
  if (p_b > 1.0) return false;
  const double tol = 1e-12;
  auto close = [&](double got, double want) {
    return std::abs(got - want) <= tol * std::max(std::abs(want), 1e-300) + 1e-300;
  };
  return close(pr.s1, (1.0 + pr.alpha) * p_b) && close(pr.s2, (1.0 - pr.alpha) * p_b) &&
         close(pr.c, pr.k() * p_b * p_b);
}

struct Candidate {
  double value = -kInf;
  double p_a = 0.0;
  double h = 0.0;
};

double evaluate(const Problem& pr, double p_a, double& h_out) {
  const HSlice sl = min_h(pr, p_a);
  if (!sl.feasible) return -kInf;
  h_out = sl.h;
  return pr.value(p_a, sl.h);
}

// Golden-section refinement of a local maximum bracketed by [u, v].
Candidate refine(const Problem& pr, double u, double v, Candidate best) {
  constexpr double kPhi = 0.6180339887498949;
  double x1 = v - kPhi * (v - u);
  double x2 = u + kPhi * (v - u);
  double h1 = 0.0;
  double h2 = 0.0;
  double f1 = evaluate(pr, x1, h1);
  double f2 = evaluate(pr, x2, h2);
  for (int i = 0; i < 200 && v - u > 1e-15 * std::max(1.0, v); ++i) {
    if (f1 >= f2) {
      v = x2;
      x2 = x1;
      f2 = f1;
      h2 = h1;
      x1 = v - kPhi * (v - u);
      f1 = evaluate(pr, x1, h1);
    } else {
      u = x1;
      x1 = x2;
      f1 = f2;
      h1 = h2;
      x2 = u + kPhi * (v - u);
      f2 = evaluate(pr, x2, h2);
    }
    if (f1 > best.value) best = {f1, x1, h1};
    if (f2 > best.value) best = {f2, x2, h2};
  }
  return best;
}

std::string active_constraints(const Problem& pr, double p_a, double h, const AttackStrategy& s) {
  std::vector<std::string> tight;
  const double tol = 1e-9;
  if (p_a >= 1.0) tight.emplace_back("p_a=1");
  if (p_a < 1.0 && std::abs(h / (1.0 - p_a) - 1.0) <= tol) tight.emplace_back("p_B=1");
  if (p_a < 1.0 && h <= tol * pr.total()) tight.emplace_back("p_B=0");
  const double a = p_a * pr.p_e;
  if (a > 0.0) {
    const double m1 = (pr.s1 - (1.0 + pr.alpha) * h) / a;
    const double m2 = (pr.s2 - (1.0 - pr.alpha) * h) / a;
    if (m1 <= tol) tight.emplace_back("mean_d1=0");
    if (std::abs(m2 - 1.0) <= tol) tight.emplace_back("mean_d2=1");
    if (std::abs(m2 - m1) <= tol) tight.emplace_back("d1=d2");
    if (p_a < 1.0) {
      const double q = 1.0 - p_a;
      if (std::abs(g_upper(pr, q, h)) <= tol * g_upper_scale(pr, q, h))
        tight.emplace_back("coincidence_max");
      if (std::abs(g_lower(pr, q, a, h)) <= tol * g_lower_scale(pr, q, a, h))
        tight.emplace_back("coincidence_min");
    }
  }
  if (s.strategies.size() == 1) tight.emplace_back("single_strategy");
  std::string out;
  for (const auto& t : tight) out += (out.empty() ? "" : ",") + t;
  return out;
}

AttackStrategy build_strategy(const Problem& pr, double p_a, double h) {
  AttackStrategy s;
  s.p_a = p_a;
  s.p_b = p_a < 1.0 ? std::clamp(h / (1.0 - p_a), 0.0, 1.0) : 0.0;
  const double a = p_a * pr.p_e;
  const double honest_c = p_a < 1.0 ? pr.k() * h * h / (1.0 - p_a) : 0.0;
  const double m1 = (pr.s1 - (1.0 + pr.alpha) * h) / a;
  const double m2 = (pr.s2 - (1.0 - pr.alpha) * h) / a;
  const double cc = (pr.c - honest_c) / a;
  s.strategies = two_point(m1, m2, cc);
  return s;
}

void swap_pixels(AttackStrategy& s) {
  for (auto& f : s.strategies) std::swap(f.p_d1, f.p_d2);
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::no_attack_evidence: return "no-attack-evidence";
    case Regime::partial_attack: return "partial-attack";
    case Regime::full_attack: return "full-attack";
    case Regime::infeasible_stats: return "infeasible-stats";
  }
  return "unknown";
}

std::string to_string(Objective objective) {
  return objective == Objective::clicks ? "clicks" : "events";
}

std::string SecurityAbort::reason_name() const {
  return reason_ == Reason::pixel_imbalance ? "pixel-imbalance" : "infeasible-stats";
}

double ratio_r(double p_s, double p_c) {
  if (!(p_s > 0.0) || !std::isfinite(p_s)) throw std::invalid_argument("ratio r needs p_s > 0");
  if (!std::isfinite(p_c) || p_c < 0.0) throw std::invalid_argument("ratio r needs p_c >= 0");
  return p_c / (p_s * p_s);
}

AttackStrategy symmetric_optimum(double p_e, double p_s, double p_c) {
  if (!(p_e > 0.0 && p_e < 1.0)) throw std::invalid_argument("p_E must be in (0,1)");
  if (!(p_s > 0.0 && p_s <= 1.0) || !in_unit(p_c)) throw std::invalid_argument("p_s in (0,1], p_c in [0,1]");
  const double root_c = std::sqrt(p_c);
  const double root_e = std::sqrt(p_e);
  AttackStrategy s;
  s.p_b = root_c;
  const double p_d = std::sqrt(p_c / p_e);
  s.p_a = (root_c - p_s) / (root_c * (1.0 - root_e));
  // r within rounding of 1 or 1/p_E puts p_a a few ulps outside [0,1].
  if (std::abs(s.p_a - std::clamp(s.p_a, 0.0, 1.0)) <= 1e-12) s.p_a = std::clamp(s.p_a, 0.0, 1.0);
  if (!in_unit(s.p_a) || !in_unit(p_d))
    throw SecurityAbort(SecurityAbort::Reason::infeasible_stats,
                        "symmetric optimum leaves the unit box (p_a=" + std::to_string(s.p_a) +
                            ", p_d=" + std::to_string(p_d) + ")");
  s.strategies = {FakedState{1.0, p_d, p_d}};
  return s;
}

EveInfoBound symmetric_bound(double p_e, double p_s, double p_c) {
  if (!(p_e > 0.0 && p_e < 1.0)) throw std::invalid_argument("p_E must be in (0,1)");
  if (!(p_s > 0.0 && p_s <= 1.0)) throw std::invalid_argument("p_s must be in (0,1]");
  if (!in_unit(p_c)) throw std::invalid_argument("p_c must be in [0,1]");

  EveInfoBound out;
  const DetectionStats st{p_s, p_s, p_c};
  if (p_c > p_s) {
    out.regime = Regime::infeasible_stats;
    out.note = "p_c exceeds p_s";
    return out;
  }
  const double r = ratio_r(p_s, p_c);
  const double root_e = std::sqrt(p_e);
  out.unclamped_value = root_e * (std::sqrt(p_c) - p_s) / (p_s * (1.0 - root_e));
  if (r <= 1.0) {
    out.regime = Regime::no_attack_evidence;
    out.value = 0.0;
    if (r < 1.0) out.note = "r < 1: coincidences below the coherent level, possible model mismatch";
    return out;
  }
  if (r >= 1.0 / p_e) {
    // Only p_a = 1 remains: mean p_d = p_s/p_E, second moment p_c/p_E.
    const double m = p_s / p_e;
    const double second = p_c / p_e;
    if (m > 1.0 || second > m) {
      out.regime = Regime::infeasible_stats;
      out.note = "full attack would need p_d > 1";
      return out;
    }
    out.regime = Regime::full_attack;
    out.value = 1.0;
    AttackStrategy s;
    s.p_a = 1.0;
    s.p_b = 0.0;
    s.strategies = two_point(m, m, second);
    out.residuals = max_residual(s, p_e, 0.0, st);
    out.optimum = s;
    out.active = "p_a=1";
    return out;
  }
  if (p_c / p_e > 1.0) {
    out.regime = Regime::infeasible_stats;
    out.note = "p_d = sqrt(p_c/p_E) exceeds 1";
    return out;
  }
  out.regime = Regime::partial_attack;
  out.value = std::clamp(out.unclamped_value, 0.0, 1.0);
  const AttackStrategy s = symmetric_optimum(p_e, p_s, p_c);
  out.residuals = max_residual(s, p_e, 0.0, st);
  out.optimum = s;
  out.active = "d1=d2,single_strategy";
  return out;
}

EveInfoBound general_bound(double p_e, const DetectionStats& stats, double alpha,
                           double imbalance_threshold, const SolverOptions& options) {
  if (!(p_e > 0.0 && p_e < 1.0)) throw std::invalid_argument("p_E must be in (0,1)");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in [0,1)");
  if (!(imbalance_threshold >= 0.0)) throw std::invalid_argument("imbalance threshold must be >= 0");
  check_stats(stats);
  const double imbalance = std::abs(stats.p_s1 - stats.p_s2);
  if (imbalance > imbalance_threshold)
    throw SecurityAbort(SecurityAbort::Reason::pixel_imbalance,
                        "|p_s1 - p_s2| = " + std::to_string(imbalance) + " exceeds threshold " +
                            std::to_string(imbalance_threshold));
  auto infeasible = [](const std::string& why) {
    return SecurityAbort(SecurityAbort::Reason::infeasible_stats, why);
  };
  if (stats.p_c > std::min(stats.p_s1, stats.p_s2)) throw infeasible("p_c exceeds min(p_s1, p_s2)");

  // Work in the orientation where pixel 2 dominates.
  const bool flip = options.order == PixelOrder::first_dominant;
  Problem pr{flip ? stats.p_s2 : stats.p_s1, flip ? stats.p_s1 : stats.p_s2, stats.p_c,
             flip ? -alpha : alpha, p_e, options.objective};
  if (pr.alpha == 0.0 && pr.s1 > pr.s2) {
    if (pr.s1 - pr.s2 > 1e-12 * pr.s1) throw infeasible("the non-dominant pixel clicks more often");
    pr.s1 = pr.s2 = 0.5 * (pr.s1 + pr.s2);
  }

  EveInfoBound out;
  Candidate best;
  double honest_pb = 0.0;
  const bool honest = honest_feasible(pr, honest_pb);
  if (honest) best = {0.0, 0.0, honest_pb};

  // Interior p_a: uniform grid plus geometric grids toward both faces.
  std::vector<double> grid;
  constexpr int kUniform = 1000;
  for (int i = 1; i < kUniform; ++i) grid.push_back(static_cast<double>(i) / kUniform);
  for (int j = 31; j <= 150; ++j) {
    const double g = std::pow(10.0, -j / 10.0);
    grid.push_back(g);
    grid.push_back(1.0 - g);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.erase(std::remove_if(grid.begin(), grid.end(), [](double v) { return !(v > 0.0 && v < 1.0); }),
             grid.end());

  std::vector<double> values(grid.size());
  std::vector<double> hs(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = evaluate(pr, grid[i], hs[i]);

  // Refine the few best local maxima.
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (values[i] == -kInf) continue;
    const double left = i > 0 ? values[i - 1] : -kInf;
    const double right = i + 1 < grid.size() ? values[i + 1] : -kInf;
    if (values[i] >= left && values[i] >= right) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
  if (peaks.size() > 8) peaks.resize(8);
  for (std::size_t i : peaks) {
    if (values[i] > best.value) best = {values[i], grid[i], hs[i]};
    const double u = i > 0 ? grid[i - 1] : 0.5 * grid[i];
    const double v = i + 1 < grid.size() ? grid[i + 1] : 0.5 * (1.0 + grid[i]);
    best = refine(pr, u, v, best);
  }

  if (full_attack_feasible(pr)) best = {1.0, 1.0, 0.0};

  if (best.value == -kInf) throw infeasible("no attack with two strategies reproduces the statistics");

  out.unclamped_value = best.value;
  out.value = std::clamp(best.value, 0.0, 1.0);
  if (best.p_a == 0.0) {
    out.regime = Regime::no_attack_evidence;
  } else if (out.value >= 1.0 - 1e-12) {
    out.regime = Regime::full_attack;
  } else {
    out.regime = Regime::partial_attack;
  }
  if (out.regime != Regime::no_attack_evidence) {
    AttackStrategy s = build_strategy(pr, best.p_a, best.h);
    out.active = active_constraints(pr, best.p_a, best.h, s);
    if (flip) swap_pixels(s);
    out.residuals = max_residual(s, p_e, alpha, stats);
    out.optimum = s;
  }
  return out;
}

double default_imbalance_threshold(const ClickCounts& counts, double alpha) {
  counts.validate();
  const auto n = static_cast<double>(counts.n_pulses);
  const double p1 = static_cast<double>(counts.n_s1) / n;
  const double p2 = static_cast<double>(counts.n_s2) / n;
  const double pc = static_cast<double>(counts.n_c) / n;
  const double d = p1 - p2;
  // Per-pulse variance of (click1 - click2).
  const double var = std::max(0.0, p1 + p2 - 2.0 * pc - d * d);
  return 2.0 * alpha * 0.5 * (p1 + p2) + 5.0 * std::sqrt(var / n);
}

FiniteKeyCorner finite_key_corner(const ClickCounts& counts, const FiniteKeyParams& fk) {
  counts.validate();
  fk.validate();
  if (fk.n_pulses != counts.n_pulses) throw std::invalid_argument("n_pulses differs between counts and fk");
  return {lower_bound_count(counts.n_s1, fk), lower_bound_count(counts.n_s2, fk),
          upper_bound_count(counts.n_c, fk)};
}

EveInfoBound finite_key_bound(const ClickCounts& counts, const FiniteKeyParams& fk, double p_e,
                              double alpha, double imbalance_threshold, const FiniteKeyOptions& options) {
  counts.validate();
  if (counts.n_s1 + counts.n_s2 == 0) throw std::invalid_argument("no detections: nothing to bound");
  if (!(imbalance_threshold >= 0.0)) throw std::invalid_argument("imbalance threshold must be >= 0");
  const auto n = static_cast<double>(counts.n_pulses);
  const double imbalance = std::abs(static_cast<double>(counts.n_s1 - counts.n_s2)) / n;
  if (imbalance > imbalance_threshold)
    throw SecurityAbort(SecurityAbort::Reason::pixel_imbalance,
                        "|p_s1 - p_s2| = " + std::to_string(imbalance) + " exceeds threshold " +
                            std::to_string(imbalance_threshold));

  const FiniteKeyCorner corner = finite_key_corner(counts, fk);
  if (options.symmetric) {
    if (alpha != 0.0) throw std::invalid_argument("the symmetric closed form needs alpha = 0");
    const double p_s = std::min(corner.p_s1_lower, corner.p_s2_lower);
    if (!(p_s > 0.0))
      throw SecurityAbort(SecurityAbort::Reason::infeasible_stats, "lower bound on p_s is 0");
    EveInfoBound b = symmetric_bound(p_e, p_s, corner.p_c_upper);
    if (b.regime == Regime::infeasible_stats)
      throw SecurityAbort(SecurityAbort::Reason::infeasible_stats, "finite-key corner: " + b.note);
    return b;
  }
  const DetectionStats st{corner.p_s1_lower, corner.p_s2_lower, corner.p_c_upper};
  if (st.p_s1 + st.p_s2 <= 0.0)
    throw SecurityAbort(SecurityAbort::Reason::infeasible_stats, "lower bounds on p_s are 0");
  return general_bound(p_e, st, alpha, kInf, options.solver);
}

}  // namespace pixelguard
