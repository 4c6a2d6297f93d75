// Grid oracle for the eavesdropper bound.  It shares nothing with the
// analytic solvers: every candidate is a full parameter assignment whose
// objective is computed directly from the forward model.
#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "pixelguard/eve_bound.hpp"

namespace pixelguard {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoxTol = 1e-12;
constexpr double kMatchTol = 1e-9;

struct Witness {
  double value = -kInf;
  double p_a = 0.0;
  double p_b = 0.0;
  std::vector<FakedState> strategies;

  [[nodiscard]] std::vector<double> key() const {
    std::vector<double> k{p_a, p_b};
    for (const auto& s : strategies) k.insert(k.end(), {s.weight, s.p_d1, s.p_d2});
    return k;
  }
  // Larger value wins; ties go to the lexicographically smaller witness.
  [[nodiscard]] bool beats(const Witness& o) const {
    if (value != o.value) return value > o.value;
    return key() < o.key();
  }
};

struct Search {
  double p_e, s1, s2, c, alpha;
  Objective objective;
  int n;  // grid points per unit

  [[nodiscard]] double objective_of(double p_a, const std::vector<FakedState>& st) const {
    const double a = p_a * p_e;
    double faked = 0.0;
    for (const auto& f : st) {
      faked += f.weight * (f.p_d1 + f.p_d2 - (objective == Objective::events ? f.p_d1 * f.p_d2 : 0.0));
    }
    const double denom = objective == Objective::events ? s1 + s2 - c : s1 + s2;
    return a * faked / denom;
  }

  [[nodiscard]] bool reproduces(double p_a, double p_b, const std::vector<FakedState>& st) const {
    double m1 = 0.0, m2 = 0.0, mc = 0.0;
    for (const auto& f : st) {
      m1 += f.weight * f.p_d1;
      m2 += f.weight * f.p_d2;
      mc += f.weight * f.p_d1 * f.p_d2;
    }
    const double a = p_a * p_e;
    const double e1 = a * m1 + (1.0 - p_a) * (1.0 + alpha) * p_b;
    const double e2 = a * m2 + (1.0 - p_a) * (1.0 - alpha) * p_b;
    const double ec = a * mc + (1.0 - p_a) * (1.0 - alpha * alpha) * p_b * p_b;
    auto ok = [](double got, double want) { return std::abs(got - want) <= kMatchTol * std::max(want, 1e-3); };
    return ok(e1, s1) && ok(e2, s2) && ok(ec, c);
  }

  static bool boxed(double& v) {
    if (v < -kBoxTol || v > 1.0 + kBoxTol || !std::isfinite(v)) return false;
    v = std::clamp(v, 0.0, 1.0);
    return true;
  }

  void offer(Witness& best, double p_a, double p_b, const std::vector<FakedState>& st) const {
    const double value = objective_of(p_a, st);
    if (value < best.value || !reproduces(p_a, p_b, st)) return;
    Witness w{value, p_a, p_b, st};
    if (w.beats(best)) best = std::move(w);
  }

  // Free strategies are fixed in `st`; solve p_B and the last strategy.
  // Sums are a * sum(w x), a * sum(w y), a * sum(w x y) over the free ones.
  void solve_last(Witness& best, double p_a, std::vector<FakedState>& st, double wk, double ax, double ay,
                  double axy) const {
    const double a = p_a * p_e;
    const double q = 1.0 - p_a;
    const double c1 = q * (1.0 + alpha);
    const double c2 = q * (1.0 - alpha);
    const double cc = q * (1.0 - alpha * alpha);
    const double r1 = s1 - ax;
    const double r2 = s2 - ay;
    const double rc = c - axy;
    const double aw = a * wk;
    // (r1 - c1 p)(r2 - c2 p) = aw (rc - cc p^2)
    const double qa = c1 * c2 + aw * cc;
    const double qb = -(r1 * c2 + r2 * c1);
    const double qc = r1 * r2 - aw * rc;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    // Cheap scalar screen before assembling a witness.
    const double free_clicks = ax + ay;
    const double free_events = free_clicks - axy;
    const double denom = objective == Objective::events ? s1 + s2 - c : s1 + s2;
    for (double p : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
      if (!boxed(p) || (1.0 + alpha) * p > 1.0) continue;
      double x = (r1 - c1 * p) / aw;
      double y = (r2 - c2 * p) / aw;
      if (!boxed(x) || !boxed(y) || x > y + kBoxTol) continue;
      x = std::min(x, y);
      const double screen = objective == Objective::events
                                ? (free_events + aw * (x + y - x * y)) / denom
                                : (free_clicks + aw * (x + y)) / denom;
      if (screen < best.value - 1e-12) continue;
      st.push_back(FakedState{wk, x, y});
      offer(best, p_a, p, st);
      st.pop_back();
    }
  }

  // Recursively grid the free strategies (k - 1 of them), then solve.
  void interior(Witness& best, double p_a, int remaining, std::vector<FakedState>& st, double wsum,
                double wmax, double ax, double ay, double axy) const {
    const double a = p_a * p_e;
    if (remaining == 0) {
      const double wk = 1.0 - wsum;
      if (wk + 1e-12 < wmax) return;  // the solved strategy is the heaviest
      solve_last(best, p_a, st, wk, ax, ay, axy);
      return;
    }
    for (int wi = 1; wi <= n; ++wi) {
      const double w = static_cast<double>(wi) / n;
      const double wmax2 = std::max(wmax, w);
      if (1.0 - wsum - w + 1e-12 < wmax2) break;
      for (int xi = 0; xi <= n; ++xi) {
        const double x = static_cast<double>(xi) / n;
        const double ax2 = ax + a * w * x;
        if (ax2 > s1) break;
        for (int yi = xi; yi <= n; ++yi) {
          const double y = static_cast<double>(yi) / n;
          const double ay2 = ay + a * w * y;
          const double axy2 = axy + a * w * x * y;
          if (ay2 > s2 || axy2 > c) break;
          st.push_back(FakedState{w, x, y});
          interior(best, p_a, remaining - 1, st, wsum + w, wmax2, ax2, ay2, axy2);
          st.pop_back();
        }
      }
    }
  }

  // p_a = 1 with up to two strategies: grid (w1, x1) and solve the rest.
  void full_attack(Witness& best, int k) const {
    const double a = p_e;
    const double m1 = s1 / a;
    const double m2 = s2 / a;
    const double mc = c / a;
    {
      // One strategy.
      double x = m1;
      double y = m2;
      if (boxed(x) && boxed(y) && x <= y + kBoxTol) offer(best, 1.0, 0.0, {FakedState{1.0, std::min(x, y), y}});
    }
    if (k < 2) return;
    for (int wi = 1; 2 * wi <= n; ++wi) {
      const double w1 = static_cast<double>(wi) / n;
      const double w2 = 1.0 - w1;
      for (int xi = 0; xi <= n; ++xi) {
        const double x1 = static_cast<double>(xi) / n;
        double x2 = (m1 - w1 * x1) / w2;
        if (!boxed(x2)) continue;
        const double det = w1 * w2 * (x2 - x1);
        if (std::abs(det) < 1e-14) continue;
        double y1 = w2 * (x2 * m2 - mc) / det;
        double y2 = w1 * (mc - x1 * m2) / det;
        if (!boxed(y1) || !boxed(y2) || x1 > y1 + kBoxTol || x2 > y2 + kBoxTol) continue;
        offer(best, 1.0, 0.0, {FakedState{w1, x1, y1}, FakedState{w2, x2, y2}});
      }
    }
  }

  // One worker's share of the p_a grid: i = n-1-first, n-1-first-stride, ...
  Witness run(int k, unsigned first, unsigned stride) const {
    Witness best;
    std::vector<FakedState> st;
    // Descending p_a so the cap below prunes early.
    for (int i = n - 1 - static_cast<int>(first); i >= 1; i -= static_cast<int>(stride)) {
      const double p_a = static_cast<double>(i) / n;
      // Faked clicks cannot exceed 2 p_a p_E per pulse.
      if (best.value > 2.0 * p_a * p_e / (s1 + s2)) continue;
      for (int kk = 1; kk <= k; ++kk) interior(best, p_a, kk - 1, st, 0.0, 0.0, 0.0, 0.0, 0.0);
    }
    return best;
  }
};

}  // namespace

EveInfoBound brute_force_bound(double p_e, const DetectionStats& stats, double alpha, double grid_resolution,
                               const OracleOptions& options) {
  if (!(grid_resolution > 0.0 && grid_resolution <= 0.1))
    throw std::invalid_argument("grid resolution must be in (0, 0.1]");
  if (!(p_e > 0.0 && p_e < 1.0)) throw std::invalid_argument("p_E must be in (0,1)");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in [0,1)");
  if (options.strategies < 1 || options.strategies > 3)
    throw std::invalid_argument("the oracle supports 1 to 3 strategies");

  EveInfoBound out;
  out.regime = Regime::infeasible_stats;
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(stats.p_s1) || !unit(stats.p_s2) || !unit(stats.p_c) ||
      stats.p_c > std::min(stats.p_s1, stats.p_s2) || stats.p_s1 + stats.p_s2 <= 0.0) {
    out.note = "statistics violate coincidence logic";
    return out;
  }

  const Search search{p_e, stats.p_s1, stats.p_s2, stats.p_c, alpha, options.objective,
                      static_cast<int>(std::lround(1.0 / grid_resolution))};

  // Nothing beats a feasible full attack (value 1), so try that face first.
  Witness best;
  search.full_attack(best, std::min(options.strategies, 2));
  const unsigned workers = best.value >= 1.0 ? 0u : std::max(1u, options.workers);
  std::vector<Witness> partial(workers);
  if (workers == 0) {
  } else if (workers == 1) {
    partial[0] = search.run(options.strategies, 0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] { partial[w] = search.run(options.strategies, w, workers); });
    for (auto& t : pool) t.join();
  }
  for (const auto& w : partial)
    if (w.beats(best)) best = w;

  // p_a = 0: honest explanation.
  const double p_b = 0.5 * (stats.p_s1 + stats.p_s2);
  Witness honest{0.0, 0.0, p_b, {FakedState{1.0, 0.0, 0.0}}};
  const bool honest_ok = search.reproduces(0.0, p_b, honest.strategies);
  if (honest_ok && honest.beats(best)) best = honest;

  if (best.value == -kInf) {
    out.note = "no grid point reproduces the statistics";
    return out;
  }
  out.unclamped_value = best.value;
  out.value = std::clamp(best.value, 0.0, 1.0);
  if (best.p_a == 0.0) {
    out.regime = Regime::no_attack_evidence;
    return out;
  }
  out.regime = out.value >= 1.0 - 1e-12 ? Regime::full_attack : Regime::partial_attack;
  AttackStrategy s{best.p_a, best.p_b, best.strategies};
  const DetectionStats e = expected_stats(s, p_e, alpha);
  out.residuals = std::max({std::abs(e.p_s1 - stats.p_s1), std::abs(e.p_s2 - stats.p_s2),
                            std::abs(e.p_c - stats.p_c)});
  out.optimum = std::move(s);
  return out;
}

}  // namespace pixelguard
