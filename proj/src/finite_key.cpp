#include "pixelguard/finite_key.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pixelguard {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// Above this a + b the continued fraction needs O(sqrt(max(a,b))) terms near
// the bulk, so the tails are integrated directly instead.
constexpr double kQuadratureThreshold = 1000.0;

void domain_check(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("incomplete beta: shape parameters must be finite and > 0");
}

// ln Gamma(z) - [(z - 1/2) ln z - z + ln(2 pi)/2].
double stirling_correction(double z) {
  if (z >= 10.0) {
    const double r = 1.0 / z;
    const double r2 = r * r;
    return r * (1.0 / 12.0 +
                r2 * (-1.0 / 360.0 +
                      r2 * (1.0 / 1260.0 +
                            r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0 - r2 * 691.0 / 360360.0)))));
  }
  return std::lgamma(z) - (z - 0.5) * std::log(z) + z - 0.5 * std::log(2.0 * std::numbers::pi);
}

// ln(1 + u) - u.
double log1pmx(double u) {
  if (std::abs(u) < 0.1) {
    // -u^2/2 + u^3/3 - ...
    double term = -u * u;
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double add = term / k;
      sum += add;
      if (std::abs(add) <= kEps * std::abs(sum)) break;
      term *= -u;
    }
    return sum;
  }
  return std::log1p(u) - u;
}

// x (a + b) - a with the sum and product errors compensated.
double offset_from_mean(double x, double a, double b) {
  const double n = a + b;
  const double b_virtual = n - a;
  const double n_err = (a - (n - b_virtual)) + (b - b_virtual);
  const double prod = x * n;
  const double prod_err = std::fma(x, n, -prod);
  return (prod - a) + prod_err + x * n_err;
}

// ln[x^a (1-x)^b / B(a,b)].  The O(a + b) parts cancel analytically rather
// than numerically.
double log_prefactor(double a, double b, double x) {
  const double n = a + b;
  const double d = offset_from_mean(x, a, b);  // (x - a/n) n
  // Far from the mean 1 + u loses digits (x or 1 - x tiny), so take the
  // logarithm of x n / a or (1 - x) n / b directly.
  const double u = d / a;
  const double v = -d / b;
  const double part_a = std::abs(u) <= 0.5 ? log1pmx(u) : std::log(x) + std::log(n / a) - u;
  const double part_b = std::abs(v) <= 0.5 ? log1pmx(v) : std::log1p(-x) + std::log(n / b) - v;
  const double bulk = a * part_a + b * part_b;
  return bulk + 0.5 * (std::log(a) + std::log(b) - std::log(n) - std::log(2.0 * std::numbers::pi)) -
         stirling_correction(a) - stirling_correction(b) + stirling_correction(n);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  const int max_iter = 100000 + static_cast<int>(10.0 * std::sqrt(std::max(a, b)));
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

struct TailPair {
  double lower;  // I_x(a,b)
  double upper;  // 1 - I_x(a,b)
};

TailPair tails_by_continued_fraction(double a, double b, double x) {
  const double pref = std::exp(log_prefactor(a, b, x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = pref * beta_continued_fraction(a, b, x) / a;
    return {lower, 1.0 - lower};
  }
  const double upper = pref * beta_continued_fraction(b, a, 1.0 - x) / b;
  return {1.0 - upper, upper};
}

// ln density at x + s relative to its value at the reference point x.
// Offsets are carried separately from x so that quadrature nodes keep full
// relative precision when the density is much narrower than ulp(x) / eps.
struct LogDensity {
  double am1;    // a - 1
  double bm1;    // b - 1
  double x;      // reference point
  double slope;  // d/dt ln f at x, cancellation-free

  double relative(double s) const {
    double v = s * slope;
    if (am1 != 0.0) v += am1 * log1pmx(s / x);
    if (bm1 != 0.0) v += bm1 * log1pmx(-s / (1.0 - x));
    return v;
  }
  double slope_at(double t) const { return am1 / t - bm1 / (1.0 - t); }
  double curvature_at(double t) const { return -am1 / (t * t) - bm1 / ((1.0 - t) * (1.0 - t)); }
};

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
constexpr std::array<double, 8> kGlNodes = {
    0.0950125098376374401853193, 0.2816035507792589132304605, 0.4580167776572273863424194,
    0.6178762444026437484466718, 0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr std::array<double, 8> kGlWeights = {
    0.1894506104550684962853967, 0.1826034150449235888667637, 0.1691565193950025381893121,
    0.1495959888165767320815017, 0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

// Integral of exp(ln f(t) - ln f(x)) from x to `end`, panel by panel with
// widths adapted to the local decay length.  `singular_end` marks a
// non-analytic endpoint (non-integer exponent), approached geometrically.
double integrate_from(const LogDensity& g, double end, bool singular_end) {
  const double direction = end > g.x ? 1.0 : -1.0;
  const double span = std::abs(end - g.x);
  double offset = 0.0;  // |t - x| so far
  double total = 0.0;
  for (int panel = 0; panel < 20000; ++panel) {
    const double remaining = span - offset;
    if (remaining <= 0.0) break;
    const double t = g.x + direction * offset;
    const double scale =
        1.0 / (std::abs(g.slope_at(t)) + std::sqrt(std::abs(g.curvature_at(t))) + 1e-300);
    double width = std::min(scale, remaining);
    if (singular_end) width = std::min(width, 0.5 * remaining);
    const double mid = direction * (offset + 0.5 * width);
    const double half = 0.5 * width;
    double sum = 0.0;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      const double ds = half * kGlNodes[i];
      sum += kGlWeights[i] * (std::exp(g.relative(mid - ds)) + std::exp(g.relative(mid + ds)));
    }
    const double contribution = sum * half;
    total += contribution;
    offset = (width >= remaining) ? span : offset + width;
    const double edge = g.relative(direction * offset);
    const bool decaying = g.slope_at(g.x + direction * offset) * direction < 0.0;
    if (decaying && edge < -80.0 && contribution <= 1e-20 * total) break;
    // Geometric approach: what is left is bounded by the last panel.
    if (singular_end && decaying && contribution <= 1e-18 * total) break;
    if (edge < -745.0) break;
  }
  return total;
}

// Lower tail from the positive-term series
// I_x(a,b) = x^a (1-x)^b / (a B(a,b)) * 2F1(a + b, 1; a + 1; x).
double lower_tail_by_series(double a, double b, double x) {
  const double pref = std::exp(log_prefactor(a, b, x));
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < 1000000; ++n) {
    term *= (a + b + n) * x / (a + 1.0 + n);
    sum += term;
    if (term <= kEps * sum) break;
  }
  return pref * sum / a;
}

// Requires x <= 1/2 and a + b large.  The tail on the far side of the mode
// is integrated outward from x; the other tail is 1 - that unless it is the
// smaller of the two.
TailPair tails_by_quadrature(double a, double b, double x) {
  const double am1 = a - 1.0;
  const double bm1 = b - 1.0;
  const double slope_x =
      (am1 + bm1 == 0.0) ? 0.0 : -offset_from_mean(x, am1, bm1) / (x * (1.0 - x));
  const LogDensity g{am1, bm1, x, slope_x};
  const double mode = a <= 1.0 ? 0.0 : (b <= 1.0 ? 1.0 : (a - 1.0) / (a + b - 2.0));
  const double density = std::exp(log_prefactor(a, b, x) - std::log(x) - std::log1p(-x));
  const bool outer_is_lower = x < mode;
  const bool sing0 = a != std::floor(a);
  const bool sing1 = b != std::floor(b);
  const double outer = outer_is_lower ? density * integrate_from(g, 0.0, sing0)
                                      : density * integrate_from(g, 1.0, sing1);
  double inner;
  if (outer <= 0.5) {
    inner = 1.0 - outer;
  } else if (outer_is_lower) {
    inner = density * integrate_from(g, 1.0, sing1);
  } else {
    inner = a < 1.0 ? lower_tail_by_series(a, b, x) : density * integrate_from(g, 0.0, sing0);
  }
  const double lower = outer_is_lower ? outer : inner;
  const double upper = outer_is_lower ? inner : outer;
  return {std::clamp(lower, 0.0, 1.0), std::clamp(upper, 0.0, 1.0)};
}

TailPair beta_tails(double a, double b, double x) {
  domain_check(a, b);
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete beta: x must be in [0,1]");
  if (x == 0.0) return {0.0, 1.0};
  if (x == 1.0) return {1.0, 0.0};
  if (x > 0.5) {
    // I_x(a,b) = 1 - I_{1-x}(b,a); 1 - x is exact here.
    const TailPair r = beta_tails(b, a, 1.0 - x);
    return {r.upper, r.lower};
  }
  if (a + b > kQuadratureThreshold) return tails_by_quadrature(a, b, x);
  const TailPair t = tails_by_continued_fraction(a, b, x);
  return {std::clamp(t.lower, 0.0, 1.0), std::clamp(t.upper, 0.0, 1.0)};
}

double beta_density(double a, double b, double x) {
  const double y = 1.0 - x;
  return std::exp(log_prefactor(a, b, x) - std::log(x) - std::log(y));
}

// Solves lower(x) = target (use_lower) or upper(x) = target.  Both residuals
// are taken increasing in x; Newton steps on the log of the tail, guarded by
// a bisection bracket that switches to geometric midpoints across scales.
double solve_tail(double a, double b, double target, bool use_lower) {
  auto closer = [&](double u, double v) {
    auto miss = [&](double c) {
      const TailPair e = beta_tails(a, b, c);
      return std::abs((use_lower ? e.lower : e.upper) - target);
    };
    return miss(u) <= miss(v) ? u : v;
  };
  double lo = 0.0;
  double hi = 1.0;
  double x = a / (a + b);
  for (int iter = 0; iter < 400; ++iter) {
    const TailPair t = beta_tails(a, b, x);
    const double value = use_lower ? t.lower : t.upper;
    if (value == target) return x;
    const bool below = use_lower ? value < target : value > target;
    if (below) lo = x; else hi = x;
    if (std::abs(value - target) <= 1e-15 * target) return x;
    // Bracket down to a few ulps on the scale of x or 1 - x, whichever is finer.
    if (hi - lo <= 2.0 * kEps * std::min(hi, 1.0 - lo) || std::nextafter(lo, hi) >= hi) return closer(lo, hi);

    double next = std::numeric_limits<double>::quiet_NaN();
    const double dens = beta_density(a, b, x);
    if (dens > 0.0 && std::isfinite(dens) && value > 0.0) {
      // d ln(tail)/dx = +-dens/tail
      const double dlog = std::log(target) - std::log(value);
      next = use_lower ? x + dlog * value / dens : x - dlog * value / dens;
    }
    if (!(next > lo && next < hi)) {
      if (lo > 0.0 && hi / lo > 16.0) {
        next = std::sqrt(lo * hi);
      } else if (lo == 0.0 && hi < 0.5) {
        next = hi / 16.0;
      } else if (hi < 1.0 && (1.0 - lo) / (1.0 - hi) > 16.0) {
        next = 1.0 - std::sqrt((1.0 - lo) * (1.0 - hi));
      } else if (hi == 1.0 && lo > 0.5) {
        next = 1.0 - (1.0 - lo) / 16.0;
      } else {
        next = 0.5 * (lo + hi);
      }
    }
    // Geometric steps can round onto an endpoint.
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) return closer(lo, hi);
    if (next == x) return x;
    x = next;
  }
  return x;
}

}  // namespace

void FiniteKeyParams::validate() const {
  if (n_pulses < 1) throw std::invalid_argument("n_pulses must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("epsilon must be in (0, 0.5)");
}

double reg_inc_beta(double a, double b, double x) { return beta_tails(a, b, x).lower; }

double reg_inc_beta_complement(double a, double b, double x) { return beta_tails(a, b, x).upper; }

double inv_reg_inc_beta(double a, double b, double p) {
  domain_check(a, b);
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("inverse incomplete beta: p must be in [0,1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  return p <= 0.5 ? solve_tail(a, b, p, true) : solve_tail(a, b, 1.0 - p, false);
}

double inv_reg_inc_beta_complement(double a, double b, double q) {
  domain_check(a, b);
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("inverse incomplete beta: q must be in [0,1]");
  if (q == 0.0) return 1.0;
  if (q == 1.0) return 0.0;
  return q <= 0.5 ? solve_tail(a, b, q, false) : solve_tail(a, b, 1.0 - q, true);
}

std::int64_t count_from_frequency(double p, std::int64_t n_pulses) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("frequency must be in [0,1]");
  const double expected = p * static_cast<double>(n_pulses);
  const auto k = static_cast<std::int64_t>(std::llround(expected));
  if (std::abs(expected - static_cast<double>(k)) > 1e-9 * std::max(1.0, expected))
    throw std::invalid_argument("frequency " + std::to_string(p) + " is not a count over N = " +
                                std::to_string(n_pulses));
  return std::clamp<std::int64_t>(k, 0, n_pulses);
}

double upper_bound_count(std::int64_t k, const FiniteKeyParams& fk) {
  fk.validate();
  if (k < 0 || k > fk.n_pulses) throw std::invalid_argument("count must be in [0, N]");
  if (k == fk.n_pulses) return 1.0;
  // 1 - I^{-1}_eps(N - k, k + 1) == the y with 1 - I_y(k + 1, N - k) = eps,
  // which keeps relative precision when the bound is tiny.
  const auto n = static_cast<double>(fk.n_pulses);
  const auto kd = static_cast<double>(k);
  return inv_reg_inc_beta_complement(kd + 1.0, n - kd, fk.epsilon);
}

double lower_bound_count(std::int64_t k, const FiniteKeyParams& fk) {
  fk.validate();
  if (k < 0 || k > fk.n_pulses) throw std::invalid_argument("count must be in [0, N]");
  if (k == 0) return 0.0;
  const auto n = static_cast<double>(fk.n_pulses);
  const auto kd = static_cast<double>(k);
  return inv_reg_inc_beta(kd, n - kd + 1.0, fk.epsilon);
}

double upper_bound_pc(double p_c, const FiniteKeyParams& fk) {
  fk.validate();
  return upper_bound_count(count_from_frequency(p_c, fk.n_pulses), fk);
}

double lower_bound_ps(double p_s, const FiniteKeyParams& fk) {
  fk.validate();
  return lower_bound_count(count_from_frequency(p_s, fk.n_pulses), fk);
}

}  // namespace pixelguard
