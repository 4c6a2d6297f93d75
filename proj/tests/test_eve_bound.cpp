#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "pixelguard/eve_bound.hpp"

using namespace pixelguard;

namespace {

AttackStrategy random_attack(std::mt19937_64& rng, int strategies = 2) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AttackStrategy s{u(rng), std::pow(10.0, -3.0 + 2.0 * u(rng)), {}};
  double left = 1.0;
  for (int j = 0; j < strategies; ++j) {
    const double w = j + 1 == strategies ? left : left * u(rng);
    left -= w;
    double x = u(rng), y = u(rng);
    if (x > y) std::swap(x, y);
    s.strategies.push_back({w, x, y});
  }
  return s;
}

void check_optimum(const EveInfoBound& b, double p_e, const DetectionStats& st, double alpha) {
  REQUIRE(b.optimum.has_value());
  const DetectionStats e = expected_stats(*b.optimum, p_e, alpha);
  CHECK(std::abs(e.p_s1 - st.p_s1) <= 1e-9);
  CHECK(std::abs(e.p_s2 - st.p_s2) <= 1e-9);
  CHECK(std::abs(e.p_c - st.p_c) <= 1e-9);
  CHECK(b.residuals <= 1e-9);
}

}  // namespace

TEST_CASE("ratio r") {
  CHECK(ratio_r(0.01, 1e-4) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ratio_r(0.02, 0.0016) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(ratio_r(0.5, 0.0) == 0.0);
  CHECK_THROWS_AS(ratio_r(0.0, 0.1), std::invalid_argument);
}

TEST_CASE("symmetric closed form examples") {
  const EveInfoBound honest = symmetric_bound(0.3, 0.01, 1e-4);
  CHECK(honest.value == 0.0);
  CHECK(honest.regime == Regime::no_attack_evidence);
  CHECK_FALSE(honest.optimum.has_value());

  const EveInfoBound b = symmetric_bound(0.25, 0.03, 0.0016);
  CHECK(b.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(b.regime == Regime::partial_attack);
  check_optimum(b, 0.25, {0.03, 0.03, 0.0016}, 0.0);

  CHECK(symmetric_bound(0.04, 0.02, 0.0016).value == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("symmetric regimes") {
  // r = 1/p_E: full attack, the formula gives exactly 1 before clamping.
  const EveInfoBound edge = symmetric_bound(0.25, 0.02, 0.0016);
  CHECK(edge.regime == Regime::full_attack);
  CHECK(edge.value == 1.0);
  CHECK(edge.unclamped_value == doctest::Approx(1.0).epsilon(1e-14));
  check_optimum(edge, 0.25, {0.02, 0.02, 0.0016}, 0.0);

  const EveInfoBound above = symmetric_bound(0.25, 0.02, 0.003);
  CHECK(above.regime == Regime::full_attack);
  CHECK(above.value == 1.0);
  CHECK(above.unclamped_value > 1.0);
  check_optimum(above, 0.25, {0.02, 0.02, 0.003}, 0.0);

  const EveInfoBound sub = symmetric_bound(0.25, 0.02, 0.0001);
  CHECK(sub.regime == Regime::no_attack_evidence);
  CHECK(sub.value == 0.0);
  CHECK_FALSE(sub.note.empty());

  // Partial regime but p_d = sqrt(p_c / p_E) > 1.
  CHECK(symmetric_bound(0.01, 0.2, 0.08).regime == Regime::infeasible_stats);
  CHECK(symmetric_bound(0.5, 0.1, 0.2).regime == Regime::infeasible_stats);
  CHECK_THROWS_AS(symmetric_bound(0.0, 0.1, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(symmetric_bound(0.2, 0.0, 0.01), std::invalid_argument);
}

TEST_CASE("symmetric optimum") {
  const AttackStrategy s = symmetric_optimum(0.25, 0.03, 0.0016);
  CHECK(s.p_b == doctest::Approx(0.04).epsilon(1e-14));
  CHECK(s.p_a == doctest::Approx(0.5).epsilon(1e-14));
  REQUIRE(s.strategies.size() == 1);
  CHECK(s.strategies[0].p_d1 == doctest::Approx(0.08).epsilon(1e-14));
  CHECK(s.strategies[0].p_d2 == doctest::Approx(0.08).epsilon(1e-14));
  CHECK(symmetric_optimum(0.25, 0.02, 0.0016).p_a == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(symmetric_optimum(0.25, 0.02, 0.0004).p_a == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(symmetric_optimum(0.01, 0.2, 0.08), SecurityAbort);
}

TEST_CASE("symmetric bound is monotone on the partial regime") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 10000) {
    const double p_e = 0.02 + 0.9 * u(rng);
    const double p_s = 1e-3 + 0.05 * u(rng);
    const double r1 = 1.0 + (1.0 / p_e - 1.0) * u(rng);
    const double r2 = 1.0 + (1.0 / p_e - 1.0) * u(rng);
    const double lo = std::min(r1, r2) * p_s * p_s;
    const double hi = std::max(r1, r2) * p_s * p_s;
    if (hi / p_e > 1.0) continue;
    ++checked;
    CHECK(symmetric_bound(p_e, p_s, hi).value >= symmetric_bound(p_e, p_s, lo).value);
    // Larger p_s at the same p_c.
    const double p_s2 = p_s * (1.0 + 0.1 * u(rng));
    if (ratio_r(p_s2, hi) > 1.0) CHECK(symmetric_bound(p_e, p_s2, hi).value <= symmetric_bound(p_e, p_s, hi).value);
  }
}

TEST_CASE("bound is affine in sqrt(r)") {
  const double p_e = 0.16;  // sqrt = 0.4
  const double p_s = 0.01;
  const double slope = 0.4 / 0.6;
  for (double r : {1.5, 2.25, 4.0}) {
    const double v = symmetric_bound(p_e, p_s, r * p_s * p_s).value;
    CHECK(v == doctest::Approx(slope * (std::sqrt(r) - 1.0)).epsilon(1e-13));
  }
}

TEST_CASE("general solver reduces to the closed form") {
  const EveInfoBound g = general_bound(0.25, {0.03, 0.03, 0.0016}, 0.0, 1.0);
  CHECK(g.value == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(g.regime == Regime::partial_attack);
  check_optimum(g, 0.25, {0.03, 0.03, 0.0016}, 0.0);

  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    const double p_e = 0.05 + 0.9 * u(rng);
    const double p_s = 1e-3 + 0.1 * u(rng);
    const double r = 1.0 + (1.0 / p_e - 1.0) * u(rng);
    const double p_c = r * p_s * p_s;
    const EveInfoBound s = symmetric_bound(p_e, p_s, p_c);
    if (s.regime != Regime::partial_attack) continue;
    ++checked;
    const EveInfoBound g2 = general_bound(p_e, {p_s, p_s, p_c}, 0.0, 1.0);
    CHECK(std::abs(g2.value - s.value) <= 1e-6);
  }
}

TEST_CASE("honest statistics give zero") {
  const double a = 0.1;
  const double p_b = 0.01;
  const DetectionStats st{(1 + a) * p_b, (1 - a) * p_b, (1 - a * a) * p_b * p_b};
  const EveInfoBound g = general_bound(0.2, st, a, 1.0);
  CHECK(g.value <= 1e-9);
  CHECK(g.regime == Regime::no_attack_evidence);
}

TEST_CASE("general bound dominates the generating attack") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const AttackStrategy s = random_attack(rng, 1 + i % 3);
    const double alpha = 0.1 * u(rng);
    const double p_e = 0.05 + 0.5 * u(rng);
    const DetectionStats st = expected_stats(s, p_e, alpha);
    for (Objective obj : {Objective::clicks, Objective::events}) {
      const EveInfoBound g = general_bound(p_e, st, alpha, 1.0, {PixelOrder::second_dominant, obj});
      const double truth =
          obj == Objective::clicks ? eve_click_fraction(s, p_e, alpha) : eve_event_fraction(s, p_e, alpha);
      CHECK(g.value >= truth - 1e-9);
      CHECK(g.value <= 1.0);
      if (g.regime != Regime::no_attack_evidence) {
        check_optimum(g, p_e, st, alpha);
        CHECK(g.optimum->honours(PixelOrder::second_dominant));
        const double achieved = obj == Objective::clicks ? eve_click_fraction(*g.optimum, p_e, alpha)
                                                         : eve_event_fraction(*g.optimum, p_e, alpha);
        CHECK(achieved == doctest::Approx(g.value).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("first-dominant orientation mirrors the pixels") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const AttackStrategy s = random_attack(rng);
    AttackStrategy m = s;
    for (auto& f : m.strategies) std::swap(f.p_d1, f.p_d2);
    const double p_e = 0.05 + 0.5 * u(rng);

    // With alpha = 0 swapping the faked states just swaps the pixels.
    const EveInfoBound b0 = general_bound(p_e, expected_stats(s, p_e, 0.0), 0.0, 1.0);
    const EveInfoBound f0 =
        general_bound(p_e, expected_stats(m, p_e, 0.0), 0.0, 1.0, {PixelOrder::first_dominant, Objective::clicks});
    CHECK(f0.value == doctest::Approx(b0.value).epsilon(1e-9));
    CHECK(f0.regime == b0.regime);

    const double alpha = 0.1 * u(rng);
    const DetectionStats sm = expected_stats(m, p_e, alpha);
    const EveInfoBound f = general_bound(p_e, sm, alpha, 1.0, {PixelOrder::first_dominant, Objective::clicks});
    CHECK(f.value >= eve_click_fraction(m, p_e, alpha) - 1e-9);
    if (f.optimum) {
      CHECK(f.optimum->honours(PixelOrder::first_dominant));
      check_optimum(f, p_e, sm, alpha);
    }
  }
}

TEST_CASE("aborts") {
  CHECK_THROWS_AS(general_bound(0.2, {0.02, 0.01, 0.001}, 0.0, 0.005), SecurityAbort);
  try {
    general_bound(0.2, {0.02, 0.01, 0.001}, 0.0, 0.005);
  } catch (const SecurityAbort& e) {
    CHECK(e.reason() == SecurityAbort::Reason::pixel_imbalance);
    CHECK(e.reason_name() == "pixel-imbalance");
  }
  try {
    general_bound(0.2, {0.01, 0.01, 0.02}, 0.0, 1.0);
    FAIL("expected an abort");
  } catch (const SecurityAbort& e) {
    CHECK(e.reason_name() == "infeasible-stats");
  }
  // Singles far above what p_E allows with coincidences at the honest level.
  CHECK_THROWS_AS(general_bound(0.2, {0.30, 0.5, 0.3}, 0.1, 1.0), SecurityAbort);
  CHECK_THROWS_AS(general_bound(0.2, {0.0, 0.0, 0.0}, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(general_bound(0.2, {0.1, 0.1, 0.01}, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("default imbalance threshold") {
  const ClickCounts c{1'000'000, 10'000, 10'000, 100};
  const double var = 0.02 - 2e-4;
  CHECK(default_imbalance_threshold(c, 0.0) == doctest::Approx(5.0 * std::sqrt(var / 1e6)).epsilon(1e-12));
  CHECK(default_imbalance_threshold(c, 0.1) == doctest::Approx(0.002 + 5.0 * std::sqrt(var / 1e6)).epsilon(1e-12));
}

TEST_CASE("finite-key bound") {
  SUBCASE("no detections") {
    CHECK_THROWS_AS(finite_key_bound({1000, 0, 0, 0}, {1000, 1e-10}, 0.2, 0.0, 1.0), std::invalid_argument);
  }
  SUBCASE("worst-casing never shrinks the bound") {
    const ClickCounts c{1'000'000, 10'000, 10'000, 100};
    const FiniteKeyParams fk{1'000'000, 1e-5};
    const EveInfoBound b = finite_key_bound(c, fk, 0.2, 0.0, 1.0);
    const EveInfoBound point = general_bound(0.2, {0.01, 0.01, 1e-4}, 0.0, 1.0);
    CHECK(b.value >= point.value);
    const EveInfoBound bs = finite_key_bound(c, fk, 0.2, 0.0, 1.0, {{}, true});
    CHECK(bs.value >= symmetric_bound(0.2, 0.01, 1e-4).value);
    CHECK(bs.value == doctest::Approx(b.value).epsilon(1e-6));
  }
  SUBCASE("honest counts at 24 h approach the asymptotic value 0") {
    const double p_b = 0.0605869371865242139;
    const double p_e = 0.196734670143683288;
    double last = 1.0;
    for (double n : {8.64e10, 8.64e12, 8.64e14}) {
      const auto nn = static_cast<std::int64_t>(n);
      const ClickCounts c{nn, std::llround(n * p_b), std::llround(n * p_b), std::llround(n * p_b * p_b)};
      const EveInfoBound b = finite_key_bound(c, {nn, 1e-10}, p_e, 0.0, 1.0, {{}, true});
      CHECK(b.value < last);
      last = b.value;
    }
    CHECK(last < 1e-3);
  }
  SUBCASE("fk.n_pulses must agree with the counts") {
    CHECK_THROWS_AS(finite_key_bound({1000, 10, 10, 1}, {999, 1e-5}, 0.2, 0.0, 1.0), std::invalid_argument);
  }
  SUBCASE("imbalance is judged on observed frequencies") {
    CHECK_THROWS_AS(finite_key_bound({10000, 200, 100, 5}, {10000, 1e-5}, 0.2, 0.0, 0.001), SecurityAbort);
  }
}
