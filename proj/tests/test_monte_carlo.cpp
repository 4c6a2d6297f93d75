#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pixelguard/monte_carlo.hpp"

using namespace pixelguard;

namespace {

// |observed - n p| within k binomial standard deviations.
bool near_binomial(std::int64_t observed, double n, double p, double k = 5.0) {
  return std::abs(static_cast<double>(observed) - n * p) <= k * std::sqrt(n * p * (1.0 - p)) + 1.0;
}

void check_counts(const SimOutcome& o, const DetectionStats& want) {
  const double n = static_cast<double>(o.counts.n_pulses);
  CHECK(near_binomial(o.counts.n_s1, n, want.p_s1));
  CHECK(near_binomial(o.counts.n_s2, n, want.p_s2));
  CHECK(near_binomial(o.counts.n_c, n, want.p_c));
}

const AttackStrategy kWorked{0.5, 0.04, {FakedState{1.0, 0.08, 0.08}}};

}  // namespace

TEST_CASE("xoshiro streams are reproducible and distinct") {
  Xoshiro256 a(1, 0), b(1, 0), c(1, 1), d(2, 0);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = a.uniform();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / 100000));
}

TEST_CASE("no clicks when nothing can fire") {
  const SimOutcome o = simulate({0.0, 0.0, {FakedState{1.0, 0.0, 0.0}}}, 0.2, 0.0, 100000, 3);
  CHECK(o.counts.n_s1 == 0);
  CHECK(o.counts.n_s2 == 0);
  CHECK(o.counts.n_c == 0);
  CHECK(o.true_eve_info == 0.0);
}

TEST_CASE("honest session matches the expected statistics") {
  const AttackStrategy honest{0.0, 0.01, {FakedState{1.0, 0.0, 0.0}}};
  for (std::int64_t n : {10'000, 1'000'000}) {
    const SimOutcome o = simulate(honest, 0.2, 0.1, n, 11);
    check_counts(o, expected_stats(honest, 0.2, 0.1));
    CHECK(o.n_eve_known == 0);
    CHECK(o.counts.n_c <= std::min(o.counts.n_s1, o.counts.n_s2));
  }
}

TEST_CASE("worked attack: observed knowledge fraction is near 1/3") {
  const std::int64_t n = 10'000'000;
  const SimOutcome o = simulate(kWorked, 0.25, 0.0, n, 12345);
  check_counts(o, expected_stats(kWorked, 0.25, 0.0));
  const double clicks = static_cast<double>(o.counts.n_s1 + o.counts.n_s2);
  const double f = 1.0 / 3.0;
  CHECK(std::abs(o.true_eve_info - f) <= 5.0 * std::sqrt(f * (1 - f) / clicks));
  const double ev = eve_event_fraction(kWorked, 0.25, 0.0);
  const double events = clicks - static_cast<double>(o.counts.n_c);
  CHECK(std::abs(o.true_eve_event_info - ev) <= 5.0 * std::sqrt(ev * (1 - ev) / events));
  CHECK(o.n_eve_events <= o.n_eve_known);
  CHECK(o.seed == 12345u);
}

TEST_CASE("results do not depend on the worker count") {
  SimOptions one, four;
  four.workers = 4;
  const SimOutcome a = simulate(kWorked, 0.25, 0.05, 700'001, 99, one);
  const SimOutcome b = simulate(kWorked, 0.25, 0.05, 700'001, 99, four);
  CHECK(a.counts.n_s1 == b.counts.n_s1);
  CHECK(a.counts.n_s2 == b.counts.n_s2);
  CHECK(a.counts.n_c == b.counts.n_c);
  CHECK(a.n_eve_known == b.n_eve_known);
  const SimOutcome c = simulate(kWorked, 0.25, 0.05, 700'001, 100, one);
  CHECK(c.counts.n_s1 != a.counts.n_s1);
}

TEST_CASE("tally path has the right moments") {
  const AttackStrategy s{0.3, 0.02, {FakedState{0.5, 0.1, 0.4}, FakedState{0.5, 0.0, 0.2}}};
  SimOptions fast;
  fast.fast_path_above = 1000;
  const std::int64_t n = 5'000'000;
  const DetectionStats want = expected_stats(s, 0.2, 0.05);
  const SimOutcome per_pulse = simulate(s, 0.2, 0.05, n, 5);
  const SimOutcome tally = simulate(s, 0.2, 0.05, n, 5, fast);
  check_counts(per_pulse, want);
  check_counts(tally, want);
  const double truth = eve_click_fraction(s, 0.2, 0.05);
  const double clicks = static_cast<double>(tally.counts.n_s1 + tally.counts.n_s2);
  CHECK(std::abs(tally.true_eve_info - truth) <= 5.0 * std::sqrt(truth * (1 - truth) / clicks));
  SimOptions fast4 = fast;
  fast4.workers = 3;
  CHECK(simulate(s, 0.2, 0.05, n, 5, fast4).counts.n_c == tally.counts.n_c);

  // Far beyond what per-pulse sampling could do in a test.
  const std::int64_t big = 1'000'000'000'000;
  const SimOutcome huge = simulate(s, 0.2, 0.05, big, 6);
  check_counts(huge, want);
}

TEST_CASE("empirical stats") {
  const DetectionStats st = empirical_stats({1000, 20, 10, 1});
  CHECK(st.p_s1 == 0.02);
  CHECK(st.p_s2 == 0.01);
  CHECK(st.p_c == 0.001);
  CHECK_THROWS_AS(empirical_stats({0, 0, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(simulate(kWorked, 0.25, 0.0, 0, 1), std::invalid_argument);
}
