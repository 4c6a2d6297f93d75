#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pixelguard/sweep.hpp"

using namespace pixelguard;

TEST_CASE("linear grid") {
  const auto g = linear_grid(0.0, 1.0, 0.1);
  REQUIRE(g.size() == 11);
  CHECK(g.back() == 1.0);
  CHECK(linear_grid(2.0, 2.0, 1.0).size() == 1);
  CHECK_THROWS_AS(linear_grid(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(linear_grid(1.0, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("ratio sweep") {
  const double p_e = 0.25;
  const auto rows = sweep_ratio(p_e, 1.0, 5.0, 0.5);
  REQUIRE(rows.size() == 9);
  CHECK(rows.front().i_e_max == 0.0);
  CHECK(rows[6].r == 4.0);
  CHECK(rows[6].i_e_max == 1.0);
  CHECK(rows.back().i_e_max == 1.0);
  CHECK(rows[2].i_e_max == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));
  CHECK(ratio_csv(rows).rfind("r,i_e_max\n1,0\n", 0) == 0);
  CHECK_THROWS_AS(sweep_ratio(p_e, 0.5, 2.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sweep_ratio(1.0, 1.0, 2.0, 0.1), std::invalid_argument);
}

TEST_CASE("distance sweep: shape, monotonicity and header") {
  DistanceSweep sw;
  sw.acquisition_times_s = {1.0, 3600.0};
  sw.d_max = 100.0;
  sw.step = 25.0;
  const auto rows = sweep_distance(SystemParams{}, sw);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0].acquisition_time_s == 1.0);
  CHECK(rows[5].acquisition_time_s == 3600.0);
  CHECK(rows[0].n_pulses == 10'000'000'000);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].i_e_upper >= 0.0);
    CHECK(rows[i].i_e_upper <= 1.0);
    if (i % 5 != 0) {
      CHECK(rows[i].i_e_upper >= rows[i - 1].i_e_upper);
      CHECK(rows[i].p_s1_expected < rows[i - 1].p_s1_expected);
    }
  }
  // More pulses, tighter corner.
  for (std::size_t i = 0; i < 5; ++i) CHECK(rows[i + 5].i_e_upper <= rows[i].i_e_upper);
  CHECK(rows[0].p_c_upper >= rows[0].p_c_expected);
  CHECK(rows[0].p_s_lower <= rows[0].p_s1_expected);

  const std::string csv = distance_csv(rows);
  CHECK(csv.rfind("distance_km,acquisition_time_s,n_pulses,p_s1_expected,p_s2_expected,p_c_expected,p_c_upper,"
                  "p_s_lower,i_e_upper\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("distance sweep with mismatch uses the general solver") {
  SystemParams p;
  p.alpha = 0.05;
  DistanceSweep sw;
  sw.acquisition_times_s = {86400.0};
  sw.d_max = 50.0;
  sw.step = 50.0;
  const auto rows = sweep_distance(p, sw);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].p_s1_expected > rows[0].p_s2_expected);
  // Lowering both singles by their own confidence margins pushes p_s2/p_s1
  // below (1 - alpha)/(1 + alpha), which no second-dominant attack can
  // produce, so honest mismatched rows end in an abort.
  const double ratio = (1.0 - p.alpha) / (1.0 + p.alpha);
  for (const auto& r : rows) {
    CHECK(r.status == "infeasible-stats");
    CHECK(r.i_e_upper == 1.0);
  }
  // The expected statistics themselves are honest and give 0.
  const DetectionStats st{rows[0].p_s1_expected, rows[0].p_s2_expected, rows[0].p_c_expected};
  CHECK(st.p_s2 == doctest::Approx(ratio * st.p_s1).epsilon(1e-12));
  CHECK(general_bound(compute_p_e(p), st, p.alpha, 1.0).value <= 1e-9);
}

TEST_CASE("distance sweep rows do not depend on the worker count") {
  DistanceSweep sw;
  sw.acquisition_times_s = {60.0, 86400.0};
  sw.d_max = 300.0;
  sw.step = 60.0;
  const std::string one = distance_csv(sweep_distance(SystemParams{}, sw));
  sw.workers = 3;
  CHECK(distance_csv(sweep_distance(SystemParams{}, sw)) == one);
}

TEST_CASE("rows with no detections or aborts report 1") {
  SystemParams p;
  p.pulse_rate_hz = 1.0;
  const SweepRow r = sweep_row(p, 300.0, 1.0, 1e-10, {});
  CHECK(r.i_e_upper == 1.0);
  CHECK(r.status == "no-detections");
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e10) == "10000000000");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
}
