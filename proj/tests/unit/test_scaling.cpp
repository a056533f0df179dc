#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tvaudit/scaling.hpp"

using namespace tvaudit;

TEST_CASE("scaling bound matches a from-scratch evaluation") {
  // (n/2)^(a+1) / (a * x^a), recomputed here without the log-space route.
  auto direct = [](double a, double x, double n) {
    return std::pow(n / 2.0, a + 1.0) / (a * std::pow(x, a));
  };
  for (double a : {1.5, 2.0, 2.5, 3.2}) {
    for (double x : {1.0, 2.0, 5.0}) {
      for (double n : {100.0, 1e4, 1e6}) {
        CHECK(scaling_bound(a, x, n) ==
              doctest::Approx(direct(a, x, n)).epsilon(1e-12));
        CHECK(log10_scaling_bound(a, x, n) ==
              doctest::Approx(std::log10(direct(a, x, n))).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("log-space bound survives magnitudes that overflow the direct form") {
  const double log_bound = log10_scaling_bound(3.0, 1.0, 1e200);
  CHECK(std::isfinite(log_bound));
  CHECK(log_bound == doctest::Approx(4.0 * (200.0 - std::log10(2.0)) -
                                     std::log10(3.0)));
  CHECK(std::isinf(scaling_bound(3.0, 1.0, 1e200)));  // saturates honestly
}

TEST_CASE("benchmark cost is the expected count under the threshold") {
  // n * (1 - (x/t)^a) directly.
  CHECK(benchmark_cost(2.5, 5.0, 1e7, 100.0) ==
        doctest::Approx(1e7 * (1.0 - std::pow(0.05, 2.5))).epsilon(1e-12));
  CHECK(benchmark_cost(2.5, 5.0, 1e7, 100.0) > 9.9e6);
  // At the threshold floor nothing is missing.
  CHECK(benchmark_cost(2.0, 3.0, 1000.0, 3.0) == doctest::Approx(0.0));
}

TEST_CASE("domain violations are rejected") {
  CHECK_THROWS_AS(scaling_bound(0.0, 1.0, 100.0), std::domain_error);
  CHECK_THROWS_AS(scaling_bound(-1.0, 1.0, 100.0), std::domain_error);
  CHECK_THROWS_AS(scaling_bound(2.0, 0.0, 100.0), std::domain_error);
  CHECK_THROWS_AS(scaling_bound(2.0, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(benchmark_cost(2.0, 5.0, 100.0, 1.0), std::domain_error);
}

TEST_CASE("cost report bundles the same numbers") {
  CostReport report = cost_report(2.5, 5.0, 1e7, 100.0);
  CHECK(report.scaling_lower_bound ==
        doctest::Approx(scaling_bound(2.5, 5.0, 1e7)));
  CHECK(report.log10_scaling_lower_bound ==
        doctest::Approx(log10_scaling_bound(2.5, 5.0, 1e7)));
  CHECK(report.benchmark_nodes ==
        doctest::Approx(benchmark_cost(2.5, 5.0, 1e7, 100.0)));
}

TEST_CASE("mean draws to first success tracks 1/p") {
  // Monte Carlo against the geometric mean; 3-sigma band with
  // sd = sqrt((1-p)/p^2) / sqrt(trials).
  std::mt19937_64 seeds(303);
  for (double p : {0.05, 0.2, 0.5}) {
    const long long trials = 40000;
    const double mean = simulate_first_success(p, trials, seeds());
    const double expect = 1.0 / p;
    const double sd =
        std::sqrt((1.0 - p) / (p * p)) / std::sqrt(static_cast<double>(trials));
    CHECK(std::abs(mean - expect) < 3.5 * sd);
  }
}

TEST_CASE("certain success needs exactly one draw") {
  CHECK(simulate_first_success(1.0, 1000, 9) == doctest::Approx(1.0));
}

TEST_CASE("first-success probability must be a probability") {
  CHECK_THROWS_AS(simulate_first_success(0.0, 10, 1), std::domain_error);
  CHECK_THROWS_AS(simulate_first_success(1.5, 10, 1), std::domain_error);
  CHECK_THROWS_AS(simulate_first_success(0.5, 0, 1), std::invalid_argument);
}

TEST_CASE("uniform coverage growth matches the coupon-collector expectation") {
  // With uniform weights, P(node hit >= 1 in m draws) = 1 - (1-1/n)^m.
  // Average 30 runs and compare to the analytic curve.
  const int n = 100;
  const std::vector<long long> schedule = {50, 100, 200, 400, 800, 10000};
  std::vector<double> mean(schedule.size(), 0.0);
  std::mt19937_64 seeds(77);
  const int runs = 30;
  for (int r = 0; r < runs; ++r) {
    auto curve = simulate_coverage_growth(2.0, 1.0, n, 1, schedule, seeds(),
                                          WeightLaw::Uniform);
    REQUIRE(curve.size() == schedule.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      CHECK(curve[i].m == schedule[i]);
      mean[i] += curve[i].fraction;
    }
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    mean[i] /= runs;
    const double analytic =
        1.0 - std::pow(1.0 - 1.0 / n, static_cast<double>(schedule[i]));
    CHECK(std::abs(mean[i] - analytic) < 0.05);
  }
  // The tail of the curve must be effectively complete well before 1e4 draws.
  CHECK(mean.back() > 0.99);
}

TEST_CASE("coverage growth curves are monotone and reach rank-k thresholds") {
  const std::vector<long long> schedule = {10, 100, 1000, 5000};
  auto curve =
      simulate_coverage_growth(2.5, 1.0, 50, 3, schedule, 5, WeightLaw::Pareto);
  for (std::size_t i = 1; i < curve.size(); ++i)
    CHECK(curve[i].fraction >= curve[i - 1].fraction);
  // rank 0 is covered immediately by definition.
  auto trivially =
      simulate_coverage_growth(2.5, 1.0, 50, 0, {1}, 5, WeightLaw::Pareto);
  CHECK(trivially[0].fraction == doctest::Approx(1.0));
}

TEST_CASE("pareto weights slow high-rank coverage versus uniform") {
  // Heavy-tailed popularity starves the cold nodes: at rank 2 the uniform
  // sampler covers strictly more of the domain from the same draw budget.
  const std::vector<long long> schedule = {600};
  const int n = 120;
  double pareto_mean = 0.0, uniform_mean = 0.0;
  std::mt19937_64 seeds(99);
  for (int r = 0; r < 20; ++r) {
    pareto_mean += simulate_coverage_growth(1.2, 1.0, n, 2, schedule, seeds(),
                                            WeightLaw::Pareto)[0]
                       .fraction;
    uniform_mean += simulate_coverage_growth(1.2, 1.0, n, 2, schedule, seeds(),
                                             WeightLaw::Uniform)[0]
                        .fraction;
  }
  CHECK(pareto_mean < uniform_mean);
}

TEST_CASE("coverage growth validates its domain") {
  CHECK_THROWS_AS(
      simulate_coverage_growth(2.0, 1.0, 0, 1, {10}, 1, WeightLaw::Pareto),
      std::invalid_argument);
  CHECK_THROWS_AS(
      simulate_coverage_growth(0.0, 1.0, 10, 1, {10}, 1, WeightLaw::Pareto),
      std::domain_error);
}

TEST_CASE("out-of-order schedules report in input order on one stream") {
  // The same seed must give identical curves regardless of schedule order.
  auto sorted =
      simulate_coverage_growth(2.0, 1.0, 40, 1, {10, 60, 200}, 4, WeightLaw::Pareto);
  auto shuffled =
      simulate_coverage_growth(2.0, 1.0, 40, 1, {200, 10, 60}, 4, WeightLaw::Pareto);
  CHECK(shuffled[0].m == 200);
  CHECK(shuffled[1].m == 10);
  CHECK(shuffled[2].m == 60);
  CHECK(shuffled[0].fraction == doctest::Approx(sorted[2].fraction));
  CHECK(shuffled[1].fraction == doctest::Approx(sorted[0].fraction));
  CHECK(shuffled[2].fraction == doctest::Approx(sorted[1].fraction));
}
