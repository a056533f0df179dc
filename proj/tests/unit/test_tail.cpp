#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "tvaudit/graph.hpp"
#include "tvaudit/tail.hpp"

using namespace tvaudit;

namespace {

// Deterministic Pareto sample via the inverse CDF on a stratified grid.
std::vector<double> pareto_grid(double alpha, double x_min, int n) {
  std::vector<double> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    out.push_back(x_min * std::pow(1.0 - u, -1.0 / alpha));
  }
  return out;
}

// Reference implementation, written independently of the library: exact MLE
// and two-sided KS distance for a fixed threshold, O(n log n) per call.
struct RefFit {
  double alpha = 0.0, ks = 0.0;
  std::size_t n_tail = 0;
};

RefFit reference_fit(const std::vector<double>& values, double x_min) {
  std::vector<double> tail;
  for (double v : values)
    if (v >= x_min) tail.push_back(v);
  std::sort(tail.begin(), tail.end());
  RefFit fit;
  fit.n_tail = tail.size();
  double log_sum = 0.0;
  for (double v : tail) log_sum += std::log(v / x_min);
  fit.alpha = static_cast<double>(tail.size()) / log_sum;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const double model = 1.0 - std::pow(x_min / tail[i], fit.alpha);
    const double hi = static_cast<double>(i + 1) / tail.size();
    const double lo = static_cast<double>(i) / tail.size();
    fit.ks = std::max(fit.ks, std::max(std::abs(hi - model), std::abs(model - lo)));
  }
  return fit;
}

}  // namespace

TEST_CASE("fixed-threshold MLE matches the reference on random data") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_real_distribution<double> ua(1.2, 4.0);
    const double alpha = ua(rng);
    std::vector<double> values;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 500; ++i)
      values.push_back(std::pow(1.0 - unif(rng), -1.0 / alpha));
    PowerLawFit fit = fit_pareto_tail(values, 1.0);
    RefFit ref = reference_fit(values, 1.0);
    CHECK(fit.alpha == doctest::Approx(ref.alpha).epsilon(1e-12));
    CHECK(fit.ks_distance == doctest::Approx(ref.ks).epsilon(1e-12));
    CHECK(fit.n_tail == ref.n_tail);
  }
}

TEST_CASE("the tail index is recovered on clean synthetic samples") {
  for (double alpha : {1.5, 2.38, 3.0}) {
    PowerLawFit fit = fit_pareto_tail(pareto_grid(alpha, 2.0, 20000), 2.0);
    CHECK(fit.alpha == doctest::Approx(alpha).epsilon(0.02));
    CHECK(fit.x_min == 2.0);
    CHECK(fit.n_tail == 20000);
  }
}

TEST_CASE("automatic threshold selection minimizes the KS distance") {
  // Oracle: evaluate the reference fit at every distinct value with a long
  // enough tail and take the argmin (ties to the smaller threshold).
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> values;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> noise_at(1.0, 3.0);
    // Pareto beyond x=3 with uniform contamination below it, so the scan has
    // a real decision to make.
    for (int i = 0; i < 300; ++i)
      values.push_back(3.0 * std::pow(1.0 - unif(rng), -1.0 / 2.2));
    for (int i = 0; i < 200; ++i) values.push_back(noise_at(rng));

    PowerLawFit fit = fit_pareto_tail(values);

    std::set<double> distinct(values.begin(), values.end());
    double best_x = 0.0, best_ks = 1e300;
    for (double candidate : distinct) {
      RefFit ref = reference_fit(values, candidate);
      if (ref.n_tail < 10) continue;
      double log_sum = 0.0;
      for (double v : values)
        if (v >= candidate) log_sum += std::log(v / candidate);
      if (log_sum <= 0.0) continue;
      if (ref.ks < best_ks) {
        best_ks = ref.ks;
        best_x = candidate;
      }
    }
    CHECK(fit.x_min == doctest::Approx(best_x));
    CHECK(fit.ks_distance == doctest::Approx(best_ks).epsilon(1e-12));
  }
}

TEST_CASE("integer degree sequences go through the same path") {
  SampleGraph::Builder builder(0.0, 1.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // 200 right nodes with Pareto-ish integer degrees against fresh left nodes.
  int user = 0;
  for (int item = 0; item < 200; ++item) {
    const int degree = std::max(
        1, static_cast<int>(std::pow(1.0 - unif(rng), -1.0 / 2.0)));
    const int r = builder.intern(Side::Right, "i" + std::to_string(item));
    for (int d = 0; d < degree; ++d) {
      const int l = builder.intern(Side::Left, "u" + std::to_string(user++));
      builder.add_edge(l, r, 1.0);
    }
  }
  SampleGraph g = builder.build();
  DegreeSequence degrees = degree_sequence(g, Side::Right);
  PowerLawFit fit = fit_pareto_tail(degrees, 1.0);
  CHECK(fit.side == Side::Right);
  CHECK(fit.n == 200);
  CHECK(fit.alpha > 1.0);
  // The graph path must agree exactly with fitting the same values raw.
  std::vector<double> raw(degrees.degrees.begin(), degrees.degrees.end());
  PowerLawFit direct = fit_pareto_tail(raw, 1.0, Side::Right);
  CHECK(fit.alpha == doctest::Approx(direct.alpha).epsilon(1e-15));
  CHECK(fit.ks_distance == doctest::Approx(direct.ks_distance).epsilon(1e-15));
  CHECK(fit.n_tail == direct.n_tail);
}

TEST_CASE("survival is clamped to 1 below the threshold") {
  PowerLawFit fit;
  fit.alpha = 2.38;
  fit.x_min = 8.0;
  fit.n = 1000;
  CHECK(survival(fit, 4.0) == 1.0);
  CHECK(survival(fit, 8.0) == 1.0);
  CHECK(survival(fit, 10.0) ==
        doctest::Approx(std::pow(0.8, 2.38)).epsilon(1e-12));
  CHECK(survival(fit, 16.0) ==
        doctest::Approx(std::pow(0.5, 2.38)).epsilon(1e-12));
  CHECK_THROWS_AS(survival(fit, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(survival(fit, -3.0), std::invalid_argument);
}

TEST_CASE("validity coverage scales survival by the population") {
  PowerLawFit fit;
  fit.alpha = 2.38;
  fit.x_min = 8.0;
  fit.n = 1682;
  Coverage c = validity_coverage(fit, 20);
  CHECK(c.fraction == doctest::Approx(std::pow(8.0 / 20.0, 2.38)));
  CHECK(c.expected_nodes == doctest::Approx(1682 * std::pow(8.0 / 20.0, 2.38)));
  CHECK(validity_coverage(fit, 8).fraction == 1.0);
  CHECK(validity_coverage(fit, 1).fraction == 1.0);
  CHECK_THROWS_AS(validity_coverage(fit, 0), std::invalid_argument);
}

TEST_CASE("degenerate and undersized tails are rejected") {
  CHECK_THROWS_WITH_AS(fit_pareto_tail(std::vector<double>(50, 3.0), 3.0),
                       doctest::Contains("tail index is undefined"),
                       std::invalid_argument);
  CHECK_THROWS_AS(fit_pareto_tail(std::vector<double>{1, 2, 3}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_pareto_tail(std::vector<double>{}),
                  std::invalid_argument);
  // Threshold above every value leaves an empty tail.
  CHECK_THROWS_AS(fit_pareto_tail(pareto_grid(2.0, 1.0, 100), 1e9),
                  std::invalid_argument);
}

TEST_CASE("empirical coverage counts core numbers, not degrees") {
  // Star: hub with 5 leaves. Every node peels at 1, so coverage at rank 2 is
  // zero on both sides even though the hub's degree is 5.
  SampleGraph::Builder builder(0.0, 1.0);
  const int hub = builder.intern(Side::Left, "hub");
  for (int i = 0; i < 5; ++i)
    builder.add_edge(hub, builder.intern(Side::Right, "leaf" + std::to_string(i)),
                     1.0);
  SampleGraph g = builder.build();
  CoreDecomposition cd = kcore_decompose(g);
  CHECK(empirical_coverage(cd, Side::Left, 1) == 1.0);
  CHECK(empirical_coverage(cd, Side::Right, 1) == 1.0);
  CHECK(empirical_coverage(cd, Side::Left, 2) == 0.0);
  CHECK(empirical_coverage(cd, Side::Right, 2) == 0.0);
}

TEST_CASE("group coverage flags empty groups instead of dividing by zero") {
  SampleGraph::Builder builder(0.0, 1.0);
  const int a = builder.intern(Side::Left, "a");
  const int b = builder.intern(Side::Left, "b");
  const int x = builder.intern(Side::Right, "x");
  builder.add_edge(a, x, 1.0);
  builder.add_edge(b, x, 1.0);
  builder.set_meta(Side::Left, a, {{"occupation", "technician"}});
  builder.set_meta(Side::Left, b, {{"occupation", "homemaker"}});
  SampleGraph g = builder.build();
  CoreDecomposition cd = kcore_decompose(g);

  GroupCoverage tech =
      empirical_coverage(g, cd, Side::Left, 1, "occupation", "technician");
  CHECK(tech.fraction == 1.0);
  CHECK(tech.group_size == 1);
  CHECK_FALSE(tech.empty_group);

  GroupCoverage ghost =
      empirical_coverage(g, cd, Side::Left, 1, "occupation", "astronaut");
  CHECK(ghost.empty_group);
  CHECK(ghost.fraction == 0.0);
  CHECK(ghost.group_size == 0);
}
