#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "tvaudit/graph.hpp"
#include "tvaudit/worlds.hpp"

using namespace tvaudit;

namespace {

// Rank-2 ground truth with entries safely inside (0, 5).
Eigen::MatrixXd rank2_truth(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Eigen::MatrixXd u(m, 2), v(n, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < 2; ++j) u(i, j) = unif(rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) v(i, j) = unif(rng);
  return u * v.transpose();
}

ObservedMask mask_from_dense(const Eigen::MatrixXd& truth,
                             const std::vector<std::vector<bool>>& observed,
                             double y_min, double y_max) {
  ObservedMask mask;
  mask.rows = static_cast<int>(truth.rows());
  mask.cols = static_cast<int>(truth.cols());
  mask.y_min = y_min;
  mask.y_max = y_max;
  for (int i = 0; i < mask.rows; ++i)
    for (int j = 0; j < mask.cols; ++j)
      if (observed[i][j]) {
        mask.row_idx.push_back(i);
        mask.col_idx.push_back(j);
        mask.value.push_back(truth(i, j));
      }
  return mask;
}

double unobserved_rms(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const std::vector<std::vector<bool>>& observed) {
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (!observed[i][j]) {
        sum += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
        ++count;
      }
  return std::sqrt(sum / count);
}

}  // namespace

TEST_CASE("observed mask mirrors the graph exactly") {
  SampleGraph::Builder builder(1.0, 5.0);
  const int u0 = builder.intern(Side::Left, "u0");
  const int u1 = builder.intern(Side::Left, "u1");
  const int i0 = builder.intern(Side::Right, "i0");
  const int i1 = builder.intern(Side::Right, "i1");
  const int i2 = builder.intern(Side::Right, "i2");
  builder.add_edge(u0, i0, 4.0);
  builder.add_edge(u0, i2, 2.0);
  builder.add_edge(u1, i1, 5.0);
  SampleGraph g = builder.build();

  ObservedMask mask = observed_mask(g);
  CHECK(mask.rows == 2);
  CHECK(mask.cols == 3);
  CHECK(mask.y_min == 1.0);
  CHECK(mask.y_max == 5.0);
  REQUIRE(mask.count() == 3);
  CHECK(mask.value[0] == 4.0);

  // Row-major unobserved complement: (0,1), (1,0), (1,2).
  auto unobserved = mask.unobserved_indices();
  REQUIRE(unobserved.size() == 3);
  CHECK(unobserved[0] == 1);
  CHECK(unobserved[1] == 3);
  CHECK(unobserved[2] == 5);
}

TEST_CASE("ALS drives the observed residual to zero on an exact-rank matrix") {
  Eigen::MatrixXd truth = rank2_truth(12, 9, 5);
  std::vector<std::vector<bool>> all(12, std::vector<bool>(9, true));
  ObservedMask mask = mask_from_dense(truth, all, 0.0, 5.0);

  FactorizationResult result = fit_base_factorization(mask, 2, 17);
  CHECK(result.converged);
  CHECK(result.rms <= 1e-3);
  Eigen::MatrixXd reconstructed = result.U * result.V.transpose();
  CHECK((reconstructed - truth).norm() / truth.norm() < 1e-2);

  // Same seed, same factors; determinism is part of the contract.
  FactorizationResult again = fit_base_factorization(mask, 2, 17);
  CHECK((result.U - again.U).norm() == 0.0);
  CHECK((result.V - again.V).norm() == 0.0);
}

TEST_CASE("ALS interpolates through partial observations") {
  Eigen::MatrixXd truth = rank2_truth(15, 10, 23);
  std::vector<std::vector<bool>> observed(15, std::vector<bool>(10, false));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 10; ++j) observed[i][j] = unif(rng) < 0.65;
  for (int i = 0; i < 15; ++i) observed[i][i % 10] = true;
  ObservedMask mask = mask_from_dense(truth, observed, 0.0, 5.0);

  FactorizationResult result = fit_base_factorization(mask, 2, 99, 2000);
  CHECK(result.converged);
  CHECK(result.rms <= 1e-3);
}

TEST_CASE("orthonormal subspace spans the factor columns") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd u(10, 3);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 3; ++j) u(i, j) = unif(rng);
  Eigen::MatrixXd q = orthonormal_subspace(u);
  CHECK(q.rows() == 10);
  CHECK(q.cols() == 3);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
  // P_Q u = u: the projector reproduces the original columns.
  CHECK((q * (q.transpose() * u) - u).norm() < 1e-10);

  Eigen::MatrixXd deficient(6, 3);
  deficient.col(0) = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
  deficient.col(1) = 2.0 * deficient.col(0);
  deficient.col(2) = -deficient.col(0);
  CHECK_THROWS_WITH_AS(orthonormal_subspace(deficient),
                       doctest::Contains("2"), std::invalid_argument);
}

TEST_CASE("generated worlds satisfy fit, rank, and box constraints") {
  Eigen::MatrixXd truth = rank2_truth(10, 8, 41);
  std::vector<std::vector<bool>> observed(10, std::vector<bool>(8, false));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 8; ++j) observed[i][j] = unif(rng) < 0.55;
  for (int j = 0; j < 8; ++j) {
    observed[0][j] = true;  // anchor rows keep every column covered
    observed[1][j] = true;
  }
  ObservedMask mask = mask_from_dense(truth, observed, 0.0, 5.0);

  WorldEnsemble ensemble = generate_ensemble(mask, 2, 4, 1234);
  REQUIRE(ensemble.worlds.size() == 4);
  for (const World& w : ensemble.worlds) {
    CHECK(w.accepted);
    CHECK(w.fit_residual <= ensemble.fit_tol);
    CHECK(w.rank_residual <= ensemble.rank_tol);
    // Observed entries are reproduced exactly, not merely within tolerance.
    for (std::size_t e = 0; e < mask.count(); ++e)
      CHECK(w.matrix(mask.row_idx[e], mask.col_idx[e]) ==
            doctest::Approx(mask.value[e]).epsilon(1e-14));
    CHECK(w.matrix.minCoeff() >= mask.y_min - 1e-12);
    CHECK(w.matrix.maxCoeff() <= mask.y_max + 1e-12);
  }

  // Determinism: regenerating with the same seed gives the same ensemble.
  WorldEnsemble again = generate_ensemble(mask, 2, 4, 1234);
  for (std::size_t w = 0; w < 4; ++w)
    CHECK((ensemble.worlds[w].matrix - again.worlds[w].matrix).norm() == 0.0);
}

TEST_CASE("a fully observed matrix leaves no room for disagreement") {
  Eigen::MatrixXd truth = rank2_truth(10, 10, 53);
  std::vector<std::vector<bool>> all(10, std::vector<bool>(10, true));
  ObservedMask mask = mask_from_dense(truth, all, 0.0, 5.0);

  WorldEnsemble ensemble = generate_ensemble(mask, 2, 3, 77);
  REQUIRE(ensemble.worlds.size() == 3);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b) {
      const double rms = (ensemble.worlds[a].matrix -
                          ensemble.worlds[b].matrix)
                             .norm() /
                         std::sqrt(100.0);
      CHECK(rms <= 1e-3);
    }
}

TEST_CASE("one starved row is enough to split the ensemble") {
  // Rank-2 10x10 truth, fully observed except row 9, which keeps a single
  // observation. Every column stays covered by the other rows, yet the
  // completions must genuinely disagree somewhere in that row.
  Eigen::MatrixXd truth = rank2_truth(10, 10, 67);
  std::vector<std::vector<bool>> observed(10, std::vector<bool>(10, true));
  for (int j = 1; j < 10; ++j) observed[9][j] = false;
  ObservedMask mask = mask_from_dense(truth, observed, 0.0, 5.0);

  WorldEnsemble ensemble = generate_ensemble(mask, 2, 4, 4242);
  REQUIRE(ensemble.worlds.size() == 4);
  for (const World& w : ensemble.worlds) CHECK(w.accepted);

  double best = 0.0;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b)
      best = std::max(best, unobserved_rms(ensemble.worlds[a].matrix,
                                           ensemble.worlds[b].matrix,
                                           observed));
  CHECK(best > 1e-3);
}

TEST_CASE("disagreement statistics match a from-scratch recomputation") {
  // Hand-built three-world ensemble over a 3x4 box [0, 2]; five entries
  // observed, seven free.
  ObservedMask mask;
  mask.rows = 3;
  mask.cols = 4;
  mask.y_min = 0.0;
  mask.y_max = 2.0;
  mask.row_idx = {0, 0, 1, 2, 2};
  mask.col_idx = {0, 1, 2, 1, 3};
  mask.value = {1.0, 0.5, 2.0, 0.25, 1.5};

  WorldEnsemble ensemble;
  ensemble.mask = mask;
  ensemble.subspace_q = Eigen::MatrixXd::Identity(3, 1);
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  for (int w = 0; w < 3; ++w) {
    World world;
    world.matrix = Eigen::MatrixXd(3, 4);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) world.matrix(i, j) = unif(rng);
    for (std::size_t e = 0; e < mask.count(); ++e)
      world.matrix(mask.row_idx[e], mask.col_idx[e]) = mask.value[e];
    world.accepted = true;
    ensemble.worlds.push_back(world);
  }

  DisagreementStats stats = disagreement_stats(ensemble);
  CHECK(stats.unobserved_count == 7);
  REQUIRE(stats.pairs.size() == 3);

  std::vector<std::vector<bool>> observed(3, std::vector<bool>(4, false));
  for (std::size_t e = 0; e < mask.count(); ++e)
    observed[mask.row_idx[e]][mask.col_idx[e]] = true;

  // Pairwise expected risks and raw RMS, recomputed by direct loops.
  double min_rms = 1e300;
  for (const PairDisagreement& pair : stats.pairs) {
    const Eigen::MatrixXd& a = ensemble.worlds[pair.world_a].matrix;
    const Eigen::MatrixXd& b = ensemble.worlds[pair.world_b].matrix;
    double nae_sum = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j)
        if (!observed[i][j]) nae_sum += std::abs(a(i, j) - b(i, j)) / 2.0;
    CHECK(pair.expected_risk == doctest::Approx(nae_sum / 7.0).epsilon(1e-12));
    // Exact-mode pair curves integrate back to their mean.
    CHECK(pair.nae_ecdf.area_over_unit() ==
          doctest::Approx(pair.expected_risk).epsilon(1e-12));
    min_rms = std::min(min_rms, unobserved_rms(a, b, observed));
  }
  CHECK(stats.min_pairwise_rms == doctest::Approx(min_rms).epsilon(1e-12));

  // Per-entry max NAE and its lower median.
  std::vector<double> max_nae;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      if (observed[i][j]) continue;
      double lo = 1e300, hi = -1e300;
      for (const World& w : ensemble.worlds) {
        lo = std::min(lo, w.matrix(i, j));
        hi = std::max(hi, w.matrix(i, j));
      }
      max_nae.push_back((hi - lo) / 2.0);
    }
  std::sort(max_nae.begin(), max_nae.end());
  CHECK(stats.median_max_nae ==
        doctest::Approx(max_nae[(max_nae.size() - 1) / 2]).epsilon(1e-12));
  CHECK(stats.max_nae_ecdf.sample_count() == 7);
}

TEST_CASE("nae is the box-normalized absolute gap") {
  CHECK(nae(1.0, 4.0, 0.0, 5.0) == doctest::Approx(0.6));
  CHECK(nae(2.5, 2.5, 0.0, 5.0) == 0.0);
  CHECK(nae(0.0, 5.0, 0.0, 5.0) == 1.0);
  CHECK_THROWS_AS(nae(1.0, 2.0, 3.0, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(nae(9.0, 1.0, 0.0, 5.0), std::domain_error);
}

TEST_CASE("world generation rejects malformed inputs") {
  Eigen::MatrixXd truth = rank2_truth(6, 5, 3);
  std::vector<std::vector<bool>> all(6, std::vector<bool>(5, true));
  ObservedMask mask = mask_from_dense(truth, all, 0.0, 5.0);

  CHECK_THROWS_AS(generate_ensemble(mask, 0, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_ensemble(mask, 2, 0, 1), std::invalid_argument);

  // Non-orthonormal subspace is refused by the single-world entry point.
  WorldEnsemble ensemble;
  ensemble.mask = mask;
  ensemble.subspace_q = Eigen::MatrixXd::Ones(6, 2);
  CHECK_THROWS_AS(
      generate_world(ensemble, mask, ensemble.subspace_q, 1, WorldGenConfig{}),
      std::invalid_argument);

  // Stats need two worlds and at least one unobserved entry.
  WorldEnsemble single = generate_ensemble(mask, 2, 1, 9);
  CHECK_THROWS_AS(disagreement_stats(single), std::invalid_argument);
  WorldEnsemble pair_but_full = generate_ensemble(mask, 2, 2, 9);
  CHECK_THROWS_AS(disagreement_stats(pair_but_full), std::invalid_argument);
}

TEST_CASE("binned disagreement curves stay close to the exact ones") {
  // Force the histogram path with a tiny exact_limit and compare the area
  // (expected risk) against the exact-mode value.
  Eigen::MatrixXd truth = rank2_truth(8, 8, 19);
  std::vector<std::vector<bool>> observed(8, std::vector<bool>(8, true));
  for (int j = 2; j < 8; ++j) observed[7][j] = false;
  ObservedMask mask = mask_from_dense(truth, observed, 0.0, 5.0);
  WorldEnsemble ensemble = generate_ensemble(mask, 2, 3, 31);

  DisagreementStats exact = disagreement_stats(ensemble);
  DisagreementOptions cramped;
  cramped.exact_limit = 1;  // everything through the histogram path
  cramped.bins = 4096;
  DisagreementStats binned = disagreement_stats(ensemble, cramped);
  REQUIRE(exact.pairs.size() == binned.pairs.size());
  for (std::size_t p = 0; p < exact.pairs.size(); ++p)
    CHECK(binned.pairs[p].expected_risk ==
          doctest::Approx(exact.pairs[p].expected_risk).epsilon(1e-3));
  CHECK(binned.median_max_nae ==
        doctest::Approx(exact.median_max_nae).epsilon(1e-3));
}
