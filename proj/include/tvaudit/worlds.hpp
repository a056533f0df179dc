#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tvaudit/ecdf.hpp"
#include "tvaudit/graph.hpp"

namespace tvaudit {

// Observed entries of an m x n label matrix, as triplets.
struct ObservedMask {
  int rows = 0, cols = 0;
  std::vector<int> row_idx, col_idx;
  std::vector<double> value;
  double y_min = 0.0, y_max = 1.0;

  std::size_t count() const { return value.size(); }
  // Row-major linear indices of the unobserved entries, ascending.
  std::vector<std::int64_t> unobserved_indices() const;
};

// Left nodes become rows, right nodes columns.
ObservedMask observed_mask(const SampleGraph& g);

// One dense completion consistent with the observations, the shared column
// subspace, and the label box.
struct World {
  Eigen::MatrixXd matrix;
  int rank_bound = 0;
  double fit_residual = 0.0;   // RMS error over observed entries
  double rank_residual = 0.0;  // ||Q Q^T X - X||_F / ||X||_F
  bool accepted = false;       // within (fit_tol, rank_tol)
  int iterations = 0;
  std::string note;  // diagnostics when rejected
};

struct WorldEnsemble {
  std::vector<World> worlds;
  Eigen::MatrixXd subspace_q;  // m x k orthonormal basis all worlds share
  ObservedMask mask;
  double fit_tol = 1e-3;
  double rank_tol = 1e-2;
};

struct FactorizationResult {
  Eigen::MatrixXd U, V;  // m x k and n x k
  double rms = 0.0;      // observed-entry RMS at the last iteration
  bool converged = false;
  int iterations = 0;
};

// Alternating least squares on observed entries only, ridge-stabilized.
// Non-convergence is reported through the flag, not an exception; callers
// that go on to build ensembles must check it.
FactorizationResult fit_base_factorization(const ObservedMask& mask, int rank_k,
                                           std::uint64_t seed,
                                           int max_iters = 500,
                                           double fit_tol = 1e-3);
FactorizationResult fit_base_factorization(const SampleGraph& g, int rank_k,
                                           std::uint64_t seed,
                                           int max_iters = 500,
                                           double fit_tol = 1e-3);

// Thin-QR orthonormal basis for span(U). A numerically rank-deficient U is an
// error naming how many columns were deficient.
Eigen::MatrixXd orthonormal_subspace(const Eigen::MatrixXd& U);

struct WorldGenConfig {
  double lambda_sub = 1.0;
  double lambda_fit = 1.0;
  // Starting repulsion weight; halved whenever the line search stalls, so the
  // effective weight is the largest one that keeps the clipped objective
  // decreasing.
  double lambda_div = 0.25;
  int max_iters = 400;         // repulsion phase
  int polish_iters = 2000;     // constraint-restoring phase
  double fit_tol = 1e-3;
  double rank_tol = 1e-2;
  // The polish phase stops pulling a residual once it is inside safety*tol,
  // leaving the rest of the tolerance as slack instead of collapsing every
  // world onto the same constrained optimum.
  double safety = 0.6;
};

// Projected-gradient sampler for one more completion: minimizes
//   lambda_sub ||Q Q^T X - X||^2 + lambda_fit ||P_S(X) - Y_S||^2
//     - lambda_div sum_i ||X - X_i||^2
// with entries clipped to [y_min, y_max] after every step, then restores the
// fit and rank constraints and snaps observed entries onto their labels.
World generate_world(const WorldEnsemble& ensemble_so_far,
                     const ObservedMask& mask, const Eigen::MatrixXd& q,
                     std::uint64_t seed, const WorldGenConfig& config = {});

// Convenience loop: base factorization, shared subspace, p sequential worlds.
WorldEnsemble generate_ensemble(const ObservedMask& mask, int rank_k, int p,
                                std::uint64_t seed,
                                const WorldGenConfig& config = {});

// Normalized absolute error on the label scale.
double nae(double a, double b, double y_min, double y_max);

struct PairDisagreement {
  int world_a = 0, world_b = 0;
  double expected_risk = 0.0;  // mean NAE over unobserved entries
  StepEcdf nae_ecdf;
};

struct DisagreementStats {
  std::vector<PairDisagreement> pairs;
  StepEcdf max_nae_ecdf;  // per-entry max NAE across the ensemble
  double median_max_nae = 0.0;
  double min_pairwise_rms = 0.0;  // over unobserved entries
  std::size_t unobserved_count = 0;
};

struct DisagreementOptions {
  // Pair eCDFs are exact step functions up to this many (pairs x entries);
  // beyond it they are histogram curves with `bins` cells over [0, 1].
  std::size_t exact_limit = 2'000'000;
  int bins = 512;
};

// Disagreement over unobserved entries only; needs at least two worlds.
DisagreementStats disagreement_stats(const WorldEnsemble& ensemble,
                                     const DisagreementOptions& options = {});

}  // namespace tvaudit
