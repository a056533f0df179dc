#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tvaudit/graph.hpp"
#include "tvaudit/worlds.hpp"

namespace tvaudit {

// Scalar Bregman divergences. All four satisfy loss(x, x) = 0 and loss >= 0
// on their domains; kl is the generalized form x ln(x/y) - x + y so both
// properties hold off the simplex.
enum class LossKind { Squared, LogLoss, Kl, ItakuraSaito };

const char* loss_name(LossKind kind);
double loss(LossKind kind, double x, double y);

// Expected loss of predictions h against labels f under a distribution over
// entries (uniform when no weights are given). Loss arguments are
// loss(kind, h_ij, f_ij).
double true_risk(const Eigen::MatrixXd& f, const Eigen::MatrixXd& h,
                 LossKind kind);
double true_risk(const Eigen::MatrixXd& f, const Eigen::MatrixXd& h,
                 const Eigen::MatrixXd& target_weights, LossKind kind);

enum class Estimator {
  MonteCarlo,              // mean of the sampled label values
  HorvitzThompson,         // mean of label value / weight
  EmpiricalRisk,           // mean loss
  HtWeightedEmpiricalRisk  // mean of loss / weight
};

const char* estimator_name(Estimator estimator);

struct EntrySample {
  int row = 0, col = 0;
  double f_val = 0.0;  // label under the sampled world
  double h_val = 0.0;  // hypothesis prediction
};

struct RiskEstimate {
  double value = 0.0;
  Estimator estimator = Estimator::EmpiricalRisk;
  std::size_t sample_size = 0;
  LossKind kind = LossKind::Squared;
};

// The Horvitz-Thompson variants divide each sample's contribution by its
// caller-supplied weight, which must be strictly positive: pass the target
// probability of the sampled entry to estimate population totals, or the
// density ratio p_sample/p_target to retarget draws from a biased sampler
// onto the target-distribution risk.
RiskEstimate estimate_risk(Estimator estimator,
                           const std::vector<EntrySample>& samples,
                           const std::vector<double>& weights, LossKind kind);
RiskEstimate estimate_risk(Estimator estimator,
                           const std::vector<EntrySample>& samples,
                           LossKind kind);

// True iff every row's observed-column restriction and every column's
// observed-row restriction of `f` has the same rank as `f` itself. Ranks are
// counted from singular values with threshold max(m, n) * eps * sigma_max
// (scaled by rank_scale for callers that need a looser or tighter cut).
// Every column must have at least one observation.
bool is_isomeric(const Eigen::MatrixXd& f,
                 const std::vector<std::vector<bool>>& observed,
                 double rank_scale = 1.0);

// Necessary-condition verdict: a node whose core number is below the assumed
// rank cannot support a valid test; the rest are only "possibly valid" - the
// criterion is necessary, never sufficient, so no node is ever marked "valid".
enum class Verdict { Invalid, ValidPossible };

struct ValidityVerdict {
  int rank_assumed = 0;
  std::vector<Verdict> left, right;
  double left_possible_fraction = 0.0;
  double right_possible_fraction = 0.0;
  // Per-group possible fractions when a metadata attribute is supplied.
  std::map<std::string, double> group_possible_fraction;
};

ValidityVerdict validity_verdict(const CoreDecomposition& cd, int rank_assumed);
ValidityVerdict validity_verdict(const SampleGraph& g,
                                 const CoreDecomposition& cd, int rank_assumed,
                                 Side group_side, const std::string& attribute);

// Two-sided i.i.d. concentration gap for losses in [0, 1]:
//   epsilon = sqrt(ln(2/delta) / (2m)).
double hoeffding_bound(std::size_t m, double delta);

// epsilon * Pr(risk > epsilon): lower bound on the expected risk.
double markov_lower_bound(double epsilon, double prob_exceed);

// Projects h onto the box-constrained affine set {f + basis z} by minimizing
// the divergence to h, then checks the generalized three-point inequality
// loss(f, projection) <= loss(f, h) + tolerance. Losses are summed
// coordinatewise.
struct PythagoreanResult {
  bool holds = false;
  double lhs = 0.0;  // loss(f, projection)
  double rhs = 0.0;  // loss(f, h)
  Eigen::VectorXd projection;
};

PythagoreanResult pythagorean_check(const Eigen::VectorXd& f,
                                    const Eigen::VectorXd& h,
                                    const Eigen::MatrixXd& basis, LossKind kind,
                                    double y_min, double y_max,
                                    double tolerance = 1e-8);

}  // namespace tvaudit
