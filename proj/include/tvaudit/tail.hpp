#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tvaudit/graph.hpp"

namespace tvaudit {

// Pareto tail fit for a degree sequence: Pr(K > k) = (x_min/k)^alpha for
// k >= x_min, clamped to 1 below x_min.
struct PowerLawFit {
  double alpha = 0.0;
  double x_min = 1.0;
  std::size_t n = 0;       // nodes the sequence was fit over
  Side side = Side::Left;
  double ks_distance = 0.0;  // max |empirical tail CDF - fitted CDF|
  std::size_t n_tail = 0;    // points at or above x_min
};

// Maximum-likelihood tail index over values >= x_min:
//   alpha = n_tail / sum(ln(v / x_min)).
// When x_min is not given it is chosen among the distinct observed values to
// minimize the Kolmogorov-Smirnov distance between the empirical tail and the
// fitted Pareto. Requires at least 10 tail points; all tail values equal makes
// alpha undefined and is an error.
PowerLawFit fit_pareto_tail(const DegreeSequence& degrees,
                            std::optional<double> x_min = std::nullopt);
PowerLawFit fit_pareto_tail(std::vector<double> values,
                            std::optional<double> x_min = std::nullopt,
                            Side side = Side::Left);

// Pr(K > k) under the fit: min(1, (x_min/k)^alpha). Requires k > 0.
double survival(const PowerLawFit& fit, double k);

struct Coverage {
  double expected_nodes = 0.0;
  double fraction = 0.0;
};

// Expected number (and fraction) of nodes with degree >= rank_k under the
// fitted law: n * min(1, (x_min/rank_k)^alpha). The ">= k" set is evaluated
// as the closed tail survival(k-), which for the continuous Pareto form
// coincides with the plain (x_min/k)^alpha.
Coverage validity_coverage(const PowerLawFit& fit, int rank_k);

// Exact counterpart on a decomposed graph: fraction of that side's nodes with
// core number >= rank_k.
double empirical_coverage(const CoreDecomposition& cd, Side side, int rank_k);

struct GroupCoverage {
  double fraction = 0.0;
  std::size_t group_size = 0;
  bool empty_group = false;  // no member carries the attribute value
};

// Same, restricted to nodes whose attribute equals `group`. An empty group
// yields fraction 0 with the warning flag set rather than an error.
GroupCoverage empirical_coverage(const SampleGraph& g,
                                 const CoreDecomposition& cd, Side side,
                                 int rank_k, const std::string& attribute,
                                 const std::string& group);

}  // namespace tvaudit
