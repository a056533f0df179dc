#pragma once

#include <cstdint>
#include <vector>

namespace tvaudit {

// Closed-form cost bounds for densifying a heavy-tailed domain, plus their
// Monte-Carlo counterparts.
struct CostReport {
  double scaling_lower_bound = 0.0;        // samples until a typical node is dense
  double log10_scaling_lower_bound = 0.0;  // robust display for huge magnitudes
  double benchmark_nodes = 0.0;            // expected nodes below threshold_x
  double alpha = 0.0;
  double x_min = 0.0;
  double domain_size = 0.0;
  double threshold_x = 0.0;
};

// Lower bound on the expected number of samples before a uniformly chosen
// node reaches a dense observation count:
//   (domain_size / 2)^(alpha+1) / (alpha * x_min^alpha),
// evaluated in log space to survive astronomically large domains.
double scaling_bound(double alpha, double x_min, double domain_size);
double log10_scaling_bound(double alpha, double x_min, double domain_size);

// Expected number of nodes observed fewer than threshold_x times:
//   domain_size * (1 - (x_min/threshold_x)^alpha).
// threshold_x defaults to 100 observations.
double benchmark_cost(double alpha, double x_min, double domain_size,
                      double threshold_x = 100.0);

CostReport cost_report(double alpha, double x_min, double domain_size,
                       double threshold_x = 100.0);

// Monte-Carlo mean of the number of Bernoulli(p) trials until the first
// success, averaged over `trials` independent runs. Expected value 1/p.
double simulate_first_success(double p, long long trials, std::uint64_t seed);

struct CoveragePoint {
  long long m = 0;
  double fraction = 0.0;
};

enum class WeightLaw { Pareto, Uniform };

// Draw per-node sampling weights once (Pareto(alpha, x_min) by default,
// normalized), then sample nodes with replacement and report, for each m in
// the schedule, the fraction of nodes hit at least rank_k times.
std::vector<CoveragePoint> simulate_coverage_growth(
    double alpha, double x_min, int domain_size, int rank_k,
    const std::vector<long long>& sample_schedule, std::uint64_t seed,
    WeightLaw law = WeightLaw::Pareto);

}  // namespace tvaudit
