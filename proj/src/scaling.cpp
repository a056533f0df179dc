#include "tvaudit/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tvaudit {

namespace {

void check_law_params(double alpha, double x_min) {
  if (alpha <= 0.0) throw std::domain_error("alpha must be positive");
  if (x_min <= 0.0) throw std::domain_error("x_min must be positive");
}

}  // namespace

double log10_scaling_bound(double alpha, double x_min, double domain_size) {
  check_law_params(alpha, x_min);
  if (domain_size < 1.0)
    throw std::domain_error("domain_size must be at least 1");
  return (alpha + 1.0) * std::log10(domain_size / 2.0) - std::log10(alpha) -
         alpha * std::log10(x_min);
}

double scaling_bound(double alpha, double x_min, double domain_size) {
  // May overflow to inf for extreme domains; log10_scaling_bound is the
  // robust form and what reports should display.
  return std::pow(10.0, log10_scaling_bound(alpha, x_min, domain_size));
}

double benchmark_cost(double alpha, double x_min, double domain_size,
                      double threshold_x) {
  check_law_params(alpha, x_min);
  if (threshold_x < x_min)
    throw std::domain_error("threshold_x must be at least x_min");
  return domain_size * (1.0 - std::pow(x_min / threshold_x, alpha));
}

CostReport cost_report(double alpha, double x_min, double domain_size,
                       double threshold_x) {
  CostReport r;
  r.log10_scaling_lower_bound = log10_scaling_bound(alpha, x_min, domain_size);
  r.scaling_lower_bound = std::pow(10.0, r.log10_scaling_lower_bound);
  r.benchmark_nodes = benchmark_cost(alpha, x_min, domain_size, threshold_x);
  r.alpha = alpha;
  r.x_min = x_min;
  r.domain_size = domain_size;
  r.threshold_x = threshold_x;
  return r;
}

double simulate_first_success(double p, long long trials, std::uint64_t seed) {
  if (!(p > 0.0) || p > 1.0)
    throw std::domain_error("success probability must be in (0, 1]");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (p == 1.0) return 1.0;
  std::mt19937_64 rng(seed);
  std::geometric_distribution<long long> failures(p);
  double sum = 0.0;
  for (long long t = 0; t < trials; ++t)
    sum += static_cast<double>(failures(rng) + 1);
  return sum / static_cast<double>(trials);
}

std::vector<CoveragePoint> simulate_coverage_growth(
    double alpha, double x_min, int domain_size, int rank_k,
    const std::vector<long long>& sample_schedule, std::uint64_t seed,
    WeightLaw law) {
  check_law_params(alpha, x_min);
  if (domain_size < 1)
    throw std::invalid_argument("domain_size must be at least 1");
  if (rank_k < 0) throw std::invalid_argument("rank_k must be nonnegative");
  for (long long m : sample_schedule)
    if (m < 0) throw std::invalid_argument("sample counts must be nonnegative");

  std::mt19937_64 rng(seed);
  std::vector<double> weights(static_cast<std::size_t>(domain_size), 1.0);
  if (law == WeightLaw::Pareto) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& w : weights)
      w = x_min * std::pow(1.0 - unif(rng), -1.0 / alpha);
  }
  std::discrete_distribution<int> pick(weights.begin(), weights.end());

  // Simulate one cumulative stream and read coverage off at each scheduled m
  // (processed in ascending order, reported in input order).
  std::vector<std::size_t> order(sample_schedule.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample_schedule[a] < sample_schedule[b];
  });

  std::vector<long long> hits(static_cast<std::size_t>(domain_size), 0);
  long long covered = 0;  // nodes with >= rank_k hits
  if (rank_k == 0) covered = domain_size;
  long long drawn = 0;
  std::vector<CoveragePoint> out(sample_schedule.size());
  for (std::size_t oi : order) {
    const long long m = sample_schedule[oi];
    for (; drawn < m; ++drawn) {
      auto node = static_cast<std::size_t>(pick(rng));
      if (++hits[node] == rank_k) ++covered;
    }
    out[oi] = {m, static_cast<double>(covered) / static_cast<double>(domain_size)};
  }
  return out;
}

}  // namespace tvaudit
