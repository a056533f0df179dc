#include "tvaudit/tail.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvaudit {

namespace {

constexpr std::size_t kMinTailPoints = 10;

struct TailMle {
  double alpha = 0.0;
  double ks = 0.0;
  std::size_t n_tail = 0;
  bool degenerate = false;  // all tail values at the threshold
};

// MLE and KS distance for a fixed threshold over sorted (ascending) values.
TailMle fit_at(const std::vector<double>& sorted, double x_min) {
  TailMle r;
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), x_min);
  r.n_tail = static_cast<std::size_t>(sorted.end() - lo);
  if (r.n_tail < kMinTailPoints) return r;

  double log_sum = 0.0;
  for (auto it = lo; it != sorted.end(); ++it) log_sum += std::log(*it / x_min);
  if (log_sum <= 0.0) {
    r.degenerate = true;
    return r;
  }
  r.alpha = static_cast<double>(r.n_tail) / log_sum;

  // Two-sided KS distance between the empirical tail CDF and the fitted
  // Pareto CDF, evaluated at the sample points.
  const double n = static_cast<double>(r.n_tail);
  double d = 0.0;
  std::size_t i = 0;
  for (auto it = lo; it != sorted.end(); ++it, ++i) {
    double f = 1.0 - std::pow(x_min / *it, r.alpha);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
  }
  r.ks = d;
  return r;
}

}  // namespace

PowerLawFit fit_pareto_tail(std::vector<double> values,
                            std::optional<double> x_min, Side side) {
  PowerLawFit fit;
  fit.side = side;
  fit.n = values.size();
  std::sort(values.begin(), values.end());

  if (x_min) {
    if (*x_min <= 0.0)
      throw std::invalid_argument("x_min must be positive");
    TailMle r = fit_at(values, *x_min);
    if (r.n_tail < kMinTailPoints)
      throw std::invalid_argument(
          "tail fit needs at least " + std::to_string(kMinTailPoints) +
          " values >= x_min, got " + std::to_string(r.n_tail));
    if (r.degenerate)
      throw std::invalid_argument(
          "all tail values equal the threshold; tail index is undefined");
    fit.alpha = r.alpha;
    fit.x_min = *x_min;
    fit.ks_distance = r.ks;
    fit.n_tail = r.n_tail;
    return fit;
  }

  // Threshold selection: try each distinct observed value as x_min, keep the
  // one minimizing the KS distance (ties break toward the longer tail).
  bool found = false, any_long_enough = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && values[i] == values[i - 1]) continue;
    if (values[i] <= 0.0) continue;
    TailMle r = fit_at(values, values[i]);
    if (r.n_tail < kMinTailPoints) break;  // later candidates only shorter
    any_long_enough = true;
    if (r.degenerate) continue;
    if (!found || r.ks < fit.ks_distance) {
      found = true;
      fit.alpha = r.alpha;
      fit.x_min = values[i];
      fit.ks_distance = r.ks;
      fit.n_tail = r.n_tail;
    }
  }
  if (!found) {
    if (any_long_enough)
      throw std::invalid_argument(
          "all tail values equal the threshold; tail index is undefined");
    throw std::invalid_argument(
        "tail fit needs at least " + std::to_string(kMinTailPoints) +
        " positive values, got " + std::to_string(values.size()));
  }
  return fit;
}

PowerLawFit fit_pareto_tail(const DegreeSequence& degrees,
                            std::optional<double> x_min) {
  std::vector<double> values(degrees.degrees.begin(), degrees.degrees.end());
  return fit_pareto_tail(std::move(values), x_min, degrees.side);
}

double survival(const PowerLawFit& fit, double k) {
  if (k <= 0.0) throw std::invalid_argument("survival requires k > 0");
  if (k <= fit.x_min) return 1.0;
  return std::pow(fit.x_min / k, fit.alpha);
}

Coverage validity_coverage(const PowerLawFit& fit, int rank_k) {
  if (rank_k < 1) throw std::invalid_argument("rank_k must be >= 1");
  Coverage c;
  c.fraction = survival(fit, static_cast<double>(rank_k));
  c.expected_nodes = static_cast<double>(fit.n) * c.fraction;
  return c;
}

double empirical_coverage(const CoreDecomposition& cd, Side side, int rank_k) {
  const auto& cores = side == Side::Left ? cd.left_core : cd.right_core;
  if (cores.empty()) return 0.0;
  std::size_t hit = 0;
  for (int c : cores)
    if (c >= rank_k) ++hit;
  return static_cast<double>(hit) / static_cast<double>(cores.size());
}

GroupCoverage empirical_coverage(const SampleGraph& g,
                                 const CoreDecomposition& cd, Side side,
                                 int rank_k, const std::string& attribute,
                                 const std::string& group) {
  const int n = side == Side::Left ? g.left_count() : g.right_count();
  GroupCoverage out;
  std::size_t hit = 0;
  for (int v = 0; v < n; ++v) {
    const MetaRecord* meta = g.meta(side, v);
    if (!meta) continue;
    auto it = meta->find(attribute);
    if (it == meta->end() || it->second != group) continue;
    ++out.group_size;
    if (cd.core(side, v) >= rank_k) ++hit;
  }
  if (out.group_size == 0) {
    out.empty_group = true;
    return out;
  }
  out.fraction = static_cast<double>(hit) / static_cast<double>(out.group_size);
  return out;
}

}  // namespace tvaudit
