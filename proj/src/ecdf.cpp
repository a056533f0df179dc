#include "tvaudit/ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvaudit {

StepEcdf StepEcdf::exact(std::vector<double> samples) {
  if (samples.empty())
    throw std::invalid_argument("eCDF needs at least one sample");
  std::sort(samples.begin(), samples.end());
  StepEcdf e;
  e.count_ = samples.size();
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    e.x_.push_back(samples[i]);
    e.cum_.push_back(static_cast<double>(i + 1) / n);
  }
  return e;
}

StepEcdf StepEcdf::binned(const std::vector<double>& samples, int bins,
                          double lo, double hi) {
  if (bins < 1) throw std::invalid_argument("bin count must be positive");
  if (!(lo < hi)) throw std::invalid_argument("bin range must be nonempty");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (double v : samples) {
    auto cell = static_cast<long>(std::floor((v - lo) / width));
    cell = std::clamp(cell, 0L, static_cast<long>(bins - 1));
    ++counts[static_cast<std::size_t>(cell)];
  }
  StepEcdf e = from_counts(counts, lo, hi);
  if (e.count_ == 0) throw std::invalid_argument("eCDF needs at least one sample");
  return e;
}

StepEcdf StepEcdf::from_counts(const std::vector<std::size_t>& counts,
                               double lo, double hi) {
  StepEcdf e;
  for (std::size_t c : counts) e.count_ += c;
  if (e.count_ == 0) return e;
  const double n = static_cast<double>(e.count_);
  const double width = (hi - lo) / static_cast<double>(counts.size());
  std::size_t running = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    running += counts[i];
    e.x_.push_back(lo + width * static_cast<double>(i + 1));
    e.cum_.push_back(static_cast<double>(running) / n);
  }
  return e;
}

double StepEcdf::value(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  if (it == x_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - x_.begin()) - 1];
}

double StepEcdf::area_over_unit() const {
  // Walk the staircase across [0, 1]; Kahan-compensated so the exact
  // identity with the sample mean survives long step lists.
  double area = 0.0, comp = 0.0;
  auto add = [&](double term) {
    double y = term - comp;
    double t = area + y;
    comp = (t - area) - y;
    area = t;
  };
  double prev = 0.0, f = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (x_[i] <= 0.0) {
      f = cum_[i];
      continue;
    }
    if (x_[i] >= 1.0) break;
    add((x_[i] - prev) * (1.0 - f));
    prev = x_[i];
    f = cum_[i];
  }
  add((1.0 - prev) * (1.0 - f));
  return area;
}

}  // namespace tvaudit
