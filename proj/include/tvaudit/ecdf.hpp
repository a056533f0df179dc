#pragma once

#include <cstddef>
#include <vector>

namespace tvaudit {

// Right-continuous empirical distribution step function. Stored as sorted
// breakpoints with the cumulative fraction reached at each; F(t) = 0 before
// the first breakpoint.
class StepEcdf {
 public:
  // Exact eCDF: one breakpoint per distinct sample value.
  static StepEcdf exact(std::vector<double> samples);
  // Histogram eCDF on `bins` equal cells over [lo, hi]; samples are clamped
  // into the range and each breakpoint sits at its cell's upper edge, so the
  // curve is a conservative staircase within one cell width of the exact one.
  static StepEcdf binned(const std::vector<double>& samples, int bins,
                         double lo, double hi);
  // Same, from pre-accumulated cell counts.
  static StepEcdf from_counts(const std::vector<std::size_t>& counts, double lo,
                              double hi);

  double value(double t) const;  // F(t)
  // Integral of the survival function 1 - F over [0, 1]; for samples in
  // [0, 1] this equals their arithmetic mean (exact step-function identity).
  double area_over_unit() const;

  std::size_t sample_count() const { return count_; }
  const std::vector<double>& breakpoints() const { return x_; }
  const std::vector<double>& cumulative() const { return cum_; }

 private:
  std::vector<double> x_;    // ascending
  std::vector<double> cum_;  // non-decreasing, ends at 1
  std::size_t count_ = 0;
};

}  // namespace tvaudit
