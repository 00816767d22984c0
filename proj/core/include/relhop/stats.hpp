#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace relhop {

/// Welford accumulator for mean and population variance.
class RunningMoments {
 public:
  void add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return count_ == 0 ? 0.0 : m2_ / static_cast<double>(count_); }
  double sample_variance() const noexcept {
    return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Mean of `xs` with its standard error (sample sd / sqrt(n); 0 for n < 2).
inline Estimate mean_with_error(std::span<const double> xs) {
  RunningMoments acc;
  for (double x : xs) acc.add(x);
  const auto n = static_cast<double>(xs.size());
  return {acc.mean(), xs.size() < 2 ? 0.0 : std::sqrt(acc.sample_variance() / n)};
}

/// Jackknife estimate of the mean over independent replicas.
inline Estimate jackknife_mean(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return {};
  double total = 0.0;
  for (double x : xs) total += x;
  const double full = total / static_cast<double>(n);
  if (n < 2) return {full, 0.0};
  std::vector<double> leave_one_out(n);
  double loo_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    leave_one_out[k] = (total - xs[k]) / static_cast<double>(n - 1);
    loo_mean += leave_one_out[k];
  }
  loo_mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : leave_one_out) ss += (v - loo_mean) * (v - loo_mean);
  const double var = ss * static_cast<double>(n - 1) / static_cast<double>(n);
  return {full, std::sqrt(var)};
}

}  // namespace relhop
