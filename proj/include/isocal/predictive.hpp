#pragma once

#include <memory>
#include <span>
#include <vector>

namespace isocal {

struct GaussianParams {
  double mean = 0.0;
  double std = 1.0;
};

// A forecaster's predictive distribution for one scalar target: either a
// Gaussian or an empirical sample set (ensemble / MC-dropout draws).
//
// The empirical CDF is piecewise linear through the Hazen plotting positions
// (x_(i), (i - 0.5) / n) of the sorted samples. Below the smallest sample it
// falls linearly to 0 over half of the first gap between distinct values,
// and above the largest sample it rises to 1 over half of the last gap. Tied
// samples produce a jump, with the CDF right-continuous. If every sample is
// equal the distribution is a point mass.
//
// Instances are immutable; copies share the sample buffer.
class PredictiveDist {
 public:
  // Throws InvalidArgument unless mean is finite and std is finite and > 0.
  static PredictiveDist gaussian(double mean, double std);

  // Sorts the samples. Throws InvalidArgument if empty or non-finite.
  static PredictiveDist empirical(std::vector<double> samples);

  bool is_gaussian() const { return samples_ == nullptr; }
  const GaussianParams& gaussian_params() const;
  std::span<const double> samples() const;

  // F(y). Throws InvalidArgument("invalid input value") for non-finite y.
  double cdf(double y) const;

  // Generalized inverse inf{y : F(y) >= p}. Throws InvalidArgument("quantile
  // level out of range") unless 0 < p < 1.
  double quantile(double p) const;

  // Gaussian: std^2. Empirical: population variance (divisor n).
  double variance() const;

  double mean() const;

 private:
  PredictiveDist() = default;

  double empirical_cdf(double y) const;
  double empirical_quantile(double p) const;

  GaussianParams gauss_;
  std::shared_ptr<const std::vector<double>> samples_;
  // Widths of the first and last gaps between distinct sample values; zero
  // for a point mass.
  double gap_lo_ = 0.0;
  double gap_hi_ = 0.0;
};

// Adapts raw ensemble output. Requires at least 2 finite samples. With
// fit_gaussian the result is gaussian(sample mean, sample std with divisor
// n - 1), which fails for constant samples.
PredictiveDist from_samples(std::span<const double> samples, bool fit_gaussian = false);

}  // namespace isocal
