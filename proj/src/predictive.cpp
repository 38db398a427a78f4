#include "isocal/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isocal/error.hpp"
#include "isocal/normal.hpp"

namespace isocal {

PredictiveDist PredictiveDist::gaussian(double mean, double std) {
  if (!std::isfinite(mean)) throw InvalidArgument("gaussian mean must be finite");
  if (!std::isfinite(std) || !(std > 0.0)) throw InvalidArgument("nonpositive std");
  PredictiveDist d;
  d.gauss_ = {mean, std};
  return d;
}

PredictiveDist PredictiveDist::empirical(std::vector<double> samples) {
  if (samples.empty()) throw InvalidArgument("empirical distribution needs at least one sample");
  for (double s : samples) {
    if (!std::isfinite(s)) throw InvalidArgument("non-finite sample");
  }
  std::sort(samples.begin(), samples.end());

  PredictiveDist d;
  const double lo = samples.front();
  const double hi = samples.back();
  if (lo < hi) {
    const auto next = std::upper_bound(samples.begin(), samples.end(), lo);
    const auto prev = std::lower_bound(samples.begin(), samples.end(), hi) - 1;
    d.gap_lo_ = *next - lo;
    d.gap_hi_ = hi - *prev;
  }
  d.samples_ = std::make_shared<const std::vector<double>>(std::move(samples));
  return d;
}

const GaussianParams& PredictiveDist::gaussian_params() const {
  if (!is_gaussian()) throw InvalidArgument("distribution is not gaussian");
  return gauss_;
}

std::span<const double> PredictiveDist::samples() const {
  if (is_gaussian()) return {};
  return *samples_;
}

double PredictiveDist::cdf(double y) const {
  if (!std::isfinite(y)) throw InvalidArgument("invalid input value");
  if (is_gaussian()) return normal_cdf((y - gauss_.mean) / gauss_.std);
  return empirical_cdf(y);
}

double PredictiveDist::empirical_cdf(double y) const {
  const std::vector<double>& x = *samples_;
  const double n = static_cast<double>(x.size());
  if (gap_lo_ == 0.0) return y < x.front() ? 0.0 : 1.0;

  const double first_level = 0.5 / n;
  const double last_level = (n - 0.5) / n;
  if (y < x.front()) {
    return std::max(0.0, first_level - (x.front() - y) / (gap_lo_ * n));
  }
  if (y > x.back()) {
    return std::min(1.0, last_level + (y - x.back()) / (gap_hi_ * n));
  }

  // k samples are <= y, and x[k-1] <= y < x[k] unless y is the maximum.
  const auto k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), y) - x.begin());
  const double level = (static_cast<double>(k) - 0.5) / n;
  if (x[k - 1] == y) return level;
  return level + (y - x[k - 1]) / (x[k] - x[k - 1]) / n;
}

double PredictiveDist::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile level out of range");
  if (is_gaussian()) return gauss_.mean + gauss_.std * normal_quantile(p);
  return empirical_quantile(p);
}

double PredictiveDist::empirical_quantile(double p) const {
  const std::vector<double>& x = *samples_;
  const std::size_t n = x.size();
  const double nd = static_cast<double>(n);
  if (gap_lo_ == 0.0) return x.front();

  auto level = [nd](std::size_t i) { return (static_cast<double>(i) + 0.5) / nd; };
  if (p <= level(0)) return x.front() - (level(0) - p) * nd * gap_lo_;
  if (p > level(n - 1)) return x.back() + (p - level(n - 1)) * nd * gap_hi_;

  // Smallest i with level(i) >= p; i >= 1 here.
  auto i = static_cast<std::size_t>(std::ceil(p * nd - 0.5));
  i = std::clamp<std::size_t>(i, 1, n - 1);
  while (i > 1 && level(i - 1) >= p) --i;
  while (level(i) < p) ++i;

  const double frac = std::min(1.0, (p - level(i - 1)) * nd);
  return x[i - 1] + frac * (x[i] - x[i - 1]);
}

double PredictiveDist::mean() const {
  if (is_gaussian()) return gauss_.mean;
  const std::vector<double>& x = *samples_;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double PredictiveDist::variance() const {
  if (is_gaussian()) return gauss_.std * gauss_.std;
  const std::vector<double>& x = *samples_;
  const double m = mean();
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size());
}

PredictiveDist from_samples(std::span<const double> samples, bool fit_gaussian) {
  if (samples.size() < 2) throw InvalidArgument("at least 2 samples required");
  for (double s : samples) {
    if (!std::isfinite(s)) throw InvalidArgument("non-finite sample");
  }
  if (!fit_gaussian) return PredictiveDist::empirical({samples.begin(), samples.end()});

  const double n = static_cast<double>(samples.size());
  const double m = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : samples) ss += (s - m) * (s - m);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw InvalidArgument("nonpositive std: samples are constant");
  return PredictiveDist::gaussian(m, sd);
}

}  // namespace isocal
