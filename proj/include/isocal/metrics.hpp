#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "isocal/gridio.hpp"
#include "isocal/predictive.hpp"
#include "isocal/recalibration.hpp"

namespace isocal {

// Recalibration applied while scoring. For per-cell models `cells` is either
// parallel to the forecasts or holds a single cell used for all of them.
struct Recalibrator {
  const CalibratedForecaster* model = nullptr;
  std::span<const Cell> cells;

  std::optional<Cell> cell(std::size_t i) const;
};

struct ReliabilityCurve {
  std::vector<double> levels;     // strictly increasing in [0,1]
  std::vector<double> empirical;  // observed frequency at each level
  std::vector<double> weights;

  void validate() const;
};

enum class CeVariant { signed_, absolute, squared };

// Fraction of observations with y <= bound.
double coverage(std::span<const double> bounds, std::span<const double> observations);

// For each level p, the coverage of the (calibrated, if given) p-quantile
// upper bounds. Weights are 1.
ReliabilityCurve reliability_curve(std::span<const PredictiveDist> forecasts,
                                   std::span<const double> observations,
                                   std::span<const double> levels,
                                   std::optional<Recalibrator> recal = std::nullopt);

// (1/m) sum_j w_j d_j with d_j = p_j - phat_j (signed), |p_j - phat_j| or
// (p_j - phat_j)^2.
double calibration_error(const ReliabilityCurve& curve, CeVariant variant = CeVariant::absolute);

// Number of quantile levels used for the variance of a recalibrated
// distribution: midpoints (i - 0.5) / 512.
inline constexpr std::size_t kSharpnessGrid = 512;

// Mean predictive variance. With a recalibrator, each variance is taken over
// the calibrated quantiles on the midpoint grid. Throws if more than 5% of a
// forecast's grid quantiles are saturated.
double sharpness(std::span<const PredictiveDist> forecasts,
                 std::optional<Recalibrator> recal = std::nullopt);

// Mean |y - median| with the (calibrated, if given) median.
double mae_mid_quantile(std::span<const PredictiveDist> forecasts,
                        std::span<const double> observations,
                        std::optional<Recalibrator> recal = std::nullopt);

// Fraction of observations inside the (calibrated) central interval.
double interval_coverage(std::span<const PredictiveDist> forecasts,
                         std::span<const double> observations, double level,
                         std::optional<Recalibrator> recal = std::nullopt);

// `start:stop:step`, inclusive of stop; values rounded to 12 decimals.
std::vector<double> level_grid(double start, double stop, double step);
inline std::vector<double> default_levels() { return level_grid(0.05, 0.95, 0.05); }

// CSV with header `level,empirical,weight`, 9 significant digits.
void write_reliability_csv(const ReliabilityCurve& curve, std::ostream& out);
void write_reliability_csv(const ReliabilityCurve& curve, const std::filesystem::path& path);

}  // namespace isocal
