#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "isocal/gridio.hpp"
#include "isocal/isotonic.hpp"
#include "isocal/predictive.hpp"

namespace isocal {

// One calibration training point: c = F_t(Y_t) and y = the empirical
// frequency of forecasts whose PIT value falls strictly below c.
struct CalibrationPair {
  double c = 0.0;
  double y = 0.0;
};

// Fraction of `cs` strictly below p. Throws on empty cs.
double empirical_cdf_level(std::span<const double> cs, double p);

// c_t = cdf(F_t, Y_t), y_t = empirical_cdf_level(all c, c_t), in input
// order. Requires matching lengths and at least 2 points.
std::vector<CalibrationPair> build_calibration_dataset(std::span<const PredictiveDist> forecasts,
                                                       std::span<const double> observations);

enum class Scope { pooled, per_cell };

struct CalibratedQuantile {
  double value = 0.0;
  // True when the recalibration map is flat at the requested level and the
  // raw level was clamped to 1e-6 or 1 - 1e-6.
  bool saturated = false;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool saturated = false;
};

// A fitted recalibration R, either one map for the whole grid or one map per
// grid cell (row-major). h and w record the grid the model was trained on.
class CalibratedForecaster {
 public:
  CalibratedForecaster(Scope scope, std::size_t h, std::size_t w, std::vector<IsotonicMap> maps);

  static CalibratedForecaster pooled(IsotonicMap map, std::size_t h = 1, std::size_t w = 1);

  Scope scope() const { return scope_; }
  std::size_t h() const { return h_; }
  std::size_t w() const { return w_; }
  Interpolation interpolation() const { return maps_.front().interpolation(); }
  const std::vector<IsotonicMap>& maps() const { return maps_; }

  // Pooled models ignore the cell. Per-cell models require one in range.
  const IsotonicMap& map_for(std::optional<Cell> cell = std::nullopt) const;

  // R(F(y)).
  double cdf(const PredictiveDist& d, double y, std::optional<Cell> cell = std::nullopt) const;

  // R^{-1}(p), the raw quantile level whose calibrated CDF is p, clamped to
  // [1e-6, 1 - 1e-6] with the saturated flag set when R is flat there.
  CalibratedQuantile raw_level(double p, std::optional<Cell> cell = std::nullopt) const;

  // F^{-1}(R^{-1}(p)). Throws unless 0 < p < 1.
  CalibratedQuantile quantile(const PredictiveDist& d, double p,
                              std::optional<Cell> cell = std::nullopt) const;

  // Calibrated quantiles at (1 - level) / 2 and (1 + level) / 2.
  Interval central_interval(const PredictiveDist& d, double level,
                            std::optional<Cell> cell = std::nullopt) const;

  friend bool operator==(const CalibratedForecaster&, const CalibratedForecaster&) = default;

 private:
  Scope scope_;
  std::size_t h_;
  std::size_t w_;
  std::vector<IsotonicMap> maps_;
};

// Single map fitted on every (forecast, observation) pair.
CalibratedForecaster fit_calibrator(std::span<const PredictiveDist> forecasts,
                                    std::span<const double> observations,
                                    Interpolation mode = Interpolation::linear);

struct FitOptions {
  Scope scope = Scope::pooled;
  Interpolation interpolation = Interpolation::linear;
  std::size_t min_points_per_cell = 30;
  // Worker threads for per-cell fitting; 0 picks hardware concurrency. The
  // result does not depend on the thread count.
  std::size_t threads = 0;
};

struct FitSummary {
  std::size_t points = 0;          // calibration pairs used
  std::size_t missing = 0;         // observations skipped as missing
  std::size_t excluded_cells = 0;  // per-cell: cells with missing data
};

// Fits on gridded data. Per-cell scope fits one map per cell from that
// cell's time series; cells with any missing observation are excluded from
// per-cell fitting and receive the map pooled over the remaining cells.
// Throws InvalidArgument naming the cell if a cell has fewer than
// min_points_per_cell time steps.
CalibratedForecaster fit_calibrator(const ForecastSeries& forecasts, const GridSeries& observations,
                                    const FitOptions& options, FitSummary* summary = nullptr);

}  // namespace isocal
