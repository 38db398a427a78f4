#include "isocal/recalibration.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "isocal/error.hpp"

namespace isocal {

namespace {

constexpr double kSaturatedLevel = 1e-6;

IsotonicMap fit_map(std::span<const PredictiveDist> forecasts, std::span<const double> observations,
                    Interpolation mode) {
  const std::vector<CalibrationPair> pairs = build_calibration_dataset(forecasts, observations);
  std::vector<double> xs(pairs.size()), ys(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    xs[i] = pairs[i].c;
    ys[i] = pairs[i].y;
  }
  return fit_isotonic(xs, ys, {}, mode);
}

std::string cell_name(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + "," + std::to_string(c) + ")";
}

}  // namespace

double empirical_cdf_level(std::span<const double> cs, double p) {
  if (cs.empty()) throw InvalidArgument("empty PIT sample");
  const auto below = std::count_if(cs.begin(), cs.end(), [p](double c) { return c < p; });
  return static_cast<double>(below) / static_cast<double>(cs.size());
}

std::vector<CalibrationPair> build_calibration_dataset(std::span<const PredictiveDist> forecasts,
                                                       std::span<const double> observations) {
  if (forecasts.size() != observations.size()) {
    throw InvalidArgument("forecasts and observations differ in length");
  }
  if (forecasts.size() < 2) throw InvalidArgument("calibration set too small");

  const std::size_t n = forecasts.size();
  std::vector<CalibrationPair> pairs(n);
  for (std::size_t t = 0; t < n; ++t) pairs[t].c = forecasts[t].cdf(observations[t]);

  // Strict-less counts via a sorted copy; same result as empirical_cdf_level.
  std::vector<double> sorted(n);
  std::transform(pairs.begin(), pairs.end(), sorted.begin(), [](const auto& p) { return p.c; });
  std::sort(sorted.begin(), sorted.end());
  for (CalibrationPair& p : pairs) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), p.c) - sorted.begin();
    p.y = static_cast<double>(below) / static_cast<double>(n);
  }
  return pairs;
}

CalibratedForecaster::CalibratedForecaster(Scope scope, std::size_t h, std::size_t w,
                                           std::vector<IsotonicMap> maps)
    : scope_(scope), h_(h), w_(w), maps_(std::move(maps)) {
  if (h_ == 0 || w_ == 0) throw InvalidArgument("calibrator grid has an empty dimension");
  const std::size_t expected = scope_ == Scope::pooled ? 1 : h_ * w_;
  if (maps_.size() != expected) {
    throw InvalidArgument("calibrator expects " + std::to_string(expected) + " maps, got " +
                          std::to_string(maps_.size()));
  }
  for (const IsotonicMap& m : maps_) {
    if (m.interpolation() != maps_.front().interpolation()) {
      throw InvalidArgument("calibrator maps disagree on interpolation");
    }
  }
}

CalibratedForecaster CalibratedForecaster::pooled(IsotonicMap map, std::size_t h, std::size_t w) {
  return {Scope::pooled, h, w, {std::move(map)}};
}

const IsotonicMap& CalibratedForecaster::map_for(std::optional<Cell> cell) const {
  if (scope_ == Scope::pooled) return maps_.front();
  if (!cell) throw InvalidArgument("per-cell calibrator needs a cell");
  if (cell->row >= h_ || cell->col >= w_) {
    throw InvalidArgument("cell " + cell_name(cell->row, cell->col) + " outside " +
                          std::to_string(h_) + "x" + std::to_string(w_) + " calibrator grid");
  }
  return maps_[cell->row * w_ + cell->col];
}

double CalibratedForecaster::cdf(const PredictiveDist& d, double y, std::optional<Cell> cell) const {
  return map_for(cell).evaluate(d.cdf(y));
}

CalibratedQuantile CalibratedForecaster::raw_level(double p, std::optional<Cell> cell) const {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile level out of range");
  const double level = map_for(cell).inverse(p);
  if (level <= 0.0) return {kSaturatedLevel, true};
  if (level >= 1.0) return {1.0 - kSaturatedLevel, true};
  return {level, false};
}

CalibratedQuantile CalibratedForecaster::quantile(const PredictiveDist& d, double p,
                                                  std::optional<Cell> cell) const {
  const CalibratedQuantile level = raw_level(p, cell);
  return {d.quantile(level.value), level.saturated};
}

Interval CalibratedForecaster::central_interval(const PredictiveDist& d, double level,
                                                std::optional<Cell> cell) const {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("interval level out of range");
  const CalibratedQuantile lo = quantile(d, 0.5 * (1.0 - level), cell);
  const CalibratedQuantile hi = quantile(d, 0.5 * (1.0 + level), cell);
  return {std::min(lo.value, hi.value), std::max(lo.value, hi.value), lo.saturated || hi.saturated};
}

CalibratedForecaster fit_calibrator(std::span<const PredictiveDist> forecasts,
                                    std::span<const double> observations, Interpolation mode) {
  return CalibratedForecaster::pooled(fit_map(forecasts, observations, mode));
}

CalibratedForecaster fit_calibrator(const ForecastSeries& forecasts, const GridSeries& observations,
                                    const FitOptions& options, FitSummary* summary) {
  const PairedData paired = pair_series(forecasts, observations);
  FitSummary local;
  local.missing = paired.missing;

  if (options.scope == Scope::pooled) {
    local.points = paired.forecasts.size();
    auto cf = CalibratedForecaster::pooled(
        fit_map(paired.forecasts, paired.observations, options.interpolation), observations.h,
        observations.w);
    if (summary) *summary = local;
    return cf;
  }

  const std::size_t h = observations.h, w = observations.w, steps = observations.time_count();
  if (steps < options.min_points_per_cell) {
    throw InvalidArgument("cell " + cell_name(0, 0) + " has " + std::to_string(steps) +
                          " time steps, fewer than the required " +
                          std::to_string(options.min_points_per_cell));
  }

  // Per-cell series, split into complete cells and cells with gaps.
  const std::size_t cells = h * w;
  std::vector<bool> complete(cells, true);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < cells; ++i) {
      if (!observations.valid(t, i / w, i % w)) complete[i] = false;
    }
  }

  std::vector<std::optional<IsotonicMap>> maps(cells);
  auto fit_cell = [&](std::size_t i) {
    std::vector<PredictiveDist> f;
    std::vector<double> y;
    f.reserve(steps);
    y.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      f.push_back(forecasts.at(t, i / w, i % w));
      y.push_back(observations.at(t, i / w, i % w));
    }
    maps[i] = fit_map(f, y, options.interpolation);
  };

  std::size_t workers = options.threads ? options.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, cells);
  if (workers == 1) {
    for (std::size_t i = 0; i < cells; ++i) {
      if (complete[i]) fit_cell(i);
    }
  } else {
    // Cells are strided across workers; each writes only its own slots.
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t k = 0; k < workers; ++k) {
        pool.emplace_back([&, k] {
          try {
            for (std::size_t i = k; i < cells; i += workers) {
              if (complete[i]) fit_cell(i);
            }
          } catch (...) {
            errors[k] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const auto n_complete = static_cast<std::size_t>(std::count(complete.begin(), complete.end(), true));
  local.excluded_cells = cells - n_complete;
  local.points = n_complete * steps;
  if (n_complete == 0) throw InvalidArgument("every cell has missing observations");

  if (local.excluded_cells > 0) {
    std::vector<PredictiveDist> f;
    std::vector<double> y;
    for (std::size_t k = 0; k < paired.cells.size(); ++k) {
      const Cell& c = paired.cells[k];
      if (!complete[c.row * w + c.col]) continue;
      f.push_back(paired.forecasts[k]);
      y.push_back(paired.observations[k]);
    }
    const IsotonicMap fallback = fit_map(f, y, options.interpolation);
    for (std::size_t i = 0; i < cells; ++i) {
      if (!maps[i]) maps[i] = fallback;
    }
  }

  std::vector<IsotonicMap> out;
  out.reserve(cells);
  for (auto& m : maps) out.push_back(std::move(*m));
  if (summary) *summary = local;
  return {Scope::per_cell, h, w, std::move(out)};
}

}  // namespace isocal
