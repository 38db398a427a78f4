#include "isocal/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include "isocal/error.hpp"

namespace isocal {

namespace {

void check_paired(std::span<const PredictiveDist> forecasts, std::span<const double> observations) {
  if (forecasts.empty()) throw InvalidArgument("no forecasts");
  if (forecasts.size() != observations.size()) {
    throw InvalidArgument("forecasts and observations differ in length");
  }
}

void check_recal(const std::optional<Recalibrator>& recal, std::size_t n) {
  if (!recal) return;
  if (recal->model == nullptr) throw InvalidArgument("recalibrator without a model");
  if (recal->cells.size() > 1 && recal->cells.size() != n) {
    throw InvalidArgument("recalibrator cells differ in length from forecasts");
  }
}

double upper_bound_at(const PredictiveDist& d, double p, const std::optional<Recalibrator>& recal,
                      std::size_t i) {
  if (!recal) return d.quantile(p);
  return recal->model->quantile(d, p, recal->cell(i)).value;
}

}  // namespace

std::optional<Cell> Recalibrator::cell(std::size_t i) const {
  if (cells.empty()) return std::nullopt;
  return cells.size() == 1 ? cells.front() : cells[i];
}

void ReliabilityCurve::validate() const {
  if (levels.empty()) throw InvalidArgument("reliability curve needs at least one level");
  if (empirical.size() != levels.size() || weights.size() != levels.size()) {
    throw InvalidArgument("reliability curve columns differ in length");
  }
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (!(levels[j] >= 0.0 && levels[j] <= 1.0)) throw InvalidArgument("level outside [0,1]");
    if (j > 0 && !(levels[j] > levels[j - 1])) {
      throw InvalidArgument("levels must be strictly increasing");
    }
    if (!(weights[j] >= 0.0)) throw InvalidArgument("weights must be nonnegative");
  }
}

double coverage(std::span<const double> bounds, std::span<const double> observations) {
  if (bounds.empty()) throw InvalidArgument("coverage of an empty set");
  if (bounds.size() != observations.size()) {
    throw InvalidArgument("bounds and observations differ in length");
  }
  std::size_t below = 0;
  for (std::size_t t = 0; t < bounds.size(); ++t) {
    if (observations[t] <= bounds[t]) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(bounds.size());
}

ReliabilityCurve reliability_curve(std::span<const PredictiveDist> forecasts,
                                   std::span<const double> observations,
                                   std::span<const double> levels,
                                   std::optional<Recalibrator> recal) {
  check_paired(forecasts, observations);
  check_recal(recal, forecasts.size());
  if (levels.empty()) throw InvalidArgument("no levels");
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (!(levels[j] > 0.0 && levels[j] < 1.0)) throw InvalidArgument("levels must lie in (0,1)");
    if (j > 0 && !(levels[j] > levels[j - 1])) {
      throw InvalidArgument("levels must be strictly increasing");
    }
  }

  ReliabilityCurve curve;
  curve.levels.assign(levels.begin(), levels.end());
  curve.weights.assign(levels.size(), 1.0);
  std::vector<double> bounds(forecasts.size());
  for (double p : levels) {
    for (std::size_t t = 0; t < forecasts.size(); ++t) {
      bounds[t] = upper_bound_at(forecasts[t], p, recal, t);
    }
    curve.empirical.push_back(coverage(bounds, observations));
  }
  return curve;
}

double calibration_error(const ReliabilityCurve& curve, CeVariant variant) {
  curve.validate();
  double sum = 0.0;
  for (std::size_t j = 0; j < curve.levels.size(); ++j) {
    const double d = curve.levels[j] - curve.empirical[j];
    switch (variant) {
      case CeVariant::signed_:
        sum += curve.weights[j] * d;
        break;
      case CeVariant::absolute:
        sum += curve.weights[j] * std::fabs(d);
        break;
      case CeVariant::squared:
        sum += curve.weights[j] * d * d;
        break;
    }
  }
  return sum / static_cast<double>(curve.levels.size());
}

double sharpness(std::span<const PredictiveDist> forecasts, std::optional<Recalibrator> recal) {
  if (forecasts.empty()) throw InvalidArgument("no forecasts");
  check_recal(recal, forecasts.size());

  double total = 0.0;
  if (!recal) {
    for (const PredictiveDist& d : forecasts) total += d.variance();
    return total / static_cast<double>(forecasts.size());
  }

  // The level grid depends only on the map, so invert it once per map.
  constexpr std::size_t max_saturated = kSharpnessGrid / 20;  // 5%
  struct LevelGrid {
    std::vector<double> levels;
    bool degenerate = false;
  };
  std::unordered_map<const IsotonicMap*, LevelGrid> grids;
  auto grid_for = [&](std::size_t t) -> const LevelGrid& {
    const std::optional<Cell> cell = recal->cell(t);
    const IsotonicMap* key = &recal->model->map_for(cell);
    auto [it, inserted] = grids.try_emplace(key);
    if (inserted) {
      std::size_t saturated = 0;
      for (std::size_t i = 0; i < kSharpnessGrid; ++i) {
        const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(kSharpnessGrid);
        const CalibratedQuantile level = recal->model->raw_level(u, cell);
        if (level.saturated) ++saturated;
        it->second.levels.push_back(level.value);
      }
      it->second.degenerate = saturated > max_saturated;
    }
    return it->second;
  };

  for (std::size_t t = 0; t < forecasts.size(); ++t) {
    const LevelGrid& grid = grid_for(t);
    if (grid.degenerate) throw Error("calibrator too degenerate for sharpness");
    double s1 = 0.0, s2 = 0.0;
    for (double level : grid.levels) {
      const double q = forecasts[t].quantile(level);
      s1 += q;
      s2 += q * q;
    }
    const double m = s1 / static_cast<double>(kSharpnessGrid);
    total += std::max(0.0, s2 / static_cast<double>(kSharpnessGrid) - m * m);
  }
  return total / static_cast<double>(forecasts.size());
}

double mae_mid_quantile(std::span<const PredictiveDist> forecasts,
                        std::span<const double> observations, std::optional<Recalibrator> recal) {
  check_paired(forecasts, observations);
  check_recal(recal, forecasts.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < forecasts.size(); ++t) {
    sum += std::fabs(observations[t] - upper_bound_at(forecasts[t], 0.5, recal, t));
  }
  return sum / static_cast<double>(forecasts.size());
}

double interval_coverage(std::span<const PredictiveDist> forecasts,
                         std::span<const double> observations, double level,
                         std::optional<Recalibrator> recal) {
  check_paired(forecasts, observations);
  check_recal(recal, forecasts.size());
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("interval level out of range");
  const double lo_p = 0.5 * (1.0 - level), hi_p = 0.5 * (1.0 + level);
  std::size_t inside = 0;
  for (std::size_t t = 0; t < forecasts.size(); ++t) {
    const double lo = upper_bound_at(forecasts[t], lo_p, recal, t);
    const double hi = upper_bound_at(forecasts[t], hi_p, recal, t);
    if (observations[t] >= lo && observations[t] <= hi) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(forecasts.size());
}

std::vector<double> level_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw InvalidArgument("invalid level grid");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> levels(count);
  for (std::size_t i = 0; i < count; ++i) {
    levels[i] = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
  }
  return levels;
}

void write_reliability_csv(const ReliabilityCurve& curve, std::ostream& out) {
  curve.validate();
  out << "level,empirical,weight\n";
  char buf[96];
  for (std::size_t j = 0; j < curve.levels.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", curve.levels[j], curve.empirical[j],
                  curve.weights[j]);
    out << buf;
  }
}

void write_reliability_csv(const ReliabilityCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open file for writing");
  write_reliability_csv(curve, out);
}

}  // namespace isocal
