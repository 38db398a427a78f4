#include "isocal/synth.hpp"

#include <cmath>
#include <numbers>

#include "isocal/error.hpp"
#include "isocal/normal.hpp"

namespace isocal {

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const { return normal_quantile(uniform(counter)); }

void SynthConfig::validate() const {
  if (!grid && n < 1) throw InvalidArgument("n must be at least 1");
  if (grid && (grid->h < 1 || grid->w < 1 || grid->t < 1)) {
    throw InvalidArgument("grid dimensions must be positive");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be positive");
  if (!std::isfinite(bias)) throw InvalidArgument("bias must be finite");
  if (mode == SynthMode::sample_set && k < 2) throw InvalidArgument("k must be at least 2");
}

namespace {

struct Draw {
  double mean;       // reported mean
  double std;        // reported std
  double observation;
};

std::size_t draws_per_item(const SynthConfig& cfg) {
  return 3 + (cfg.mode == SynthMode::sample_set ? cfg.k : 0);
}

Draw draw_item(const SynthConfig& cfg, const CounterRng& rng, std::size_t i) {
  const std::uint64_t base = static_cast<std::uint64_t>(i) * draws_per_item(cfg);
  double mu;
  if (cfg.grid) {
    const GridDims& g = *cfg.grid;
    const std::size_t col = i % g.w;
    const std::size_t row = (i / g.w) % g.h;
    const std::size_t t = i / (g.w * g.h);
    constexpr double pi = std::numbers::pi;
    mu = 3.0 * std::sin(2.0 * pi * (static_cast<double>(col) + 0.5) / static_cast<double>(g.w)) *
             std::cos(pi * (static_cast<double>(row) + 0.5) / static_cast<double>(g.h)) +
         2.0 * std::sin(2.0 * pi * static_cast<double>(t) / 12.0);
  } else {
    mu = -5.0 + 10.0 * rng.uniform(base);
  }
  const double sigma = 0.5 + 1.5 * rng.uniform(base + 1);
  const double y = mu + sigma * rng.normal(base + 2);
  return {mu + cfg.bias, cfg.alpha * sigma, y};
}

std::vector<double> draw_members(const SynthConfig& cfg, const CounterRng& rng, std::size_t i,
                                 const Draw& d) {
  const std::uint64_t base = static_cast<std::uint64_t>(i) * draws_per_item(cfg) + 3;
  std::vector<double> members(cfg.k);
  for (std::size_t j = 0; j < cfg.k; ++j) members[j] = d.mean + d.std * rng.normal(base + j);
  return members;
}

}  // namespace

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  const CounterRng rng(cfg.seed);
  const std::size_t n = cfg.count();
  SynthData out;
  out.forecasts.reserve(n);
  out.observations.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Draw d = draw_item(cfg, rng, i);
    out.observations.push_back(d.observation);
    if (cfg.mode == SynthMode::gaussian_params) {
      out.forecasts.push_back(PredictiveDist::gaussian(d.mean, d.std));
    } else {
      out.forecasts.push_back(PredictiveDist::empirical(draw_members(cfg, rng, i, d)));
    }
  }
  return out;
}

SynthSeries generate_series(const SynthConfig& cfg) {
  cfg.validate();
  const GridDims dims = cfg.grid.value_or(GridDims{1, 1, cfg.n});
  const CounterRng rng(cfg.seed);
  const std::size_t n = dims.h * dims.w * dims.t;

  SynthSeries out;
  out.observations.h = out.forecasts.h = dims.h;
  out.observations.w = out.forecasts.w = dims.w;
  for (std::size_t t = 0; t < dims.t; ++t) out.observations.times.push_back(static_cast<std::int64_t>(t));
  out.forecasts.times = out.observations.times;
  out.observations.values.reserve(n);

  const bool ensemble = cfg.mode == SynthMode::sample_set;
  out.forecasts.kind = ensemble ? ForecastKind::ensemble : ForecastKind::gaussian;
  out.forecasts.members = ensemble ? cfg.k : 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Draw d = draw_item(cfg, rng, i);
    out.observations.values.push_back(d.observation);
    if (ensemble) {
      const std::vector<double> members = draw_members(cfg, rng, i, d);
      out.forecasts.samples.insert(out.forecasts.samples.end(), members.begin(), members.end());
    } else {
      out.forecasts.means.push_back(d.mean);
      out.forecasts.stds.push_back(d.std);
    }
  }
  return out;
}

double true_recalibration_map(double alpha, double p) {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("probability must lie in (0,1)");
  return normal_cdf(alpha * normal_quantile(p));
}

}  // namespace isocal
