#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "isocal/gridio.hpp"
#include "isocal/predictive.hpp"

namespace isocal {

// Counter-based generator: draw number i of a stream is the SplitMix64
// output at position i, mix(seed + (i + 1) * 0x9E3779B97F4A7C15), where mix
// is the SplitMix64 finalizer. Any draw can be produced independently of the
// others, so chunked generation reproduces sequential generation exactly.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const;
  // ((bits >> 11) + 0.5) * 2^-53, strictly inside (0, 1).
  double uniform(std::uint64_t counter) const;
  // Inverse-CDF transform of uniform(counter).
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t seed_;
};

enum class SynthMode { gaussian_params, sample_set };

struct GridDims {
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t t = 1;
};

struct SynthConfig {
  std::size_t n = 1000;  // ignored when grid is set
  double alpha = 1.0;    // reported std / true std
  double bias = 0.0;     // added to the reported mean
  SynthMode mode = SynthMode::gaussian_params;
  std::size_t k = 10;    // samples per forecast in sample_set mode
  std::uint64_t seed = 0;
  std::optional<GridDims> grid;

  // Throws InvalidArgument if n < 1, alpha <= 0 or (sample_set) k < 2.
  void validate() const;
  std::size_t count() const { return grid ? grid->h * grid->w * grid->t : n; }
};

struct SynthData {
  std::vector<PredictiveDist> forecasts;
  std::vector<double> observations;
};

// Item i (row-major (time, row, col) order in grid mode) owns counters
// i * (3 + k) .. i * (3 + k) + 2 + k: true mean, true std, observation
// noise, then the k ensemble draws.
//
// True mean ~ U(-5, 5), or in grid mode a smooth field
// 3 sin(2 pi (col + 0.5) / W) cos(pi (row + 0.5) / H) + 2 sin(2 pi t / 12);
// true std ~ U(0.5, 2); Y ~ N(mean, std^2). The forecast reports
// gaussian(mean + bias, alpha * std) or k draws from that distribution.
SynthData generate(const SynthConfig& cfg);

// Same data laid out as files. Without a grid, n items become a 1 x 1
// series over times 0..n-1.
struct SynthSeries {
  GridSeries observations;
  ForecastSeries forecasts;
};
SynthSeries generate_series(const SynthConfig& cfg);

// Phi(alpha * Phi^{-1}(p)): the distribution of the PIT value F(Y) for a
// forecaster whose spread is alpha times the truth, i.e. the ideal
// recalibration map. Throws unless alpha > 0 and 0 < p < 1.
double true_recalibration_map(double alpha, double p);

}  // namespace isocal
