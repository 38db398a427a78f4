#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "isocal/predictive.hpp"

namespace isocal {

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

// T x H x W scalar field (observations). Values are stored row-major in
// (time, row, col) order; NaN marks a missing value.
struct GridSeries {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<std::int64_t> times;  // strictly increasing
  std::vector<double> values;

  std::size_t time_count() const { return times.size(); }
  std::size_t cell_count() const { return h * w; }
  std::size_t index(std::size_t t, std::size_t row, std::size_t col) const {
    return (t * h + row) * w + col;
  }
  double at(std::size_t t, std::size_t row, std::size_t col) const {
    return values[index(t, row, col)];
  }
  bool valid(std::size_t t, std::size_t row, std::size_t col) const;
  std::vector<bool> validity_mask() const;

  // Throws InvalidArgument if the shape or time axis is inconsistent.
  void validate() const;

  friend bool operator==(const GridSeries& a, const GridSeries& b);
};

enum class ForecastKind { gaussian, ensemble };

// Predictive distributions over the same T x H x W layout as GridSeries.
// Gaussian series store (mean, std) per entry; ensemble series store
// `members` samples per entry, contiguous.
struct ForecastSeries {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<std::int64_t> times;
  ForecastKind kind = ForecastKind::gaussian;
  std::size_t members = 0;     // ensemble only
  std::vector<double> means;   // gaussian only
  std::vector<double> stds;    // gaussian only
  std::vector<double> samples; // ensemble only, size T*H*W*members

  std::size_t time_count() const { return times.size(); }
  std::size_t cell_count() const { return h * w; }
  std::size_t index(std::size_t t, std::size_t row, std::size_t col) const {
    return (t * h + row) * w + col;
  }
  PredictiveDist at(std::size_t t, std::size_t row, std::size_t col) const;

  void validate() const;

  friend bool operator==(const ForecastSeries& a, const ForecastSeries& b);
};

// Observations CSV: header `time,row,col,value`. Rows may come in any order
// but must cover the full time x row x col cross product exactly once.
// `NaN` marks a missing value.
GridSeries read_observations(const std::filesystem::path& path);
GridSeries parse_observations(std::istream& in, const std::string& name = "<stream>");
void write_observations(const GridSeries& gs, const std::filesystem::path& path);
void write_observations(const GridSeries& gs, std::ostream& out);

// Gaussian forecasts: `time,row,col,mean,std`. Ensemble forecasts:
// `time,row,col,sample_idx,value` with sample_idx 0..k-1 for every entry.
ForecastSeries read_forecasts(const std::filesystem::path& path);
ForecastSeries parse_forecasts(std::istream& in, const std::string& name = "<stream>");
void write_forecasts(const ForecastSeries& fs, const std::filesystem::path& path);
void write_forecasts(const ForecastSeries& fs, std::ostream& out);

struct WindowSpec {
  std::size_t depth = 1;      // k
  std::size_t extension = 0;  // m
  std::size_t stride = 1;
};

struct Window {
  std::vector<std::int64_t> times;          // newest first
  std::vector<std::vector<double>> slices;  // one H*W slice per time
};

// Input window for target time t: the depth + extension slices at t-1,
// t-1-stride, ... . Throws InvalidArgument when the history does not reach
// back far enough or a required time is absent.
Window select_window(const GridSeries& gs, std::int64_t t, const WindowSpec& spec);

// Forecast/observation pairs flattened in (time, row, col) order, skipping
// missing observations.
struct PairedData {
  std::vector<PredictiveDist> forecasts;
  std::vector<double> observations;
  std::vector<Cell> cells;
  std::size_t missing = 0;
};

// Throws InvalidArgument if the two series disagree on dims or times.
PairedData pair_series(const ForecastSeries& fs, const GridSeries& obs);

}  // namespace isocal
