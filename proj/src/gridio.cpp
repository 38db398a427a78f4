#include "isocal/gridio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "isocal/error.hpp"

namespace isocal {

namespace {

constexpr std::string_view kObservationHeader = "time,row,col,value";
constexpr std::string_view kGaussianHeader = "time,row,col,mean,std";
constexpr std::string_view kEnsembleHeader = "time,row,col,sample_idx,value";

bool same_value(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

bool same_values(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), same_value);
}

// Line-oriented CSV reader that tracks line numbers for error messages.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  // Next nonblank line split on commas; false at end of input.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty()) continue;
      fields.clear();
      std::string_view rest = line_;
      for (;;) {
        const auto comma = rest.find(',');
        fields.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      return true;
    }
    return false;
  }

  std::string_view line() const { return line_; }
  std::size_t line_no() const { return line_no_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(name_, line_no_, what); }
  [[noreturn]] void fail_file(const std::string& what) const { throw ParseError(name_, 0, what); }
  [[noreturn]] void fail_at(std::size_t line, const std::string& what) const {
    throw ParseError(name_, line, what);
  }

  std::int64_t integer(std::string_view field, const char* what) const {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      fail(std::string("invalid ") + what + " '" + std::string(field) + "'");
    }
    return v;
  }

  std::size_t index(std::string_view field, const char* what) const {
    const std::int64_t v = integer(field, what);
    if (v < 0) fail(std::string("negative ") + what);
    return static_cast<std::size_t>(v);
  }

  // Parses a decimal number; "NaN" yields a quiet NaN.
  double number(std::string_view field, const char* what) const {
    if (field == "NaN") return std::nan("");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || std::isnan(v)) {
      fail(std::string("invalid ") + what + " '" + std::string(field) + "'");
    }
    return v;
  }

 private:
  std::istream& in_;
  std::string name_;
  std::string line_;
  std::size_t line_no_ = 0;
};

struct Entry {
  std::int64_t time;
  std::size_t row;
  std::size_t col;
  std::size_t member;
  double a;
  double b;
  std::size_t line;
};

struct Layout {
  std::vector<std::int64_t> times;
  std::size_t h = 0;
  std::size_t w = 0;
  std::size_t members = 1;

  std::size_t slot(const Entry& e) const {
    const auto t = static_cast<std::size_t>(
        std::lower_bound(times.begin(), times.end(), e.time) - times.begin());
    return (((t * h) + e.row) * w + e.col) * members + e.member;
  }
  std::size_t size() const { return times.size() * h * w * members; }
};

// Infers the grid from the entries and checks that they cover it exactly
// once. Returns the slot of each entry.
std::vector<std::size_t> layout_entries(const std::vector<Entry>& entries, Layout& layout,
                                        bool ensemble, const CsvReader& reader) {
  if (entries.empty()) reader.fail_file("no data rows");
  for (const Entry& e : entries) {
    layout.times.push_back(e.time);
    layout.h = std::max(layout.h, e.row + 1);
    layout.w = std::max(layout.w, e.col + 1);
    if (ensemble) layout.members = std::max(layout.members, e.member + 1);
  }
  std::sort(layout.times.begin(), layout.times.end());
  layout.times.erase(std::unique(layout.times.begin(), layout.times.end()), layout.times.end());

  // Guard against absurd indices before allocating the coverage map.
  const double declared = static_cast<double>(layout.times.size()) * static_cast<double>(layout.h) *
                          static_cast<double>(layout.w) * static_cast<double>(layout.members);
  if (declared > static_cast<double>(entries.size())) {
    reader.fail_file("non-rectangular grid: " + std::to_string(entries.size()) +
                     " rows cannot cover " + std::to_string(layout.times.size()) + " times x " +
                     std::to_string(layout.h) + " rows x " + std::to_string(layout.w) + " cols" +
                     (ensemble ? " x " + std::to_string(layout.members) +
                                     " samples (sample_idx must run 0..k-1 for every entry)"
                               : ""));
  }

  std::vector<std::size_t> slots(entries.size());
  std::vector<bool> seen(layout.size(), false);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    const std::size_t s = layout.slot(e);
    if (seen[s]) {
      reader.fail_at(e.line, ensemble ? "duplicate (time,row,col,sample_idx)"
                                      : "duplicate (time,row,col)");
    }
    seen[s] = true;
    slots[i] = s;
  }
  // Row count equals the slot count and there are no duplicates, so every
  // slot is covered.
  return slots;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open file for writing");
  return out;
}

void put_number(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "NaN";
    return;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.write(buf, res.ptr - buf);
}

void check_axis(std::size_t h, std::size_t w, const std::vector<std::int64_t>& times) {
  if (h == 0 || w == 0 || times.empty()) throw InvalidArgument("grid has an empty dimension");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidArgument("times must be strictly increasing");
  }
}

}  // namespace

bool GridSeries::valid(std::size_t t, std::size_t row, std::size_t col) const {
  return !std::isnan(at(t, row, col));
}

std::vector<bool> GridSeries::validity_mask() const {
  std::vector<bool> mask(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) mask[i] = !std::isnan(values[i]);
  return mask;
}

void GridSeries::validate() const {
  check_axis(h, w, times);
  if (values.size() != times.size() * h * w) throw InvalidArgument("grid values have wrong size");
  for (double v : values) {
    if (std::isinf(v)) throw InvalidArgument("grid values must be finite or NaN");
  }
}

bool operator==(const GridSeries& a, const GridSeries& b) {
  return a.h == b.h && a.w == b.w && a.times == b.times && same_values(a.values, b.values);
}

PredictiveDist ForecastSeries::at(std::size_t t, std::size_t row, std::size_t col) const {
  const std::size_t i = index(t, row, col);
  if (kind == ForecastKind::gaussian) return PredictiveDist::gaussian(means[i], stds[i]);
  const auto first = samples.begin() + static_cast<std::ptrdiff_t>(i * members);
  return PredictiveDist::empirical({first, first + static_cast<std::ptrdiff_t>(members)});
}

void ForecastSeries::validate() const {
  check_axis(h, w, times);
  const std::size_t n = times.size() * h * w;
  if (kind == ForecastKind::gaussian) {
    if (means.size() != n || stds.size() != n) throw InvalidArgument("forecast values have wrong size");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(means[i])) throw InvalidArgument("forecast mean must be finite");
      if (!(stds[i] > 0.0) || !std::isfinite(stds[i])) throw InvalidArgument("nonpositive std");
    }
  } else {
    if (members < 1) throw InvalidArgument("ensemble needs at least one member");
    if (samples.size() != n * members) throw InvalidArgument("forecast samples have wrong size");
    for (double v : samples) {
      if (!std::isfinite(v)) throw InvalidArgument("ensemble samples must be finite");
    }
  }
}

bool operator==(const ForecastSeries& a, const ForecastSeries& b) {
  return a.h == b.h && a.w == b.w && a.times == b.times && a.kind == b.kind &&
         a.members == b.members && same_values(a.means, b.means) &&
         same_values(a.stds, b.stds) && same_values(a.samples, b.samples);
}

GridSeries parse_observations(std::istream& in, const std::string& name) {
  CsvReader reader(in, name);
  std::vector<std::string_view> f;
  if (!reader.next(f) || reader.line() != kObservationHeader) {
    reader.fail("malformed header, expected '" + std::string(kObservationHeader) + "'");
  }

  std::vector<Entry> entries;
  while (reader.next(f)) {
    if (f.size() != 4) reader.fail("expected 4 fields, got " + std::to_string(f.size()));
    const double v = reader.number(f[3], "value");
    if (std::isinf(v)) reader.fail("value must be finite or NaN");
    entries.push_back({reader.integer(f[0], "time"), reader.index(f[1], "row"),
                       reader.index(f[2], "col"), 0, v, 0.0, reader.line_no()});
  }

  Layout layout;
  const std::vector<std::size_t> slots = layout_entries(entries, layout, false, reader);

  GridSeries gs;
  gs.h = layout.h;
  gs.w = layout.w;
  gs.times = std::move(layout.times);
  gs.values.assign(gs.times.size() * gs.h * gs.w, 0.0);
  for (std::size_t i = 0; i < entries.size(); ++i) gs.values[slots[i]] = entries[i].a;
  return gs;
}

GridSeries read_observations(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_observations(in, path.string());
}

void write_observations(const GridSeries& gs, std::ostream& out) {
  gs.validate();
  out << kObservationHeader << '\n';
  for (std::size_t t = 0; t < gs.time_count(); ++t) {
    for (std::size_t r = 0; r < gs.h; ++r) {
      for (std::size_t c = 0; c < gs.w; ++c) {
        out << gs.times[t] << ',' << r << ',' << c << ',';
        put_number(out, gs.at(t, r, c));
        out << '\n';
      }
    }
  }
}

void write_observations(const GridSeries& gs, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_observations(gs, out);
}

ForecastSeries parse_forecasts(std::istream& in, const std::string& name) {
  CsvReader reader(in, name);
  std::vector<std::string_view> f;
  if (!reader.next(f)) reader.fail("empty forecast file");

  ForecastSeries fs;
  if (reader.line() == kGaussianHeader) {
    fs.kind = ForecastKind::gaussian;
  } else if (reader.line() == kEnsembleHeader) {
    fs.kind = ForecastKind::ensemble;
  } else {
    reader.fail("malformed header, expected '" + std::string(kGaussianHeader) + "' or '" +
                std::string(kEnsembleHeader) + "'");
  }
  const bool ensemble = fs.kind == ForecastKind::ensemble;

  std::vector<Entry> entries;
  while (reader.next(f)) {
    if (f.size() != 5) reader.fail("expected 5 fields, got " + std::to_string(f.size()));
    Entry e{reader.integer(f[0], "time"), reader.index(f[1], "row"), reader.index(f[2], "col"),
            0, 0.0, 0.0, reader.line_no()};
    if (ensemble) {
      e.member = reader.index(f[3], "sample_idx");
      e.a = reader.number(f[4], "value");
      if (!std::isfinite(e.a)) reader.fail("ensemble value must be finite");
    } else {
      e.a = reader.number(f[3], "mean");
      e.b = reader.number(f[4], "std");
      if (!std::isfinite(e.a)) reader.fail("mean must be finite");
      if (!(e.b > 0.0) || !std::isfinite(e.b)) reader.fail("nonpositive std");
    }
    entries.push_back(e);
  }

  Layout layout;
  const std::vector<std::size_t> slots = layout_entries(entries, layout, ensemble, reader);

  fs.h = layout.h;
  fs.w = layout.w;
  fs.times = std::move(layout.times);
  const std::size_t n = fs.times.size() * fs.h * fs.w;
  if (ensemble) {
    fs.members = layout.members;
    fs.samples.assign(n * fs.members, 0.0);
    for (std::size_t i = 0; i < entries.size(); ++i) fs.samples[slots[i]] = entries[i].a;
  } else {
    fs.means.assign(n, 0.0);
    fs.stds.assign(n, 0.0);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      fs.means[slots[i]] = entries[i].a;
      fs.stds[slots[i]] = entries[i].b;
    }
  }
  return fs;
}

ForecastSeries read_forecasts(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_forecasts(in, path.string());
}

void write_forecasts(const ForecastSeries& fs, std::ostream& out) {
  fs.validate();
  const bool ensemble = fs.kind == ForecastKind::ensemble;
  out << (ensemble ? kEnsembleHeader : kGaussianHeader) << '\n';
  for (std::size_t t = 0; t < fs.time_count(); ++t) {
    for (std::size_t r = 0; r < fs.h; ++r) {
      for (std::size_t c = 0; c < fs.w; ++c) {
        const std::size_t i = fs.index(t, r, c);
        if (ensemble) {
          for (std::size_t k = 0; k < fs.members; ++k) {
            out << fs.times[t] << ',' << r << ',' << c << ',' << k << ',';
            put_number(out, fs.samples[i * fs.members + k]);
            out << '\n';
          }
        } else {
          out << fs.times[t] << ',' << r << ',' << c << ',';
          put_number(out, fs.means[i]);
          out << ',';
          put_number(out, fs.stds[i]);
          out << '\n';
        }
      }
    }
  }
}

void write_forecasts(const ForecastSeries& fs, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_forecasts(fs, out);
}

Window select_window(const GridSeries& gs, std::int64_t t, const WindowSpec& spec) {
  if (spec.depth < 1) throw InvalidArgument("window depth must be at least 1");
  if (spec.stride < 1) throw InvalidArgument("window stride must be at least 1");
  if (gs.times.empty()) throw InvalidArgument("empty grid series");

  const std::size_t count = spec.depth + spec.extension;
  const auto stride = static_cast<std::int64_t>(spec.stride);
  const std::int64_t oldest = t - 1 - static_cast<std::int64_t>(count - 1) * stride;
  if (oldest < gs.times.front()) {
    throw InvalidArgument("insufficient history for window at time " + std::to_string(t));
  }

  Window win;
  const std::size_t slice = gs.h * gs.w;
  for (std::size_t j = 0; j < count; ++j) {
    const std::int64_t when = t - 1 - static_cast<std::int64_t>(j) * stride;
    const auto it = std::lower_bound(gs.times.begin(), gs.times.end(), when);
    if (it == gs.times.end() || *it != when) {
      throw InvalidArgument("time " + std::to_string(when) + " missing from series");
    }
    const auto first = gs.values.begin() +
                       static_cast<std::ptrdiff_t>(static_cast<std::size_t>(it - gs.times.begin()) * slice);
    win.times.push_back(when);
    win.slices.emplace_back(first, first + static_cast<std::ptrdiff_t>(slice));
  }
  return win;
}

PairedData pair_series(const ForecastSeries& fs, const GridSeries& obs) {
  if (fs.h != obs.h || fs.w != obs.w) {
    throw InvalidArgument("dimension mismatch: forecasts are " + std::to_string(fs.h) + "x" +
                          std::to_string(fs.w) + ", observations are " + std::to_string(obs.h) +
                          "x" + std::to_string(obs.w));
  }
  if (fs.times != obs.times) throw InvalidArgument("forecast and observation times differ");

  PairedData out;
  for (std::size_t t = 0; t < obs.time_count(); ++t) {
    for (std::size_t r = 0; r < obs.h; ++r) {
      for (std::size_t c = 0; c < obs.w; ++c) {
        if (!obs.valid(t, r, c)) {
          ++out.missing;
          continue;
        }
        out.forecasts.push_back(fs.at(t, r, c));
        out.observations.push_back(obs.at(t, r, c));
        out.cells.push_back({r, c});
      }
    }
  }
  return out;
}

}  // namespace isocal
