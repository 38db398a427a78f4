#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "isocal/isocal.hpp"

namespace isocal::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputFlags {
  std::string forecasts;
  std::string observations;
  std::string model;
  std::string levels = "0.05:0.95:0.05";
  std::string out;
};

std::vector<double> parse_levels(const std::string& spec) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("invalid --levels '" + spec + "'");
    return v;
  };

  std::vector<std::string> parts;
  const char sep = spec.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, sep);) parts.push_back(part);

  std::vector<double> levels;
  if (sep == ':') {
    if (parts.size() != 3) throw UsageError("--levels expects start:stop:step");
    try {
      levels = level_grid(number(parts[0]), number(parts[1]), number(parts[2]));
    } catch (const InvalidArgument& e) {
      throw UsageError(std::string("--levels: ") + e.what());
    }
  } else {
    for (const auto& p : parts) levels.push_back(number(p));
  }
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (!(levels[j] > 0.0 && levels[j] < 1.0) || (j > 0 && !(levels[j] > levels[j - 1]))) {
      throw UsageError("--levels must be strictly increasing inside (0,1)");
    }
  }
  if (levels.empty()) throw UsageError("--levels is empty");
  return levels;
}

Cell parse_cell(const std::string& s) {
  unsigned long long r = 0, c = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%llu,%llu%c", &r, &c, &tail) != 2) {
    throw UsageError("invalid --cell '" + s + "', expected row,col");
  }
  return {static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
}

bool same_file(const std::string& a, const std::string& b) {
  std::error_code ec;
  if (fs::equivalent(a, b, ec)) return true;
  return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

// Calibration and evaluation data must come from distinct files.
void require_distinct(const InputFlags& in) {
  if (same_file(in.forecasts, in.observations)) {
    throw UsageError("--forecasts and --observations must be different files");
  }
  if (!in.model.empty() &&
      (same_file(in.model, in.forecasts) || same_file(in.model, in.observations))) {
    throw UsageError("--model must differ from the data files");
  }
}

std::string fmt_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string percent_delta(double before, double after) {
  if (before == 0.0) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", 100.0 * (after - before) / before);
  return buf;
}

std::string arrow_delta(double before, double after) {
  if (before == 0.0) return "(n/a)";
  const double pct = 100.0 * (after - before) / before;
  char buf[48];
  std::snprintf(buf, sizeof buf, "(%s %.1f%%)", pct < 0 ? "↓" : "↑", std::fabs(pct));
  return buf;
}

CeVariant parse_variant(const std::string& s) {
  if (s == "signed") return CeVariant::signed_;
  if (s == "absolute") return CeVariant::absolute;
  return CeVariant::squared;
}

struct Loaded {
  ForecastSeries forecasts;
  GridSeries observations;
  std::optional<CalibratedForecaster> model;
};

Loaded load_inputs(const InputFlags& in) {
  Loaded l{read_forecasts(in.forecasts), read_observations(in.observations), std::nullopt};
  if (!in.model.empty()) l.model = read_model(in.model);
  return l;
}

void check_model_dims(const CalibratedForecaster& cf, const GridSeries& obs) {
  if (cf.h() != obs.h || cf.w() != obs.w) {
    throw InvalidArgument("dimension mismatch: model was trained on a " + std::to_string(cf.h()) +
                          "x" + std::to_string(cf.w()) + " grid, data is " +
                          std::to_string(obs.h) + "x" + std::to_string(obs.w));
  }
}

// --- calibrate ------------------------------------------------------------

struct CalibrateFlags {
  InputFlags in;
  std::string scope = "pooled";
  std::string interpolation = "linear";
  std::size_t min_points = 30;
  std::size_t threads = 0;
};

int cmd_calibrate(const CalibrateFlags& f, std::ostream& out) {
  require_distinct(f.in);
  const ForecastSeries forecasts = read_forecasts(f.in.forecasts);
  const GridSeries observations = read_observations(f.in.observations);

  FitOptions opts;
  opts.scope = f.scope == "pooled" ? Scope::pooled : Scope::per_cell;
  opts.interpolation = f.interpolation == "linear" ? Interpolation::linear : Interpolation::step;
  opts.min_points_per_cell = f.min_points;
  opts.threads = f.threads;

  FitSummary summary;
  const CalibratedForecaster cf = fit_calibrator(forecasts, observations, opts, &summary);
  write_model(cf, fs::path(f.in.out));

  out << "calibration points: " << summary.points << '\n'
      << "scope: " << (opts.scope == Scope::pooled ? "pooled" : "per_cell") << '\n'
      << "grid: " << cf.h() << "x" << cf.w() << '\n'
      << "missing observations: " << summary.missing << '\n'
      << "excluded cells: " << summary.excluded_cells << '\n'
      << "model written to " << f.in.out << '\n';
  return kOk;
}

// --- evaluate -------------------------------------------------------------

struct EvaluateFlags {
  InputFlags in;
  std::string variant = "absolute";
  bool human = false;
};

Json score(const PairedData& data, const std::vector<double>& levels, CeVariant variant,
           std::optional<Recalibrator> recal) {
  const ReliabilityCurve curve =
      reliability_curve(data.forecasts, data.observations, levels, recal);
  Json j;
  j["ce"] = calibration_error(curve, variant);
  j["mae"] = mae_mid_quantile(data.forecasts, data.observations, recal);
  j["sharpness"] = sharpness(data.forecasts, recal);
  Json cov = Json::object();
  for (std::size_t k = 0; k < levels.size(); ++k) cov[fmt_number(levels[k], 9)] = curve.empirical[k];
  j["coverage"] = cov;
  Json interval = Json::object();
  for (double level : {0.5, 0.9}) {
    interval[fmt_number(level, 9)] =
        interval_coverage(data.forecasts, data.observations, level, recal);
  }
  j["interval_coverage"] = interval;
  return j;
}

void print_human(const Json& report, std::ostream& out) {
  const Json& u = report["uncalibrated"];
  const bool calibrated = report.contains("calibrated");
  char buf[256];
  out << "n = " << report["n"].get<std::size_t>() << ", CE variant: "
      << report["ce_variant"].get<std::string>() << "\n";
  std::snprintf(buf, sizeof buf, "%-22s %13s", "", "uncalibrated");
  out << buf << (calibrated ? "    calibrated  change" : "") << '\n';

  auto row = [&](const std::string& label, double before, const Json* after) {
    std::snprintf(buf, sizeof buf, "%-22s %13.4f", label.c_str(), before);
    out << buf;
    if (after) {
      std::snprintf(buf, sizeof buf, " %13.4f  %s", after->get<double>(),
                    arrow_delta(before, after->get<double>()).c_str());
      out << buf;
    }
    out << '\n';
  };
  for (const auto& [key, label] : {std::pair{"ce", "CE"}, {"mae", "MAE (median)"},
                                   {"sharpness", "sharpness"}}) {
    row(label, u[key].get<double>(), calibrated ? &report["calibrated"][key] : nullptr);
  }
  for (const auto& [level, v] : u["interval_coverage"].items()) {
    row("coverage " + level + " interval", v.get<double>(),
        calibrated ? &report["calibrated"]["interval_coverage"][level] : nullptr);
  }
}

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
  require_distinct(f.in);
  const std::vector<double> levels = parse_levels(f.in.levels);
  const Loaded l = load_inputs(f.in);
  if (l.model) check_model_dims(*l.model, l.observations);
  const PairedData data = pair_series(l.forecasts, l.observations);
  if (data.forecasts.empty()) throw InvalidArgument("no valid observations");
  const CeVariant variant = parse_variant(f.variant);

  Json report;
  report["n"] = data.forecasts.size();
  report["missing"] = data.missing;
  report["ce_variant"] = f.variant;
  report["uncalibrated"] = score(data, levels, variant, std::nullopt);
  if (l.model) {
    report["calibrated"] = score(data, levels, variant, Recalibrator{&*l.model, data.cells});
    Json delta;
    for (const char* key : {"ce", "mae", "sharpness"}) {
      delta[key] = percent_delta(report["uncalibrated"][key].get<double>(),
                                 report["calibrated"][key].get<double>());
    }
    report["delta_percent"] = delta;
  }

  std::ostringstream text;
  if (f.human) {
    print_human(report, text);
  } else {
    text << report.dump(2) << '\n';
  }
  if (f.in.out.empty()) {
    out << text.str();
  } else {
    std::ofstream file(f.in.out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(f.in.out + ": cannot open file for writing");
    file << text.str();
  }
  return kOk;
}

// --- reliability ----------------------------------------------------------

struct ReliabilityFlags {
  InputFlags in;
  std::vector<std::string> cells;
};

fs::path cell_path(const fs::path& base, const Cell& c) {
  fs::path p = base;
  p.replace_filename(base.stem().string() + "_r" + std::to_string(c.row) + "_c" +
                     std::to_string(c.col) + base.extension().string());
  return p;
}

int cmd_reliability(const ReliabilityFlags& f, std::ostream& out) {
  require_distinct(f.in);
  const std::vector<double> levels = parse_levels(f.in.levels);
  std::vector<Cell> wanted;
  for (const auto& s : f.cells) wanted.push_back(parse_cell(s));

  const Loaded l = load_inputs(f.in);
  if (l.model) check_model_dims(*l.model, l.observations);
  const PairedData data = pair_series(l.forecasts, l.observations);

  auto curve_for = [&](const std::vector<PredictiveDist>& fc, const std::vector<double>& obs,
                       std::span<const Cell> cells) {
    if (fc.empty()) throw InvalidArgument("no valid observations");
    std::optional<Recalibrator> recal;
    if (l.model) recal = Recalibrator{&*l.model, cells};
    return reliability_curve(fc, obs, levels, recal);
  };

  if (wanted.empty()) {
    write_reliability_csv(curve_for(data.forecasts, data.observations, data.cells),
                          fs::path(f.in.out));
    out << "reliability curve written to " << f.in.out << '\n';
    return kOk;
  }

  for (const Cell& cell : wanted) {
    if (cell.row >= l.observations.h || cell.col >= l.observations.w) {
      throw InvalidArgument("cell (" + std::to_string(cell.row) + "," + std::to_string(cell.col) +
                            ") outside the grid");
    }
    std::vector<PredictiveDist> fc;
    std::vector<double> obs;
    for (std::size_t k = 0; k < data.cells.size(); ++k) {
      if (data.cells[k] == cell) {
        fc.push_back(data.forecasts[k]);
        obs.push_back(data.observations[k]);
      }
    }
    const Cell one[] = {cell};
    const fs::path path = cell_path(f.in.out, cell);
    write_reliability_csv(curve_for(fc, obs, one), path);
    out << "reliability curve for cell (" << cell.row << "," << cell.col << ") written to "
        << path.string() << '\n';
  }
  return kOk;
}

// --- synth ----------------------------------------------------------------

struct SynthFlags {
  SynthConfig cfg;
  std::string mode = "gaussian_params";
  std::string grid;
  std::string out;
};

int cmd_synth(SynthFlags f, std::ostream& out) {
  f.cfg.mode = f.mode == "sample_set" ? SynthMode::sample_set : SynthMode::gaussian_params;
  if (!f.grid.empty()) {
    unsigned long long h = 0, w = 0, t = 0;
    char tail = 0;
    if (std::sscanf(f.grid.c_str(), "%llu,%llu,%llu%c", &h, &w, &t, &tail) != 3) {
      throw UsageError("invalid --grid '" + f.grid + "', expected H,W,T");
    }
    f.cfg.grid = GridDims{static_cast<std::size_t>(h), static_cast<std::size_t>(w),
                          static_cast<std::size_t>(t)};
  }
  try {
    f.cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }

  const SynthSeries series = generate_series(f.cfg);
  const std::string obs_path = f.out + "_observations.csv";
  const std::string fc_path = f.out + "_forecasts.csv";
  write_observations(series.observations, fs::path(obs_path));
  write_forecasts(series.forecasts, fs::path(fc_path));
  out << "wrote " << obs_path << " and " << fc_path << '\n';
  return kOk;
}

void add_inputs(CLI::App* cmd, InputFlags& in, bool with_model, bool with_levels) {
  cmd->add_option("--forecasts", in.forecasts, "Forecast CSV (gaussian or ensemble)")->required();
  cmd->add_option("--observations", in.observations, "Observation CSV")->required();
  if (with_model) cmd->add_option("--model", in.model, "Model JSON from `calibrate`");
  if (with_levels) {
    cmd->add_option("--levels", in.levels, "Levels as start:stop:step or a comma list")
        ->capture_default_str();
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Isotonic recalibration and verification of probabilistic forecasts", "isocal"};
  app.require_subcommand(1);

  CalibrateFlags cal;
  auto* calibrate = app.add_subcommand("calibrate", "Fit a recalibration model");
  add_inputs(calibrate, cal.in, false, false);
  calibrate->add_option("--scope", cal.scope, "pooled or per-cell")
      ->transform(CLI::Transformer(std::map<std::string, std::string>{
          {"pooled", "pooled"}, {"per-cell", "per_cell"}, {"per_cell", "per_cell"}}))
      ->capture_default_str();
  calibrate->add_option("--interpolation", cal.interpolation)
      ->check(CLI::IsMember({"linear", "step"}))
      ->capture_default_str();
  calibrate->add_option("--min-points", cal.min_points, "Minimum time steps per cell")
      ->capture_default_str();
  calibrate->add_option("--threads", cal.threads, "Per-cell worker threads (0 = auto)");
  calibrate->add_option("--out", cal.in.out, "Model JSON to write")->required();

  EvaluateFlags eval;
  auto* evaluate = app.add_subcommand("evaluate", "Score forecasts, optionally recalibrated");
  add_inputs(evaluate, eval.in, true, true);
  evaluate->add_option("--ce-variant", eval.variant)
      ->check(CLI::IsMember({"signed", "absolute", "squared"}))
      ->capture_default_str();
  evaluate->add_flag("--human", eval.human, "Table-style text instead of JSON");
  evaluate->add_option("--out", eval.in.out, "Write the report here instead of stdout");

  ReliabilityFlags rel;
  auto* reliability = app.add_subcommand("reliability", "Write reliability curve CSV");
  add_inputs(reliability, rel.in, true, true);
  reliability->add_option("--cell", rel.cells, "row,col; one file per cell (repeatable)");
  reliability->add_option("--out", rel.in.out, "CSV path")->required();

  SynthFlags syn;
  auto* synth = app.add_subcommand("synth", "Generate synthetic forecast/observation files");
  synth->add_option("--n", syn.cfg.n, "Number of forecasts (1x1 grid over n times)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--alpha", syn.cfg.alpha, "Reported std / true std")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--bias", syn.cfg.bias, "Additive mean bias")->capture_default_str();
  synth->add_option("--mode", syn.mode)
      ->check(CLI::IsMember({"gaussian_params", "sample_set"}))
      ->capture_default_str();
  synth->add_option("--k", syn.cfg.k, "Samples per forecast in sample_set mode")
      ->capture_default_str();
  synth->add_option("--seed", syn.cfg.seed)->capture_default_str();
  synth->add_option("--grid", syn.grid, "H,W,T (overrides --n)");
  synth->add_option("--out", syn.out, "Output prefix for _observations.csv/_forecasts.csv")
      ->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*calibrate) return cmd_calibrate(cal, out);
    if (*evaluate) return cmd_evaluate(eval, out);
    if (*reliability) return cmd_reliability(rel, out);
    return cmd_synth(syn, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCompute;
  }
}

}  // namespace isocal::cli
