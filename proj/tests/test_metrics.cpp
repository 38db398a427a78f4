#include <doctest.h>

#include <cmath>
#include <sstream>

#include "isocal/error.hpp"
#include "isocal/metrics.hpp"
#include "isocal/synth.hpp"
#include "oracles.hpp"

using namespace isocal;

namespace {

SynthData synth(double alpha, std::size_t n, std::uint64_t seed, double bias = 0.0) {
  SynthConfig cfg;
  cfg.alpha = alpha;
  cfg.n = n;
  cfg.seed = seed;
  cfg.bias = bias;
  return generate(cfg);
}

ReliabilityCurve curve_of(std::vector<double> levels, std::vector<double> empirical) {
  ReliabilityCurve c;
  c.weights.assign(levels.size(), 1.0);
  c.levels = std::move(levels);
  c.empirical = std::move(empirical);
  return c;
}

}  // namespace

TEST_CASE("coverage examples") {
  const std::vector<double> big(3, 1e300), obs = {-1, 0, 1};
  CHECK(coverage(big, obs) == 1.0);
  const std::vector<double> zeros(3, 0.0);
  CHECK(coverage(zeros, obs) == doctest::Approx(2.0 / 3.0));
  CHECK(coverage(obs, obs) == 1.0);
  CHECK_THROWS_AS(coverage(std::vector<double>{}, std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(coverage(zeros, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("calibration error variants") {
  const auto perfect = curve_of({0.25, 0.5, 0.75}, {0.25, 0.5, 0.75});
  for (auto v : {CeVariant::signed_, CeVariant::absolute, CeVariant::squared}) {
    CHECK(calibration_error(perfect, v) == 0.0);
  }
  const auto c = curve_of({0.25, 0.5, 0.75}, {0.2, 0.5, 0.8});
  CHECK(calibration_error(c, CeVariant::signed_) == doctest::Approx(0.0));
  CHECK(calibration_error(c, CeVariant::absolute) == doctest::Approx(0.1 / 3.0));
  CHECK(calibration_error(c, CeVariant::squared) == doctest::Approx(0.005 / 3.0));
  CHECK(calibration_error(curve_of({0.9}, {0.98}), CeVariant::signed_) == doctest::Approx(-0.08));
}

TEST_CASE("property: CE variant ordering") {
  const SynthData d = synth(1.7, 2000, 2);
  const auto curve = reliability_curve(d.forecasts, d.observations, default_levels());
  const double s = calibration_error(curve, CeVariant::signed_);
  const double a = calibration_error(curve, CeVariant::absolute);
  const double q = calibration_error(curve, CeVariant::squared);
  CHECK(a >= std::fabs(s));
  CHECK(q <= a);
}

TEST_CASE("reliability curve examples") {
  const auto levels = default_levels();
  REQUIRE(levels.size() == 19);

  const SynthData calibrated = synth(1.0, 100000, 77);
  const auto c1 = reliability_curve(calibrated.forecasts, calibrated.observations, levels);
  for (std::size_t j = 0; j < levels.size(); ++j) CHECK(std::fabs(c1.empirical[j] - levels[j]) <= 0.01);
  for (double w : c1.weights) CHECK(w == 1.0);

  const SynthData wide = synth(2.0, 100000, 78);
  const std::vector<double> p90 = {0.9};
  const auto c2 = reliability_curve(wide.forecasts, wide.observations, p90);
  const double expected = oracle::normal_cdf(2.0 * oracle::normal_quantile(0.9));
  CHECK(expected == doctest::Approx(0.9948).epsilon(1e-4));
  CHECK(std::fabs(c2.empirical[0] - expected) <= 0.005);

  const std::vector<PredictiveDist> f(4, PredictiveDist::gaussian(0, 1));
  const std::vector<double> below = {-1, -2, -3, -0.5};
  const std::vector<double> half = {0.5};
  CHECK(reliability_curve(f, below, half).empirical[0] == 1.0);

  const std::vector<double> bad_levels = {0.5, 0.4};
  CHECK_THROWS_AS(reliability_curve(f, below, bad_levels), InvalidArgument);
}

TEST_CASE("property: coverage is nondecreasing in the level") {
  const SynthData d = synth(0.7, 3000, 9);
  const auto curve = reliability_curve(d.forecasts, d.observations, level_grid(0.01, 0.99, 0.01));
  for (std::size_t j = 1; j < curve.empirical.size(); ++j) {
    CHECK(curve.empirical[j] >= curve.empirical[j - 1]);
  }
}

TEST_CASE("property: in-sample calibrated curve is within 1/sqrt(T) + 1/T") {
  const std::size_t n = 4000;
  const SynthData d = synth(2.0, n, 10);
  const auto cf = fit_calibrator(d.forecasts, d.observations);
  const auto curve =
      reliability_curve(d.forecasts, d.observations, default_levels(), Recalibrator{&cf, {}});
  const double tol = 1.0 / std::sqrt(static_cast<double>(n)) + 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < curve.levels.size(); ++j) {
    CHECK(std::fabs(curve.empirical[j] - curve.levels[j]) <= tol);
  }
}

TEST_CASE("sharpness examples") {
  const std::vector<PredictiveDist> two = {PredictiveDist::gaussian(0, 1),
                                           PredictiveDist::gaussian(3, std::sqrt(3.0))};
  CHECK(sharpness(two) == doctest::Approx(2.0));

  // Midpoint-grid variance of N(0,1), computed from the oracle quantiles.
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < kSharpnessGrid; ++i) {
    const double q = oracle::normal_quantile((i + 0.5) / kSharpnessGrid);
    s1 += q;
    s2 += q * q;
  }
  const double grid_var = s2 / kSharpnessGrid - (s1 / kSharpnessGrid) * (s1 / kSharpnessGrid);
  CHECK(std::fabs(grid_var - 1.0) <= 0.01);

  const auto id = CalibratedForecaster::pooled(IsotonicMap::identity());
  const std::vector<PredictiveDist> std_normal = {PredictiveDist::gaussian(0, 1)};
  CHECK(sharpness(std_normal, Recalibrator{&id, {}}) == doctest::Approx(grid_var).epsilon(1e-10));

  // alpha = 2: recalibrated N(0,2) forecasts behave like N(0,1).
  const SynthData cal = synth(2.0, 5000, 12);
  const auto cf = fit_calibrator(cal.forecasts, cal.observations);
  const std::vector<PredictiveDist> wide(3, PredictiveDist::gaussian(0, 2));
  CHECK(std::fabs(sharpness(wide, Recalibrator{&cf, {}}) - 1.0) <= 0.1);
  CHECK(sharpness(wide) == 4.0);
}

TEST_CASE("sharpness rejects a degenerate calibrator") {
  const auto flat = CalibratedForecaster::pooled(IsotonicMap({0.2, 0.8}, {0.5, 0.5}));
  const std::vector<PredictiveDist> f = {PredictiveDist::gaussian(0, 1)};
  CHECK_THROWS_WITH(sharpness(f, Recalibrator{&flat, {}}), "calibrator too degenerate for sharpness");
  CHECK_THROWS_AS(sharpness(std::vector<PredictiveDist>{}), InvalidArgument);
}

TEST_CASE("property: uncalibrated sharpness is shift invariant") {
  SynthData d = synth(1.3, 500, 13);
  const double before = sharpness(d.forecasts);
  std::vector<PredictiveDist> shifted;
  for (const auto& f : d.forecasts) {
    shifted.push_back(PredictiveDist::gaussian(f.gaussian_params().mean + 250.0, f.gaussian_params().std));
  }
  CHECK(sharpness(shifted) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("mid-quantile MAE") {
  const std::vector<PredictiveDist> f = {PredictiveDist::gaussian(1, 1), PredictiveDist::gaussian(2, 3)};
  const std::vector<double> medians = {1, 2};
  CHECK(mae_mid_quantile(f, medians) == 0.0);

  const std::vector<PredictiveDist> std_normal(2, PredictiveDist::gaussian(0, 1));
  const std::vector<double> obs = {1, -1};
  const auto id = CalibratedForecaster::pooled(IsotonicMap::identity());
  CHECK(mae_mid_quantile(std_normal, obs, Recalibrator{&id, {}}) == doctest::Approx(1.0));

  const SynthData cal = synth(2.0, 5000, 14);
  const SynthData test = synth(2.0, 5000, 15);
  const auto cf = fit_calibrator(cal.forecasts, cal.observations);
  const double raw = mae_mid_quantile(test.forecasts, test.observations);
  const double calibrated = mae_mid_quantile(test.forecasts, test.observations, Recalibrator{&cf, {}});
  CHECK(std::fabs(calibrated - raw) / raw <= 0.02);
}

TEST_CASE("per-cell recalibrator uses each forecast's cell") {
  const auto id = IsotonicMap::identity();
  const auto flat_low = IsotonicMap({0.0, 1.0}, {0.0, 0.5});
  const CalibratedForecaster cf(Scope::per_cell, 1, 2, {id, flat_low});
  const std::vector<PredictiveDist> f(2, PredictiveDist::gaussian(0, 1));
  const std::vector<double> obs = {0.0, 0.0};
  const std::vector<Cell> cells = {{0, 0}, {0, 1}};
  const std::vector<double> half = {0.25};
  // Cell (0,1) maps level 0.25 back to raw level 0.5, i.e. the median 0.
  const auto curve = reliability_curve(f, obs, half, Recalibrator{&cf, cells});
  CHECK(curve.empirical[0] == 0.5);
  const std::vector<Cell> wrong = {{0, 0}, {0, 1}, {0, 0}};
  CHECK_THROWS_AS(reliability_curve(f, obs, half, Recalibrator{&cf, wrong}), InvalidArgument);
}

TEST_CASE("level grid and CSV export") {
  const auto levels = level_grid(0.05, 0.95, 0.05);
  REQUIRE(levels.size() == 19);
  CHECK(levels[2] == 0.15);
  CHECK(levels.back() == 0.95);

  std::ostringstream out;
  write_reliability_csv(curve_of({0.1, 0.5}, {1.0 / 3.0, 0.5}), out);
  CHECK(out.str() == "level,empirical,weight\n0.1,0.333333333,1\n0.5,0.5,1\n");
}
