#include <doctest.h>

#include <cmath>

#include "isocal/error.hpp"
#include "isocal/recalibration.hpp"
#include "isocal/synth.hpp"
#include "oracles.hpp"

using namespace isocal;

namespace {

std::vector<double> pit_values(const SynthData& d) {
  std::vector<double> c;
  for (std::size_t i = 0; i < d.forecasts.size(); ++i) c.push_back(d.forecasts[i].cdf(d.observations[i]));
  return c;
}

double frequency_below(const std::vector<double>& c, double p) {
  std::size_t k = 0;
  for (double v : c) k += v <= p;
  return static_cast<double>(k) / static_cast<double>(c.size());
}

}  // namespace

TEST_CASE("counter rng is a pure function of (seed, counter)") {
  const CounterRng a(42), b(42), c(43);
  for (std::uint64_t i = 0; i < 100; ++i) {
    CHECK(a.bits(i) == b.bits(i));
    CHECK(a.uniform(i) > 0.0);
    CHECK(a.uniform(i) < 1.0);
  }
  CHECK(a.bits(0) != c.bits(0));
  // SplitMix64 with state 0: the first output is a published constant.
  CHECK(CounterRng(0).bits(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("generate is deterministic and chunk independent") {
  SynthConfig cfg;
  cfg.n = 300;
  cfg.alpha = 1.5;
  cfg.seed = 7;
  cfg.mode = SynthMode::sample_set;
  cfg.k = 10;
  const SynthData a = generate(cfg), b = generate(cfg);
  REQUIRE(a.observations.size() == 300);
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK(a.observations[i] == b.observations[i]);
    CHECK(a.forecasts[i].samples().size() == 10);
  }
  // A shorter run is a prefix of the longer one.
  cfg.n = 100;
  const SynthData prefix = generate(cfg);
  for (std::size_t i = 0; i < 100; ++i) CHECK(prefix.observations[i] == a.observations[i]);
}

TEST_CASE("series layout matches flat generation") {
  SynthConfig cfg;
  cfg.n = 50;
  cfg.seed = 3;
  const SynthSeries s = generate_series(cfg);
  const SynthData d = generate(cfg);
  CHECK(s.observations.h == 1);
  CHECK(s.observations.w == 1);
  CHECK(s.observations.time_count() == 50);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(s.observations.values[i] == d.observations[i]);
    CHECK(s.forecasts.means[i] == d.forecasts[i].gaussian_params().mean);
  }

  cfg.grid = GridDims{3, 4, 24};
  const SynthSeries g = generate_series(cfg);
  CHECK_NOTHROW(g.observations.validate());
  CHECK_NOTHROW(g.forecasts.validate());
  CHECK(g.observations.values.size() == 3 * 4 * 24);
}

TEST_CASE("invalid configurations") {
  SynthConfig cfg;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(generate(cfg), InvalidArgument);
  cfg.alpha = 1.0;
  cfg.n = 0;
  CHECK_THROWS_AS(generate(cfg), InvalidArgument);
  cfg.n = 5;
  cfg.mode = SynthMode::sample_set;
  cfg.k = 1;
  CHECK_THROWS_AS(generate(cfg), InvalidArgument);
}

TEST_CASE("true recalibration map") {
  for (double p : {0.01, 0.3, 0.77}) CHECK(true_recalibration_map(1.0, p) == doctest::Approx(p).epsilon(1e-14));
  CHECK(true_recalibration_map(2.0, 0.5) == 0.5);
  const double expected = oracle::normal_cdf(2.0 * oracle::normal_quantile(0.8));
  CHECK(std::fabs(true_recalibration_map(2.0, 0.8) - expected) <= 1e-12);
  CHECK(std::fabs(expected - 0.9538) <= 1e-4);
  CHECK_THROWS_AS(true_recalibration_map(2.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(true_recalibration_map(2.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(true_recalibration_map(0.0, 0.5), InvalidArgument);
}

TEST_CASE("PIT values are uniform for the calibrated emulator") {
  SynthConfig cfg;
  cfg.n = 100000;
  cfg.seed = 2024;
  const auto c = pit_values(generate(cfg));
  CHECK(oracle::ks_uniform(c) <= 1.95 / std::sqrt(100000.0));
}

TEST_CASE("miscalibrated emulators follow the analytic frequency") {
  SynthConfig cfg;
  cfg.n = 100000;
  cfg.seed = 5;
  cfg.alpha = 2.0;
  const auto over = pit_values(generate(cfg));
  CHECK(std::fabs(frequency_below(over, 0.8) - oracle::normal_cdf(2.0 * oracle::normal_quantile(0.8))) <= 0.01);
  for (int i = 1; i < 20; ++i) {
    const double p = i / 20.0;
    if (p > 0.5) CHECK(frequency_below(over, p) > p);
    if (p < 0.5) CHECK(frequency_below(over, p) < p);
    CHECK(std::fabs(frequency_below(over, p) - true_recalibration_map(2.0, p)) <= 0.01);
  }

  cfg.alpha = 0.5;
  const auto under = pit_values(generate(cfg));
  const double expected = oracle::normal_cdf(0.5 * oracle::normal_quantile(0.9));
  CHECK(std::fabs(expected - 0.7392) <= 1e-4);
  CHECK(std::fabs(frequency_below(under, 0.9) - expected) <= 0.01);
}
