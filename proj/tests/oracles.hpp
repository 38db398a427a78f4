#pragma once

// Reference computations used only by the tests. Nothing here calls into
// the library, so each check compares two independent routes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

// erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)).
// Every term is positive, so the series has no cancellation; evaluated in
// long double.
inline long double erf_series(long double x) {
  if (x < 0) return -erf_series(-x);
  const long double x2 = x * x;
  long double term = x;
  long double sum = term;
  for (int n = 1; n < 2000; ++n) {
    term *= 2.0L * x2 / (2.0L * n + 1.0L);
    sum += term;
    if (term < sum * 1e-21L) break;
  }
  const long double two_over_sqrt_pi = 1.1283791670955125738961589031215452L;
  return two_over_sqrt_pi * std::exp(-x2) * sum;
}

// Lower tail from the Laplace continued fraction for the Mills ratio,
// Phi(-x) = phi(x) / (x + 1/(x + 2/(x + 3/(x + ...)))), where the series
// form would lose everything to cancellation.
inline long double normal_cdf_ld(long double z) {
  const long double sqrt2 = 1.4142135623730950488016887242096981L;
  if (z >= -5.0L) return 0.5L * (1.0L + erf_series(z / sqrt2));
  const long double x = -z;
  long double cf = x;
  for (int k = 2000; k >= 1; --k) cf = x + k / cf;
  const long double inv_sqrt_2pi = 0.3989422804014326779399460599343819L;
  return inv_sqrt_2pi * std::exp(-0.5L * x * x) / cf;
}

inline double normal_cdf(double z) { return static_cast<double>(normal_cdf_ld(z)); }

// Bisection on the reference CDF.
inline double normal_quantile(double p) {
  long double lo = -40.0L, hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (normal_cdf_ld(mid) < p ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

inline double weighted_sse(const std::vector<double>& fit, const std::vector<double>& ys,
                           const std::vector<double>& ws) {
  double s = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) s += ws[i] * (fit[i] - ys[i]) * (fit[i] - ys[i]);
  return s;
}

// Exact isotonic regression by enumerating all 2^(n-1) partitions into
// contiguous blocks. The optimum is constant on blocks at their weighted
// means, so the best partition with nondecreasing block means is optimal.
inline std::vector<double> isotonic_exact(const std::vector<double>& ys,
                                          const std::vector<double>& ws) {
  const std::size_t n = ys.size();
  std::vector<double> best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1ul << (n - 1)); ++mask) {
    std::vector<double> fit(n);
    double prev = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    std::size_t start = 0;
    for (std::size_t i = 0; i < n && monotone; ++i) {
      const bool cut = i == n - 1 || (mask >> i) & 1ul;
      if (!cut) continue;
      double sw = 0.0, swy = 0.0;
      for (std::size_t j = start; j <= i; ++j) {
        sw += ws[j];
        swy += ws[j] * ys[j];
      }
      const double m = swy / sw;
      if (m < prev) monotone = false;
      for (std::size_t j = start; j <= i; ++j) fit[j] = m;
      prev = m;
      start = i + 1;
    }
    if (!monotone) continue;
    const double sse = weighted_sse(fit, ys, ws);
    if (sse < best_sse) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

// Minimum of sum w_i (v_i - y_i)^2 over nondecreasing sequences restricted to
// the grid {0, step, 2 step, ..., 1}, by dynamic programming with prefix
// minima, followed by a local refinement on a grid ten times finer around
// the coarse solution.
inline double isotonic_grid_objective(const std::vector<double>& ys, const std::vector<double>& ws,
                                      double step = 1e-3) {
  auto solve = [&](double lo, double hi, double h) {
    const auto m = static_cast<std::size_t>(std::llround((hi - lo) / h)) + 1;
    std::vector<double> cost(m, 0.0), next(m);
    std::vector<std::vector<std::size_t>> arg(ys.size(), std::vector<std::size_t>(m));
    for (std::size_t i = 0; i < ys.size(); ++i) {
      double run = std::numeric_limits<double>::infinity();
      std::size_t run_arg = 0;
      for (std::size_t g = 0; g < m; ++g) {
        if (cost[g] < run) {
          run = cost[g];
          run_arg = g;
        }
        const double v = lo + h * static_cast<double>(g);
        next[g] = run + ws[i] * (v - ys[i]) * (v - ys[i]);
        arg[i][g] = run_arg;
      }
      cost.swap(next);
    }
    auto it = std::min_element(cost.begin(), cost.end());
    // Recover the sequence to centre the refinement.
    std::vector<double> seq(ys.size());
    std::size_t g = static_cast<std::size_t>(it - cost.begin());
    for (std::size_t i = ys.size(); i-- > 0;) {
      seq[i] = lo + h * static_cast<double>(g);
      g = arg[i][g];
    }
    return std::pair{*it, seq};
  };

  auto [coarse, seq] = solve(0.0, 1.0, step);
  const double lo = std::max(0.0, *std::min_element(seq.begin(), seq.end()) - 2 * step);
  const double hi = std::min(1.0, *std::max_element(seq.begin(), seq.end()) + 2 * step);
  const double fine = solve(lo, hi, step / 10.0).first;
  return std::min(coarse, fine);
}

// Kolmogorov-Smirnov distance between a sample and Uniform(0,1).
inline double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - xs[i]);
    d = std::max(d, xs[i] - static_cast<double>(i) / n);
  }
  return d;
}

}  // namespace oracle
