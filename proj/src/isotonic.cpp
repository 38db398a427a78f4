#include "isocal/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isocal/error.hpp"

namespace isocal {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

IsotonicMap::IsotonicMap(std::vector<double> breakpoints, std::vector<double> values,
                         Interpolation mode)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), mode_(mode) {
  if (breakpoints_.empty()) throw InvalidArgument("isotonic map needs at least one knot");
  if (breakpoints_.size() != values_.size()) {
    throw InvalidArgument("isotonic map breakpoints and values differ in length");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!in_unit(breakpoints_[i]) || !in_unit(values_[i])) {
      throw InvalidArgument("isotonic map knot outside the unit square");
    }
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
      throw InvalidArgument("isotonic map breakpoints must be strictly increasing");
    }
    if (i > 0 && values_[i] < values_[i - 1]) {
      throw InvalidArgument("isotonic map values must be nondecreasing");
    }
  }
}

IsotonicMap IsotonicMap::identity(Interpolation mode) {
  return IsotonicMap({0.0, 1.0}, {0.0, 1.0}, mode);
}

double IsotonicMap::evaluate(double q) const {
  if (!in_unit(q)) throw InvalidArgument("evaluation point outside [0,1]");
  if (q <= breakpoints_.front()) return values_.front();
  if (q >= breakpoints_.back()) return values_.back();

  // breakpoints_[j-1] <= q < breakpoints_[j]
  const auto j = static_cast<std::size_t>(
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), q) - breakpoints_.begin());
  if (mode_ == Interpolation::step) return values_[j - 1];

  const double x0 = breakpoints_[j - 1], x1 = breakpoints_[j];
  const double y0 = values_[j - 1], y1 = values_[j];
  const double v = y0 + (q - x0) / (x1 - x0) * (y1 - y0);
  return std::clamp(v, y0, y1);
}

double IsotonicMap::inverse(double p) const {
  if (!in_unit(p)) throw InvalidArgument("probability outside [0,1]");
  if (values_.front() >= p) return 0.0;
  if (values_.back() < p) return 1.0;

  // values_[j-1] < p <= values_[j]
  const auto j = static_cast<std::size_t>(
      std::lower_bound(values_.begin(), values_.end(), p) - values_.begin());
  if (mode_ == Interpolation::step) return breakpoints_[j];

  // Bisect down to adjacent doubles so the Galois inequalities hold exactly.
  double lo = breakpoints_[j - 1], hi = breakpoints_[j];
  while (true) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (evaluate(mid) < p ? lo : hi) = mid;
  }
  return hi;
}

std::vector<double> pava(std::span<const double> ys, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != ys.size()) {
    throw InvalidArgument("weights and values differ in length");
  }
  struct Block {
    double value;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    Block b{ys[i], weights.empty() ? 1.0 : weights[i], 1};
    while (!blocks.empty() && blocks.back().value > b.value) {
      const Block& prev = blocks.back();
      const double w = prev.weight + b.weight;
      b = {(prev.weight * prev.value + b.weight * b.value) / w, w, prev.count + b.count};
      blocks.pop_back();
    }
    blocks.push_back(b);
  }

  std::vector<double> fitted;
  fitted.reserve(ys.size());
  for (const Block& b : blocks) fitted.insert(fitted.end(), b.count, b.value);
  return fitted;
}

IsotonicMap fit_isotonic(std::span<const double> xs, std::span<const double> ys,
                         std::span<const double> weights, Interpolation mode) {
  if (xs.empty()) throw InvalidArgument("isotonic fit needs at least one point");
  if (xs.size() != ys.size()) throw InvalidArgument("xs and ys differ in length");
  if (!weights.empty() && weights.size() != xs.size()) {
    throw InvalidArgument("weights differ in length from xs");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!in_unit(xs[i]) || !in_unit(ys[i])) {
      throw InvalidArgument("calibration point out of unit square");
    }
    if (!weights.empty() && !(weights[i] > 0.0 && std::isfinite(weights[i]))) {
      throw InvalidArgument("weights must be positive");
    }
  }

  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  // Merge ties in x into weighted means.
  std::vector<double> ux, uy, uw;
  for (std::size_t idx : order) {
    const double w = weights.empty() ? 1.0 : weights[idx];
    if (!ux.empty() && ux.back() == xs[idx]) {
      const double total = uw.back() + w;
      uy.back() = (uw.back() * uy.back() + w * ys[idx]) / total;
      uw.back() = total;
    } else {
      ux.push_back(xs[idx]);
      uy.push_back(ys[idx]);
      uw.push_back(w);
    }
  }

  std::vector<double> fitted = pava(uy, uw);
  for (double& v : fitted) v = std::clamp(v, 0.0, 1.0);

  std::vector<double> bp, val;
  const std::size_t n = ux.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool interior = i > 0 && i + 1 < n && fitted[i] == fitted[i - 1] &&
                          fitted[i] == fitted[i + 1];
    if (interior) continue;
    bp.push_back(ux[i]);
    val.push_back(fitted[i]);
  }
  return IsotonicMap(std::move(bp), std::move(val), mode);
}

}  // namespace isocal
