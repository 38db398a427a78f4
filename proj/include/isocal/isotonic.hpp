#pragma once

#include <span>
#include <vector>

namespace isocal {

enum class Interpolation { step, linear };

// Monotone map R: [0,1] -> [0,1] given by knots (breakpoints, values).
// Breakpoints are strictly increasing, values nondecreasing, both in [0,1].
// Outside the knot range the end values are extended as constants.
class IsotonicMap {
 public:
  // Validates the invariants above; throws InvalidArgument on violation.
  IsotonicMap(std::vector<double> breakpoints, std::vector<double> values,
              Interpolation mode = Interpolation::linear);

  // The identity map on [0,1].
  static IsotonicMap identity(Interpolation mode = Interpolation::linear);

  double evaluate(double q) const;
  double operator()(double q) const { return evaluate(q); }

  // Generalized inverse inf{q in [0,1] : evaluate(q) >= p}, or 1 when p is
  // above the map's maximum. Flat stretches resolve to their left end.
  double inverse(double p) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  Interpolation interpolation() const { return mode_; }
  std::size_t size() const { return breakpoints_.size(); }

  friend bool operator==(const IsotonicMap&, const IsotonicMap&) = default;

 private:

  std::vector<double> breakpoints_;
  std::vector<double> values_;
  Interpolation mode_;
};

// Pool-Adjacent-Violators. `ys` are ordered by their abscissa; returns the
// weighted least-squares nondecreasing fit, one value per input. Empty
// weights means unit weights.
std::vector<double> pava(std::span<const double> ys, std::span<const double> weights = {});

// Weighted isotonic fit of ys against xs. Points sharing an x are merged
// into their weighted mean first, so the resulting breakpoints are the
// distinct xs. Interior knots of constant runs are dropped since they do
// not affect evaluate() or inverse() in either interpolation mode.
//
// Throws InvalidArgument on empty input, mismatched lengths, points outside
// the unit square or nonpositive weights.
IsotonicMap fit_isotonic(std::span<const double> xs, std::span<const double> ys,
                         std::span<const double> weights = {},
                         Interpolation mode = Interpolation::linear);

}  // namespace isocal
