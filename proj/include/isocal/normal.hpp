#pragma once

namespace isocal {

// Standard normal CDF, Phi(z) = erfc(-z / sqrt(2)) / 2. The C library erfc
// is accurate to a few ulp, so the absolute error is far below 1e-12.
double normal_cdf(double z);

// Inverse standard normal CDF, Wichura's AS241 (PPND16) rational
// approximation. Relative accuracy is about 1e-16 on (0, 1). Returns -inf at
// 0, +inf at 1 and NaN outside [0, 1].
double normal_quantile(double p);

}  // namespace isocal
