#pragma once

#include <utility>
#include <vector>

#include "loglap/testlab.hpp"

namespace loglap {

// One evaluated bilinear form, split into its named contributions. For the
// order-s energy the parts are the short-range difference integral over
// |x-y| < 1, the long-range cross term, and the L2 mass term produced by
// expanding the squared difference at unit distance and beyond. For the
// logarithmic energy they are the H00 product, the negative far-field
// term, and the zero-order mass term.
struct FormValue {
  double value = 0.0;
  double near = 0.0;
  double far = 0.0;
  double mass = 0.0;
  double est_error = 0.0;
};

// Quadratic energy of the fractional Laplacian of order s,
//   C/2 * double integral of (u(x)-u(y))(v(x)-v(y)) / |x-y|^(dim+2s).
// Requires continuously differentiable profiles (tent bumps are rejected)
// and 0 < s < 1. The parts sum to value exactly as stored.
FormValue energy_s(const TestFunction& u, const TestFunction& v, double s,
                   double tol);

// Quadratic energy of the logarithmic Laplacian: the difference integral
// restricted to |x-y| < 1, minus the long-range product term against
// |x-y|^(-dim), plus the zero-order coefficient times the L2 product.
FormValue energy_log(const TestFunction& u, const TestFunction& v,
                     double tol);

// Exact splitting of the order-s energy at radius delta: a short-range
// form, a closed-form mass coefficient, and a convolution remainder,
//   energy_s(u,v) = e_near + kappa_mass * <u,v> - conv_term.
struct DeltaSplit {
  double delta = 0.0;
  double e_near = 0.0;      // difference integral over |x-y| < delta
  double kappa_mass = 0.0;  // mass coefficient, closed form in delta and s
  double conv_term = 0.0;   // truncated-kernel convolution paired with v
  double est_error = 0.0;
};

DeltaSplit delta_split(const TestFunction& u, const TestFunction& v, double s,
                       double delta, double tol);

// Slack in the two small-order expansion bounds for the quadratic energy.
// With B = kappa * (L1 norm)^2 + (L2 norm of Lap u)^2, where kappa is the
// dimensional log-squared ball integral, returns
//   slack1 = 2s*B - |E_s(u,u) - |u|^2|,
//   slack2 = 4s^2*B - |E_s(u,u) - |u|^2 - s*E_L(u,u)|.
// Both are nonnegative for twice continuously differentiable profiles.
std::pair<double, double> expansion_residuals(const TestFunction& u, double s);

// Worst slack over the sample of the two pointwise power bounds
//   |r^(2s)-1|/s       <= 2 (|ln r| on (0,1] plus r^4 beyond),
//   |(r^(2s)-1)/s - 2 ln r| <= 4s (ln^2 r on (0,1] plus r^4 beyond).
// Nonnegative for every positive r and 0 < s < 1.
double elementary_bounds_check(const std::vector<double>& r_samples, double s);

}  // namespace loglap
