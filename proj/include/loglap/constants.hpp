#pragma once

#include <vector>

namespace loglap {

inline constexpr double euler_gamma = 0.5772156649015328606065120900824024310;

// Gamma and digamma for real arguments, accurate to ~1e-14 relative.
double gamma(double x);
double digamma(double x);

// Normalizing constant of the fractional Laplacian of order s in dimension dim,
//   s * 4^s * Gamma(dim/2 + s) / (pi^{dim/2} * Gamma(1 - s)).
// Requires dim >= 1 and 0 < s < 1.
double frac_constant(int dim, double s);

struct LogConstants {
  double c_log;  // pi^{-dim/2} * Gamma(dim/2)
  double rho;    // 2 ln 2 + digamma(dim/2) - euler_gamma
  double omega;  // surface measure of the unit sphere, equals 2 / c_log
};

LogConstants log_constants(int dim);

// Riesz kernel constant  s * Gamma(dim/2 - s) / (4^s * pi^{dim/2} * Gamma(1 + s)).
// Requires 0 < s < dim/2.
double riesz_constant(int dim, double s);

// (2 pi)^{-dim} * integral of ln^2|xi| over the unit ball; appears in the
// remainder bound of the small-order expansion of the quadratic form.
double form_remainder_constant(int dim);

// Grid estimate of the constant D with |1 - frac_constant(dim,s)/(c_log * s)| <= D * s:
// the maximum of that quotient divided by s over the supplied grid.
// Grid values must lie in (0, 1/4].
double estimate_d_bound(int dim, const std::vector<double>& s_grid);

struct ConstantSet {
  int dim = 0;
  double s = 0.0;
  double c_frac;
  double c_log;
  double rho;
  double omega;
  double kappa_riesz;  // NaN when s >= dim/2
  double kappa_form;
  double d_bound;  // grid estimate over a fixed geometric grid in (0, 1/4]
};

ConstantSet constant_set(int dim, double s);

}  // namespace loglap
