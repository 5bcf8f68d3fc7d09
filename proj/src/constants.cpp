#include "loglap/constants.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace loglap {

namespace {

// Lanczos approximation, g = 607/128, 15 coefficients.
constexpr double lanczos_g = 4.7421875;
constexpr double lanczos_coef[15] = {
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    3.3994649984811888699e-5,
    4.6523628927048575665e-5,
    -9.8374475304879564677e-5,
    1.5808870322491248884e-4,
    -2.1026444172410488319e-4,
    2.1743961811521264320e-4,
    -1.6431810653676389022e-4,
    8.4418223983852743293e-5,
    -2.6190838401581408670e-5,
    3.6899182659531622704e-6,
};

constexpr double pi = 3.14159265358979323846264338327950288;

double gamma_positive(double x) {
  // Valid for x >= 0.5, evaluated as Gamma(x+1)/x. The alternating series
  // cancels a couple of digits, so accumulate in extended precision to keep
  // the double result clean.
  const long double z = (long double)x;
  long double ser = lanczos_coef[0];
  for (int k = 1; k < 15; ++k) ser += (long double)lanczos_coef[k] / (z + k);
  const long double t = z + (long double)lanczos_g + 0.5L;
  return (double)(std::sqrt(2.0L * (long double)pi) *
                  std::pow(t, z + 0.5L) * std::exp(-t) * ser / z);
}

}  // namespace

double gamma(double x) {
  if (std::isnan(x)) return x;
  if (x == std::floor(x) && x <= 0.0)
    throw std::invalid_argument("gamma: nonpositive integer argument");
  if (x < 0.5) {
    // Reflection through Gamma(x) Gamma(1-x) = pi / sin(pi x).
    return pi / (std::sin(pi * x) * gamma_positive(1.0 - x));
  }
  return gamma_positive(x);
}

double digamma(double x) {
  if (x == std::floor(x) && x <= 0.0)
    throw std::invalid_argument("digamma: nonpositive integer argument");
  double acc = 0.0;
  if (x < 0.0) {
    // digamma(x) = digamma(1-x) - pi / tan(pi x)
    acc -= pi / std::tan(pi * x);
    x = 1.0 - x;
  }
  while (x < 8.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double w = 1.0 / (x * x);
  // Asymptotic series with Bernoulli numbers B_2 .. B_14.
  double series = w * (1.0 / 12.0
              - w * (1.0 / 120.0
              - w * (1.0 / 252.0
              - w * (1.0 / 240.0
              - w * (1.0 / 132.0
              - w * (691.0 / 32760.0
              - w * (1.0 / 12.0)))))));
  return acc + std::log(x) - 0.5 / x - series;
}

double frac_constant(int dim, double s) {
  if (dim < 1) throw std::invalid_argument("frac_constant: dim must be >= 1");
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("frac_constant: s must lie in (0,1)");
  return s * std::pow(4.0, s) * gamma(0.5 * dim + s) /
         (std::pow(pi, 0.5 * dim) * gamma(1.0 - s));
}

LogConstants log_constants(int dim) {
  if (dim < 1) throw std::invalid_argument("log_constants: dim must be >= 1");
  LogConstants c;
  c.c_log = gamma(0.5 * dim) / std::pow(pi, 0.5 * dim);
  c.rho = 2.0 * std::log(2.0) + digamma(0.5 * dim) - euler_gamma;
  c.omega = 2.0 / c.c_log;
  return c;
}

double riesz_constant(int dim, double s) {
  if (dim < 1) throw std::invalid_argument("riesz_constant: dim must be >= 1");
  if (!(s > 0.0 && s < 0.5 * dim))
    throw std::invalid_argument("riesz_constant: s must lie in (0, dim/2)");
  return s * gamma(0.5 * dim - s) /
         (std::pow(4.0, s) * std::pow(pi, 0.5 * dim) * gamma(1.0 + s));
}

double form_remainder_constant(int dim) {
  if (dim < 1) throw std::invalid_argument("form_remainder_constant: dim must be >= 1");
  // omega_{dim-1} * int_0^1 r^{dim-1} ln^2 r dr = omega_{dim-1} * 2 / dim^3.
  const double omega = log_constants(dim).omega;
  return std::pow(2.0 * pi, -dim) * omega * 2.0 / std::pow(double(dim), 3);
}

double estimate_d_bound(int dim, const std::vector<double>& s_grid) {
  if (s_grid.empty()) throw std::invalid_argument("estimate_d_bound: empty grid");
  const double c_log = log_constants(dim).c_log;
  double worst = 0.0;
  for (double s : s_grid) {
    if (!(s > 0.0 && s <= 0.25))
      throw std::invalid_argument("estimate_d_bound: grid values must lie in (0, 1/4]");
    const double q = std::fabs(1.0 - frac_constant(dim, s) / (c_log * s)) / s;
    worst = std::max(worst, q);
  }
  return worst;
}

ConstantSet constant_set(int dim, double s) {
  ConstantSet out;
  const LogConstants lc = log_constants(dim);
  out.dim = dim;
  out.s = s;
  out.c_frac = frac_constant(dim, s);
  out.c_log = lc.c_log;
  out.rho = lc.rho;
  out.omega = lc.omega;
  out.kappa_riesz = (s < 0.5 * dim) ? riesz_constant(dim, s)
                                    : std::numeric_limits<double>::quiet_NaN();
  out.kappa_form = form_remainder_constant(dim);
  std::vector<double> grid;
  for (double t = 0.25; t > 2e-4; t *= 0.5) grid.push_back(t);
  out.d_bound = estimate_d_bound(dim, grid);
  return out;
}

}  // namespace loglap
