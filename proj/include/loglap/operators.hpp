#pragma once

#include <functional>
#include <vector>

#include "loglap/testlab.hpp"

namespace loglap {

struct OperatorEval {
  double value = 0.0;
  double est_error = 0.0;
  enum class Method { spatial, fourier } method = Method::spatial;
  double s = 0.0;      // order; meaningless when is_log is set
  bool is_log = false;
};

// Fractional Laplacian of order s at x, computed from the symmetrized
// second-difference form with an analytic treatment of both the singular
// head and the far-field tail. Requires u twice differentiable near x.
OperatorEval frac_lap_point(const TestFunction& u, double s, const Pt& x,
                            double tol);

// Logarithmic Laplacian at x: near part on the unit ball around x, far
// part against the |y|^(-dim) weight, plus the zero-order coefficient.
OperatorEval log_lap_point(const TestFunction& u, const Pt& x, double tol);

struct SpectralSymbol {
  enum class Kind { power, logarithmic };
  Kind kind = Kind::power;
  double s = 0.0;  // power symbol is |xi|^(2s); ignored for logarithmic
};

// Evaluate the Fourier multiplier applied to u at x by quadrature of
// symbol * transform over |xi| <= cutoff. The neglected tail is bounded
// using the known decay of the bump family's transform; an insufficient
// cutoff is reported as a failure suggesting a larger one.
OperatorEval symbol_point(const TestFunction& u, const SpectralSymbol& sym,
                          const Pt& x, double cutoff, double tol);

// Maximum over the point set of |((-Delta)^s u - u)/s - L u| where L is
// the logarithmic Laplacian; the small-order derivative diagnostic.
double diff_quotient_sup(const TestFunction& u, double s,
                         const std::vector<Pt>& pts, double tol);

// Riesz potential of f over the ball of radius ball_radius at the origin,
// with the kernel normalization tied to (-Delta)^(-s).
double riesz_potential(const std::function<double(const Pt&)>& f, int dim,
                       double ball_radius, double s, const Pt& x, double tol);
double riesz_potential(const TestFunction& f, double ball_radius, double s,
                       const Pt& x, double tol);

}  // namespace loglap
