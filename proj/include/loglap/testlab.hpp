#pragma once

#include <stdexcept>

namespace loglap {

// A point in one or two dimensions; one-dimensional callers leave y at 0.
struct Pt {
  double x = 0.0;
  double y = 0.0;
};

inline Pt pt(double x) { return {x, 0.0}; }
inline Pt pt(double x, double y) { return {x, y}; }

enum class BumpKind {
  smooth,   // C-infinity, exp(1 - 1/(1 - |z|^2)) profile
  poly_c2,  // (1 - |z|^2)^3 profile, twice continuously differentiable
  hat       // piecewise linear tent, Lipschitz only
};

// Compactly supported radial test function centered at `center` with the
// given support radius and peak value. Gradient and Laplacian are classical
// values; for the hat they are the almost-everywhere values and carry no
// meaning on the kink set.
struct TestFunction {
  int dim = 1;
  BumpKind kind = BumpKind::smooth;
  Pt center;
  double radius = 1.0;
  double amplitude = 1.0;
  bool has_closed_fourier = false;

  double value(const Pt& p) const;
  Pt gradient(const Pt& p) const;
  double laplacian(const Pt& p) const;

  // Radial profile: value at distance t from the center.
  double radial_value(double t) const;
  double radial_second_derivative(double t) const;

  // Radial profile of the unitary Fourier transform, so that
  // u^(xi) = exp(-i xi.c) * fourier_radial(|xi|). Closed form where the
  // family admits one, oscillation-resolving panel quadrature otherwise.
  double fourier_radial(double rho, double tol = 1e-11) const;
};

TestFunction make_bump(BumpKind kind, int dim, Pt center, double radius,
                       double amplitude);

// Open interval (ax, bx) or open axis-aligned rectangle (ax,bx) x (ay,by).
struct Domain {
  enum class Kind { interval, rectangle };
  Kind kind = Kind::interval;
  int dim = 1;
  double ax = -1.0, bx = 1.0;
  double ay = 0.0, by = 0.0;

  bool contains(const Pt& p) const;
  // Distance to the boundary for interior points, exactly 0 outside.
  double delta(const Pt& p) const;
};

Domain make_interval(double a, double b);
Domain make_rectangle(double ax, double bx, double ay, double by);

inline double domain_delta(const Domain& dom, const Pt& p) {
  return dom.delta(p);
}

// Integral of |u| against the weight (1 + |x|)^(-dim - 2s) over all of
// space, resolved to a relative accuracy of about 1e-8.
double l1s_norm(const TestFunction& u, double s);

}  // namespace loglap
