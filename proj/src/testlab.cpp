#include "loglap/testlab.hpp"

#include <cmath>

#include "loglap/quadrature.hpp"

namespace loglap {

namespace {

double dist2(const Pt& p, const Pt& c) {
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  return dx * dx + dy * dy;
}

}  // namespace

double TestFunction::radial_value(double t) const {
  const double z2 = (t * t) / (radius * radius);
  if (z2 >= 1.0) return 0.0;
  switch (kind) {
    case BumpKind::smooth: {
      const double w = 1.0 - z2;
      return amplitude * std::exp(1.0 - 1.0 / w);
    }
    case BumpKind::poly_c2: {
      const double q = 1.0 - z2;
      return amplitude * q * q * q;
    }
    case BumpKind::hat:
      return amplitude * (1.0 - std::sqrt(z2));
  }
  return 0.0;
}

double TestFunction::radial_second_derivative(double t) const {
  const double r2 = radius * radius;
  const double z2 = (t * t) / r2;
  if (z2 >= 1.0) return 0.0;
  switch (kind) {
    case BumpKind::smooth: {
      const double w = 1.0 - z2;
      const double phi = amplitude * std::exp(1.0 - 1.0 / w);
      const double w2 = w * w;
      return phi *
             (4.0 * t * t / (r2 * r2 * w2 * w2) -
              8.0 * t * t / (r2 * r2 * w2 * w) - 2.0 / (r2 * w2));
    }
    case BumpKind::poly_c2: {
      const double q = 1.0 - z2;
      return amplitude * (24.0 * q * t * t / (r2 * r2) - 6.0 * q * q / r2);
    }
    case BumpKind::hat:
      return 0.0;
  }
  return 0.0;
}

double TestFunction::value(const Pt& p) const {
  return radial_value(std::sqrt(dist2(p, center)));
}

Pt TestFunction::gradient(const Pt& p) const {
  const double r2 = radius * radius;
  const double rho2 = dist2(p, center);
  if (rho2 >= r2) return {0.0, 0.0};
  const double dx = p.x - center.x;
  const double dy = (dim == 2) ? p.y - center.y : 0.0;
  switch (kind) {
    case BumpKind::smooth: {
      const double w = 1.0 - rho2 / r2;
      const double u = amplitude * std::exp(1.0 - 1.0 / w);
      const double fac = -2.0 * u / (r2 * w * w);
      return {fac * dx, fac * dy};
    }
    case BumpKind::poly_c2: {
      const double q = 1.0 - rho2 / r2;
      const double fac = -6.0 * amplitude * q * q / r2;
      return {fac * dx, fac * dy};
    }
    case BumpKind::hat: {
      const double rho = std::sqrt(rho2);
      if (rho == 0.0) return {0.0, 0.0};
      const double fac = -amplitude / (radius * rho);
      return {fac * dx, fac * dy};
    }
  }
  return {0.0, 0.0};
}

double TestFunction::laplacian(const Pt& p) const {
  const double r2 = radius * radius;
  const double rho2 = dist2(p, center);
  if (rho2 >= r2) return 0.0;
  switch (kind) {
    case BumpKind::smooth: {
      const double w = 1.0 - rho2 / r2;
      const double u = amplitude * std::exp(1.0 - 1.0 / w);
      const double w2 = w * w;
      return u * (4.0 * rho2 / (r2 * r2 * w2 * w2) -
                  8.0 * rho2 / (r2 * r2 * w2 * w) -
                  2.0 * dim / (r2 * w2));
    }
    case BumpKind::poly_c2: {
      const double q = 1.0 - rho2 / r2;
      return amplitude *
             (24.0 * q * rho2 / (r2 * r2) - 6.0 * dim * q * q / r2);
    }
    case BumpKind::hat: {
      if (dim == 1) return 0.0;
      const double rho = std::sqrt(rho2);
      if (rho == 0.0) return 0.0;
      return -amplitude / (radius * rho);
    }
  }
  return 0.0;
}

double TestFunction::fourier_radial(double rho, double tol) const {
  if (rho < 0) throw std::invalid_argument("fourier_radial: rho < 0");
  const double a = rho * radius;
  const double scale = std::fabs(amplitude) * radius + 1e-300;

  if (dim == 1) {
    if (kind == BumpKind::poly_c2 && a >= 0.5) {
      const double j = std::cyl_bessel_j(3.5, a);
      return 3.0 * std::sqrt(2.0) * amplitude * radius *
             std::pow(2.0 / a, 3.5) * j;
    }
    if (kind == BumpKind::hat) {
      const double c = std::sqrt(2.0 / M_PI) * amplitude;
      if (a < 1e-4) return c * 0.5 * radius * (1.0 - a * a / 12.0);
      return c * (1.0 - std::cos(a)) / (radius * rho * rho);
    }
    // Oscillation-resolving panels: a few per period of cos(rho tau).
    const int npan = 4 + static_cast<int>(a / 2.0);
    std::vector<double> brk(npan + 1);
    for (int i = 0; i <= npan; ++i) brk[i] = radius * i / npan;
    auto f = [&](double tau) {
      return radial_value(tau) * std::cos(rho * tau);
    };
    return std::sqrt(2.0 / M_PI) *
           adaptive_integrate(f, brk, tol * scale).value;
  }

  // Two dimensions: Hankel transform of order zero.
  if (kind == BumpKind::poly_c2 && a >= 0.5) {
    return amplitude * radius * radius * 48.0 * std::cyl_bessel_j(4.0, a) /
           (a * a * a * a);
  }
  const int npan = 4 + static_cast<int>(a / 2.0);
  std::vector<double> brk(npan + 1);
  for (int i = 0; i <= npan; ++i) brk[i] = radius * i / npan;
  auto f = [&](double tau) {
    return radial_value(tau) * std::cyl_bessel_j(0.0, rho * tau) * tau;
  };
  return adaptive_integrate(f, brk, tol * scale * radius).value;
}

TestFunction make_bump(BumpKind kind, int dim, Pt center, double radius,
                       double amplitude) {
  if (!(radius > 0)) {
    throw std::invalid_argument("make_bump: radius must be positive");
  }
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("make_bump: dim must be 1 or 2");
  }
  TestFunction u;
  u.dim = dim;
  u.kind = kind;
  u.center = center;
  u.radius = radius;
  u.amplitude = amplitude;
  u.has_closed_fourier =
      (kind == BumpKind::poly_c2) || (kind == BumpKind::hat && dim == 1);
  return u;
}

bool Domain::contains(const Pt& p) const {
  if (kind == Kind::interval) return p.x > ax && p.x < bx;
  return p.x > ax && p.x < bx && p.y > ay && p.y < by;
}

double Domain::delta(const Pt& p) const {
  if (!contains(p)) return 0.0;
  double d = std::min(p.x - ax, bx - p.x);
  if (kind == Kind::rectangle) {
    d = std::min(d, std::min(p.y - ay, by - p.y));
  }
  return d;
}

Domain make_interval(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("make_interval: need a < b");
  Domain d;
  d.kind = Domain::Kind::interval;
  d.dim = 1;
  d.ax = a;
  d.bx = b;
  return d;
}

Domain make_rectangle(double ax, double bx, double ay, double by) {
  if (!(ax < bx) || !(ay < by)) {
    throw std::invalid_argument("make_rectangle: need ax < bx and ay < by");
  }
  Domain d;
  d.kind = Domain::Kind::rectangle;
  d.dim = 2;
  d.ax = ax;
  d.bx = bx;
  d.ay = ay;
  d.by = by;
  return d;
}

double l1s_norm(const TestFunction& u, double s) {
  if (s < 0) throw std::invalid_argument("l1s_norm: s must be nonnegative");
  const double r = u.radius;

  if (u.dim == 1) {
    const double c = u.center.x;
    std::vector<double> brk = {c - r, c, c + r};
    if (0.0 > c - r && 0.0 < c + r) brk.push_back(0.0);
    auto f = [&](double x) {
      return std::fabs(u.value(pt(x))) *
             std::pow(1.0 + std::fabs(x), -1.0 - 2.0 * s);
    };
    const double scale = std::fabs(u.amplitude) * r + 1e-300;
    double v = adaptive_integrate(f, brk, 1e-6 * scale).value;
    return adaptive_integrate(f, brk, 1e-9 * std::fabs(v) + 1e-300).value;
  }

  // Polar form about the bump center; the angular factor is a pure weight
  // integral, so the amplitude enters only through the radial profile.
  const double cn = std::hypot(u.center.x, u.center.y);
  auto weight_angle = [&](double rho) {
    auto g = [&](double theta) {
      const double d =
          std::sqrt(cn * cn + rho * rho + 2.0 * cn * rho * std::cos(theta));
      return std::pow(1.0 + d, -2.0 - 2.0 * s);
    };
    std::vector<double> brk = {0.0, 0.5 * M_PI, M_PI};
    return 2.0 * adaptive_integrate(g, brk, 1e-12).value;
  };
  std::vector<double> rbrk = {0.0, r};
  if (cn > 0.0 && cn < r) rbrk.push_back(cn);
  auto f = [&](double rho) {
    return std::fabs(u.radial_value(rho)) * rho * weight_angle(rho);
  };
  const double scale = std::fabs(u.amplitude) * r * r + 1e-300;
  double v = adaptive_integrate(f, rbrk, 1e-6 * scale).value;
  return adaptive_integrate(f, rbrk, 1e-9 * std::fabs(v) + 1e-300).value;
}

}  // namespace loglap
