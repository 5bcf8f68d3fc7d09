#include "loglap/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "loglap/constants.hpp"
#include "loglap/quadrature.hpp"

namespace loglap {

namespace {

// Average of u over the sphere of radius t around x. The test functions
// are radial about their own center, so in two dimensions this reduces to
// a single angular integral of the radial profile.
double ring_average(const TestFunction& u, const Pt& x, double t) {
  if (u.dim == 1) {
    return 0.5 * (u.value(pt(x.x + t)) + u.value(pt(x.x - t)));
  }
  const double dx = x.x - u.center.x;
  const double dy = x.y - u.center.y;
  const double d = std::hypot(dx, dy);
  if (d == 0.0) return u.radial_value(t);
  auto g = [&](double th) {
    const double arg = d * d + t * t - 2.0 * d * t * std::cos(th);
    return u.radial_value(std::sqrt(std::max(0.0, arg)));
  };
  std::vector<double> brk = {0.0, M_PI};
  // The circle may cross the support boundary; split the angle there.
  const double cross = (d * d + t * t - u.radius * u.radius) / (2.0 * d * t);
  if (cross > -1.0 && cross < 1.0) brk.push_back(std::acos(cross));
  const double atol = 1e-13 * (std::fabs(u.amplitude) + 1e-300);
  return adaptive_integrate(g, brk, atol).value / M_PI;
}

struct RadialLayout {
  double t0 = 0.0;  // analytic Taylor head below this radius
  double T = 0.0;   // ring averages vanish beyond this radius
  std::vector<double> brk;
};

RadialLayout radial_layout(const TestFunction& u, const Pt& x) {
  RadialLayout L;
  L.t0 = 1e-4 * u.radius;
  std::vector<double> cand;
  if (u.dim == 1) {
    const double dc = x.x - u.center.x;
    cand = {std::fabs(dc + u.radius), std::fabs(dc - u.radius)};
    if (u.kind == BumpKind::hat) cand.push_back(std::fabs(dc));
    L.T = std::max(cand[0], cand[1]);
  } else {
    const double d = std::hypot(x.x - u.center.x, x.y - u.center.y);
    cand = {std::fabs(d - u.radius)};
    if (u.kind == BumpKind::hat) cand.push_back(d);
    L.T = d + u.radius;
  }
  L.brk = geometric_breakpoints(L.t0, L.T, 0.5);
  for (double c : cand) {
    if (c > L.t0 * (1.0 + 1e-12) && c < L.T * (1.0 - 1e-12)) {
      L.brk.push_back(c);
    }
  }
  std::sort(L.brk.begin(), L.brk.end());
  return L;
}

// Barycentric Chebyshev interpolant of the radial transform over
// [0, hi]. The transform of a compactly supported profile extends to an
// entire function of the frequency, so once the node count passes a
// small multiple of hi times the support radius the interpolant is
// accurate to the accuracy of the node values themselves. Profiles
// without a closed transform pay one inner quadrature per node here
// instead of one per outer evaluation point.
struct TransformCache {
  std::vector<double> node, val, w;
  double eval(double rho) const {
    double num = 0.0, den = 0.0;
    for (size_t j = 0; j < node.size(); ++j) {
      const double dx = rho - node[j];
      if (std::fabs(dx) < 1e-300) return val[j];
      const double c = w[j] / dx;
      num += c * val[j];
      den += c;
    }
    return num / den;
  }
};

TransformCache build_transform_cache(const TestFunction& u, double hi,
                                     double ftol) {
  TransformCache c;
  const int n =
      std::min(6000, static_cast<int>(0.75 * hi * u.radius) + 80);
  c.node.resize(n + 1);
  c.val.resize(n + 1);
  c.w.resize(n + 1);
  for (int j = 0; j <= n; ++j) {
    c.node[j] = 0.5 * hi * (1.0 - std::cos(M_PI * j / n));
    c.val[j] = u.fourier_radial(c.node[j], ftol);
    c.w[j] = ((j % 2 == 0) ? 1.0 : -1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
  }
  return c;
}

[[noreturn]] void tol_failure(const char* who, double achieved) {
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "%s: tolerance not reached, achieved error %.3e", who,
                achieved);
  throw QuadratureError(msg, achieved);
}

double sphere_area(int dim) { return log_constants(dim).omega; }

}  // namespace

OperatorEval frac_lap_point(const TestFunction& u, double s, const Pt& x,
                            double tol) {
  if (!(s > 0.0) || !(s < 1.0)) {
    throw std::invalid_argument("frac_lap_point: need 0 < s < 1");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("frac_lap_point: tol must be positive");
  }
  const double CW = frac_constant(u.dim, s) * sphere_area(u.dim);
  const RadialLayout L = radial_layout(u, x);
  const double ux = u.value(x);
  // The ring average deviates from u(x) by t^2 Lap u/(2 dim) + O(t^4);
  // integrating that against t^(-1-2s) over [0, t0] gives the head.
  const double head = -u.laplacian(x) / (2.0 * u.dim) *
                      std::pow(L.t0, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  auto g = [&](double t) {
    return (ux - ring_average(u, x, t)) * std::pow(t, -1.0 - 2.0 * s);
  };
  auto res = adaptive_integrate(g, L.brk, tol * 0.45 / CW);
  // Past T every ring average vanishes and the tail closes in one term.
  const double tail = ux * std::pow(L.T, -2.0 * s) / (2.0 * s);

  OperatorEval out;
  out.value = CW * (head + res.value + tail);
  out.est_error = CW * res.est_error;
  out.method = OperatorEval::Method::spatial;
  out.s = s;
  if (out.est_error > tol) tol_failure("frac_lap_point", out.est_error);
  return out;
}

OperatorEval log_lap_point(const TestFunction& u, const Pt& x, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("log_lap_point: tol must be positive");
  }
  const LogConstants lc = log_constants(u.dim);
  const double CW = lc.c_log * lc.omega;
  const RadialLayout L = radial_layout(u, x);
  const double ux = u.value(x);
  const double head = -u.laplacian(x) / (2.0 * u.dim) * L.t0 * L.t0 / 2.0;

  const double T1 = std::min(1.0, L.T);
  std::vector<double> nb;
  for (double b : L.brk) {
    if (b < T1) nb.push_back(b);
  }
  nb.push_back(T1);
  auto gnear = [&](double t) {
    return (ux - ring_average(u, x, t)) / t;
  };
  auto near = adaptive_integrate(gnear, nb, tol * 0.2 / CW);
  // If the support is exhausted inside the unit ball the remaining near
  // range integrates u(x)/t in closed form.
  const double closed = (L.T < 1.0) ? ux * std::log(1.0 / L.T) : 0.0;

  double far_val = 0.0, far_est = 0.0;
  if (L.T > 1.0) {
    std::vector<double> fb = {1.0};
    for (double b : L.brk) {
      if (b > 1.0 && b < L.T) fb.push_back(b);
    }
    fb.push_back(L.T);
    auto gfar = [&](double t) { return ring_average(u, x, t) / t; };
    auto far = adaptive_integrate(gfar, fb, tol * 0.2 / CW);
    far_val = far.value;
    far_est = far.est_error;
  }

  OperatorEval out;
  out.value = CW * (head + near.value + closed - far_val) + lc.rho * ux;
  out.est_error = CW * (near.est_error + far_est);
  out.method = OperatorEval::Method::spatial;
  out.is_log = true;
  if (out.est_error > tol) tol_failure("log_lap_point", out.est_error);
  return out;
}

OperatorEval symbol_point(const TestFunction& u, const SpectralSymbol& sym,
                          const Pt& x, double cutoff, double tol) {
  const bool logsym = sym.kind == SpectralSymbol::Kind::logarithmic;
  if (!(cutoff > 1.0)) {
    throw std::invalid_argument("symbol_point: cutoff must exceed 1");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("symbol_point: tol must be positive");
  }
  if (!logsym && !(sym.s >= 0.0 && sym.s < 1.0)) {
    throw std::invalid_argument("symbol_point: power exponent out of range");
  }
  if (u.dim == 2 && u.kind == BumpKind::hat) {
    throw std::invalid_argument(
        "symbol_point: tent profiles are not supported in two dimensions");
  }
  const double d = (u.dim == 1)
                       ? std::fabs(x.x - u.center.x)
                       : std::hypot(x.x - u.center.x, x.y - u.center.y);
  const double r = u.radius;
  const double ftol = 1e-12;
  const bool cached = !u.has_closed_fourier;
  TransformCache tc;
  double interp_dev = 0.0;
  if (cached) {
    tc = build_transform_cache(u, cutoff, ftol);
    // Probe the interpolant against direct transform values at scattered
    // frequencies; the worst deviation feeds the error estimate below.
    for (int i = 1; i <= 8; ++i) {
      const double fr = std::fmod(0.618033988749895 * i, 1.0);
      const double rho = cutoff * (0.02 + 0.96 * fr);
      interp_dev = std::max(
          interp_dev, std::fabs(tc.eval(rho) - u.fourier_radial(rho, ftol)));
    }
  }
  auto fval = [&](double rho) {
    return cached ? tc.eval(rho) : u.fourier_radial(rho, ftol);
  };
  auto msym = [&](double rho) {
    return logsym ? 2.0 * std::log(rho) : std::pow(rho, 2.0 * sym.s);
  };
  const double jac = (u.dim == 1) ? std::sqrt(2.0 / M_PI) : 1.0;
  auto integrand = [&](double rho) {
    const double f = fval(rho);
    if (u.dim == 1) return msym(rho) * f * std::cos(rho * d);
    return msym(rho) * f * std::cyl_bessel_j(0.0, rho * d) * rho;
  };

  // Graded panels toward zero frequency (the logarithmic symbol is
  // integrably singular there), then oscillation-resolving spacing.
  const double low = std::min(1.0, cutoff);
  std::vector<double> brk = geometric_breakpoints(1e-12, low, 0.5);
  const double spacing = M_PI / (2.0 * (d + r + 0.25));
  const double span = cutoff - low;
  if (span / spacing > 3e5) {
    throw std::invalid_argument(
        "symbol_point: cutoff too large for the oscillation budget");
  }
  const int nseg = 1 + static_cast<int>(span / spacing);
  for (int i = 1; i <= nseg; ++i) {
    brk.push_back(low + span * i / nseg);
  }
  auto res = adaptive_integrate(integrand, brk, tol * 0.4 / jac);

  // Tail bound beyond the cutoff, calibrated to the family's transform
  // decay: exponential in sqrt(rho r) for the smooth profile, a fitted
  // power law for the polynomial and tent profiles. The calibration
  // samples the envelope |m f| (times rho in two dimensions) rather than
  // the full integrand, since the phase factor is bounded by one but
  // makes window maxima too noisy to fit.
  const int ns = 48;
  std::vector<double> env(ns), freq(ns);
  for (int i = 0; i < ns; ++i) {
    freq[i] = cutoff * (0.6 + 0.4 * (i + 0.5) / ns);
    env[i] = std::fabs(msym(freq[i]) * fval(freq[i]));
    if (u.dim == 2) env[i] *= freq[i];
  }
  double tail = 0.0;
  if (u.kind == BumpKind::smooth) {
    double K = 0.0;
    for (int i = 0; i < ns; ++i) {
      K = std::max(K, env[i] * std::exp(std::sqrt(2.0 * freq[i] * r)) /
                          std::max(freq[i], 1.0));
    }
    const double W = std::sqrt(2.0 * cutoff * r);
    tail = K * (W * W * W + 3.0 * W * W + 6.0 * W + 6.0) * std::exp(-W) /
           (2.0 * r * r);
  } else {
    double ga = 0.0, gb = 0.0, gmax = 0.0;
    for (int i = 0; i < ns; ++i) {
      if (i < ns / 2) {
        ga = std::max(ga, env[i]);
      } else {
        gb = std::max(gb, env[i]);
      }
      gmax = std::max(gmax, env[i]);
    }
    // Envelope decay exponent from the two window maxima (centers at
    // 0.7 and 0.9 of the cutoff).
    const double q =
        std::log(std::max(ga, 1e-300) / std::max(gb, 1e-300)) /
        std::log(0.9 / 0.7);
    if (!(q > 1.2) || gmax == 0.0) {
      if (gmax > 0.0) {
        char msg[200];
        std::snprintf(msg, sizeof msg,
                      "symbol_point: transform decay too slow at cutoff "
                      "%.3g (fitted exponent %.2f); increase cutoff",
                      cutoff, q);
        throw QuadratureError(msg, gmax * cutoff);
      }
      tail = 0.0;
    } else {
      tail = 2.0 * gmax * cutoff / (q - 1.0);
    }
  }

  // Budget for the node values and interpolation of the cached transform
  // (families with closed forms contribute only rounding dust) and for
  // the neglected piece below the lowest frequency panel.
  double msum;
  if (u.dim == 1) {
    msum = logsym ? 2.0 * (cutoff * (std::log(cutoff) - 1.0) + 1.0) + 2.0
                  : std::pow(cutoff, 1.0 + 2.0 * sym.s) /
                        (1.0 + 2.0 * sym.s);
  } else {
    msum = logsym ? cutoff * cutoff * std::log(cutoff)
                  : std::pow(cutoff, 2.0 + 2.0 * sym.s) /
                        (2.0 + 2.0 * sym.s);
  }
  const double inner =
      cached ? (3.0 * ftol * (std::fabs(u.amplitude) * r + 1.0) +
                interp_dev) *
                   std::fabs(msum)
             : 0.0;
  const double f0 = std::fabs(u.fourier_radial(0.0, ftol));
  const double floor_piece =
      logsym ? ((u.dim == 1) ? 6e-11 * f0 : 1e-22 * f0) : 1e-12 * f0;

  OperatorEval out;
  out.value = jac * res.value;
  out.est_error = jac * res.est_error + tail + inner + floor_piece;
  out.method = OperatorEval::Method::fourier;
  out.s = sym.s;
  out.is_log = logsym;
  if (out.est_error > tol) {
    if (tail > 0.5 * out.est_error) {
      char msg[200];
      std::snprintf(msg, sizeof msg,
                    "symbol_point: tail bound %.3e exceeds the tolerance "
                    "%.3e; increase cutoff beyond %.3g",
                    tail, tol, cutoff);
      throw QuadratureError(msg, out.est_error);
    }
    tol_failure("symbol_point", out.est_error);
  }
  return out;
}

double diff_quotient_sup(const TestFunction& u, double s,
                         const std::vector<Pt>& pts, double tol) {
  if (!(s > 0.0) || s > 0.25) {
    throw std::invalid_argument("diff_quotient_sup: s must lie in (0, 1/4]");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("diff_quotient_sup: tol must be positive");
  }
  double worst = 0.0;
  for (const Pt& p : pts) {
    const OperatorEval fr = frac_lap_point(u, s, p, tol * s / 3.0);
    const OperatorEval lg = log_lap_point(u, p, tol / 3.0);
    const double q = (fr.value - u.value(p)) / s - lg.value;
    worst = std::max(worst, std::fabs(q));
  }
  return worst;
}

double riesz_potential(const std::function<double(const Pt&)>& f, int dim,
                       double ball_radius, double s, const Pt& x,
                       double tol) {
  if (!(s > 0.0) || s > 0.25) {
    throw std::invalid_argument("riesz_potential: s must lie in (0, 1/4]");
  }
  if (!(ball_radius > 0.0) || ball_radius > 1.0) {
    throw std::invalid_argument(
        "riesz_potential: ball radius must lie in (0, 1]");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("riesz_potential: tol must be positive");
  }
  const double kap = riesz_constant(dim, s);
  const double R = ball_radius;

  if (dim == 1) {
    const double a = x.x;
    const double t0 = 1e-6 * R;
    double value = 0.0, est = 0.0;
    // One arm of the kernel integral: t = |y - x| along the side sgn.
    auto arm = [&](double lo, double hi, double sgn) {
      if (hi <= lo) return;
      if (lo < t0) {
        // Weakly singular end: first-order head plus graded panels.
        const double cap = std::min(hi, t0);
        const double fm = f(pt(a + sgn * 0.5 * (lo + cap)));
        value += fm * (std::pow(cap, 2.0 * s) - std::pow(lo, 2.0 * s)) /
                 (2.0 * s);
        lo = cap;
        if (hi <= lo) return;
      }
      auto g = [&](double t) {
        return std::pow(t, 2.0 * s - 1.0) * f(pt(a + sgn * t));
      };
      auto res =
          adaptive_integrate(g, geometric_breakpoints(lo, hi, 0.5),
                             tol * 0.2 / kap);
      value += res.value;
      est += res.est_error;
    };
    if (std::fabs(a) < R) {
      arm(0.0, a + R, -1.0);
      arm(0.0, R - a, +1.0);
    } else if (a >= R) {
      arm(a - R, a + R, -1.0);
    } else {
      arm(-a - R, -a + R, +1.0);
    }
    est *= kap;
    if (est > tol) tol_failure("riesz_potential", est);
    return kap * value;
  }

  // Two dimensions: polar coordinates about x with the angular window cut
  // by the ball. Evaluation right on the boundary ring is not supported.
  const double dc = std::hypot(x.x, x.y);
  const double t0 = 1e-6 * R;
  if (std::fabs(dc - R) <= t0) {
    throw std::invalid_argument(
        "riesz_potential: evaluation too close to the ball boundary");
  }
  // Direction from x toward the ball center.
  double ex = -1.0, ey = 0.0;
  if (dc > 0.0) {
    ex = -x.x / dc;
    ey = -x.y / dc;
  }
  double probe = 1.0;
  for (double tt : {0.25 * R, 0.5 * R, 0.75 * R}) {
    probe = std::max(probe, std::fabs(f(pt(x.x + ex * tt, x.y + ey * tt))));
  }
  auto window_sum = [&](double t) {
    double alpha;
    if (dc == 0.0 || t <= R - dc) {
      alpha = M_PI;
    } else {
      const double c = (dc * dc + t * t - R * R) / (2.0 * dc * t);
      if (c >= 1.0) return 0.0;
      alpha = std::acos(std::max(-1.0, c));
    }
    auto g = [&](double phi) {
      const double px = x.x + t * (ex * std::cos(phi) - ey * std::sin(phi));
      const double py = x.y + t * (ey * std::cos(phi) + ex * std::sin(phi));
      return f(pt(px, py));
    };
    std::vector<double> ab = {-alpha, -0.5 * alpha, 0.0, 0.5 * alpha, alpha};
    return adaptive_integrate(g, ab, 1e-13 * probe * 2.0 * M_PI).value;
  };

  double value = 0.0, est = 0.0;
  if (dc < R) {
    value += 2.0 * M_PI * f(x) * std::pow(t0, 2.0 * s) / (2.0 * s);
    std::vector<double> brk = geometric_breakpoints(t0, dc + R, 0.5);
    if (dc > 0.0 && R - dc > t0 && R - dc < dc + R) brk.push_back(R - dc);
    std::sort(brk.begin(), brk.end());
    auto g = [&](double t) {
      return std::pow(t, 2.0 * s - 1.0) * window_sum(t);
    };
    auto res = adaptive_integrate(g, brk, tol * 0.4 / kap);
    value += res.value;
    est = kap * res.est_error;
  } else {
    std::vector<double> brk = {dc - R, dc, dc + R};
    auto g = [&](double t) {
      return std::pow(t, 2.0 * s - 1.0) * window_sum(t);
    };
    auto res = adaptive_integrate(g, brk, tol * 0.4 / kap);
    value = res.value;
    est = kap * res.est_error;
  }
  if (est > tol) tol_failure("riesz_potential", est);
  return kap * value;
}

double riesz_potential(const TestFunction& f, double ball_radius, double s,
                       const Pt& x, double tol) {
  return riesz_potential(
      [&f](const Pt& p) { return f.value(p); }, f.dim, ball_radius, s, x,
      tol);
}

}  // namespace loglap
