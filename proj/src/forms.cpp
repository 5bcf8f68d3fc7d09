#include "loglap/forms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "loglap/constants.hpp"
#include "loglap/quadrature.hpp"

namespace loglap {
namespace {

[[noreturn]] void tol_failure(const char* who, double achieved) {
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "%s: tolerance not reached, achieved error %.3e", who,
                achieved);
  throw QuadratureError(msg, achieved);
}

void require_c1(const TestFunction& f, const char* who) {
  if (f.kind == BumpKind::hat) {
    char msg[120];
    std::snprintf(msg, sizeof msg,
                  "%s: tent profiles are not continuously differentiable", who);
    throw std::invalid_argument(msg);
  }
}

using Profile = std::function<double(double)>;

struct CorrOut {
  double value = 0.0;
  double est = 0.0;
};

// Correlation of two radial profiles whose centers sit a distance d apart:
// the integral of a(|x|) b(|x - d e|) over the whole space. Profiles are
// zero beyond their radius, so the domain is the support overlap.
CorrOut radial_corr(int dim, const Profile& a, double ra, double asup,
                    const Profile& b, double rb, double d, double tol) {
  CorrOut out;
  if (dim == 1) {
    const double lo = std::max(-ra, d - rb);
    const double hi = std::min(ra, d + rb);
    if (hi <= lo) return out;
    std::vector<double> brk{lo, hi};
    for (double c : {0.0, d}) {
      if (c > lo + 1e-14 && c < hi - 1e-14) brk.push_back(c);
    }
    std::sort(brk.begin(), brk.end());
    auto f = [&](double x) { return a(std::fabs(x)) * b(std::fabs(x - d)); };
    auto res = adaptive_integrate(f, brk, tol);
    out.value = res.value;
    out.est = res.est_error;
    return out;
  }

  // Polar form about the first center; the angular factor sweeps the second
  // profile along a circle of radius tau, crossing its support edge at the
  // law-of-cosines angle.
  const double lo = std::max(0.0, d - rb);
  const double hi = std::min(ra, d + rb);
  if (hi <= lo) return out;
  const double amass = 0.5 * asup * ra * ra + 1e-300;
  const double ang_tol = 0.2 * tol / amass;
  double ang_excess = 0.0;
  auto ring = [&](double tau) {
    if (2.0 * tau * d < 1e-12 * (tau * tau + d * d) + 1e-280) {
      return 2.0 * M_PI * b(std::hypot(tau, d));
    }
    const double denom = 2.0 * tau * d;
    std::vector<double> brk{0.0, M_PI};
    const double c = (tau * tau + d * d - rb * rb) / denom;
    if (c > -1.0 + 1e-12 && c < 1.0 - 1e-12) brk.push_back(std::acos(c));
    std::sort(brk.begin(), brk.end());
    auto g = [&](double phi) {
      return b(std::sqrt(tau * tau + d * d - denom * std::cos(phi)));
    };
    auto res = adaptive_integrate(g, brk, ang_tol);
    ang_excess = std::max(ang_excess, res.est_error - ang_tol);
    return 2.0 * res.value;
  };
  std::vector<double> brk{lo, hi};
  for (double c : {std::fabs(d - rb), d}) {
    if (c > lo + 1e-14 && c < hi - 1e-14) brk.push_back(c);
  }
  std::sort(brk.begin(), brk.end());
  auto f = [&](double tau) { return tau * a(tau) * ring(tau); };
  auto res = adaptive_integrate(f, brk, 0.5 * tol);
  out.value = res.value;
  out.est = res.est_error + 2.0 * (ang_tol + std::max(0.0, ang_excess)) * amass;
  return out;
}

// Barycentric interpolant of the pair correlation on Chebyshev-Lobatto
// nodes over [0, ra + rb]. The correlation inherits two continuous
// derivatives from the profiles, which is enough for the node counts used
// here; the probes below measure the actual deviation.
struct Cheb {
  std::vector<double> node, val, w;
  double hi = 0.0;

  double eval(double x) const {
    double num = 0.0, den = 0.0;
    for (size_t j = 0; j < node.size(); ++j) {
      const double dx = x - node[j];
      if (std::fabs(dx) < 1e-300) return val[j];
      const double c = w[j] / dx;
      num += c * val[j];
      den += c;
    }
    return num / den;
  }
};

Cheb build_pair_cache(const Profile& a, double ra, double asup,
                      const Profile& b, double rb, int n, double wtol,
                      double* dev, double* wmax) {
  Cheb c;
  c.hi = ra + rb;
  c.node.resize(n + 1);
  c.val.resize(n + 1);
  c.w.resize(n + 1);
  double vmax = 0.0;
  for (int j = 0; j <= n; ++j) {
    c.node[j] = 0.5 * c.hi * (1.0 - std::cos(M_PI * j / n));
    c.val[j] = radial_corr(2, a, ra, asup, b, rb, c.node[j], wtol).value;
    c.w[j] = ((j % 2 == 0) ? 1.0 : -1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
    vmax = std::max(vmax, std::fabs(c.val[j]));
  }
  double worst = 0.0;
  for (int i = 1; i <= 6; ++i) {
    const double rho =
        c.hi * (0.04 + 0.92 * std::fmod(0.618033988749895 * i, 1.0));
    const double direct = radial_corr(2, a, ra, asup, b, rb, rho, wtol).value;
    worst = std::max(worst, std::fabs(c.eval(rho) - direct));
  }
  *dev = worst + wtol;
  *wmax = vmax;
  return c;
}

// Kernel weight of the one-dimensional reduced integral, either the power
// t^(-1-2s) or the borderline 1/t of the logarithmic form.
struct Kern {
  bool logk = false;
  double s = 0.0;
  double coef = 0.0;

  double weight(double t) const {
    return logk ? 1.0 / t : std::pow(t, -1.0 - 2.0 * s);
  }
  // integral of the weight over [a, b]
  double wint(double a, double b) const {
    if (logk) return std::log(b / a);
    return (std::pow(a, -2.0 * s) - std::pow(b, -2.0 * s)) / (2.0 * s);
  }
  // integral of t^p * weight over [0, t0] for p > 2s
  double wmom(double p, double t0) const {
    if (logk) return std::pow(t0, p) / p;
    return std::pow(t0, p - 2.0 * s) / (p - 2.0 * s);
  }
  // integral of t * weight over [a, b]
  double lin_wint(double a, double b) const {
    if (logk) return b - a;
    const double e = 1.0 - 2.0 * s;
    if (std::fabs(e) < 1e-9) return std::log(b / a);
    return (std::pow(b, e) - std::pow(a, e)) / e;
  }
};

struct CoreOut {
  double near = 0.0;   // weighted difference integral over t < split
  double cross = 0.0;  // weighted product correlation over t > split
  double uv = 0.0;     // plain L2 product of the pair
  double est_near = 0.0;
  double est_cross = 0.0;
  double est_uv = 0.0;
};

// Reduce the pair of radial bumps to integrals in the center separation t.
// With P(t) the spherical difference correlation, integrating P against
// the kernel weight over t < split gives the short-range part, while the
// t > split remainder is a product correlation Q with
// P(t) = 2 omega <u,v> - 2 Q(t). The head below t0 is analytic from the
// Taylor expansion of the shifted difference.
CoreOut pair_core(const TestFunction& u, const TestFunction& v, const Kern& k,
                  double split, double tol) {
  CoreOut out;
  const int dim = u.dim;
  const double dcx = v.center.x - u.center.x;
  const double dcy = v.center.y - u.center.y;
  const double d = (dim == 1) ? std::fabs(dcx) : std::hypot(dcx, dcy);
  const double ru = u.radius, rv = v.radius;
  const double rmin = std::min(ru, rv);
  const double tmax = d + ru + rv;
  const double usup = std::fabs(u.amplitude);
  const double vsup = std::fabs(v.amplitude);
  if (usup == 0.0 || vsup == 0.0) return out;

  Profile pu = [&u](double t) { return u.radial_value(t); };
  Profile pv = [&v](double t) { return v.radial_value(t); };
  Profile lap_u = [&u](double t) {
    return u.laplacian(pt(u.center.x + t, u.center.y));
  };
  Profile lap_v = [&v](double t) {
    return v.laplacian(pt(v.center.x + t, v.center.y));
  };
  const double lsup_u = 16.0 * usup * dim / (ru * ru);
  const double lsup_v = 16.0 * vsup * dim / (rv * rv);
  const double scale0 = usup * vsup * std::pow(rmin, dim);
  const double omega = log_constants(dim).omega;
  const double chalf = 0.5 * k.coef;

  const double uvtol = std::max(1e-15, 1e-13 * scale0);
  CorrOut uv = radial_corr(dim, pu, ru, usup, pv, rv, d, uvtol);
  out.uv = uv.value;
  out.est_uv = uv.est;

  // Gradient pairing through the Laplacian, for the quadratic head term.
  const double iptol =
      std::max(1e-14, 1e-12 * lsup_u * vsup * std::pow(rmin, dim));
  CorrOut glap = radial_corr(dim, lap_u, ru, lsup_u, pv, rv, d, iptol);
  const double alpha = -(omega / dim) * glap.value;
  const double alpha_est = (omega / dim) * glap.est;

  double beta = 0.0;
  double beta_est = 0.0;
  if (dim == 1) {
    Profile spp_u = [&u](double t) { return u.radial_second_derivative(t); };
    Profile spp_v = [&v](double t) { return v.radial_second_derivative(t); };
    CorrOut spp = radial_corr(1, spp_u, ru, lsup_u, spp_v, rv, d, iptol);
    beta = -spp.value / 6.0;
    beta_est = spp.est / 6.0;
  }
  double m4 = 0.0;
  if (dim == 2) {
    CorrOut ll = radial_corr(2, lap_u, ru, lsup_u, lap_v, rv, d,
                             1e-6 * lsup_u * lsup_v * rmin * rmin + 1e-12);
    m4 = std::fabs(ll.value) + ll.est;
  }

  const double T1 = std::min(split, tmax);
  const double t0 = std::min(((dim == 1) ? 1e-5 : 1e-4) * rmin, 0.25 * T1);

  const double head = chalf * (alpha * k.wmom(2.0, t0) + beta * k.wmom(4.0, t0));
  double est_head =
      chalf * (alpha_est * k.wmom(2.0, t0) + beta_est * k.wmom(4.0, t0));
  if (dim == 1) {
    // sixth-order remainder of the two-term expansion, enveloped by the
    // profile curvature scale
    est_head += chalf * 30.0 *
                (std::fabs(alpha) + std::fabs(beta) * rmin * rmin) /
                std::pow(rmin, 4) * k.wmom(6.0, t0);
  } else {
    est_head += chalf * omega * m4 * k.wmom(4.0, t0);
  }

  Cheb wc;
  double wdev = 0.0, wmaxv = 0.0, ang_tol = 0.0, qexc = 0.0;
  if (dim == 2) {
    const int n =
        (u.kind == BumpKind::poly_c2 || v.kind == BumpKind::poly_c2) ? 280
                                                                     : 160;
    const double wtol = std::max(1e-14, 1e-12 * scale0);
    wc = build_pair_cache(pu, ru, usup, pv, rv, n, wtol, &wdev, &wmaxv);
    ang_tol = std::max(1e-15, 1e-13 * (std::fabs(uv.value) + wmaxv));
  }
  auto qhat = [&](double t) -> double {
    if (2.0 * t * d < 1e-12 * (t * t + d * d) + 1e-280) {
      const double rho = std::hypot(t, d);
      return 2.0 * M_PI * (rho < wc.hi ? wc.eval(rho) : 0.0);
    }
    const double denom = 2.0 * t * d;
    std::vector<double> brk{0.0, M_PI};
    for (double kk : {ru + rv, std::fabs(ru - rv)}) {
      const double c = (t * t + d * d - kk * kk) / denom;
      if (c > -1.0 + 1e-12 && c < 1.0 - 1e-12) brk.push_back(std::acos(c));
    }
    std::sort(brk.begin(), brk.end());
    auto g = [&](double phi) {
      const double rho = std::sqrt(t * t + d * d - denom * std::cos(phi));
      return rho < wc.hi ? wc.eval(rho) : 0.0;
    };
    auto res = adaptive_integrate(g, brk, ang_tol);
    qexc = std::max(qexc, res.est_error - ang_tol);
    return 2.0 * res.value;
  };

  // The one-dimensional short-range integrand is evaluated from the shifted
  // difference itself, which keeps the small-t cancellation at the level of
  // the products rather than the integrals.
  double pexc = 0.0;
  const double s1 = 4.0 * usup * vsup * (1.0 / ru + 1.0 / rv);
  const double hull_len = 2.0 * (ru + rv) + d + 2.0;
  auto pdirect = [&](double t, double ptol) -> double {
    const double lo = std::max(u.center.x - ru, v.center.x - rv) - t;
    const double hi = std::min(u.center.x + ru, v.center.x + rv);
    if (hi <= lo) return 0.0;
    std::vector<double> brk{lo, hi};
    for (double c : {u.center.x - ru, u.center.x, u.center.x + ru,
                     v.center.x - rv, v.center.x, v.center.x + rv}) {
      for (double e : {c, c - t}) {
        if (e > lo + 1e-14 && e < hi - 1e-14) brk.push_back(e);
      }
    }
    std::sort(brk.begin(), brk.end());
    auto f = [&](double x) {
      return (u.value(pt(x)) - u.value(pt(x + t))) *
             (v.value(pt(x)) - v.value(pt(x + t)));
    };
    auto res = adaptive_integrate(f, brk, ptol);
    pexc = std::max(pexc, res.est_error - ptol);
    return 2.0 * res.value;
  };

  const bool skip_near = (d - ru - rv >= split);
  const double c1 = 0.05 * tol / std::max(k.coef * (T1 - t0), 1e-300);
  const double c2 = 4e-16 * s1 * hull_len;
  double near_num = 0.0, est_near_num = 0.0;
  if (!skip_near) {
    std::vector<double> brk = geometric_breakpoints(t0, T1);
    for (double kk :
         {d, std::fabs(d - ru - rv), std::fabs(d - std::fabs(ru - rv)),
          d + std::fabs(ru - rv)}) {
      if (kk > t0 * (1.0 + 1e-12) && kk < T1 * (1.0 - 1e-12)) {
        brk.push_back(kk);
      }
    }
    std::sort(brk.begin(), brk.end());
    std::function<double(double)> f;
    if (dim == 1) {
      f = [&](double t) {
        const double ptol = std::max(
            c1 * (k.logk ? t : std::pow(t, 1.0 + 2.0 * k.s)), c2 * t);
        return pdirect(t, ptol) * k.weight(t);
      };
    } else {
      f = [&](double t) {
        return (2.0 * omega * uv.value - 2.0 * qhat(t)) * k.weight(t);
      };
    }
    auto res = adaptive_integrate(f, brk, 0.3 * tol / chalf);
    near_num = res.value;
    est_near_num = res.est_error;
  }

  // Beyond the support exhaustion radius the difference correlation is the
  // constant 2 omega <u,v> and the remaining weight integrates in closed
  // form.
  double cont = 0.0;
  if (!skip_near && tmax < split) {
    cont = 2.0 * omega * uv.value * k.wint(tmax, split);
  }

  double cross_num = 0.0, est_cross_num = 0.0;
  double crtol = 0.0, crexc = 0.0;
  const bool have_cross = tmax > split;
  if (have_cross) {
    std::vector<double> brk{split, tmax};
    for (double kk :
         {std::fabs(d - ru - rv), std::fabs(d - std::fabs(ru - rv)), d,
          d + std::fabs(ru - rv)}) {
      if (kk > split * (1.0 + 1e-12) && kk < tmax * (1.0 - 1e-12)) {
        brk.push_back(kk);
      }
    }
    std::sort(brk.begin(), brk.end());
    const double wI = k.wint(split, tmax);
    std::function<double(double)> f;
    if (dim == 1) {
      crtol = 0.05 * tol / std::max(2.0 * k.coef * wI, 1e-300);
      f = [&](double t) {
        CorrOut qa = radial_corr(1, pu, ru, usup, pv, rv, std::fabs(d - t),
                                 crtol);
        CorrOut qb = radial_corr(1, pu, ru, usup, pv, rv, d + t, crtol);
        crexc = std::max(crexc, qa.est - crtol);
        crexc = std::max(crexc, qb.est - crtol);
        return (qa.value + qb.value) * k.weight(t);
      };
    } else {
      f = [&](double t) { return qhat(t) * k.weight(t); };
    }
    auto res = adaptive_integrate(f, brk, 0.2 * tol / k.coef);
    cross_num = res.value;
    est_cross_num = res.est_error;
  }

  out.near = head + chalf * (near_num + cont);
  out.cross = k.coef * cross_num;

  double errq = 0.0;
  if (dim == 2) {
    errq = 2.0 * (ang_tol + std::max(0.0, qexc)) + 2.0 * M_PI * wdev +
           1e-15 * (omega * std::fabs(uv.value) + 2.0 * M_PI * wmaxv);
  }
  double est_near = est_head + chalf * est_near_num;
  if (!skip_near) {
    if (dim == 1) {
      est_near += k.coef * (c1 * (T1 - t0) + c2 * k.lin_wint(t0, T1) +
                            std::max(0.0, pexc) * k.wint(t0, T1));
    } else {
      est_near += k.coef * errq * k.wint(t0, T1);
    }
    if (tmax < split) {
      est_near += k.coef * omega * uv.est * k.wint(tmax, split);
    }
  }
  out.est_near = est_near;

  if (have_cross) {
    double e = k.coef * est_cross_num;
    const double wI = k.wint(split, tmax);
    if (dim == 1) {
      e += k.coef * 2.0 * (crtol + std::max(0.0, crexc)) * wI;
    } else {
      e += k.coef * errq * wI;
    }
    out.est_cross = e;
  }
  return out;
}

void check_pair(const TestFunction& u, const TestFunction& v,
                const char* who) {
  if (u.dim != v.dim) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "%s: dimensions do not match", who);
    throw std::invalid_argument(msg);
  }
  require_c1(u, who);
  require_c1(v, who);
}

}  // namespace

FormValue energy_s(const TestFunction& u, const TestFunction& v, double s,
                   double tol) {
  check_pair(u, v, "energy_s");
  if (!(s > 0.0) || !(s < 1.0)) {
    throw std::invalid_argument("energy_s: need 0 < s < 1");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("energy_s: tol must be positive");
  }
  Kern k;
  k.logk = false;
  k.s = s;
  k.coef = frac_constant(u.dim, s);
  const CoreOut c = pair_core(u, v, k, 1.0, tol);
  const double mcoef = k.coef * log_constants(u.dim).omega / (2.0 * s);

  FormValue out;
  out.near = c.near;
  out.far = -c.cross;
  out.mass = mcoef * c.uv;
  out.value = out.near + out.far + out.mass;
  out.est_error = c.est_near + c.est_cross + mcoef * c.est_uv;
  if (out.est_error > tol) tol_failure("energy_s", out.est_error);
  return out;
}

FormValue energy_log(const TestFunction& u, const TestFunction& v,
                     double tol) {
  check_pair(u, v, "energy_log");
  if (!(tol > 0.0)) {
    throw std::invalid_argument("energy_log: tol must be positive");
  }
  const LogConstants lc = log_constants(u.dim);
  Kern k;
  k.logk = true;
  k.coef = lc.c_log;
  const CoreOut c = pair_core(u, v, k, 1.0, tol);

  FormValue out;
  out.near = c.near;
  out.far = -c.cross;
  out.mass = lc.rho * c.uv;
  out.value = out.near + out.far + out.mass;
  out.est_error = c.est_near + c.est_cross + std::fabs(lc.rho) * c.est_uv;
  if (out.est_error > tol) tol_failure("energy_log", out.est_error);
  return out;
}

DeltaSplit delta_split(const TestFunction& u, const TestFunction& v, double s,
                       double delta, double tol) {
  check_pair(u, v, "delta_split");
  if (!(s > 0.0) || !(s < 1.0)) {
    throw std::invalid_argument("delta_split: need 0 < s < 1");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("delta_split: need 0 < delta < 1");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("delta_split: tol must be positive");
  }
  Kern k;
  k.logk = false;
  k.s = s;
  k.coef = frac_constant(u.dim, s);
  const CoreOut c = pair_core(u, v, k, delta, tol);

  DeltaSplit out;
  out.delta = delta;
  out.e_near = c.near;
  out.kappa_mass = k.coef * log_constants(u.dim).omega *
                   std::pow(delta, -2.0 * s) / (2.0 * s);
  out.conv_term = c.cross;
  out.est_error = c.est_near + c.est_cross;
  if (out.est_error > tol) tol_failure("delta_split", out.est_error);
  return out;
}

std::pair<double, double> expansion_residuals(const TestFunction& u,
                                              double s) {
  require_c1(u, "expansion_residuals");
  if (!(s > 0.0) || !(s < 1.0)) {
    throw std::invalid_argument("expansion_residuals: need 0 < s < 1");
  }
  if (u.amplitude == 0.0) return {0.0, 0.0};
  const int dim = u.dim;
  const double r = u.radius;
  const double usup = std::fabs(u.amplitude);
  const double scale0 = usup * usup * std::pow(r, dim);

  const double tolE = 1e-9 * std::max(1.0, scale0);
  const FormValue es = energy_s(u, u, s, tolE);
  const FormValue el = energy_log(u, u, tolE);

  Profile pu = [&u](double t) { return u.radial_value(t); };
  Profile lap_u = [&u](double t) {
    return u.laplacian(pt(u.center.x + t, u.center.y));
  };
  const double lsup = 16.0 * usup * dim / (r * r);
  const double l2sq =
      radial_corr(dim, pu, r, usup, pu, r, 0.0, 1e-12 * std::max(1.0, scale0))
          .value;
  const double lapsq =
      radial_corr(dim, lap_u, r, lsup, lap_u, r, 0.0,
                  1e-10 * std::max(1.0, lsup * lsup * std::pow(r, dim)))
          .value;

  // L1 norm of the profile by the radial measure
  std::vector<double> brk{0.0, 0.5 * r, r};
  auto f = [&](double t) {
    const double a = std::fabs(u.radial_value(t));
    return (dim == 1) ? 2.0 * a : 2.0 * M_PI * t * a;
  };
  const double l1 =
      adaptive_integrate(f, brk, 1e-12 * std::max(1.0, usup * std::pow(r, dim)))
          .value;

  const double bound = form_remainder_constant(dim) * l1 * l1 + lapsq;
  const double slack1 = 2.0 * s * bound - std::fabs(es.value - l2sq);
  const double slack2 =
      4.0 * s * s * bound - std::fabs(es.value - l2sq - s * el.value);
  return {slack1, slack2};
}

double elementary_bounds_check(const std::vector<double>& r_samples,
                               double s) {
  if (!(s > 0.0) || !(s < 1.0)) {
    throw std::invalid_argument("elementary_bounds_check: need 0 < s < 1");
  }
  if (r_samples.empty()) {
    throw std::invalid_argument(
        "elementary_bounds_check: need at least one sample");
  }
  double worst = std::numeric_limits<double>::infinity();
  for (double r : r_samples) {
    if (!(r > 0.0)) {
      throw std::invalid_argument(
          "elementary_bounds_check: samples must be positive");
    }
    const double L = std::log(r);
    const double g = 2.0 * s * L;
    const double p = std::expm1(g);
    const double side = (r <= 1.0) ? std::fabs(L) : std::pow(r, 4.0);
    const double side2 = (r <= 1.0) ? L * L : std::pow(r, 4.0);
    const double slack1 = 2.0 * side - std::fabs(p) / s;
    const double slack2 = 4.0 * s * side2 - std::fabs(p - g) / s;
    worst = std::min(worst, std::min(slack1, slack2));
  }
  return worst;
}

}  // namespace loglap
