#include "loglap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace loglap {

namespace {

GaussRule build_rule(int n) {
  GaussRule r;
  r.node.resize(n);
  r.weight.resize(n);
  // Roots of P_n by Newton from the Chebyshev-based initial guess. Only the
  // lower half is iterated; the rest follows by symmetry.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double x = std::cos(M_PI * (i + 0.75L) / (n + 0.5L));
    long double p0 = 0, p1 = 0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1;
      p1 = x;
      for (int k = 2; k <= n; ++k) {
        long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      long double dp = n * (x * p1 - p0) / (x * x - 1);
      long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    long double dp = n * (x * p1 - p0) / (x * x - 1);
    long double w = 2.0L / ((1 - x * x) * dp * dp);
    r.node[i] = static_cast<double>(-x);
    r.node[n - 1 - i] = static_cast<double>(x);
    r.weight[i] = static_cast<double>(w);
    r.weight[n - 1 - i] = static_cast<double>(w);
  }
  if (n % 2 == 1) r.node[n / 2] = 0.0;
  return r;
}

}  // namespace

const GaussRule& gauss_rule(int order) {
  if (order < 2 || order > 64) {
    throw std::invalid_argument("gauss_rule: order out of range");
  }
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it == cache.end()) {
    it = cache.emplace(order, build_rule(order)).first;
  }
  return it->second;
}

double gauss_panel(const std::function<double(double)>& f, double a, double b,
                   int order) {
  const GaussRule& r = gauss_rule(order);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < order; ++i) {
    acc += r.weight[i] * f(mid + half * r.node[i]);
  }
  return acc * half;
}

QuadResult adaptive_integrate(const std::function<double(double)>& f,
                              std::vector<double> breakpoints, double tol,
                              int max_depth) {
  if (breakpoints.size() < 2) {
    throw std::invalid_argument("adaptive_integrate: need at least 2 points");
  }
  std::sort(breakpoints.begin(), breakpoints.end());
  struct Panel {
    double a, b, coarse, fine, err;
  };
  auto eval = [&f](double a, double b) {
    Panel p;
    p.a = a;
    p.b = b;
    p.coarse = gauss_panel(f, a, b, 8);
    p.fine = gauss_panel(f, a, b, 16);
    p.err = std::fabs(p.fine - p.coarse);
    return p;
  };
  std::vector<Panel> panels;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (breakpoints[i + 1] > breakpoints[i]) {
      panels.push_back(eval(breakpoints[i], breakpoints[i + 1]));
    }
  }
  if (panels.empty()) return {0.0, 0.0, 0};

  // Refinement stops on success, but also on two kinds of futility: a hard
  // cap on the panel count, and stagnation of the total error estimate. Both
  // happen when the request sits below the rounding floor of the integrand;
  // without them the splitting loop can double the panel count every round.
  const size_t panel_cap = 20000;
  double prev_total = std::numeric_limits<double>::infinity();
  int stagnant = 0;
  for (int round = 0; round < max_depth; ++round) {
    double total_err = 0.0;
    for (const Panel& p : panels) total_err += p.err;
    if (total_err <= tol) break;
    if (total_err >= 0.8 * prev_total) {
      if (++stagnant >= 2) break;
    } else {
      stagnant = 0;
    }
    prev_total = total_err;
    if (panels.size() >= panel_cap) break;
    const double share = 0.5 * tol / static_cast<double>(panels.size());
    std::vector<Panel> next;
    next.reserve(panels.size() * 2);
    bool split_any = false;
    for (const Panel& p : panels) {
      const double mid = 0.5 * (p.a + p.b);
      if (p.err > share && mid > p.a && mid < p.b) {
        next.push_back(eval(p.a, mid));
        next.push_back(eval(mid, p.b));
        split_any = true;
      } else {
        next.push_back(p);
      }
    }
    panels.swap(next);
    if (!split_any) break;
  }

  QuadResult out;
  out.panels = static_cast<int>(panels.size());
  double err = 0.0, val = 0.0;
  for (const Panel& p : panels) {
    val += p.fine;
    err += p.err;
  }
  out.value = val;
  out.est_error = err;
  return out;
}

std::vector<double> geometric_breakpoints(double lo_floor, double hi,
                                          double ratio) {
  if (!(lo_floor > 0) || !(hi > lo_floor) || !(ratio > 0) || !(ratio < 1)) {
    throw std::invalid_argument("geometric_breakpoints: bad parameters");
  }
  std::vector<double> pts;
  double t = hi;
  while (t > lo_floor) {
    pts.push_back(t);
    t *= ratio;
  }
  pts.push_back(lo_floor);
  std::reverse(pts.begin(), pts.end());
  return pts;
}

}  // namespace loglap
