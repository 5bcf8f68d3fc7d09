#include "loglap/operators.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "loglap/constants.hpp"
#include "loglap/quadrature.hpp"
#include "support/oracles.hpp"

using namespace loglap;

TEST_CASE("all evaluators return exactly zero on the zero function") {
  auto z = make_bump(BumpKind::smooth, 1, pt(0), 1.0, 0.0);
  CHECK(frac_lap_point(z, 0.3, pt(0.2), 1e-9).value == 0.0);
  CHECK(log_lap_point(z, pt(0.2), 1e-9).value == 0.0);
  SpectralSymbol sym{SpectralSymbol::Kind::power, 0.25};
  CHECK(symbol_point(z, sym, pt(0.2), 50.0, 1e-6).value == 0.0);
  CHECK(diff_quotient_sup(z, 0.1, {pt(0), pt(0.4)}, 1e-7) == 0.0);
  CHECK(riesz_potential(z, 0.9, 0.2, pt(0.1), 1e-8) == 0.0);
}

TEST_CASE("precondition violations are rejected") {
  auto u = make_bump(BumpKind::smooth, 1, pt(0), 1.0, 1.0);
  CHECK_THROWS_AS(frac_lap_point(u, 0.0, pt(0), 1e-8),
                  std::invalid_argument);
  CHECK_THROWS_AS(frac_lap_point(u, 1.0, pt(0), 1e-8),
                  std::invalid_argument);
  CHECK_THROWS_AS(frac_lap_point(u, 0.3, pt(0), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(log_lap_point(u, pt(0), -1.0), std::invalid_argument);
  SpectralSymbol sym{SpectralSymbol::Kind::power, 0.25};
  CHECK_THROWS_AS(symbol_point(u, sym, pt(0), 0.5, 1e-6),
                  std::invalid_argument);
  CHECK_THROWS_AS(diff_quotient_sup(u, 0.3, {pt(0)}, 1e-6),
                  std::invalid_argument);
  CHECK_THROWS_AS(riesz_potential(u, 0.9, 0.3, pt(0), 1e-8),
                  std::invalid_argument);
  CHECK_THROWS_AS(riesz_potential(u, 1.5, 0.2, pt(0), 1e-8),
                  std::invalid_argument);
}

TEST_CASE("pointwise evaluation is linear in the amplitude") {
  auto u = make_bump(BumpKind::smooth, 1, pt(0.1), 1.0, 1.0);
  auto v = u;
  v.amplitude = 3.0;
  for (double s : {0.1, 0.45}) {
    const double a = frac_lap_point(u, s, pt(0.35), 1e-12).value;
    const double b = frac_lap_point(v, s, pt(0.35), 1e-12).value;
    CHECK(std::fabs(b - 3.0 * a) <= 5e-12 * std::max(1.0, std::fabs(b)));
  }
  const double la = log_lap_point(u, pt(0.35), 1e-12).value;
  const double lb = log_lap_point(v, pt(0.35), 1e-12).value;
  CHECK(std::fabs(lb - 3.0 * la) <= 5e-12 * std::max(1.0, std::fabs(lb)));
}

TEST_CASE("fractional evaluation agrees with an independent reference") {
  auto u = make_bump(BumpKind::smooth, 1, pt(0), 1.0, 1.0);
  const double s = 0.3, x = 0.35;
  const double C = frac_constant(1, s);
  const double T = 1.0 + x + 0.5;
  auto second_diff = [&](double t) {
    return (2.0 * u.value(pt(x)) - u.value(pt(x + t)) - u.value(pt(x - t))) *
           std::pow(t, -1.0 - 2.0 * s);
  };
  // Near zero the second difference cancels to rounding noise that the
  // singular weight then amplifies, so the range below eps is handled by
  // a fourth-order Taylor head instead of quadrature. The fourth
  // derivative comes from differencing the analytic gradient.
  const double eps = 1e-3, h = 1e-2;
  auto du = [&](double y) { return u.gradient(pt(y)).x; };
  const double u4 = (du(x + 2 * h) - 2 * du(x + h) + 2 * du(x - h) -
                     du(x - 2 * h)) /
                    (2 * h * h * h);
  double ref = oracle::integrate(second_diff, eps, T, 1e-10);
  ref += -u.laplacian(pt(x)) * std::pow(eps, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  ref += -u4 / 12.0 * std::pow(eps, 4.0 - 2.0 * s) / (4.0 - 2.0 * s);
  ref += 2.0 * u.value(pt(x)) * std::pow(T, -2.0 * s) / (2.0 * s);
  ref *= C;
  auto got = frac_lap_point(u, s, pt(x), 1e-10);
  CHECK(got.value == doctest::Approx(ref).epsilon(1e-8));
  CHECK(std::fabs(got.value - ref) <= 50.0 * (got.est_error + 1e-11));
}

TEST_CASE("spatial and spectral evaluations agree in one dimension") {
  auto smooth = make_bump(BumpKind::smooth, 1, pt(0), 1.0, 1.0);
  auto poly = make_bump(BumpKind::poly_c2, 1, pt(-0.2), 0.9, 1.3);

  for (double xx : {0.1, 0.62}) {
    for (double s : {0.05, 0.25}) {
      SpectralSymbol sym{SpectralSymbol::Kind::power, s};
      auto sp = frac_lap_point(smooth, s, pt(xx), 1e-8);
      auto fo = symbol_point(smooth, sym, pt(xx), 360.0, 1e-6);
      CHECK(std::fabs(sp.value - fo.value) <= 1e-6);
      auto sp2 = frac_lap_point(poly, s, pt(xx), 1e-8);
      auto fo2 = symbol_point(poly, sym, pt(xx), 4000.0, 1e-6);
      CHECK(std::fabs(sp2.value - fo2.value) <= 1e-6);
    }
    SpectralSymbol lg{SpectralSymbol::Kind::logarithmic, 0.0};
    auto sp = log_lap_point(smooth, pt(xx), 1e-8);
    auto fo = symbol_point(smooth, lg, pt(xx), 360.0, 1e-6);
    CHECK(std::fabs(sp.value - fo.value) <= 1e-6);
    auto sp2 = log_lap_point(poly, pt(xx), 1e-8);
    auto fo2 = symbol_point(poly, lg, pt(xx), 4000.0, 1e-6);
    CHECK(std::fabs(sp2.value - fo2.value) <= 1e-6);
  }
}

TEST_CASE("spatial and spectral evaluations agree in two dimensions") {
  auto u = make_bump(BumpKind::poly_c2, 2, pt(0.2, -0.3), 1.1, 1.0);
  const double s = 0.1;
  SpectralSymbol sym{SpectralSymbol::Kind::power, s};
  SpectralSymbol lg{SpectralSymbol::Kind::logarithmic, 0.0};
  for (Pt x : {pt(0.5, 0.1), pt(0.2, -0.3)}) {
    auto sp = frac_lap_point(u, s, x, 1e-7);
    auto fo = symbol_point(u, sym, x, 7000.0, 1e-6);
    CHECK(std::fabs(sp.value - fo.value) <= 2e-6);
    auto spl = log_lap_point(u, x, 1e-7);
    auto fol = symbol_point(u, lg, x, 7000.0, 1e-6);
    CHECK(std::fabs(spl.value - fol.value) <= 2e-6);
  }
}

TEST_CASE("flat symbol reproduces point values") {
  auto u = make_bump(BumpKind::poly_c2, 1, pt(-0.2), 0.9, 1.3);
  SpectralSymbol flat{SpectralSymbol::Kind::power, 0.0};
  for (double xx : {-0.2, 0.3}) {
    auto ev = symbol_point(u, flat, pt(xx), 900.0, 1e-6);
    CHECK(ev.value == doctest::Approx(u.value(pt(xx))).epsilon(2e-6).scale(1.0));
    CHECK(ev.method == OperatorEval::Method::fourier);
  }
}

TEST_CASE("slowly decaying transforms are refused with a cutoff hint") {
  auto h = make_bump(BumpKind::hat, 1, pt(0), 1.0, 1.0);
  SpectralSymbol sym{SpectralSymbol::Kind::power, 0.25};
  CHECK_THROWS_WITH_AS(symbol_point(h, sym, pt(0.1), 200.0, 1e-6),
                       doctest::Contains("increase cutoff"),
                       QuadratureError);
}

TEST_CASE("translation moves evaluations exactly") {
  auto u = make_bump(BumpKind::smooth, 1, pt(0.1), 0.8, 1.5);
  auto v = u;
  const double h = 0.37;
  v.center.x += h;
  const double a = frac_lap_point(u, 0.2, pt(0.3), 1e-9).value;
  const double b = frac_lap_point(v, 0.2, pt(0.3 + h), 1e-9).value;
  CHECK(std::fabs(a - b) <= 1e-10 * std::max(1.0, std::fabs(a)));
  const double la = log_lap_point(u, pt(0.3), 1e-9).value;
  const double lb = log_lap_point(v, pt(0.3 + h), 1e-9).value;
  CHECK(std::fabs(la - lb) <= 1e-10 * std::max(1.0, std::fabs(la)));
}

TEST_CASE("fractional operator obeys the dilation identity") {
  // With u_r(x) = u(x/r), the operator value at x equals r^(-2s) times
  // the value of the original at x/r.
  auto u = make_bump(BumpKind::smooth, 1, pt(0.1), 0.8, 1.5);
  auto ur = u;
  const double r = 2.0;
  ur.center.x *= r;
  ur.radius *= r;
  for (double s : {0.15, 0.4}) {
    const double lhs = frac_lap_point(ur, s, pt(0.6), 1e-10).value;
    const double rhs =
        std::pow(r, -2.0 * s) * frac_lap_point(u, s, pt(0.3), 1e-10).value;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9).scale(1e-9));
  }
}

TEST_CASE("far-field logarithmic values are negative beyond unit distance") {
  auto u = make_bump(BumpKind::poly_c2, 1, pt(5.0), 1.0, 2.0);
  auto ev = log_lap_point(u, pt(0.0), 1e-9);
  CHECK(ev.value < 0.0);
  CHECK(ev.is_log);
}

TEST_CASE("difference quotients shrink linearly in the order") {
  auto u = make_bump(BumpKind::smooth, 1, pt(0), 1.0, 1.0);
  std::vector<Pt> A = {pt(0.0), pt(0.31)};
  const double q1 = diff_quotient_sup(u, 0.1, A, 1e-8);
  const double q2 = diff_quotient_sup(u, 0.05, A, 1e-8);
  const double q3 = diff_quotient_sup(u, 0.025, A, 1e-8);
  CHECK(q1 / q2 > 1.45);
  CHECK(q1 / q2 < 2.6);
  CHECK(q2 / q3 > 1.45);
  CHECK(q2 / q3 < 2.6);
  // The ratio to s itself stays bounded as s halves.
  CHECK(q3 / 0.025 < 2.0 * q1 / 0.1 + 1.0);
}

TEST_CASE("difference quotient sits well below the log-level size") {
  auto u = make_bump(BumpKind::smooth, 1, pt(0), 1.0, 1.0);
  std::vector<Pt> A = {pt(0.0), pt(0.2), pt(0.4), pt(0.6), pt(0.8)};
  double logmax = 0.0;
  for (const Pt& p : A) {
    logmax = std::max(logmax, std::fabs(log_lap_point(u, p, 1e-9).value));
  }
  const double q = diff_quotient_sup(u, 0.05, A, 1e-8);
  CHECK(q < 0.5 * logmax);
}

TEST_CASE("riesz potential of the indicator matches the closed form") {
  // Constant density on the unit-radius ball in one dimension.
  auto one = [](const Pt&) { return 1.0; };
  const double got = riesz_potential(one, 1, 1.0, 0.25, pt(0.0), 1e-8);
  CHECK(got == doctest::Approx(4.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-8));
  CHECK(got == doctest::Approx(1.5957691).epsilon(1e-7));

  // Same integral off-center; for the indicator the kernel integrates
  // in closed form on each side of the evaluation point.
  const double s = 0.2, a = 0.4;
  const double ref = riesz_constant(1, s) *
                     (std::pow(1.0 + a, 2.0 * s) +
                      std::pow(1.0 - a, 2.0 * s)) /
                     (2.0 * s);
  CHECK(riesz_potential(one, 1, 1.0, s, pt(a), 1e-8) ==
        doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("riesz potential is rotation invariant in two dimensions") {
  auto f = make_bump(BumpKind::poly_c2, 2, pt(0, 0), 0.5, 1.0);
  const double s = 0.2, R = 0.8, d = 0.55;
  const double v0 = riesz_potential(f, R, s, pt(d, 0.0), 1e-7);
  for (double th : {0.7, 2.1}) {
    const double v =
        riesz_potential(f, R, s, pt(d * std::cos(th), d * std::sin(th)),
                        1e-7);
    CHECK(v == doctest::Approx(v0).epsilon(1e-6));
  }
  CHECK(v0 > 0.0);
  CHECK_THROWS_AS(riesz_potential(f, R, s, pt(R, 0.0), 1e-7),
                  std::invalid_argument);
}

TEST_CASE("riesz potential satisfies a uniform Holder bound") {
  auto f = make_bump(BumpKind::poly_c2, 1, pt(0), 0.4, 1.3);
  const double R = 0.5, s = 0.2;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> X(-1.5, 1.5);
  double C = 0.0;
  std::vector<double> xs, us;
  for (int i = 0; i < 10; ++i) {
    const double xx = X(rng);
    xs.push_back(xx);
    us.push_back(riesz_potential(f, R, s, pt(xx), 1e-9));
  }
  const double fmax = 1.3;
  for (size_t i = 0; i < xs.size(); ++i) {
    for (size_t j = i + 1; j < xs.size(); ++j) {
      const double gap = std::fabs(xs[i] - xs[j]);
      if (gap < 1e-6) continue;
      const double ratio = std::fabs(us[i] - us[j]) /
                           (std::pow(R, s) * fmax * std::pow(gap, s));
      C = std::max(C, ratio);
    }
  }
  CHECK(C > 0.0);
  CHECK(C < 50.0);
}

TEST_CASE("evaluation metadata is filled in") {
  auto u = make_bump(BumpKind::smooth, 1, pt(0), 1.0, 1.0);
  auto a = frac_lap_point(u, 0.3, pt(0.1), 1e-8);
  CHECK(a.method == OperatorEval::Method::spatial);
  CHECK(a.s == 0.3);
  CHECK_FALSE(a.is_log);
  CHECK(a.est_error >= 0.0);
  CHECK(a.est_error <= 1e-8);
  auto b = log_lap_point(u, pt(0.1), 1e-8);
  CHECK(b.is_log);
  SpectralSymbol lg{SpectralSymbol::Kind::logarithmic, 0.0};
  auto c = symbol_point(u, lg, pt(0.1), 360.0, 1e-5);
  CHECK(c.method == OperatorEval::Method::fourier);
  CHECK(c.is_log);
}
