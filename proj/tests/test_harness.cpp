#include "loglap/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "loglap/constants.hpp"
#include "loglap/fem.hpp"
#include "loglap/spectra.hpp"

using namespace loglap;

namespace {

double dot_m(const FormMatrix& m, const std::vector<double>& u,
             const std::vector<double>& v) {
  double acc = 0.0;
  for (int i = 0; i < m.size; ++i) {
    double row = 0.0;
    for (int j = 0; j < m.size; ++j) row += m.at(i, j) * v[j];
    acc += u[i] * row;
  }
  return acc;
}

// Synthetic result carrying only eigenvalues, for the extrapolation cases.
SweepResult synthetic(const std::vector<double>& grid,
                      const std::vector<double>& eigenvalues_per_s) {
  SweepResult res;
  res.config.s_grid = grid;
  for (double lam : eigenvalues_per_s) {
    Spectrum sp;
    sp.eigenvalues = {lam};
    res.spectra.push_back(sp);
  }
  return res;
}

// Kernel integral of the hat interpolant with nodal values val, centered at
// node gi, taken from radius `from` outward to infinity. The symmetrized
// defect is linear in the travel distance between node distances, so each
// segment has a closed form; past the support the defect is constant.
double kernel_integral_from(const Mesh& mesh, const std::vector<double>& val,
                            int gi, double s, double from) {
  const double h = mesh.h();
  const int nodes = static_cast<int>(mesh.nodes.size());
  auto at = [&](int i) { return (i < 0 || i >= nodes) ? 0.0 : val[i]; };
  const double x = mesh.nodes[gi];
  const double span = std::max(x - mesh.nodes.front(), mesh.nodes.back() - x);
  const double v0 = val[gi];
  double acc = 0.0;
  double tail_from = 0.0;
  for (int seg = static_cast<int>(std::floor(from / h));; ++seg) {
    const double lo = std::max(seg * h, from);
    if (lo >= span) {
      tail_from = lo;
      break;
    }
    const double hi = (seg + 1) * h;
    const double lp = at(gi + seg), rp = at(gi + seg + 1);
    const double lm = at(gi - seg), rm = at(gi - seg - 1);
    const double slope = ((rp - lp) + (rm - lm)) / h;
    const double a = 2.0 * v0 - lp - lm + slope * (seg * h);
    const double b = -slope;
    if (a != 0.0)
      acc += a * (std::pow(hi, -2.0 * s) - std::pow(lo, -2.0 * s)) /
             (-2.0 * s);
    acc += b * (std::pow(hi, 1.0 - 2.0 * s) - std::pow(lo, 1.0 - 2.0 * s)) /
           (1.0 - 2.0 * s);
  }
  acc += 2.0 * v0 * std::pow(tail_from, -2.0 * s) / (2.0 * s);
  return acc;
}

std::vector<double> full_nodal_values(const Mesh& mesh,
                                      const std::vector<double>& coeffs) {
  std::vector<double> val(mesh.nodes.size(), 0.0);
  for (size_t j = 0; j < mesh.interior.size(); ++j)
    val[mesh.interior[j]] = coeffs[j];
  return val;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("sweep rejects malformed configurations") {
  SweepConfig cfg;
  cfg.n = 32;
  cfg.k = 2;

  cfg.s_grid = {0.05, 0.1};
  CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);
  cfg.s_grid = {0.3, 0.1};
  CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);
  cfg.s_grid = {0.1, 0.0};
  CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);
  cfg.s_grid = {};
  CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);

  cfg.s_grid = {0.1};
  cfg.k = 0;
  CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);
  cfg.k = 1000;
  CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);
  cfg.k = 2;
  cfg.n = 1;
  CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);
  cfg.n = 32;
  cfg.quad_tol = 0.0;
  CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);
}

TEST_CASE("a single-order grid already gives a valid result") {
  SweepConfig cfg;
  cfg.n = 32;
  cfg.k = 2;
  cfg.s_grid = {0.2};
  const SweepResult res = sweep(cfg);

  REQUIRE(res.spectra.size() == 1);
  const Spectrum& sp = res.spectra[0];
  REQUIRE(sp.eigenvalues.size() >= 2);
  for (size_t j = 0; j + 1 < sp.eigenvalues.size(); ++j)
    CHECK(sp.eigenvalues[j] <= sp.eigenvalues[j + 1]);
  for (const auto& v : sp.vectors)
    CHECK(dot_m(res.mass, v, v) == doctest::Approx(1.0).epsilon(1e-10));
  for (size_t j = 0; j < sp.eigenvalues.size(); ++j)
    CHECK(res.diff_quot[0][j] ==
          doctest::Approx((sp.eigenvalues[j] - 1.0) / 0.2).epsilon(1e-14));
  CHECK(std::isnan(res.slopes[0]));
  CHECK(res.log_spectrum.eigenvalues.size() == sp.eigenvalues.size());
}

TEST_CASE("eigenvalues walk to one inside the logarithmic bracket") {
  SweepConfig cfg;
  cfg.n = 64;
  cfg.k = 4;
  cfg.s_grid = {0.1, 0.05, 0.025, 0.0125};
  const SweepResult res = sweep(cfg);

  const int S = 4;
  for (int j = 0; j < 4; ++j)
    for (int si = 0; si + 1 < S; ++si)
      CHECK(std::fabs(res.spectra[si + 1].eigenvalues[j] - 1.0) <
            std::fabs(res.spectra[si].eigenvalues[j] - 1.0));

  // The difference quotients sit within the computed budget of the matching
  // logarithmic eigenvalue, which pins them inside the two-sided bracket.
  for (int si = 0; si < S; ++si) {
    const double tol = res.bracket_budget[si];
    CHECK(tol > 0.0);
    for (int j = 0; j < 4; ++j) {
      const double d = res.diff_quot[si][j];
      CHECK(std::fabs(d - res.log_spectrum.eigenvalues[j]) <= tol);
      CHECK(d >= res.log_spectrum.eigenvalues[0] - tol);
      CHECK(d <= res.log_spectrum.eigenvalues[j] + tol);
    }
  }
}

TEST_CASE("slope extrapolation is exact on synthetic families") {
  // Dyadic orders keep 1 + 2s and the quotient exact in floating point.
  const std::vector<double> grid = {0.25, 0.125, 0.0625};

  std::vector<double> linear, quadratic;
  for (double s : grid) {
    linear.push_back(1.0 + 2.0 * s);
    quadratic.push_back(1.0 + 2.0 * s + 5.0 * s * s);
  }

  const SlopeFit lin = slope_fit(synthetic(grid, linear), 1);
  CHECK(lin.slope == 2.0);
  CHECK(lin.residual == 0.0);

  const SlopeFit quad = slope_fit(synthetic(grid, quadratic), 1);
  CHECK(quad.slope == doctest::Approx(2.0).epsilon(1e-6));

  CHECK_THROWS_AS(slope_fit(synthetic({0.2, 0.1}, {1.4, 1.2}), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(slope_fit(synthetic(grid, linear), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(slope_fit(synthetic(grid, linear), 0),
                  std::invalid_argument);
}

TEST_CASE("slope fit recovers the discrete logarithmic spectrum") {
  SweepConfig cfg;
  cfg.n = 96;
  cfg.k = 4;
  const SweepResult res = sweep(cfg);

  for (int k = 1; k <= 4; ++k) {
    const SlopeFit fit = slope_fit(res, k);
    const double lam = res.log_spectrum.eigenvalues[k - 1];
    CHECK(std::fabs(fit.slope - lam) / std::fabs(lam) < 1e-6);
    CHECK(fit.residual < 1e-6);
    CHECK(res.slopes[k - 1] == fit.slope);
  }
}

TEST_CASE("eigenfunction clusters converge to the logarithmic ones") {
  SweepConfig cfg;
  cfg.n = 64;
  cfg.k = 2;
  cfg.s_grid = {0.1, 0.05, 0.025, 0.0125};
  const SweepResult res = sweep(cfg);

  const auto dists = eigfun_convergence(res, 1);
  REQUIRE(dists.size() == 4);
  for (const auto& d : dists) REQUIRE(d.has_value());
  for (size_t i = 0; i + 1 < dists.size(); ++i) CHECK(*dists[i + 1] < *dists[i]);
  CHECK(dists.back().value() < 0.05);

  // The ground states carry the same sign at every order.
  for (const Spectrum& sp : res.spectra)
    CHECK(dot_m(res.mass, sp.vectors[0], res.log_spectrum.vectors[0]) > 0.0);

  // Comparing the logarithmic problem against itself gives zero distance.
  SweepResult self = res;
  for (auto& sp : self.spectra) sp = res.log_spectrum;
  for (const auto& d : eigfun_convergence(self, 1)) {
    REQUIRE(d.has_value());
    CHECK(*d < 1e-7);
  }

  // A cluster dimension mismatch is reported as missing, not as an error.
  SweepResult odd;
  odd.config.s_grid = {0.1};
  Spectrum a;
  a.eigenvalues = {1.0, 2.0, 2.5, 3.0};
  odd.spectra.push_back(a);
  odd.log_spectrum.eigenvalues = {1.0, 2.0, 2.0 + 1e-12, 3.0};
  const auto gaps = eigfun_convergence(odd, 2);
  REQUIRE(gaps.size() == 1);
  CHECK(!gaps[0].has_value());
}

TEST_CASE("sup-norm profile stays above the volume bound and flat in s") {
  SweepConfig cfg;
  cfg.n = 64;
  cfg.k = 3;
  const SweepResult res = sweep(cfg);

  for (int k = 1; k <= 3; ++k) {
    const auto sup = linfty_profile(res, k);
    double lo = sup[0], hi = sup[0];
    for (double v : sup) {
      CHECK(v > 0.0);
      // A unit-mass hat expansion cannot dip below the volume bound.
      CHECK(v >= 1.0 / std::sqrt(2.0) - 1e-9);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (k == 1) CHECK(hi / lo <= 3.0);
  }
}

TEST_CASE("decay statistic is finite and counts the center node plainly") {
  SweepConfig cfg;
  cfg.n = 64;
  cfg.k = 1;
  const SweepResult res = sweep(cfg);

  int center = -1;
  for (size_t j = 0; j < res.mesh_x.interior.size(); ++j)
    if (std::fabs(res.mesh_x.nodes[res.mesh_x.interior[j]]) < 1e-12)
      center = static_cast<int>(j);
  REQUIRE(center >= 0);

  const auto dec = decay_profile(res, 1);
  for (size_t si = 0; si < dec.size(); ++si) {
    CHECK(std::isfinite(dec[si]));
    // The center node has unit boundary distance, so its contribution is
    // the raw magnitude and the maximum cannot be smaller.
    CHECK(dec[si] >= std::fabs(res.spectra[si].vectors[0][center]) - 1e-15);
  }
  const auto [lo, hi] = std::pair(*std::min_element(dec.begin(), dec.end()),
                                  *std::max_element(dec.begin(), dec.end()));
  CHECK(hi / lo <= 3.0);
}

TEST_CASE("oscillation shrinks with the ball and with refinement") {
  SweepConfig cfg;
  cfg.n = 32;
  cfg.k = 1;
  cfg.s_grid = {0.1, 0.05, 0.025};
  const SweepResult coarse = sweep(cfg);
  cfg.n = 96;
  const SweepResult fine = sweep(cfg);

  const std::vector<double> radii = {0.4, 0.2, 0.1, 0.05};
  const auto oc = oscillation_modulus(coarse, 1, pt(0.0), radii);
  REQUIRE(oc.radii == radii);
  for (const auto& row : oc.osc)
    for (size_t ri = 0; ri + 1 < row.size(); ++ri)
      CHECK(row[ri + 1] <= row[ri] + 1e-15);

  // Shrinking the ball together with the mesh sends the modulus down,
  // uniformly over the order grid.
  const auto of = oscillation_modulus(fine, 1, pt(0.0), {0.4, 0.1 / 3.0});
  for (size_t si = 0; si < of.osc.size(); ++si)
    CHECK(of.osc[si][1] < oc.osc[si][2]);

  // On the finer mesh the eighth-radius ball holds several nodes, so the
  // quotient is a real pairwise supremum.
  double fitted = 0.0;
  for (size_t si = 0; si < of.holder.size(); ++si) {
    CHECK(of.holder[si][0] > 0.0);
    for (double q : of.holder[si]) CHECK(std::isfinite(q));
    fitted = std::max(fitted, of.holder[si][0] *
                                  std::pow(0.4, 3.0 * cfg.s_grid[si]));
  }
  MESSAGE("fitted Hoelder constant over the grid: " << fitted);

  CHECK_THROWS_AS(oscillation_modulus(coarse, 1, pt(0.0), {1.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(oscillation_modulus(coarse, 1, pt(0.0), {0.1, 0.2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(oscillation_modulus(coarse, 1, pt(0.0), {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(oscillation_modulus(coarse, 1, pt(2.0), {0.1}),
                  std::invalid_argument);
}

TEST_CASE("truncated kernel statistic is flat in s and empty off-margin") {
  SweepConfig cfg;
  cfg.n = 96;
  cfg.k = 1;
  const SweepResult res = sweep(cfg);

  const auto stat = truncated_kernel_stat(res, 1, 0.25, 0.5);
  REQUIRE(stat.size() == res.config.s_grid.size());
  double lo = stat[0], hi = stat[0];
  for (double v : stat) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi / lo <= 3.0);

  // No interior node sits a full unit away from the boundary.
  CHECK(truncated_kernel_stat(res, 1, 0.25, 1.0).empty());

  // The zero field has zero truncated integral everywhere.
  SweepResult zeroed = res;
  for (auto& sp : zeroed.spectra)
    for (auto& v : sp.vectors) v.assign(v.size(), 0.0);
  for (double v : truncated_kernel_stat(zeroed, 1, 0.25, 0.5)) CHECK(v == 0.0);

  CHECK_THROWS_AS(truncated_kernel_stat(res, 1, 0.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(truncated_kernel_stat(res, 1, 0.25, -1.0),
                  std::invalid_argument);
}

TEST_CASE("truncated integral plus far field reproduces the eigen-equation") {
  // With the margin just under the center distance only the center node
  // qualifies, so the statistic is exactly the truncated integral there.
  auto residual_at = [](int n) {
    SweepConfig cfg;
    cfg.n = n;
    cfg.k = 1;
    cfg.s_grid = {0.1};
    const SweepResult res = sweep(cfg);
    const double s = 0.1;
    const double t0 = 0.25;
    const double margin = 1.0 - 0.6 * res.mesh_x.h();

    const auto stat = truncated_kernel_stat(res, 1, t0, margin);
    REQUIRE(stat.size() == 1);

    const auto val = full_nodal_values(res.mesh_x, res.spectra[0].vectors[0]);
    const int gi = static_cast<int>(res.mesh_x.nodes.size() / 2);
    REQUIRE(std::fabs(res.mesh_x.nodes[gi]) < 1e-12);

    const double far = kernel_integral_from(res.mesh_x, val, gi, s, t0);
    const double lhs = frac_constant(1, s) * (stat[0] + far);
    const double rhs = res.spectra[0].eigenvalues[0] * val[gi];
    return std::fabs(lhs - rhs) / std::fabs(rhs);
  };

  const double coarse = residual_at(128);
  const double fine = residual_at(256);
  CHECK(fine < coarse);
  CHECK(fine < 0.02);
}

TEST_CASE("second differences bound first differences for rough profiles") {
  // Affine data at dyadic points: the second differences cancel exactly.
  auto affine = [](double x) { return 3.0 * x + 1.0; };
  const std::vector<std::pair<double, double>> dyadic = {
      {0.25, 0.125}, {-0.5, 0.25}, {0.125, 0.0625}};
  const ZygmundReport flat = zygmund_check(affine, 0.5, dyadic);
  CHECK(flat.v_tau == 0.0);

  // A square-root kink has a finite seminorm and respects the derived
  // first-difference bound on the same sample.
  auto root = [](double x) { return std::sqrt(std::fabs(x)); };
  std::vector<std::pair<double, double>> sample;
  for (int j = 1; j <= 40; ++j) {
    const double h = 0.5 / j;
    sample.push_back({0.0, h});
    sample.push_back({0.1 * j / 40.0, h});
    sample.push_back({-0.07 * j / 40.0, 0.3 * h});
  }
  const ZygmundReport rough = zygmund_check(root, 0.5, sample);
  CHECK(rough.v_tau > 0.0);
  CHECK(std::isfinite(rough.v_tau));
  CHECK(rough.worst_violation <= 0.0);

  CHECK(zygmund_check(root, 0.75, sample).v_tau >= 0.0);

  CHECK_THROWS_AS(zygmund_check(root, 0.0, sample), std::invalid_argument);
  CHECK_THROWS_AS(zygmund_check(root, 1.0, sample), std::invalid_argument);
  CHECK_THROWS_AS(zygmund_check(root, 0.5, {}), std::invalid_argument);
  CHECK_THROWS_AS(zygmund_check(root, 0.5, {{0.1, 0.0}}),
                  std::invalid_argument);
}

TEST_CASE("ball bound, critical radius and scaling laws check out") {
  // At order one half in one dimension the closed form collapses to one.
  const BoundReport half = bound_checks(1, {0.5}, 16);
  CHECK(half.bk_bound[0] == doctest::Approx(1.0).epsilon(1e-14));

  // The critical radius in one dimension reduces to exp(-gamma).
  CHECK(half.r0 == doctest::Approx(std::exp(-euler_gamma)).epsilon(1e-13));

  // Other dimensions follow the digamma closed forms; no mesh runs there.
  const BoundReport two = bound_checks(2, {0.25});
  CHECK(!two.galerkin_checked);
  CHECK(two.pass);
  CHECK(two.r0 == doctest::Approx(2.0 * std::exp(-euler_gamma)).epsilon(1e-12));
  const BoundReport three = bound_checks(3, {0.25});
  CHECK(three.r0 ==
        doctest::Approx(std::exp(1.0 - euler_gamma)).epsilon(1e-12));

  // Independent evaluation of the tabulated bound.
  const BoundReport tab = bound_checks(1, {0.1, 0.25, 0.4}, 16);
  for (size_t i = 0; i < tab.s_grid.size(); ++i) {
    const double s = tab.s_grid[i];
    const double ref = std::pow(4.0, s) * std::tgamma(1.0 + s) *
                       std::tgamma(0.5 + s) / std::tgamma(0.5);
    CHECK(tab.bk_bound[i] == doctest::Approx(ref).epsilon(1e-12));
  }

  const BoundReport full = bound_checks(1, {0.25, 0.1, 0.05}, 128);
  CHECK(full.galerkin_checked);
  CHECK(full.pass);
  CHECK(full.min_margin > 0.0);
  CHECK(full.frac_scaling_err <= 1e-8);
  CHECK(full.log_scaling_err <= 1e-8);
  CHECK(full.lambda1.size() == 3);

  CHECK_THROWS_AS(bound_checks(0, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(bound_checks(1, {}), std::invalid_argument);
  CHECK_THROWS_AS(bound_checks(1, {1.0}), std::invalid_argument);
}

TEST_CASE("standard checks pass and outputs are written byte-stable") {
  SweepConfig cfg;
  cfg.n = 48;
  cfg.k = 3;
  cfg.s_grid = {0.1, 0.05, 0.025};

  cfg.workers = 1;
  const RunReport rep1 = run_sweep(cfg, "harness_w1");
  cfg.workers = 3;
  const RunReport rep3 = run_sweep(cfg, "harness_w3");
  CHECK(rep1.all_pass);
  CHECK(rep3.all_pass);

  bool saw_disabled = false;
  for (const CheckOutcome& c : rep1.checks) {
    if (!c.enabled) saw_disabled = true;
    if (c.enabled) CHECK(c.pass);
  }
  CHECK(saw_disabled);  // resolution-bound checks stay off at this size

  const char* names[] = {"eigenvalues.csv", "logeigs.csv", "slopes.csv",
                         "diagnostics.csv", "report.json"};
  for (const char* name : names) {
    const std::string a = slurp(std::string("harness_w1/") + name);
    const std::string b = slurp(std::string("harness_w3/") + name);
    REQUIRE(!a.empty());
    CHECK(a == b);
  }

  const std::string eig = slurp("harness_w1/eigenvalues.csv");
  CHECK(eig.rfind("s,k,lambda,diffquot\n", 0) == 0);
  size_t rows = 0;
  for (char c : eig) rows += c == '\n';
  CHECK(rows == 1 + 3 * 3);

  const std::string diag = slurp("harness_w1/diagnostics.csv");
  CHECK(diag.rfind("s,k,supnorm,decaystat,osc_r1,osc_r2,osc_r3,osc_r4,"
                   "kernelstat\n",
                   0) == 0);
  const std::string json = slurp("harness_w1/report.json");
  CHECK(json.find("\"all_pass\": true") != std::string::npos);

  for (const char* dir : {"harness_w1", "harness_w3"})
    for (const char* name : names)
      std::remove((std::string(dir) + "/" + name).c_str());
}

TEST_CASE("rectangle sweeps ride the same pipeline") {
  SweepConfig cfg;
  cfg.domain = make_rectangle(-1.0, 1.0, -1.0, 1.0);
  cfg.n = 6;
  cfg.k = 2;
  cfg.s_grid = {0.2, 0.1, 0.05};
  cfg.quad_tol = 1e-7;
  const SweepResult res = sweep(cfg);

  // The square carries an exactly degenerate second pair.
  CHECK(res.log_spectrum.eigenvalues[1] ==
        doctest::Approx(res.log_spectrum.eigenvalues[2]).epsilon(1e-9));

  const auto dists = eigfun_convergence(res, 2);
  for (const auto& d : dists) {
    REQUIRE(d.has_value());
    CHECK(*d < 0.5);
  }

  // The kernel statistic is an interval diagnostic; here it stays empty.
  CHECK_THROWS_AS(truncated_kernel_stat(res, 1, 0.25, 0.5),
                  std::invalid_argument);
  for (const auto& row : res.kernelstat)
    for (double v : row) CHECK(std::isnan(v));

  const RunReport rep = standard_checks(res);
  for (const CheckOutcome& c : rep.checks)
    if (c.enabled && c.name != "uniform_kernel_ratio") CHECK(c.pass);
}

TEST_CASE("interpolant evaluator matches nodal data and vanishes outside") {
  const Mesh mesh = mesh_interval(-1.0, 1.0, 8);
  std::vector<double> coeffs(mesh.interior.size());
  for (size_t j = 0; j < coeffs.size(); ++j) coeffs[j] = 1.0 + 0.5 * j;
  const auto f = nodal_interpolant(mesh, coeffs);

  for (size_t j = 0; j < coeffs.size(); ++j)
    CHECK(f(mesh.nodes[mesh.interior[j]]) ==
          doctest::Approx(coeffs[j]).epsilon(1e-14));
  CHECK(f(-1.0) == 0.0);
  CHECK(f(1.0) == 0.0);
  CHECK(f(-3.0) == 0.0);
  const double mid =
      0.5 * (mesh.nodes[mesh.interior[0]] + mesh.nodes[mesh.interior[1]]);
  CHECK(f(mid) == doctest::Approx(0.5 * (coeffs[0] + coeffs[1])).epsilon(1e-14));

  CHECK_THROWS_AS(nodal_interpolant(mesh, {1.0}), std::invalid_argument);
}
