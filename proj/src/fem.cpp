#include "loglap/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "loglap/constants.hpp"
#include "loglap/quadrature.hpp"

namespace loglap {

namespace {

[[noreturn]] void entry_failure(const char* who, int i, int j,
                                double achieved) {
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "%s: entry (%d,%d) tolerance not reached, achieved error %.3e",
                who, i, j, achieved);
  throw QuadratureError(msg, achieved);
}

void check_mesh(const Mesh& mesh, const char* who) {
  char msg[120];
  if (mesh.nodes.size() < 3) {
    std::snprintf(msg, sizeof msg, "%s: mesh needs at least two panels", who);
    throw std::invalid_argument(msg);
  }
  const double h = mesh.nodes[1] - mesh.nodes[0];
  for (size_t i = 0; i + 1 < mesh.nodes.size(); ++i) {
    const double step = mesh.nodes[i + 1] - mesh.nodes[i];
    if (!(step > 0.0) || std::fabs(step - h) > 1e-9 * h) {
      std::snprintf(msg, sizeof msg, "%s: mesh spacing must be uniform", who);
      throw std::invalid_argument(msg);
    }
  }
  if (mesh.interior.size() != mesh.nodes.size() - 2) {
    std::snprintf(msg, sizeof msg, "%s: interior index out of step", who);
    throw std::invalid_argument(msg);
  }
}

// Correlation of two unit-height hats of half-width h at center offset tau:
// an even piecewise cubic supported on [-2h, 2h] with knots at 0, h, 2h.
// Values 2h/3 at 0 and h/6 at h are the familiar overlap integrals.
std::array<double, 4> corr_coeffs(double h, int piece) {
  if (piece == 0)
    return {2.0 * h / 3.0, 0.0, -1.0 / h, 0.5 / (h * h)};
  return {4.0 * h / 3.0, -2.0, 1.0 / h, -1.0 / (6.0 * h * h)};
}

double hat_corr(double h, double tau) {
  const double u = std::fabs(tau);
  if (u >= 2.0 * h) return 0.0;
  const auto c = corr_coeffs(h, u < h ? 0 : 1);
  return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

// Second derivative of the correlation; continuous, piecewise linear.
double hat_corr_dd(double h, double tau) {
  const double u = std::fabs(tau);
  if (u >= 2.0 * h) return 0.0;
  if (u < h) return -2.0 / h + 3.0 * u / (h * h);
  return 2.0 / h - u / (h * h);
}

// Cubic coefficients in t of hat_corr(h, c + sg*t), valid on an interval
// where the argument keeps its sign and stays inside one correlation piece.
// The piece is selected by a probe point inside the interval.
std::array<double, 4> shifted(double h, double c, double sg, double tmid) {
  const double w = c + sg * tmid;
  const double aw = std::fabs(w);
  if (aw >= 2.0 * h) return {0.0, 0.0, 0.0, 0.0};
  const auto g = corr_coeffs(h, aw < h ? 0 : 1);
  const double s2 = (w >= 0.0) ? 1.0 : -1.0;
  const double A = s2 * c, B = s2 * sg;
  std::array<double, 4> out;
  out[0] = g[0] + A * (g[1] + A * (g[2] + A * g[3]));
  out[1] = B * (g[1] + A * (2.0 * g[2] + 3.0 * A * g[3]));
  out[2] = B * B * (g[2] + 3.0 * A * g[3]);
  out[3] = B * B * B * g[3];
  return out;
}

// integral of t^(k - 1 - twos) over [a, b]; the expm1 form stays stable
// when the exponent k - twos is tiny, and the a = 0 case only ever comes
// with k >= 2 so the power is positive
double power_int(int k, double twos, double a, double b) {
  const double e = k - twos;
  if (a <= 0.0) return std::pow(b, e) / e;
  const double lr = std::log(b / a);
  if (e == 0.0) return lr;
  return std::pow(a, e) * std::expm1(e * lr) / e;
}

// Knot multiples of h where either shifted correlation argument crosses a
// piece boundary for a pair at center offset m*h.
std::vector<double> offset_knots(double h, int m) {
  std::vector<int> mult;
  mult.push_back(0);
  for (int k = -2; k <= 2; ++k) {
    if (m + k > 0) mult.push_back(m + k);
    if (k - m > 0) mult.push_back(k - m);
  }
  std::sort(mult.begin(), mult.end());
  mult.erase(std::unique(mult.begin(), mult.end()), mult.end());
  std::vector<double> kn(mult.size());
  for (size_t i = 0; i < mult.size(); ++i) kn[i] = mult[i] * h;
  return kn;
}

// Coefficients of the difference correlation
//   P(t) = 2 G(m h) - G(m h - t) - G(m h + t)
// on one knot interval. P(0) = P'(0) = 0 because the correlation is C^1,
// so on the interval touching zero the constant and linear coefficients
// are forced to exact zeros rather than left as rounding residue (they
// would otherwise meet a divergent weight).
std::array<double, 4> diff_coeffs(double h, int m, double ta, double tb,
                                  double g0) {
  const double tm = 0.5 * (ta + tb);
  const auto f1 = shifted(h, m * h, -1.0, tm);
  const auto f2 = shifted(h, m * h, +1.0, tm);
  std::array<double, 4> c;
  c[0] = 2.0 * g0 - f1[0] - f2[0];
  c[1] = -(f1[1] + f2[1]);
  c[2] = -(f1[2] + f2[2]);
  c[3] = -(f1[3] + f2[3]);
  if (ta == 0.0) {
    c[0] = 0.0;
    c[1] = 0.0;
  }
  return c;
}

// Order-s energy of a hat pair at offset m*h over the whole line, by exact
// piecewise integration of the difference correlation against the kernel.
// Beyond the correlation support the difference correlation is constant,
// which closes the tail.
double frac_offset(double h, int m, double twos, double C) {
  const auto kn = offset_knots(h, m);
  const double g0 = hat_corr(h, m * h);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < kn.size(); ++i) {
    const auto c = diff_coeffs(h, m, kn[i], kn[i + 1], g0);
    for (int k = 0; k < 4; ++k) {
      if (c[k] != 0.0) acc += c[k] * power_int(k, twos, kn[i], kn[i + 1]);
    }
  }
  const double tmax = kn.back();
  acc += 2.0 * g0 * std::pow(tmax, -twos) / twos;
  return C * acc;
}

// Logarithmic energy of a hat pair at offset m*h: difference part against
// 1/t inside separation 1, product part beyond it, mass multiple on top.
double log_offset(double h, int m, double C, double rho) {
  auto kn = offset_knots(h, m);
  const double tmax = kn.back();
  if (tmax > 1.0) {
    kn.push_back(1.0);
    std::sort(kn.begin(), kn.end());
    kn.erase(std::unique(kn.begin(), kn.end(),
                         [](double a, double b) {
                           return std::fabs(a - b) <= 1e-12;
                         }),
             kn.end());
  }
  const double g0 = hat_corr(h, m * h);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < kn.size(); ++i) {
    const double ta = kn[i], tb = kn[i + 1];
    if (ta >= 1.0) break;
    const double ub = std::min(tb, 1.0);
    const auto c = diff_coeffs(h, m, ta, ub, g0);
    for (int k = 0; k < 4; ++k) {
      if (c[k] != 0.0) acc += c[k] * power_int(k, 0.0, ta, ub);
    }
  }
  if (tmax < 1.0) acc += 2.0 * g0 * std::log(1.0 / tmax);
  if (tmax > 1.0) {
    // product correlation against 1/t from separation 1 outward
    for (size_t i = 0; i + 1 < kn.size(); ++i) {
      const double ta = kn[i], tb = kn[i + 1];
      if (tb <= 1.0) continue;
      const double tm = 0.5 * (ta + tb);
      const auto f1 = shifted(h, m * h, -1.0, tm);
      const auto f2 = shifted(h, m * h, +1.0, tm);
      for (int k = 0; k < 4; ++k) {
        const double fk = f1[k] + f2[k];
        if (fk != 0.0) acc -= fk * power_int(k, 0.0, ta, tb);
      }
    }
  }
  return C * acc + rho * g0;
}

void fill_toeplitz(FormMatrix& out, const std::vector<double>& vals) {
  for (int i = 0; i < out.size; ++i)
    for (int j = 0; j < out.size; ++j)
      out.at(i, j) = vals[static_cast<size_t>(std::abs(i - j))];
}

// ---- tensor-grid entries ------------------------------------------------

struct RectPair {
  double hx = 0.0, hy = 0.0;
  double dx = 0.0, dy = 0.0;  // center offset, component-wise nonnegative
  double phi0 = 0.0;          // product correlation at the offset
  double tmax = 0.0;          // beyond this the product correlation is zero
};

double rect_qang(const RectPair& rp, double t, double tol) {
  auto f = [&](double phi) {
    return hat_corr(rp.hx, rp.dx + t * std::cos(phi)) *
           hat_corr(rp.hy, rp.dy + t * std::sin(phi));
  };
  const auto res = adaptive_integrate(
      f, {0.0, 0.5 * M_PI, M_PI, 1.5 * M_PI, 2.0 * M_PI}, tol);
  return res.value;
}

// Angular integral of phi0 - Phi(d + t theta). Subtracting inside the
// integrand keeps the request honest near t = 0, where the averaged
// difference is quadratically small but the pointwise one only linear.
double rect_qdiff(const RectPair& rp, double t, double tol) {
  auto f = [&](double phi) {
    return rp.phi0 - hat_corr(rp.hx, rp.dx + t * std::cos(phi)) *
                         hat_corr(rp.hy, rp.dy + t * std::sin(phi));
  };
  const auto res = adaptive_integrate(
      f, {0.0, 0.5 * M_PI, M_PI, 1.5 * M_PI, 2.0 * M_PI}, tol);
  return res.value;
}

// One tensor-basis pair energy by radial reduction: weight w(t) against
// omega*phi0 - Qang(t), where Qang is the angular average of the product
// correlation on the circle of radius t around the offset. A quadratic
// head handles the cancellation near t = 0; its omitted-order envelope and
// the induced angular error both land in est.
double rect_offset(const RectPair& rp, bool logk, double twos, double C,
                   double rho2, double target, const char* who, int mi,
                   int mj) {
  const double omega = 2.0 * M_PI;
  const double wtw = logk ? 0.0 : twos;  // weight is t^(-1-wtw)
  const double hmin = std::min(rp.hx, rp.hy);
  const double lap = hat_corr_dd(rp.hx, rp.dx) * hat_corr(rp.hy, rp.dy) +
                     hat_corr(rp.hx, rp.dx) * hat_corr_dd(rp.hy, rp.dy);
  const double tup = logk ? std::min(1.0, rp.tmax) : rp.tmax;
  const double tpre = target / std::max(C, 1e-300);
  const double phiscale =
      (2.0 * rp.hx / 3.0) * (2.0 * rp.hy / 3.0) + 1e-300;
  const double m3 = 3.0 / (rp.hx * rp.hx) * (2.0 * rp.hy / 3.0) +
                    3.0 / (rp.hy * rp.hy) * (2.0 * rp.hx / 3.0) +
                    3.0 * (2.0 / rp.hx) + 3.0 * (2.0 / rp.hy);
  // the cutover balances the omitted third-order head against the
  // amplified rounding noise of the subtraction; both land far below
  // any realistic budget and the choice needs no tolerance input
  const double t0 = std::min(
      1e-3 * hmin, std::cbrt(6.0 * 1e-15 * phiscale / (omega * m3)));

  double acc = 0.0, est = 0.0;  // both in pre-constant units
  // analytic head below t0, with the omitted third-order envelope
  acc += -0.5 * M_PI * lap * power_int(2, wtw, 0.0, t0);
  est += omega * m3 / 6.0 * power_int(3, wtw, 0.0, t0);

  // body: adaptive in t with a separation-scaled angular tolerance whose
  // induced error integrates to a fixed share of the budget
  if (t0 < tup) {
    const double wq = power_int(2, wtw, t0, tup);
    const double e1 = 0.3 * tpre / std::max(wq, 1e-300);
    auto f = [&](double t) {
      const double atol = std::max(e1 * t * t, 1e-15 * phiscale);
      const double q = rect_qdiff(rp, t, atol);
      const double w = logk ? 1.0 / t : std::pow(t, -1.0 - twos);
      return q * w;
    };
    const auto body =
        adaptive_integrate(f, geometric_breakpoints(t0, tup), 0.3 * tpre);
    acc += body.value;
    est += body.est_error + e1 * wq;
    // rounding floor of the subtraction, amplified by the weight
    est += 1e-15 * phiscale * power_int(0, wtw, t0, tup);
  }
  // constant continuation once the product correlation has died out
  if (!logk && rp.phi0 != 0.0)
    acc += omega * rp.phi0 * std::pow(rp.tmax, -twos) / twos;
  if (logk && rp.tmax < 1.0 && rp.phi0 != 0.0)
    acc += omega * rp.phi0 * std::log(1.0 / rp.tmax);

  double far = 0.0;
  if (logk && rp.tmax > 1.0) {
    const double lfar = std::log(rp.tmax);
    const double atol =
        std::max(0.25 * tpre / lfar, 1e-15 * phiscale);
    auto f = [&](double t) { return rect_qang(rp, t, atol) / t; };
    const auto fres = adaptive_integrate(
        f, {1.0, 0.5 * (1.0 + rp.tmax), rp.tmax}, 0.25 * tpre);
    far = -fres.value;
    est += fres.est_error + atol * lfar;
  }

  est *= C;
  if (est > target) entry_failure(who, mi, mj, est);
  double out = C * (acc + far);
  if (logk) out += rho2 * rp.phi0;
  return out;
}

void put_bytes(std::FILE* f, const void* p, size_t n) {
  if (std::fwrite(p, 1, n, f) != n) {
    std::fclose(f);
    throw std::runtime_error("write_form_matrix: short write");
  }
}

void put_u32(std::FILE* f, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
  put_bytes(f, b, 4);
}

void put_u64(std::FILE* f, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
  put_bytes(f, b, 8);
}

void put_f64(std::FILE* f, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(f, u);
}

bool get_bytes(std::FILE* f, void* p, size_t n) {
  return std::fread(p, 1, n, f) == n;
}

bool get_u32(std::FILE* f, uint32_t* v) {
  unsigned char b[4];
  if (!get_bytes(f, b, 4)) return false;
  *v = 0;
  for (int i = 0; i < 4; ++i) *v |= uint32_t(b[i]) << (8 * i);
  return true;
}

bool get_u64(std::FILE* f, uint64_t* v) {
  unsigned char b[8];
  if (!get_bytes(f, b, 8)) return false;
  *v = 0;
  for (int i = 0; i < 8; ++i) *v |= uint64_t(b[i]) << (8 * i);
  return true;
}

bool get_f64(std::FILE* f, double* v) {
  uint64_t u;
  if (!get_u64(f, &u)) return false;
  std::memcpy(v, &u, 8);
  return true;
}

uint8_t kind_code(FormMatrix::Kind k) {
  switch (k) {
    case FormMatrix::Kind::mass: return 0;
    case FormMatrix::Kind::frac: return 1;
    case FormMatrix::Kind::log: return 2;
  }
  return 0;
}

}  // namespace

Mesh mesh_interval(double a, double b, int n) {
  if (!(a < b)) throw std::invalid_argument("mesh_interval: need a < b");
  if (n < 2) throw std::invalid_argument("mesh_interval: need n >= 2");
  Mesh m;
  m.domain = make_interval(a, b);
  m.nodes.resize(n + 1);
  for (int i = 0; i <= n; ++i)
    m.nodes[i] = a + (b - a) * (double(i) / n);
  m.nodes.front() = a;
  m.nodes.back() = b;
  m.interior.resize(n - 1);
  for (int i = 1; i < n; ++i) m.interior[i - 1] = i;
  return m;
}

FormMatrix assemble_mass(const Mesh& mesh) {
  check_mesh(mesh, "assemble_mass");
  const double h = mesh.h();
  FormMatrix out;
  out.kind = FormMatrix::Kind::mass;
  out.dim = 1;
  out.size = static_cast<int>(mesh.interior.size());
  out.entries.assign(static_cast<size_t>(out.size) * out.size, 0.0);
  std::vector<double> vals(out.size, 0.0);
  vals[0] = 2.0 * h / 3.0;
  if (out.size > 1) vals[1] = h / 6.0;
  fill_toeplitz(out, vals);
  return out;
}

FormMatrix assemble_frac(const Mesh& mesh, double s, double quad_tol) {
  check_mesh(mesh, "assemble_frac");
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("assemble_frac: need 0 < s < 1");
  if (!(quad_tol > 0.0))
    throw std::invalid_argument("assemble_frac: tolerance must be positive");
  const double h = mesh.h();
  const double C = frac_constant(1, s);
  FormMatrix out;
  out.kind = FormMatrix::Kind::frac;
  out.dim = 1;
  out.s = s;
  out.quad_tol = quad_tol;
  out.size = static_cast<int>(mesh.interior.size());
  out.entries.assign(static_cast<size_t>(out.size) * out.size, 0.0);
  std::vector<double> vals(out.size);
  for (int m = 0; m < out.size; ++m)
    vals[m] = frac_offset(h, m, 2.0 * s, C);
  fill_toeplitz(out, vals);
  return out;
}

FormMatrix assemble_log(const Mesh& mesh, double quad_tol) {
  check_mesh(mesh, "assemble_log");
  if (!(quad_tol > 0.0))
    throw std::invalid_argument("assemble_log: tolerance must be positive");
  const double h = mesh.h();
  const auto lc = log_constants(1);
  FormMatrix out;
  out.kind = FormMatrix::Kind::log;
  out.dim = 1;
  out.quad_tol = quad_tol;
  out.size = static_cast<int>(mesh.interior.size());
  out.entries.assign(static_cast<size_t>(out.size) * out.size, 0.0);
  std::vector<double> vals(out.size);
  for (int m = 0; m < out.size; ++m)
    vals[m] = log_offset(h, m, lc.c_log, lc.rho);
  fill_toeplitz(out, vals);
  return out;
}

FormMatrix assemble_rect(const Mesh& mx, const Mesh& my,
                         FormMatrix::Kind kind, double s, double quad_tol) {
  check_mesh(mx, "assemble_rect");
  check_mesh(my, "assemble_rect");
  if (kind == FormMatrix::Kind::frac && !(s > 0.0 && s < 1.0))
    throw std::invalid_argument("assemble_rect: need 0 < s < 1");
  if (!(quad_tol > 0.0))
    throw std::invalid_argument("assemble_rect: tolerance must be positive");
  const int nx = static_cast<int>(mx.interior.size());
  const int ny = static_cast<int>(my.interior.size());
  const double hx = mx.h(), hy = my.h();

  FormMatrix out;
  out.kind = kind;
  out.dim = 2;
  out.s = (kind == FormMatrix::Kind::frac) ? s : 0.0;
  out.quad_tol = quad_tol;
  out.size = nx * ny;
  out.entries.assign(static_cast<size_t>(out.size) * out.size, 0.0);

  // entries depend on the absolute node offset per axis
  std::vector<double> vals(static_cast<size_t>(nx) * ny);
  if (kind == FormMatrix::Kind::mass) {
    for (int mi = 0; mi < nx; ++mi)
      for (int mj = 0; mj < ny; ++mj)
        vals[static_cast<size_t>(mi) * ny + mj] =
            hat_corr(hx, mi * hx) * hat_corr(hy, mj * hy);
  } else {
    const bool logk = (kind == FormMatrix::Kind::log);
    const double C = logk ? log_constants(2).c_log : frac_constant(2, s);
    const double rho2 = logk ? log_constants(2).rho : 0.0;
    // absolute per-entry budget anchored at the mass overlap of the
    // diagonal, which tracks the diagonal energy scale on desk meshes
    const double target = quad_tol * (2.0 * hx / 3.0) * (2.0 * hy / 3.0);
    for (int mi = 0; mi < nx; ++mi) {
      for (int mj = 0; mj < ny; ++mj) {
        RectPair rp;
        rp.hx = hx;
        rp.hy = hy;
        rp.dx = mi * hx;
        rp.dy = mj * hy;
        rp.phi0 = hat_corr(hx, rp.dx) * hat_corr(hy, rp.dy);
        rp.tmax = std::hypot(rp.dx, rp.dy) + 2.0 * std::hypot(hx, hy);
        vals[static_cast<size_t>(mi) * ny + mj] =
            rect_offset(rp, logk, 2.0 * s, C, rho2, target, "assemble_rect",
                        mi, mj);
      }
    }
  }

  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int jx = 0; jx < nx; ++jx)
        for (int jy = 0; jy < ny; ++jy)
          out.at(ix * ny + iy, jx * ny + jy) =
              vals[static_cast<size_t>(std::abs(ix - jx)) * ny +
                   std::abs(iy - jy)];
  return out;
}

void write_form_matrix(const std::string& path, const FormMatrix& m) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_form_matrix: cannot open " + path);
  put_bytes(f, "NLFM", 4);
  put_u32(f, 1u);
  const uint8_t kc = kind_code(m.kind);
  put_bytes(f, &kc, 1);
  put_u32(f, static_cast<uint32_t>(m.dim));
  put_f64(f, m.s);
  put_u64(f, static_cast<uint64_t>(m.size));
  for (double v : m.entries) put_f64(f, v);
  if (std::fclose(f) != 0)
    throw std::runtime_error("write_form_matrix: close failed on " + path);
}

FormMatrix read_form_matrix(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("read_form_matrix: cannot open " + path);
  auto fail = [&](const char* why) -> FormMatrix {
    std::fclose(f);
    throw std::runtime_error(std::string("read_form_matrix: ") + why);
  };
  char magic[4];
  if (!get_bytes(f, magic, 4) || std::memcmp(magic, "NLFM", 4) != 0)
    return fail("bad magic");
  uint32_t version = 0;
  if (!get_u32(f, &version) || version != 1) return fail("bad version");
  uint8_t kc = 0;
  if (!get_bytes(f, &kc, 1) || kc > 2) return fail("bad kind");
  uint32_t dim = 0;
  if (!get_u32(f, &dim) || dim < 1 || dim > 2) return fail("bad dimension");
  FormMatrix m;
  m.kind = (kc == 0) ? FormMatrix::Kind::mass
                     : (kc == 1 ? FormMatrix::Kind::frac
                                : FormMatrix::Kind::log);
  m.dim = static_cast<int>(dim);
  if (!get_f64(f, &m.s)) return fail("truncated header");
  uint64_t size = 0;
  if (!get_u64(f, &size) || size == 0 || size > 4096) return fail("bad size");
  m.size = static_cast<int>(size);
  m.entries.resize(size * size);
  for (double& v : m.entries)
    if (!get_f64(f, &v)) return fail("truncated entries");
  std::fclose(f);
  return m;
}

}  // namespace loglap
