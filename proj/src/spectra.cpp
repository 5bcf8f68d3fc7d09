#include "loglap/spectra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace loglap {

namespace {

Eigen::MatrixXd to_dense(const FormMatrix& F) {
  Eigen::MatrixXd out(F.size, F.size);
  for (int i = 0; i < F.size; ++i)
    for (int j = 0; j < F.size; ++j) out(i, j) = F.at(i, j);
  return out;
}

void require_symmetric(const Eigen::MatrixXd& X, const char* who) {
  const double scale = X.cwiseAbs().maxCoeff();
  const double skew = (X - X.transpose()).cwiseAbs().maxCoeff();
  if (skew > 1e-12 * scale) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "%s: matrix is not symmetric, skew %.3e of scale %.3e", who,
                  skew, scale);
    throw std::invalid_argument(msg);
  }
}

// largest-magnitude entry positive, first such entry on ties; keeps the
// output reproducible bit for bit across runs
void fix_sign(std::vector<double>& v) {
  size_t arg = 0;
  for (size_t j = 1; j < v.size(); ++j)
    if (std::fabs(v[j]) > std::fabs(v[arg])) arg = j;
  if (v[arg] < 0.0)
    for (double& x : v) x = -x;
}

}  // namespace

Spectrum solve_generalized(const FormMatrix& A, const FormMatrix& M, int k) {
  if (A.size != M.size)
    throw std::invalid_argument("solve_generalized: size mismatch");
  if (k < 1 || k > A.size)
    throw std::invalid_argument("solve_generalized: bad pair count");
  const Eigen::MatrixXd Ad = to_dense(A);
  const Eigen::MatrixXd Md = to_dense(M);
  require_symmetric(Ad, "solve_generalized");
  require_symmetric(Md, "solve_generalized");

  Eigen::LLT<Eigen::MatrixXd> llt(Md);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        "solve_generalized: mass matrix is not positive definite");

  // C = L^-1 A L^-T, then an ordinary symmetric eigendecomposition
  Eigen::MatrixXd T = llt.matrixL().solve(Ad);
  Eigen::MatrixXd C = llt.matrixL().solve(T.transpose()).transpose();
  C = 0.5 * (C + C.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("solve_generalized: eigensolver did not converge");

  Spectrum out;
  const double anorm = Ad.cwiseAbs().rowwise().sum().maxCoeff();
  for (int p = 0; p < k; ++p) {
    const double lam = eig.eigenvalues()(p);
    Eigen::VectorXd v = llt.matrixU().solve(eig.eigenvectors().col(p));
    const double mnorm = std::sqrt(v.dot(Md * v));
    v /= mnorm;
    const double res = (Ad * v - lam * (Md * v)).norm();
    std::vector<double> col(v.data(), v.data() + v.size());
    fix_sign(col);
    out.eigenvalues.push_back(lam);
    out.vectors.push_back(std::move(col));
    out.residuals.push_back(res);
    if (res > 1e-9 * anorm) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "solve_generalized: residual %.3e for pair %d exceeds "
                    "1e-9 of the matrix norm %.3e",
                    res, p, anorm);
      throw std::runtime_error(msg);
    }
  }
  return out;
}

double rayleigh(const FormMatrix& A, const FormMatrix& M,
                const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != A.size || A.size != M.size)
    throw std::invalid_argument("rayleigh: size mismatch");
  double xax = 0.0, xmx = 0.0;
  for (int i = 0; i < A.size; ++i)
    for (int j = 0; j < A.size; ++j) {
      xax += x[i] * A.at(i, j) * x[j];
      xmx += x[i] * M.at(i, j) * x[j];
    }
  if (xmx <= 0.0)
    throw std::invalid_argument("rayleigh: vector has no mass");
  return xax / xmx;
}

double subspace_distance(const std::vector<std::vector<double>>& U,
                         const std::vector<std::vector<double>>& V,
                         const FormMatrix& M) {
  if (U.empty() || U.size() != V.size())
    throw std::invalid_argument("subspace_distance: column count mismatch");
  const int n = M.size;
  const int p = static_cast<int>(U.size());
  for (const auto& c : U)
    if (static_cast<int>(c.size()) != n)
      throw std::invalid_argument("subspace_distance: column length mismatch");
  for (const auto& c : V)
    if (static_cast<int>(c.size()) != n)
      throw std::invalid_argument("subspace_distance: column length mismatch");

  const Eigen::MatrixXd Md = to_dense(M);
  Eigen::MatrixXd Ue(n, p), Ve(n, p);
  for (int c = 0; c < p; ++c)
    for (int r = 0; r < n; ++r) {
      Ue(r, c) = U[c][r];
      Ve(r, c) = V[c][r];
    }
  // cosines of the principal angles are the singular values of U^T M V
  const Eigen::MatrixXd G = Ue.transpose() * Md * Ve;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  double cmin = svd.singularValues().minCoeff();
  cmin = std::clamp(cmin, 0.0, 1.0);
  return std::sqrt(1.0 - cmin * cmin);
}

std::pair<int, int> cluster_range(const std::vector<double>& eigenvalues,
                                  int k, double rel_tol) {
  const int n = static_cast<int>(eigenvalues.size());
  if (k < 0 || k >= n)
    throw std::invalid_argument("cluster_range: index out of range");
  auto close = [&](int a, int b) {
    const double gap = std::fabs(eigenvalues[b] - eigenvalues[a]);
    const double scale =
        std::max(std::fabs(eigenvalues[a]), std::fabs(eigenvalues[b]));
    return gap <= rel_tol * scale;
  };
  int lo = k, hi = k + 1;
  while (lo > 0 && close(lo - 1, lo)) --lo;
  while (hi < n && close(hi - 1, hi)) ++hi;
  return {lo, hi};
}

}  // namespace loglap
