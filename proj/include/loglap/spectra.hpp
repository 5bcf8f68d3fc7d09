#pragma once

#include <utility>
#include <vector>

#include "loglap/fem.hpp"

namespace loglap {

// Eigenpairs of the weak problem A v = lambda M v, ascending. Vectors are
// columns in mesh coordinates, orthonormal in the M inner product, each
// scaled so its entry of largest magnitude is positive.
struct Spectrum {
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> vectors;
  std::vector<double> residuals;  // ||A v - lambda M v|| / ||v||_M per pair
};

// Dense solve via the triangular factor of M; the first k pairs are
// returned. M must be symmetric positive definite, A symmetric.
Spectrum solve_generalized(const FormMatrix& A, const FormMatrix& M, int k);

// x^T A x / x^T M x for a nonzero coordinate vector.
double rayleigh(const FormMatrix& A, const FormMatrix& M,
                const std::vector<double>& x);

// Sine of the largest principal angle between the column spans, measured
// in the M inner product. Blocks must have equal column counts and
// M-orthonormal columns; the result lies in [0, 1].
double subspace_distance(const std::vector<std::vector<double>>& U,
                         const std::vector<std::vector<double>>& V,
                         const FormMatrix& M);

// Half-open index range of the eigenvalue cluster containing position k,
// chaining neighbors whose gap is below rel_tol times the local scale.
// Comparisons across parameters should act on whole clusters, since
// multiple eigenvalues only converge as subspaces.
std::pair<int, int> cluster_range(const std::vector<double>& eigenvalues,
                                  int k, double rel_tol = 1e-6);

}  // namespace loglap
