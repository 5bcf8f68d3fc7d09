#pragma once

#include <string>
#include <vector>

#include "loglap/testlab.hpp"

namespace loglap {

// Uniform partition of an interval. Basis functions are the continuous
// piecewise-linear hats over interior nodes, extended by zero outside the
// domain, so homogeneous exterior conditions are built into the space.
struct Mesh {
  Domain domain;
  std::vector<double> nodes;    // strictly increasing, endpoints included
  std::vector<int> interior;    // node indices carrying a basis function

  double h() const { return nodes[1] - nodes[0]; }
};

// nodes a = x_0 < ... < x_n = b with n uniform panels, n >= 2.
Mesh mesh_interval(double a, double b, int n);

// Dense symmetric Galerkin matrix over the interior basis. Nonlocal kernels
// fill every entry, so there is no sparsity worth keeping. For tensor grids
// the basis index is ix * (interior y-count) + iy, row-major in x.
struct FormMatrix {
  enum class Kind { mass, frac, log };
  Kind kind = Kind::mass;
  int dim = 1;
  double s = 0.0;               // order, meaningful for kind == frac only
  double quad_tol = 0.0;
  int size = 0;
  std::vector<double> entries;  // row-major, size * size

  double& at(int i, int j) { return entries[static_cast<size_t>(i) * size + j]; }
  double at(int i, int j) const {
    return entries[static_cast<size_t>(i) * size + j];
  }
};

// L2 pairings of the hat basis; exact piecewise-polynomial integration.
FormMatrix assemble_mass(const Mesh& mesh);

// Full-space energy of order s for every basis pair, including the
// interaction with the exterior region where the basis vanishes. Entries
// come from closed-form separation integrals of the hat correlation
// against the kernel weight, so they are exact to rounding; quad_tol is
// recorded for provenance and never loosens the result.
FormMatrix assemble_frac(const Mesh& mesh, double s, double quad_tol);

// Logarithmic energy with the fixed unit splitting radius: difference part
// inside separation 1, product part beyond, plus the mass multiple.
FormMatrix assemble_log(const Mesh& mesh, double quad_tol);

// Bilinear elements on the tensor grid of two interval meshes. The mass
// matrix is an exact tensor product; the nonlocal kinds reduce to a radial
// separation integral of the product correlation, evaluated adaptively to
// quad_tol with the estimated error carried per entry into the worst case.
FormMatrix assemble_rect(const Mesh& mx, const Mesh& my, FormMatrix::Kind kind,
                         double s, double quad_tol);

// Binary container: fixed header (magic, version, kind, dimension, order,
// size) followed by row-major little-endian doubles. Writing the same
// matrix twice produces identical bytes.
void write_form_matrix(const std::string& path, const FormMatrix& m);
FormMatrix read_form_matrix(const std::string& path);

}  // namespace loglap
