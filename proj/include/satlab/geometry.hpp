#pragma once

#include <Eigen/Sparse>

#include "satlab/grid.hpp"

// Finite-difference Riemannian geometry on box charts: Christoffel symbols,
// curvature tensors (Besse sign convention), covariant derivatives, tensor
// norms, the divergence-form Laplace-Beltrami operator and boundary second
// fundamental forms. Second-order central stencils in the interior,
// second-order one-sided stencils at chart ends.

namespace satlab {

// d/dx_axis of a per-node field with `comps` components per node.
// Writes into out (same layout). Central interior, one-sided at ends.
void fd_derivative(const DiscreteManifold& m, const double* field,
                   std::size_t comps, int axis, double* out);

ScalarField fd_derivative(const DiscreteManifold& m, const ScalarField& f,
                          int axis);

// Christoffel symbols Gamma^c_{ab}; slot order (c,a,b), c contravariant.
struct ConnectionField {
  TensorField gamma;  // rank 3, slot 0 contravariant
  const TensorField& tensor() const { return gamma; }
  double at(std::size_t node, int c, int a, int b) const {
    const int n = gamma.dim;
    return gamma.at(node, static_cast<std::size_t>((c * n + a) * n + b));
  }
};

ConnectionField christoffel(const DiscreteManifold& m);

struct CurvatureBundle {
  TensorField riem;    // (4,0) covariant, Besse sign convention
  TensorField ricci;   // (2,0) covariant
  ScalarField scalar;  // R_g
  // sup-norm residuals of the algebraic symmetries (diagnostic)
  double antisym_12 = 0.0;
  double antisym_34 = 0.0;
  double pair_swap = 0.0;
};

CurvatureBundle riemann(const DiscreteManifold& m);
ScalarField scalar_curvature(const DiscreteManifold& m);

// l-fold covariant derivative; each application prepends a covariant slot.
TensorField covariant_derivative(const DiscreteManifold& m,
                                 const TensorField& t, int order = 1);

// |T|_g pointwise: sqrt of total contraction of T (x) T via g
// (g^{-1} on covariant slots, g on contravariant slots).
ScalarField tensor_norm(const DiscreteManifold& m, const TensorField& t);

// Divergence-form Laplace-Beltrami assembly:
//   stiffness(u,v) ~= integral g^{ij} d_i u d_j v sqrt(det g)
// (flux form along each axis, central differences for the cross terms),
// mass = diagonal sqrt(det g) * trapezoid weights * cell volume.
// The assembled Delta = -mass^{-1} stiffness is self-adjoint in the mass
// inner product by construction.
struct LaplaceOperator {
  Eigen::SparseMatrix<double> stiffness;  // symmetric PSD-structured
  Eigen::VectorXd mass;                   // interior quadrature weights
};

LaplaceOperator assemble_laplace(const DiscreteManifold& m);

ScalarField laplace_beltrami(const DiscreteManifold& m, const ScalarField& f);

// Second fundamental form, inward unit normal and normalized mean curvature
// on every non-periodic coordinate face.
BoundaryData boundary_geometry(const DiscreteManifold& m);

// Contracted second Bianchi residual field |dR - 2 div Ric| (diagnostic).
ScalarField bianchi_residual(const DiscreteManifold& m);

}  // namespace satlab
