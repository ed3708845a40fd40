#pragma once

#include <Eigen/Sparse>

#include "satlab/grid.hpp"

// Assembly of the conformal Laplacian L_g = -a_n Lap_g + R_g with the
// boundary operator B_g = d_nu + b_n h_g, Rayleigh quotients, and the
// deterministic principal-eigenvalue solvers for the closed, s=0
// (Steklov-type) and s=1 (Robin-type) problems.
//
// Conventions: BoundaryData stores the inward-normal mean curvature h; the
// quadratic form behind the Rayleigh quotient carries the boundary term with
// the outward-convention sign, 2(n-1) * integral_bnd (-h_inward) f^2, which
// is the choice consistent with the satellite curvature identities.

namespace satlab {

enum class SpectralMode { Closed, Steklov, Robin };  // closed, s=0, s=1

inline const char* mode_name(SpectralMode s) {
  switch (s) {
    case SpectralMode::Closed: return "closed";
    case SpectralMode::Steklov: return "s0";
    default: return "s1";
  }
}

struct OperatorPair {
  int dim = 0;
  double a_n = 0.0;  // 4(n-1)/(n-2)
  double b_n = 0.0;  // (n-2)/2
  // quadratic form of the quotient numerator:
  //   a_n stiffness + diag(mass * R) + 2(n-1) boundary_h_form
  Eigen::SparseMatrix<double> numerator;
  Eigen::SparseMatrix<double> stiffness;   // gradient part only
  Eigen::VectorXd mass;                    // interior quadrature weights
  Eigen::VectorXd boundary_mass;           // zero off the boundary
  Eigen::VectorXd scalar_curvature;        // R_g per node
  // strong-form boundary operator B = d_nu + b_n h (inward convention),
  // one row per boundary entry
  Eigen::SparseMatrix<double> boundary_op;
  std::vector<std::size_t> boundary_rows;  // node of each B row
};

OperatorPair assemble(const DiscreteManifold& m);

// Q^{(s)}(f); closed mode uses the interior denominator.
double rayleigh_quotient(const OperatorPair& op, const ScalarField& f,
                         SpectralMode s);

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
  std::vector<double> residual_history;
  SolverError(const std::string& msg, std::vector<double> hist)
      : std::runtime_error(msg), residual_history(std::move(hist)) {}
};

struct EigenSolution {
  SpectralMode mode = SpectralMode::Closed;
  double lambda = 0.0;
  ScalarField u;                 // positive, u(basepoint) = 1
  double algebraic_residual = 0.0;  // pencil residual of the converged pair
  double pde_residual = 0.0;        // strong-form interior residual (diagnostic)
  double boundary_residual = 0.0;   // strong-form boundary residual (diagnostic)
  int iterations = 0;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 400;
  // shift placed below the spectrum from the envelope bounds; extra margin:
  double shift_margin = 1.0;
};

EigenSolution solve_principal(const DiscreteManifold& m, SpectralMode s,
                              const SolveOptions& opts = {});
EigenSolution solve_principal(const DiscreteManifold& m, const OperatorPair& op,
                              SpectralMode s, const SolveOptions& opts = {});

// dense full-spectrum oracle (for small grids); returns the smallest
// eigenvalue of the same pencil
double dense_principal_eigenvalue(const DiscreteManifold& m, SpectralMode s);

struct BoundsReport {
  double lambda = 0.0;
  double envelope = 0.0;  // |R|max-based bound per the mode
  double margin = 0.0;    // envelope*(1+slack) - |lambda|
  double slack = 0.05;
  bool passes = false;
  double sup_R = 0.0;
  double sup_h = 0.0;
  double vol = 0.0;
  double vol_bnd = 0.0;
};

// |lambda_1| <= |R|max (closed),
// |lambda_1^(0)| <= |R|max vol(M)/vol(bnd) + 2(n-1)|h|max,
// |lambda_1^(1)| <= |R|max + 2(n-1)|h|max vol(bnd)/vol(M),
// each with 5% discretization slack.
BoundsReport eigen_bounds_check(const DiscreteManifold& m,
                                const EigenSolution& sol, double slack = 0.05);

// inf_K u / sup_K u for the node set K.
double harnack_ratio(const ScalarField& u, const std::vector<std::size_t>& k_set);

struct HarnackStability {
  double ratio = 0.0;
  double perturbed_ratio = 0.0;
  double drift = 0.0;            // |perturbed - ratio| / ratio
  double perturbation_c2 = 0.0;  // measured C^2 size of the metric change
};

// Re-solves after a smooth metric perturbation of relative size eps and
// reports the Harnack-ratio drift on K.
HarnackStability harnack_stability(const DiscreteManifold& m, SpectralMode s,
                                   const std::vector<std::size_t>& k_set,
                                   double eps, const SolveOptions& opts = {});

}  // namespace satlab
