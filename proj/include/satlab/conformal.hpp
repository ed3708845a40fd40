#pragma once

#include "satlab/geometry.hpp"
#include "satlab/grid.hpp"

// Conformal transformation laws and the flatzoomer functionals:
// g[u] = e^{2u} g, the closed-form conformal Riemann tensor and connection,
// the degree-k flatzoomer field |grad^k_{g[u]} Rm_{g[u]}|_{g[u]} and the
// quasi-flatzoomer Psi = Phi_0 + Phi_1 + Phi_2 with its convexity-radius
// bound check.

namespace satlab {

struct ConformalFactor {
  ScalarField u;  // g[u] = e^{2u} g

  static ConformalFactor from_log(ScalarField log_factor) {
    return ConformalFactor{std::move(log_factor)};
  }
  // from positive w with g[u] = w^{4/(n-2)} g, i.e. u = (2/(n-2)) ln w
  static ConformalFactor from_positive(const ScalarField& w, int dim);
  ScalarField to_positive(int dim) const;  // w = e^{(n-2)u/2}
};

// New manifold with metric e^{2u} g (same chart/basepoint, boundary
// recomputed).
DiscreteManifold conformal_metric(const DiscreteManifold& m,
                                  const ConformalFactor& factor);

// Closed-form (4,0) Riemann tensor of e^{2u} g:
//   e^{2u} ( Riem_g  -  g KN (Hess_g u - du (x) du + 1/2 |du|_g^2 g) )
// where KN is the Kulkarni-Nomizu product.
TensorField conformal_riemann(const DiscreteManifold& m, const ScalarField& u);

// Closed-form conformal covariant derivative of a vector field:
//   grad^{g[u]}_v X = grad^g_v X + du(X) v + du(v) X - g(v,X) grad_g u.
// v, X and the result are contravariant per-node vector fields (rank-1).
TensorField conformal_connection(const DiscreteManifold& m, const ScalarField& u,
                                 const TensorField& v, const TensorField& x);

struct FlatzoomerReport {
  int degree = 0;           // k
  ScalarField phi;          // |grad^k_{g[u]} Rm|_{g[u]} per node
  double sup = 0.0;
};

// Builds the conformal manifold and runs it through the curvature pipeline.
FlatzoomerReport flatzoomer_phi(const DiscreteManifold& m, const ScalarField& u,
                                int k);

struct FlatzoomerSweep {
  std::vector<double> shifts;     // constant factors c
  std::vector<double> sup_phi;    // sup Phi at each c
  double fitted_exponent = 0.0;   // least-squares slope of ln sup vs c
};

// Sweeps u = base + c over the given constants and fits the decay exponent;
// for the constant family the exact law is Phi(c) = e^{-(k+2)c} Phi(0).
FlatzoomerSweep flatzoomer_sweep(const DiscreteManifold& m,
                                 const ScalarField& base_u, int k,
                                 const std::vector<double>& shifts);

struct QuasiFlatzoomerData {
  double phi0 = 0.0;  // (2/pi) sup |Riem_{g[u]}|_{g[u]}^{1/2}
  double phi1 = 0.0;  // sup e^{-u} H (1 + |du|_g)
  double phi2 = 0.0;  // 4 sup e^{-u} e^{u1}
  double psi = 0.0;   // phi0 + phi1 + phi2
  double chart_A = 0.0;       // sup |Gamma| of the base metric
  double chart_C = 0.0;       // euclidean-vs-g norm equivalence constant
  double big_h = 0.0;         // H = 4 n^2 A C^3
  double u1 = 0.0;            // ball-fitting threshold
  double conv_est = 0.0;      // empirical convexity-radius proxy
  bool conv_est_valid = false;
  bool bound_holds = false;   // 1/conv_est <= psi (1+slack)
  double slack_used = 0.0;
};

// Computes Psi and the empirical convexity-radius proxy (midpoint-in-ball
// test of sampled geodesic balls on the metric graph), then checks the
// inverse-convexity bound.
QuasiFlatzoomerData quasi_flatzoomer_psi(const DiscreteManifold& m,
                                         const ScalarField& u,
                                         double slack = 0.0,
                                         unsigned seed = 20240815);

}  // namespace satlab
