#pragma once

#include "satlab/conformal.hpp"
#include "satlab/spectral.hpp"

// Satellite manifolds: the conformal metric built from the normalized
// principal eigenfunction, g~ = u^{4/(n-2)} g. Scalar-flat satellite for the
// Steklov problem (s=0), minimal-boundary satellite for the Robin problem
// (s=1), and the closed-case satellite whose scalar curvature carries the
// sign of the principal eigenvalue. Plus the bounded-geometry report.

namespace satlab {

struct SatelliteManifold {
  SpectralMode mode = SpectralMode::Closed;
  DiscreteManifold manifold;   // carries g~ and its boundary data
  EigenSolution solution;      // (lambda_1, u), u(basepoint) = 1
  const DiscreteManifold* base = nullptr;
};

SatelliteManifold make_satellite(const DiscreteManifold& m, SpectralMode s,
                                 const SolveOptions& opts = {});

struct IdentityReport {
  SpectralMode mode;
  double lambda = 0.0;
  // residuals of the applicable curvature identities (sup norms):
  //   closed: R~ = lambda u^{-4/(n-2)}
  //   s=0:    R~ = 0          and  h~ = -lambda/(2(n-1)) u^{-2/(n-2)}
  //   s=1:    R~ = lambda u^{-4/(n-2)}  and  h~ = 0
  double scalar_residual = 0.0;
  double mean_curvature_residual = 0.0;
  bool sign_law_ok = true;  // closed case: sign(R~) = sign(lambda) where |lambda| > tol
};

IdentityReport verify_identities(const SatelliteManifold& sat);

struct BoundedGeometryItem {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool passes = false;
  std::string note;
};

struct BoundedGeometryReport {
  double c = 0.0;
  int k = 0;
  std::vector<BoundedGeometryItem> items;
  bool all_pass() const {
    for (const auto& it : items) {
      if (!it.passes) return false;
    }
    return true;
  }
};

// Desk-scale verdicts for the (c,k)-bounded-geometry conditions:
//  (i)  normal-flow injectivity from the boundary up to depth 1/c,
//  (ii) boundary injectivity proxy (boundary-graph systole / 2),
//  (iii) interior injectivity proxy max(1/Psi, systole/2),
//  (iv) sup |grad^l Rm| <= c for l <= min(k,2),
//  (v)  basepoint distance d(x, bnd) >= 2/c.
BoundedGeometryReport bounded_geometry_report(const DiscreteManifold& m,
                                              double c, int k);

// shortest nontrivial geodesic loop proxy on the metric graph (wrap loops
// along periodic axes, sampled base nodes); +inf when no periodic axis
double graph_systole(const DiscreteManifold& m);

}  // namespace satlab
