#pragma once

#include "satlab/grid.hpp"

// Finite-order Seeley-style extension operators, the positive log/exp
// extension, SPD metric extension past the boundary via matrix log/exp,
// height functions with a smooth taper, manifold cutting along level sets,
// and gradient flows to a target level.

namespace satlab {

struct SeeleyScheme {
  int order = 0;               // m
  std::vector<double> b;       // reflection nodes b_k > 0, distinct
  std::vector<double> a;       // weights: sum_k a_k (-b_k)^j = 1, j = 0..m
  double solve_residual = 0.0;

  // b_k = 2^k (integer nodes keep half-line samples on the grid)
  static SeeleyScheme make(int order);
  static SeeleyScheme make(int order, std::vector<double> nodes);
  double weight_l1() const;  // sum |a_k|
};

struct SeeleyExtension {
  std::vector<double> values;  // f(-h), f(-2h), ... (n_ext entries)
  bool clamped = false;        // some sample b_k * t fell past the data end
};

// (Ef)(-t) = sum_k a_k f(b_k t) for half-line samples f[i] = f(i*h).
SeeleyExtension seeley_extend(const SeeleyScheme& s,
                              const std::vector<double>& half_line,
                              int n_ext);

struct PositiveExtension {
  std::vector<double> values;
  bool clamped = false;
  double beta = 0.0;  // guaranteed floor exp(-sum|a_k| * |ln b|), u in [b,1/b]
};

// F(u) = exp(E(ln u)); requires u > 0 with inf u >= floor.
PositiveExtension positive_extend(const SeeleyScheme& s,
                                  const std::vector<double>& half_line,
                                  int n_ext, double inf_floor);

struct ExtendedManifold {
  DiscreteManifold manifold;  // chart enlarged along the boundary axis
  int axis = 0;               // the extended axis
  int ext_lo = 0;             // extension layers added at the lo end
  int ext_hi = 0;
  double spd_floor = 0.0;     // min metric eigenvalue over the extension
  bool clamped = false;
  // original node <-> extended node index maps
  std::size_t to_extended(const DiscreteManifold& original, std::size_t p) const;
};

// Extends the metric past every boundary face by n_ext layers: per node
// column, a = log(G) entries are Seeley-extended along the face axis and
// re-exponentiated (SPD by construction); original nodes keep g exactly.
// Requires the boundary to live on a single chart axis.
ExtendedManifold extend_metric(const DiscreteManifold& m, const SeeleyScheme& s,
                               int n_ext);

struct HeightField {
  ScalarField f;
  double r2 = 0.0;
  double band_eps = 0.0;
  double delta_bnd = 0.0;  // min |grad f|_g on the band f in [-eps, eps]
  std::vector<std::size_t> zero_level;  // nodes with f == 0
};

// f = taper(signed arclength from the original boundary), constant r2/2 deep
// inside; taper(r) = r for r <= r2/4, C^2 quintic blend, r2/2 beyond r2/2.
HeightField build_height_function(const ExtendedManifold& x, double r2);

// Keeps nodes with f >= level (must form a box along the cut axis);
// the new boundary is the level-set layer.
DiscreteManifold cut_manifold(const ExtendedManifold& x, const HeightField& f,
                              double level = 0.0);

struct FlowResult {
  Eigen::VectorXd position;  // off-lattice chart coordinates
  double f_value = 0.0;
  double time = 0.0;
  int steps = 0;
};

// Midpoint-rule integration of dx/dt = grad_g f with multilinear field
// interpolation until f(x) reaches the target level.
FlowResult flow_to_level(const ExtendedManifold& x, const HeightField& f,
                         std::size_t start, double target,
                         double min_gradient = 1e-3);

// overlapping-interval partition of unity (exercises the general multi-chart
// machinery: sum psi = 1, multiplicity, C^k bound)
struct PartitionOfUnity {
  std::vector<ScalarField> psi;   // one field per chart over shared samples
  int multiplicity = 0;           // max number of nonzero psi at a sample
  double c0 = 0.0;                // max C^2-norm estimate over members
  double sum_error = 0.0;         // sup |sum psi - 1|
};

PartitionOfUnity make_overlap_partition(int n_samples, double overlap_lo,
                                        double overlap_hi);

}  // namespace satlab
