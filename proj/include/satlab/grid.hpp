#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Discrete pointed Riemannian manifolds as single structured box charts:
// a node lattice with per-axis periodicity, a metric sampled at nodes,
// derived boundary data on the non-periodic coordinate faces, and a
// basepoint. Metric-graph distances (with cell diagonals) provide the
// discrete distance function.

namespace satlab {

using ScalarField = Eigen::VectorXd;

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int count = 0;
  bool periodic = false;

  // node spacing; periodic axes identify hi with lo
  double spacing() const {
    return periodic ? (hi - lo) / count : (hi - lo) / (count - 1);
  }
  double coord(int i) const { return lo + i * spacing(); }
};

// Rank-r tensor sampled at nodes, components in chart coordinates.
// variance[s] is true for covariant slots (used by tensor_norm to pick
// g^{-1} vs g when contracting).
struct TensorField {
  int dim = 0;
  int rank = 0;
  std::vector<bool> variance;  // size == rank, true = covariant
  std::size_t nodes = 0;
  std::vector<double> data;    // node-major, lexicographic in the slots

  TensorField() = default;
  TensorField(int n, int r, std::size_t node_count, bool covariant = true)
      : dim(n), rank(r), variance(r, covariant), nodes(node_count),
        data(node_count * ipow(n, r), 0.0) {}

  static std::size_t ipow(int b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(b);
    return r;
  }
  std::size_t comps() const { return ipow(dim, rank); }

  double& at(std::size_t node, std::size_t flat_slot) {
    return data[node * comps() + flat_slot];
  }
  double at(std::size_t node, std::size_t flat_slot) const {
    return data[node * comps() + flat_slot];
  }
};

struct MetricField {
  std::vector<Eigen::MatrixXd> g;       // per-node symmetric positive-definite
  std::vector<Eigen::MatrixXd> g_inv;   // cached inverse
  std::vector<double> sqrt_det;         // cached sqrt(det g)

  std::size_t size() const { return g.size(); }
  void finalize();                      // fills caches, checks symmetry/SPD
  double min_eigenvalue() const;
};

struct BoundaryNode {
  std::size_t node = 0;
  int axis = 0;             // chart axis of the face
  int side = 0;             // 0 = lo end, 1 = hi end
  Eigen::VectorXd normal;   // inward g-unit normal, contravariant components
  Eigen::MatrixXd induced;  // (n-1)x(n-1) induced metric on face tangents
  Eigen::MatrixXd second_fundamental;  // A(X,Y) = g(grad_X nu, Y), inward nu
  double mean_curvature = 0.0;         // h = tr_induced(A)/(n-1)
  double area_weight = 0.0;            // quadrature weight on the face
};

struct BoundaryData {
  std::vector<BoundaryNode> entries;                 // one per (node, face)
  std::map<std::size_t, std::vector<std::size_t>> by_node;  // node -> entry ids
  bool empty() const { return entries.empty(); }
  double total_area() const;
};

class DiscreteManifold {
 public:
  int dim = 0;
  std::vector<Axis> axes;
  MetricField metric;
  BoundaryData boundary;
  std::size_t basepoint = 0;

  std::size_t node_count() const { return n_nodes_; }

  // flat index <-> multi index (axis 0 slowest)
  std::vector<int> multi_index(std::size_t p) const;
  std::size_t flat_index(const std::vector<int>& mi) const;

  // neighbor along one axis; returns npos when stepping off a chart end
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t shift(std::size_t p, int axis, int step) const;

  Eigen::VectorXd coords(std::size_t p) const;
  bool on_boundary(std::size_t p) const;

  // trapezoid quadrature weight (product over non-periodic axis ends)
  double node_weight(std::size_t p) const;
  double cell_volume_element() const;  // product of spacings
  double volume() const;               // integral of sqrt(det g)

  void finalize();  // index caches + metric caches + invariant checks

 private:
  std::size_t n_nodes_ = 0;
  std::vector<std::size_t> strides_;
};

// -- manifold construction ---------------------------------------------------

struct ManifoldSpec {
  int dim = 3;
  std::vector<Axis> axes;
  std::string formula = "flat";
  std::map<std::string, double> params;
  std::optional<std::vector<int>> basepoint;  // default: chart center
};

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluates the named metric formula at coordinates x.
Eigen::MatrixXd metric_formula(const std::string& id,
                               const std::map<std::string, double>& params,
                               const Eigen::VectorXd& x,
                               const std::vector<Axis>& axes);

// Builds the manifold, derives boundary data from the metric, checks all
// invariants (SPD at every node, n >= 3, interior basepoint).
DiscreteManifold build_box_manifold(const ManifoldSpec& spec);

// Variant that keeps everything from `spec` but replaces the metric samples.
DiscreteManifold rebuild_with_metric(const DiscreteManifold& like,
                                     std::vector<Eigen::MatrixXd> metric);

// -- metric-graph distances ---------------------------------------------------

// Shortest-path distance on the node graph; edges connect nodes differing by
// one lattice cell step in each axis (offsets in {-1,0,1}^n), weighted by the
// g-length of the straight segment (midpoint metric).
double graph_distance(const DiscreteManifold& m, std::size_t a, std::size_t b);

// Single-source distances to every node (same edge set); unreachable nodes
// get +infinity.
std::vector<double> distance_field(const DiscreteManifold& m, std::size_t src);

// Multi-source variant: distance to the nearest of `sources`.
std::vector<double> distance_field(const DiscreteManifold& m,
                                   const std::vector<std::size_t>& sources);

// Shortest-path tree predecessors from src (npos for src/unreached).
std::vector<std::size_t> shortest_path_tree(const DiscreteManifold& m,
                                            std::size_t src,
                                            std::vector<double>* dist_out);

// { z : graph_distance(center, z) < r }
std::vector<std::size_t> metric_ball(const DiscreteManifold& m,
                                     std::size_t center, double r);

double distance_to_boundary(const DiscreteManifold& m, std::size_t p);

// Single-source distances in the graph with every edge that wraps the given
// periodic axis removed (used for wrap-loop / systole estimates).
std::vector<double> distance_field_cut(const DiscreteManifold& m,
                                       std::size_t src, int cut_axis);

struct GraphEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double length = 0.0;
};

// All edges that wrap the given periodic axis (each listed once).
std::vector<GraphEdge> wrap_edges(const DiscreteManifold& m, int axis);

}  // namespace satlab
