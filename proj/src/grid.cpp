#include "satlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "satlab/geometry.hpp"

namespace satlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------- MetricField

void MetricField::finalize() {
  g_inv.resize(g.size());
  sqrt_det.resize(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Eigen::MatrixXd& gp = g[p];
    if (!gp.isApprox(gp.transpose(), 0.0)) {
      // enforce exact symmetry invariant
      if ((gp - gp.transpose()).cwiseAbs().maxCoeff() > 1e-14 * gp.norm()) {
        throw ConstructionError("metric not symmetric at node " +
                                std::to_string(p));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gp);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw ConstructionError("metric not positive-definite at node " +
                              std::to_string(p));
    }
    g_inv[p] = gp.inverse();
    sqrt_det[p] = std::sqrt(gp.determinant());
  }
}

double MetricField::min_eigenvalue() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& gp : g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gp);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

double BoundaryData::total_area() const {
  double a = 0.0;
  for (const auto& e : entries) a += e.area_weight;
  return a;
}

// ------------------------------------------------------------ DiscreteManifold

void DiscreteManifold::finalize() {
  if (dim < 3) {
    throw ConstructionError(
        "dimension must be >= 3 (conformal exponent 4/(n-2) degenerates)");
  }
  if (static_cast<int>(axes.size()) != dim) {
    throw ConstructionError("axis list does not match dimension");
  }
  n_nodes_ = 1;
  for (const auto& ax : axes) {
    if (ax.count < 5) throw ConstructionError("need >= 5 nodes per axis");
    n_nodes_ *= static_cast<std::size_t>(ax.count);
  }
  strides_.assign(dim, 1);
  for (int k = dim - 2; k >= 0; --k) {
    strides_[k] = strides_[k + 1] * axes[k + 1].count;
  }
  if (metric.g.size() != n_nodes_) {
    throw ConstructionError("metric sample count does not match node count");
  }
  metric.finalize();
  if (basepoint >= n_nodes_ || on_boundary(basepoint)) {
    throw ConstructionError("basepoint must be an interior node");
  }
}

std::vector<int> DiscreteManifold::multi_index(std::size_t p) const {
  std::vector<int> mi(dim);
  for (int k = 0; k < dim; ++k) {
    mi[k] = static_cast<int>(p / strides_[k]);
    p %= strides_[k];
  }
  return mi;
}

std::size_t DiscreteManifold::flat_index(const std::vector<int>& mi) const {
  std::size_t p = 0;
  for (int k = 0; k < dim; ++k) {
    int i = mi[k];
    if (axes[k].periodic) {
      i %= axes[k].count;
      if (i < 0) i += axes[k].count;
    }
    p += strides_[k] * static_cast<std::size_t>(i);
  }
  return p;
}

std::size_t DiscreteManifold::shift(std::size_t p, int axis, int step) const {
  int i = static_cast<int>(p / strides_[axis]) % axes[axis].count;
  int j = i + step;
  if (axes[axis].periodic) {
    j %= axes[axis].count;
    if (j < 0) j += axes[axis].count;
  } else if (j < 0 || j >= axes[axis].count) {
    return npos;
  }
  return p + (j - i) * static_cast<long>(strides_[axis]);
}

Eigen::VectorXd DiscreteManifold::coords(std::size_t p) const {
  auto mi = multi_index(p);
  Eigen::VectorXd x(dim);
  for (int k = 0; k < dim; ++k) x[k] = axes[k].coord(mi[k]);
  return x;
}

bool DiscreteManifold::on_boundary(std::size_t p) const {
  auto mi = multi_index(p);
  for (int k = 0; k < dim; ++k) {
    if (!axes[k].periodic && (mi[k] == 0 || mi[k] == axes[k].count - 1)) {
      return true;
    }
  }
  return false;
}

double DiscreteManifold::node_weight(std::size_t p) const {
  auto mi = multi_index(p);
  double w = 1.0;
  for (int k = 0; k < dim; ++k) {
    if (!axes[k].periodic && (mi[k] == 0 || mi[k] == axes[k].count - 1)) {
      w *= 0.5;
    }
  }
  return w;
}

double DiscreteManifold::cell_volume_element() const {
  double v = 1.0;
  for (const auto& ax : axes) v *= ax.spacing();
  return v;
}

double DiscreteManifold::volume() const {
  double vol = 0.0;
  const double el = cell_volume_element();
  for (std::size_t p = 0; p < n_nodes_; ++p) {
    vol += metric.sqrt_det[p] * node_weight(p) * el;
  }
  return vol;
}

// ------------------------------------------------------------ metric formulas

Eigen::MatrixXd metric_formula(const std::string& id,
                               const std::map<std::string, double>& params,
                               const Eigen::VectorXd& x,
                               const std::vector<Axis>& axes) {
  const int n = static_cast<int>(x.size());
  auto par = [&](const std::string& k, double dflt) {
    auto it = params.find(k);
    return it == params.end() ? dflt : it->second;
  };
  // normalized chart coordinates in [0,1]
  Eigen::VectorXd xi(n);
  for (int k = 0; k < n; ++k) {
    xi[k] = (x[k] - axes[k].lo) / (axes[k].hi - axes[k].lo);
  }

  if (id == "flat") {
    double c = par("scale", 1.0);
    return c * Eigen::MatrixXd::Identity(n, n);
  }
  if (id == "diag-cylinder") {
    // annular chart (r, theta, z, ...): g = diag(1, r^2, 1, ...)
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    g(1, 1) = x[0] * x[0];
    return g;
  }
  if (id == "conformal-bump") {
    // gentle slab bump: w = amp cos(pi xi_n)(1 + ripple sin(2pi xi_1) sin(2pi xi_2))
    double amp = par("amp", 0.1);
    double ripple = par("ripple", 0.03);
    double w = amp * std::cos(kPi * xi[n - 1]);
    if (n >= 3) {
      w *= 1.0 + ripple * std::sin(2 * kPi * xi[0]) * std::sin(2 * kPi * xi[1]);
    }
    return std::exp(2 * w) * Eigen::MatrixXd::Identity(n, n);
  }
  if (id == "conformal-bump-periodic") {
    // torus bump: w = amp sin(2pi xi_1) sin(2pi xi_2) cos(2pi xi_3)
    double amp = par("amp", 0.1);
    double w = amp;
    for (int k = 0; k < n; ++k) {
      w *= (k == n - 1) ? std::cos(2 * kPi * xi[k]) : std::sin(2 * kPi * xi[k]);
    }
    return std::exp(2 * w) * Eigen::MatrixXd::Identity(n, n);
  }
  if (id == "perturbed-sequence") {
    // flat + amp * s(xi) * diag(2,1,0,...)  (non-conformal perturbation)
    double amp = par("amp", 0.1);
    double s = std::sin(2 * kPi * xi[0]) * std::cos(2 * kPi * xi[1]) *
               std::sin(kPi * xi[n - 1]);
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    g(0, 0) += 2.0 * amp * s;
    g(1, 1) += 1.0 * amp * s;
    return g;
  }
  if (id == "warped-torus") {
    // diag(1, (1+a sin(2pi xi_1))^2, (1-a sin(2pi xi_1))^2, 1...)
    double a = par("a", 0.3);
    double s = std::sin(2 * kPi * xi[0]);
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    g(1, 1) = (1 + a * s) * (1 + a * s);
    g(2, 2) = (1 - a * s) * (1 - a * s);
    return g;
  }
  if (id == "warped-slab") {
    // diag(phi^2, phi^2, 1), phi = cos(alpha (xi_n - 1/2)); R > 0 for alpha < ~1.9
    double alpha = par("alpha", 1.5);
    double phi = std::cos(alpha * (xi[n - 1] - 0.5));
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    for (int k = 0; k + 1 < n; ++k) g(k, k) = phi * phi;
    return g;
  }
  throw ConstructionError("unknown metric formula id: " + id);
}

DiscreteManifold build_box_manifold(const ManifoldSpec& spec) {
  DiscreteManifold m;
  m.dim = spec.dim;
  m.axes = spec.axes;
  if (static_cast<int>(m.axes.size()) != m.dim) {
    throw ConstructionError("axis list does not match dimension");
  }
  std::size_t n_nodes = 1;
  for (const auto& ax : m.axes) {
    if (ax.count < 5) throw ConstructionError("need >= 5 nodes per axis");
    n_nodes *= static_cast<std::size_t>(ax.count);
  }

  // basepoint: chart center by default
  std::vector<int> bp;
  if (spec.basepoint) {
    bp = *spec.basepoint;
  } else {
    for (const auto& ax : m.axes) bp.push_back(ax.count / 2);
  }

  m.metric.g.resize(n_nodes);
  {
    std::vector<std::size_t> strides(m.dim, 1);
    for (int k = m.dim - 2; k >= 0; --k) {
      strides[k] = strides[k + 1] * m.axes[k + 1].count;
    }
    for (std::size_t p = 0; p < n_nodes; ++p) {
      Eigen::VectorXd x(m.dim);
      std::size_t rem = p;
      for (int k = 0; k < m.dim; ++k) {
        x[k] = m.axes[k].coord(static_cast<int>(rem / strides[k]));
        rem %= strides[k];
      }
      Eigen::MatrixXd g = metric_formula(spec.formula, spec.params, x, m.axes);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
      if (es.eigenvalues().minCoeff() <= 0.0) {
        throw ConstructionError("metric formula '" + spec.formula +
                                "' not SPD at node " + std::to_string(p));
      }
      m.metric.g[p] = 0.5 * (g + g.transpose());
    }
    std::size_t bp_idx = 0;
    for (int k = 0; k < m.dim; ++k) {
      bp_idx += strides[k] * static_cast<std::size_t>(bp[k]);
    }
    m.basepoint = bp_idx;
  }
  m.finalize();
  m.boundary = boundary_geometry(m);
  return m;
}

DiscreteManifold rebuild_with_metric(const DiscreteManifold& like,
                                     std::vector<Eigen::MatrixXd> metric) {
  DiscreteManifold m;
  m.dim = like.dim;
  m.axes = like.axes;
  m.basepoint = like.basepoint;
  m.metric.g = std::move(metric);
  m.finalize();
  m.boundary = boundary_geometry(m);
  return m;
}

// ---------------------------------------------------------------- graph paths

namespace {

struct EdgeSet {
  // all nonzero offsets in {-1,0,1}^n, one representative per +/- pair
  std::vector<std::vector<int>> offsets;
  explicit EdgeSet(int n) {
    std::vector<int> off(n, -1);
    while (true) {
      bool nonzero = false, canonical = false;
      for (int k = 0; k < n; ++k) {
        if (off[k] != 0) {
          nonzero = true;
          canonical = off[k] > 0;  // first nonzero positive
          break;
        }
      }
      if (nonzero && canonical) offsets.push_back(off);
      int k = n - 1;
      while (k >= 0 && off[k] == 1) off[k--] = -1;
      if (k < 0) break;
      ++off[k];
    }
  }
};

double edge_length(const DiscreteManifold& m, std::size_t p, std::size_t q,
                   const std::vector<int>& off) {
  Eigen::VectorXd v(m.dim);
  for (int k = 0; k < m.dim; ++k) v[k] = off[k] * m.axes[k].spacing();
  const Eigen::MatrixXd gm = 0.5 * (m.metric.g[p] + m.metric.g[q]);
  return std::sqrt(v.dot(gm * v));
}

template <typename Visit>
void for_each_neighbor(const DiscreteManifold& m, const EdgeSet& es,
                       std::size_t p, Visit&& visit) {
  for (const auto& off : es.offsets) {
    for (int sgn : {+1, -1}) {
      std::size_t q = p;
      bool ok = true;
      for (int k = 0; k < m.dim && ok; ++k) {
        if (off[k] == 0) continue;
        q = m.shift(q, k, sgn * off[k]);
        ok = q != DiscreteManifold::npos;
      }
      if (ok) visit(q, edge_length(m, p, q, off));
    }
  }
}

}  // namespace

std::vector<std::size_t> shortest_path_tree(const DiscreteManifold& m,
                                            std::size_t src,
                                            std::vector<double>* dist_out) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(m.node_count(), inf);
  std::vector<std::size_t> pred(m.node_count(), DiscreteManifold::npos);
  EdgeSet es(m.dim);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[src] = 0.0;
  pq.emplace(0.0, src);
  while (!pq.empty()) {
    auto [d, p] = pq.top();
    pq.pop();
    if (d > dist[p]) continue;
    for_each_neighbor(m, es, p, [&](std::size_t q, double w) {
      if (d + w < dist[q]) {
        dist[q] = d + w;
        pred[q] = p;
        pq.emplace(dist[q], q);
      }
    });
  }
  if (dist_out) *dist_out = std::move(dist);
  return pred;
}

std::vector<double> distance_field(const DiscreteManifold& m, std::size_t src) {
  std::vector<double> dist;
  shortest_path_tree(m, src, &dist);
  return dist;
}

std::vector<double> distance_field(const DiscreteManifold& m,
                                   const std::vector<std::size_t>& sources) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(m.node_count(), inf);
  EdgeSet es(m.dim);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (auto s : sources) {
    dist[s] = 0.0;
    pq.emplace(0.0, s);
  }
  while (!pq.empty()) {
    auto [d, p] = pq.top();
    pq.pop();
    if (d > dist[p]) continue;
    for_each_neighbor(m, es, p, [&](std::size_t q, double w) {
      if (d + w < dist[q]) {
        dist[q] = d + w;
        pq.emplace(dist[q], q);
      }
    });
  }
  return dist;
}

double graph_distance(const DiscreteManifold& m, std::size_t a, std::size_t b) {
  if (a == b) return 0.0;
  return distance_field(m, a)[b];
}

std::vector<std::size_t> metric_ball(const DiscreteManifold& m,
                                     std::size_t center, double r) {
  if (r <= 0.0) throw std::invalid_argument("metric_ball needs r > 0");
  auto dist = distance_field(m, center);
  std::vector<std::size_t> ball;
  for (std::size_t p = 0; p < dist.size(); ++p) {
    if (dist[p] < r) ball.push_back(p);
  }
  return ball;
}

double distance_to_boundary(const DiscreteManifold& m, std::size_t p) {
  if (m.boundary.empty()) return std::numeric_limits<double>::infinity();
  std::vector<std::size_t> srcs;
  for (const auto& [node, ids] : m.boundary.by_node) srcs.push_back(node);
  return distance_field(m, srcs)[p];
}

namespace {

// does stepping p by off (sign-applied) wrap the given axis?
bool step_wraps(const DiscreteManifold& m, std::size_t p,
                const std::vector<int>& off, int sgn, int axis) {
  if (off[axis] == 0) return false;
  auto mi = m.multi_index(p);
  const int j = mi[axis] + sgn * off[axis];
  return j < 0 || j >= m.axes[axis].count;
}

}  // namespace

std::vector<double> distance_field_cut(const DiscreteManifold& m,
                                       std::size_t src, int cut_axis) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(m.node_count(), inf);
  EdgeSet es(m.dim);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[src] = 0.0;
  pq.emplace(0.0, src);
  while (!pq.empty()) {
    auto [d, p] = pq.top();
    pq.pop();
    if (d > dist[p]) continue;
    for (const auto& off : es.offsets) {
      for (int sgn : {+1, -1}) {
        if (step_wraps(m, p, off, sgn, cut_axis)) continue;
        std::size_t q = p;
        bool ok = true;
        for (int k = 0; k < m.dim && ok; ++k) {
          if (off[k] == 0) continue;
          q = m.shift(q, k, sgn * off[k]);
          ok = q != DiscreteManifold::npos;
        }
        if (!ok) continue;
        const double w = edge_length(m, p, q, off);
        if (d + w < dist[q]) {
          dist[q] = d + w;
          pq.emplace(dist[q], q);
        }
      }
    }
  }
  return dist;
}

std::vector<GraphEdge> wrap_edges(const DiscreteManifold& m, int axis) {
  std::vector<GraphEdge> out;
  if (!m.axes[axis].periodic) return out;
  EdgeSet es(m.dim);
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    for (const auto& off : es.offsets) {
      for (int sgn : {+1, -1}) {
        if (!step_wraps(m, p, off, sgn, axis)) continue;
        // only list each edge once: canonical direction crosses hi -> lo
        auto mi = m.multi_index(p);
        if (sgn * off[axis] < 0) continue;  // count crossings in + direction
        if (mi[axis] + sgn * off[axis] < m.axes[axis].count) continue;
        std::size_t q = p;
        bool ok = true;
        for (int k = 0; k < m.dim && ok; ++k) {
          if (off[k] == 0) continue;
          q = m.shift(q, k, sgn * off[k]);
          ok = q != DiscreteManifold::npos;
        }
        if (!ok) continue;
        out.push_back({p, q, edge_length(m, p, q, off)});
      }
    }
  }
  return out;
}

}  // namespace satlab
