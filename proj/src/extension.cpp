#include "satlab/extension.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <climits>

#include "satlab/geometry.hpp"

namespace satlab {

// ------------------------------------------------------------- Seeley scheme

SeeleyScheme SeeleyScheme::make(int order) {
  std::vector<double> nodes(order + 1);
  for (int k = 0; k <= order; ++k) nodes[k] = std::ldexp(1.0, k);  // 2^k
  return make(order, std::move(nodes));
}

SeeleyScheme SeeleyScheme::make(int order, std::vector<double> nodes) {
  if (order < 0) throw std::invalid_argument("seeley order must be >= 0");
  if (static_cast<int>(nodes.size()) != order + 1) {
    throw std::invalid_argument("seeley scheme needs m+1 nodes");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] <= 0.0) throw std::invalid_argument("seeley nodes must be > 0");
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i] == nodes[j]) {
        throw std::invalid_argument("seeley nodes must be distinct");
      }
    }
  }
  const int mm = order + 1;
  Eigen::MatrixXd v(mm, mm);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(mm);
  for (int j = 0; j < mm; ++j) {
    for (int k = 0; k < mm; ++k) v(j, k) = std::pow(-nodes[k], j);
  }
  Eigen::VectorXd a = v.fullPivLu().solve(rhs);
  SeeleyScheme s;
  s.order = order;
  s.b = std::move(nodes);
  s.a.assign(a.data(), a.data() + mm);
  s.solve_residual = (v * a - rhs).cwiseAbs().maxCoeff();
  if (s.solve_residual > 1e-10) {
    throw std::runtime_error("seeley weight solve residual too large");
  }
  return s;
}

double SeeleyScheme::weight_l1() const {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

SeeleyExtension seeley_extend(const SeeleyScheme& s,
                              const std::vector<double>& half_line,
                              int n_ext) {
  if (half_line.empty()) throw std::invalid_argument("empty half-line data");
  SeeleyExtension out;
  out.values.resize(n_ext);
  const int last = static_cast<int>(half_line.size()) - 1;
  for (int i = 1; i <= n_ext; ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < s.b.size(); ++k) {
      // sample index b_k * i; scheme nodes are integers by construction
      const double si = s.b[k] * i;
      long idx = std::lround(si);
      if (std::abs(si - idx) > 1e-9) {
        // non-integer node: linear interpolation between grid samples
        const long lo = static_cast<long>(std::floor(si));
        const long hi = lo + 1;
        const double t = si - lo;
        const long cl = std::min<long>(lo, last);
        const long ch = std::min<long>(hi, last);
        if (cl != lo || ch != hi) out.clamped = true;
        v += s.a[k] * ((1 - t) * half_line[cl] + t * half_line[ch]);
        continue;
      }
      if (idx > last) {
        idx = last;
        out.clamped = true;
      }
      v += s.a[k] * half_line[idx];
    }
    out.values[i - 1] = v;
  }
  return out;
}

PositiveExtension positive_extend(const SeeleyScheme& s,
                                  const std::vector<double>& half_line,
                                  int n_ext, double inf_floor) {
  if (inf_floor <= 0.0) {
    throw std::invalid_argument("positive_extend needs inf u >= b > 0");
  }
  std::vector<double> logs(half_line.size());
  for (std::size_t i = 0; i < half_line.size(); ++i) {
    if (half_line[i] <= 0.0) {
      throw std::invalid_argument("positive_extend: u must be positive");
    }
    logs[i] = std::log(half_line[i]);
  }
  SeeleyExtension e = seeley_extend(s, logs, n_ext);
  PositiveExtension out;
  out.clamped = e.clamped;
  out.values.resize(e.values.size());
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    out.values[i] = std::exp(e.values[i]);
  }
  out.beta = std::exp(-s.weight_l1() * std::abs(std::log(inf_floor)));
  return out;
}

// ------------------------------------------------------------ metric extension

namespace {

Eigen::MatrixXd sym_log(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed in matrix log");
  }
  Eigen::VectorXd lam = es.eigenvalues();
  for (long i = 0; i < lam.size(); ++i) lam[i] = std::log(lam[i]);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed in matrix exp");
  }
  Eigen::VectorXd lam = es.eigenvalues();
  for (long i = 0; i < lam.size(); ++i) lam[i] = std::exp(lam[i]);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::size_t ExtendedManifold::to_extended(const DiscreteManifold& original,
                                          std::size_t p) const {
  auto mi = original.multi_index(p);
  mi[axis] += ext_lo;
  return manifold.flat_index(mi);
}

ExtendedManifold extend_metric(const DiscreteManifold& m, const SeeleyScheme& s,
                               int n_ext) {
  if (m.boundary.empty()) {
    throw ConstructionError("extend_metric needs a nonempty boundary");
  }
  int baxis = -1;
  for (const auto& e : m.boundary.entries) {
    if (baxis == -1) baxis = e.axis;
    if (e.axis != baxis) {
      throw ConstructionError(
          "extend_metric supports boundary faces on a single axis");
    }
  }
  bool has_lo = false, has_hi = false;
  for (const auto& e : m.boundary.entries) {
    (e.side == 0 ? has_lo : has_hi) = true;
  }
  const int ext_lo = has_lo ? n_ext : 0;
  const int ext_hi = has_hi ? n_ext : 0;
  const double h = m.axes[baxis].spacing();
  const int n = m.dim;

  ExtendedManifold out;
  out.axis = baxis;
  out.ext_lo = ext_lo;
  out.ext_hi = ext_hi;

  DiscreteManifold x;
  x.dim = n;
  x.axes = m.axes;
  x.axes[baxis].lo -= ext_lo * h;
  x.axes[baxis].hi += ext_hi * h;
  x.axes[baxis].count += ext_lo + ext_hi;

  std::size_t n_new = 1;
  for (const auto& ax : x.axes) n_new *= static_cast<std::size_t>(ax.count);
  x.metric.g.assign(n_new, Eigen::MatrixXd::Identity(n, n));
  {
    // basepoint index in the enlarged chart
    auto bp = m.multi_index(m.basepoint);
    bp[baxis] += ext_lo;
    std::vector<std::size_t> strides(n, 1);
    for (int k = n - 2; k >= 0; --k) {
      strides[k] = strides[k + 1] * x.axes[k + 1].count;
    }
    std::size_t idx = 0;
    for (int k = 0; k < n; ++k) idx += strides[k] * bp[k];
    x.basepoint = idx;
  }
  x.finalize();  // index machinery (identity metric placeholder passes SPD)

  const int old_count = m.axes[baxis].count;

  // copy original metric exactly
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    auto mi = m.multi_index(p);
    mi[baxis] += ext_lo;
    x.metric.g[x.flat_index(mi)] = m.metric.g[p];
  }

  // per transverse line: log, Seeley-extend each entry, exp
  // enumerate transverse lines by iterating original nodes on the lo face
  auto extend_side = [&](int side) {
    const int layers = side == 0 ? ext_lo : ext_hi;
    if (layers == 0) return;
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      auto mi = m.multi_index(p);
      if (mi[baxis] != (side == 0 ? 0 : old_count - 1)) continue;
      // gather the half-line of log-metric entries going inward
      std::vector<Eigen::MatrixXd> logs(old_count);
      for (int i = 0; i < old_count; ++i) {
        auto mj = mi;
        mj[baxis] = side == 0 ? i : old_count - 1 - i;
        logs[i] = sym_log(m.metric.g[m.flat_index(mj)]);
      }
      std::vector<double> line(old_count);
      std::vector<std::vector<double>> ext_entries(
          static_cast<std::size_t>(n) * n);
      for (int i2 = 0; i2 < n; ++i2) {
        for (int j2 = i2; j2 < n; ++j2) {
          for (int i = 0; i < old_count; ++i) line[i] = logs[i](i2, j2);
          SeeleyExtension e = seeley_extend(s, line, layers);
          out.clamped = out.clamped || e.clamped;
          ext_entries[static_cast<std::size_t>(i2) * n + j2] =
              std::move(e.values);
        }
      }
      for (int t = 1; t <= layers; ++t) {
        Eigen::MatrixXd a(n, n);
        for (int i2 = 0; i2 < n; ++i2) {
          for (int j2 = i2; j2 < n; ++j2) {
            const double v =
                ext_entries[static_cast<std::size_t>(i2) * n + j2][t - 1];
            a(i2, j2) = v;
            a(j2, i2) = v;
          }
        }
        auto mj = mi;
        mj[baxis] += ext_lo;                       // position in X
        mj[baxis] += (side == 0 ? -t : +t);        // step outward
        x.metric.g[x.flat_index(mj)] = sym_exp(a);
      }
    }
  };
  extend_side(0);
  extend_side(1);

  x.finalize();
  x.boundary = boundary_geometry(x);
  out.manifold = std::move(x);

  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < out.manifold.node_count(); ++p) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.manifold.metric.g[p]);
    floor = std::min(floor, es.eigenvalues().minCoeff());
  }
  out.spd_floor = floor;
  return out;
}

// -------------------------------------------------------------- height field

namespace {

// quintic with taper(a)=a, taper'(a)=1, taper''(a)=0,
// taper(b)=b, taper'(b)=0, taper''(b)=0; identity below a, constant above b
double taper(double r, double r2) {
  const double a = r2 / 4.0;
  const double b = r2 / 2.0;
  if (r <= a) return r;
  if (r >= b) return b;
  const double t = (r - a) / (b - a);
  // Hermite quintic H(t) on [0,1] with H(0)=0,H'(0)=1,H''(0)=0,
  // H(1)=1,H'(1)=0,H''(1)=0 scaled by (b-a); value = a + (b-a) H(t)
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h00 = 1.0 * t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;  // H'(0)=1 part
  const double h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;          // H(1)=1 part
  return a + (b - a) * (h00 + h01);
}

}  // namespace

HeightField build_height_function(const ExtendedManifold& x, double r2) {
  const DiscreteManifold& mm = x.manifold;
  const int ax = x.axis;
  const double h = mm.axes[ax].spacing();
  if ((r2 / 2.0 - r2 / 4.0) / h < 3.0) {
    throw ConstructionError(
        "height taper window needs at least 3 nodes across");
  }
  const int min_ext = std::min(x.ext_lo > 0 ? x.ext_lo : INT_MAX,
                               x.ext_hi > 0 ? x.ext_hi : INT_MAX);
  if (min_ext * h < r2 / 4.0 - 1e-12) {
    throw ConstructionError("extension depth must be at least r2/4 outward");
  }

  HeightField out;
  out.r2 = r2;
  out.f = ScalarField::Constant(mm.node_count(), r2 / 2.0);

  // signed arclengths from the original faces along the axis grid lines
  const int lo_face = x.ext_lo;  // layer of the original lo boundary in X
  const int hi_face = mm.axes[ax].count - 1 - x.ext_hi;
  for (std::size_t p = 0; p < mm.node_count(); ++p) {
    auto mi = mm.multi_index(p);
    double f_here = r2 / 2.0;
    if (x.ext_lo > 0) {
      // arclength from the lo face (positive inward)
      double sgn = mi[ax] >= lo_face ? +1.0 : -1.0;
      double s = 0.0;
      auto mj = mi;
      int steps = std::abs(mi[ax] - lo_face);
      for (int i = 0; i < steps; ++i) {
        auto ma = mj;
        ma[ax] = lo_face + static_cast<int>(sgn) * i;
        auto mb = ma;
        mb[ax] += static_cast<int>(sgn);
        const std::size_t pa = mm.flat_index(ma);
        const std::size_t pb = mm.flat_index(mb);
        const double gmid =
            0.5 * (mm.metric.g[pa](ax, ax) + mm.metric.g[pb](ax, ax));
        s += std::sqrt(gmid) * h;
      }
      f_here = std::min(f_here, taper(sgn * s, r2));
    }
    if (x.ext_hi > 0) {
      double sgn = mi[ax] <= hi_face ? +1.0 : -1.0;
      double s = 0.0;
      auto mj = mi;
      int steps = std::abs(hi_face - mi[ax]);
      for (int i = 0; i < steps; ++i) {
        auto ma = mj;
        ma[ax] = hi_face - static_cast<int>(sgn) * i;
        auto mb = ma;
        mb[ax] -= static_cast<int>(sgn);
        const std::size_t pa = mm.flat_index(ma);
        const std::size_t pb = mm.flat_index(mb);
        const double gmid =
            0.5 * (mm.metric.g[pa](ax, ax) + mm.metric.g[pb](ax, ax));
        s += std::sqrt(gmid) * h;
      }
      f_here = std::min(f_here, taper(sgn * s, r2));
    }
    out.f[p] = f_here;
    if (f_here == 0.0) out.zero_level.push_back(p);
  }

  // delta_bnd: min |grad f|_g on the band |f| <= eps
  out.band_eps = 2.0 * h;
  const int n = mm.dim;
  std::vector<ScalarField> df(n);
  for (int a = 0; a < n; ++a) df[a] = fd_derivative(mm, out.f, a);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < mm.node_count(); ++p) {
    if (std::abs(out.f[p]) > out.band_eps) continue;
    Eigen::VectorXd d(n);
    for (int a = 0; a < n; ++a) d[a] = df[a][p];
    dmin = std::min(dmin, std::sqrt(d.dot(mm.metric.g_inv[p] * d)));
  }
  out.delta_bnd = dmin;
  return out;
}

DiscreteManifold cut_manifold(const ExtendedManifold& x, const HeightField& hf,
                              double level) {
  const DiscreteManifold& mm = x.manifold;
  const int ax = x.axis;
  if (hf.zero_level.empty() && level == 0.0) {
    throw ConstructionError("cut_manifold: empty zero level set");
  }
  // determine kept layer range along the axis: a layer is kept iff all its
  // nodes satisfy f >= level
  const int count = mm.axes[ax].count;
  std::vector<bool> keep(count, true);
  for (std::size_t p = 0; p < mm.node_count(); ++p) {
    if (hf.f[p] < level - 1e-14) keep[mm.multi_index(p)[ax]] = false;
  }
  int lo = 0;
  while (lo < count && !keep[lo]) ++lo;
  int hi = count - 1;
  while (hi >= 0 && !keep[hi]) --hi;
  if (lo > hi) throw ConstructionError("cut_manifold: nothing to keep");
  for (int i = lo; i <= hi; ++i) {
    if (!keep[i]) {
      throw ConstructionError("cut_manifold: level set not chart-aligned");
    }
  }

  DiscreteManifold cut;
  cut.dim = mm.dim;
  cut.axes = mm.axes;
  cut.axes[ax].lo = mm.axes[ax].coord(lo);
  cut.axes[ax].hi = mm.axes[ax].coord(hi);
  cut.axes[ax].count = hi - lo + 1;
  std::size_t n_new = 1;
  for (const auto& a2 : cut.axes) n_new *= static_cast<std::size_t>(a2.count);
  cut.metric.g.resize(n_new);

  std::vector<std::size_t> strides(cut.dim, 1);
  for (int k = cut.dim - 2; k >= 0; --k) {
    strides[k] = strides[k + 1] * cut.axes[k + 1].count;
  }
  for (std::size_t p = 0; p < mm.node_count(); ++p) {
    auto mi = mm.multi_index(p);
    if (mi[ax] < lo || mi[ax] > hi) continue;
    mi[ax] -= lo;
    std::size_t idx = 0;
    for (int k = 0; k < cut.dim; ++k) idx += strides[k] * mi[k];
    cut.metric.g[idx] = mm.metric.g[p];
  }
  {
    auto bp = mm.multi_index(mm.basepoint);
    bp[ax] = std::clamp(bp[ax], lo + 1, hi - 1) - lo;
    std::size_t idx = 0;
    for (int k = 0; k < cut.dim; ++k) idx += strides[k] * bp[k];
    cut.basepoint = idx;
  }
  cut.finalize();
  cut.boundary = boundary_geometry(cut);
  return cut;
}

// ----------------------------------------------------------------- gradient flow

namespace {

// multilinear interpolation of per-node scalar samples at chart position x
double interp(const DiscreteManifold& m, const ScalarField& f,
              const Eigen::VectorXd& x) {
  const int n = m.dim;
  std::vector<int> base(n);
  std::vector<double> frac(n);
  for (int k = 0; k < n; ++k) {
    double rel = (x[k] - m.axes[k].lo) / m.axes[k].spacing();
    double fl = std::floor(rel);
    int i = static_cast<int>(fl);
    double t = rel - fl;
    if (!m.axes[k].periodic) {
      if (i < 0) {
        i = 0;
        t = 0.0;
      }
      if (i >= m.axes[k].count - 1) {
        i = m.axes[k].count - 2;
        t = 1.0;
      }
    }
    base[k] = i;
    frac[k] = t;
  }
  double acc = 0.0;
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::vector<int> mi(n);
    for (int k = 0; k < n; ++k) {
      const int bit = (c >> k) & 1;
      w *= bit ? frac[k] : 1.0 - frac[k];
      mi[k] = base[k] + bit;
    }
    if (w == 0.0) continue;
    acc += w * f[m.flat_index(mi)];
  }
  return acc;
}

}  // namespace

FlowResult flow_to_level(const ExtendedManifold& x, const HeightField& hf,
                         std::size_t start, double target,
                         double min_gradient) {
  const DiscreteManifold& mm = x.manifold;
  const int n = mm.dim;

  // gradient field (contravariant) at nodes
  std::vector<ScalarField> df(n);
  for (int a = 0; a < n; ++a) df[a] = fd_derivative(mm, hf.f, a);
  std::vector<ScalarField> grad(n, ScalarField::Zero(mm.node_count()));
  for (std::size_t p = 0; p < mm.node_count(); ++p) {
    Eigen::VectorXd d(n);
    for (int a = 0; a < n; ++a) d[a] = df[a][p];
    Eigen::VectorXd g = mm.metric.g_inv[p] * d;
    for (int a = 0; a < n; ++a) grad[a][p] = g[a];
  }

  auto grad_at = [&](const Eigen::VectorXd& pos) {
    Eigen::VectorXd g(n);
    for (int a = 0; a < n; ++a) g[a] = interp(mm, grad[a], pos);
    return g;
  };
  auto f_at = [&](const Eigen::VectorXd& pos) { return interp(mm, hf.f, pos); };

  double hmin = std::numeric_limits<double>::infinity();
  for (const auto& a2 : mm.axes) hmin = std::min(hmin, a2.spacing());

  FlowResult res;
  res.position = mm.coords(start);
  res.f_value = f_at(res.position);
  const double dir = target >= res.f_value ? +1.0 : -1.0;

  const int max_steps = 100000;
  for (res.steps = 0; res.steps < max_steps; ++res.steps) {
    if (std::abs(res.f_value - target) <= 1e-6) return res;
    Eigen::VectorXd g0 = grad_at(res.position);
    const double gn0 = g0.norm();
    if (gn0 < min_gradient) {
      throw std::runtime_error("flow left the gradient band (|grad f| small)");
    }
    double dt = 0.2 * hmin / gn0;
    // cap the f-advance per step
    auto midstep = [&](double step) {
      Eigen::VectorXd mid = res.position + 0.5 * step * dir * g0;
      Eigen::VectorXd gm = grad_at(mid);
      return (res.position + step * dir * gm).eval();
    };
    Eigen::VectorXd next = midstep(dt);
    double fn = f_at(next);
    if ((fn - target) * (res.f_value - target) < 0.0) {
      // crossed the level: bisect the step fraction
      double lo = 0.0, hi = dt;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        Eigen::VectorXd cand = midstep(mid);
        const double fc = f_at(cand);
        if ((fc - target) * (res.f_value - target) < 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
        next = cand;
        fn = fc;
        if (std::abs(fn - target) <= 1e-6) break;
      }
      res.time += hi;
      res.position = next;
      res.f_value = fn;
      if (std::abs(res.f_value - target) <= 1e-6) return res;
      continue;
    }
    res.position = next;
    res.f_value = fn;
    res.time += dt;
  }
  throw std::runtime_error("flow_to_level did not reach the target level");
}

// --------------------------------------------------------- overlap partition

PartitionOfUnity make_overlap_partition(int n_samples, double overlap_lo,
                                        double overlap_hi) {
  if (!(0.0 < overlap_lo && overlap_lo < overlap_hi && overlap_hi < 1.0)) {
    throw std::invalid_argument("overlap window must sit inside (0,1)");
  }
  PartitionOfUnity out;
  out.psi.assign(2, ScalarField::Zero(n_samples));
  const double h = 1.0 / (n_samples - 1);
  auto smooth = [&](double t) {  // quintic smoothstep
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  };
  for (int i = 0; i < n_samples; ++i) {
    const double xx = i * h;
    const double t = (xx - overlap_lo) / (overlap_hi - overlap_lo);
    const double s = smooth(t);
    out.psi[0][i] = 1.0 - s;
    out.psi[1][i] = s;
  }
  int mult = 0;
  double serr = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    int nz = 0;
    double sum = 0.0;
    for (const auto& f : out.psi) {
      if (f[i] != 0.0) ++nz;
      sum += f[i];
    }
    mult = std::max(mult, nz);
    serr = std::max(serr, std::abs(sum - 1.0));
  }
  out.multiplicity = mult;
  out.sum_error = serr;
  // C^2 norm estimate by finite differences on the shared sample line
  double c0 = 0.0;
  for (const auto& f : out.psi) {
    c0 = std::max(c0, f.cwiseAbs().maxCoeff());
    for (int i = 1; i + 1 < n_samples; ++i) {
      c0 = std::max(c0, std::abs((f[i + 1] - f[i - 1]) / (2 * h)));
      c0 = std::max(c0, std::abs((f[i + 1] - 2 * f[i] + f[i - 1]) / (h * h)));
    }
  }
  out.c0 = c0;
  return out;
}

}  // namespace satlab
