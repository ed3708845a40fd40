#include "satlab/geometry.hpp"

#include <cmath>
#include <vector>

namespace satlab {

// ---------------------------------------------------------------- derivatives

void fd_derivative(const DiscreteManifold& m, const double* field,
                   std::size_t comps, int axis, double* out) {
  const double h = m.axes[axis].spacing();
  const std::size_t n_nodes = m.node_count();
  for (std::size_t p = 0; p < n_nodes; ++p) {
    const std::size_t pp = m.shift(p, axis, +1);
    const std::size_t pm = m.shift(p, axis, -1);
    const double* fp;
    const double* fm;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    const double* f0 = field + p * comps;
    if (pp != DiscreteManifold::npos && pm != DiscreteManifold::npos) {
      fp = field + pp * comps;
      fm = field + pm * comps;
      for (std::size_t c = 0; c < comps; ++c) {
        out[p * comps + c] = (fp[c] - fm[c]) / (2 * h);
      }
      continue;
    }
    if (pm == DiscreteManifold::npos) {  // lo end: forward one-sided
      const std::size_t p1 = pp;
      const std::size_t p2 = m.shift(p1, axis, +1);
      fp = field + p1 * comps;
      fm = field + p2 * comps;
      c0 = -3.0 / (2 * h), c1 = 4.0 / (2 * h), c2 = -1.0 / (2 * h);
      for (std::size_t c = 0; c < comps; ++c) {
        out[p * comps + c] = c0 * f0[c] + c1 * fp[c] + c2 * fm[c];
      }
    } else {  // hi end: backward one-sided
      const std::size_t p1 = pm;
      const std::size_t p2 = m.shift(p1, axis, -1);
      fp = field + p1 * comps;
      fm = field + p2 * comps;
      c0 = 3.0 / (2 * h), c1 = -4.0 / (2 * h), c2 = 1.0 / (2 * h);
      for (std::size_t c = 0; c < comps; ++c) {
        out[p * comps + c] = c0 * f0[c] + c1 * fp[c] + c2 * fm[c];
      }
    }
  }
}

ScalarField fd_derivative(const DiscreteManifold& m, const ScalarField& f,
                          int axis) {
  ScalarField out(f.size());
  fd_derivative(m, f.data(), 1, axis, out.data());
  return out;
}

// ---------------------------------------------------------------- christoffel

ConnectionField christoffel(const DiscreteManifold& m) {
  const int n = m.dim;
  const std::size_t n_nodes = m.node_count();

  // metric components as a flat field for differentiation
  std::vector<double> gflat(n_nodes * n * n);
  for (std::size_t p = 0; p < n_nodes; ++p) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gflat[(p * n + i) * n + j] = m.metric.g[p](i, j);
  }
  std::vector<double> dg(static_cast<std::size_t>(n) * n_nodes * n * n);
  for (int a = 0; a < n; ++a) {
    fd_derivative(m, gflat.data(), static_cast<std::size_t>(n) * n, a,
                  dg.data() + static_cast<std::size_t>(a) * n_nodes * n * n);
  }
  auto dgat = [&](int a, std::size_t p, int i, int j) {
    return dg[(static_cast<std::size_t>(a) * n_nodes + p) * n * n + i * n + j];
  };

  ConnectionField cf;
  cf.gamma = TensorField(n, 3, n_nodes);
  cf.gamma.variance[0] = false;  // upper slot
  for (std::size_t p = 0; p < n_nodes; ++p) {
    const Eigen::MatrixXd& ginv = m.metric.g_inv[p];
    for (int c = 0; c < n; ++c) {
      for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
          double s = 0.0;
          for (int mm = 0; mm < n; ++mm) {
            s += ginv(c, mm) *
                 (dgat(a, p, b, mm) + dgat(b, p, a, mm) - dgat(mm, p, a, b));
          }
          s *= 0.5;
          cf.gamma.at(p, static_cast<std::size_t>((c * n + a) * n + b)) = s;
          cf.gamma.at(p, static_cast<std::size_t>((c * n + b) * n + a)) = s;
        }
      }
    }
  }
  return cf;
}

// --------------------------------------------------------------------- riemann

CurvatureBundle riemann(const DiscreteManifold& m) {
  const int n = m.dim;
  const std::size_t n_nodes = m.node_count();
  ConnectionField cf = christoffel(m);
  const std::size_t gcomps = static_cast<std::size_t>(n) * n * n;

  // dGamma[a][p; c,b,d] = d_a Gamma^c_{bd}
  std::vector<std::vector<double>> dgam(n,
                                        std::vector<double>(n_nodes * gcomps));
  for (int a = 0; a < n; ++a) {
    fd_derivative(m, cf.gamma.data.data(), gcomps, a, dgam[a].data());
  }
  auto dg = [&](int a, std::size_t p, int c, int b, int d) {
    return dgam[a][p * gcomps + static_cast<std::size_t>((c * n + b) * n + d)];
  };

  CurvatureBundle out;
  out.riem = TensorField(n, 4, n_nodes);
  out.ricci = TensorField(n, 2, n_nodes);
  out.scalar = ScalarField::Zero(n_nodes);

  std::vector<double> up(static_cast<std::size_t>(n), 0.0);
  for (std::size_t p = 0; p < n_nodes; ++p) {
    const Eigen::MatrixXd& g = m.metric.g[p];
    const Eigen::MatrixXd& ginv = m.metric.g_inv[p];
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          // up[l] = -d_a Gamma^l_{bc} + d_b Gamma^l_{ac}
          //         - Gamma^mm_{bc} Gamma^l_{a mm} + Gamma^mm_{ac} Gamma^l_{b mm}
          for (int l = 0; l < n; ++l) {
            double s = -dg(a, p, l, b, c) + dg(b, p, l, a, c);
            for (int mm = 0; mm < n; ++mm) {
              s += -cf.at(p, mm, b, c) * cf.at(p, l, a, mm) +
                   cf.at(p, mm, a, c) * cf.at(p, l, b, mm);
            }
            up[l] = s;
          }
          for (int d = 0; d < n; ++d) {
            double s = 0.0;
            for (int l = 0; l < n; ++l) s += up[l] * g(l, d);
            out.riem.at(p, static_cast<std::size_t>(((a * n + b) * n + c) * n + d)) = s;
          }
        }
      }
    }
    // Ric_{ac} = g^{bd} Riem_{abcd};  R = g^{ac} Ric_{ac}
    for (int a = 0; a < n; ++a) {
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int b = 0; b < n; ++b) {
          for (int d = 0; d < n; ++d) {
            s += ginv(b, d) *
                 out.riem.at(p, static_cast<std::size_t>(((a * n + b) * n + c) * n + d));
          }
        }
        out.ricci.at(p, static_cast<std::size_t>(a * n + c)) = s;
      }
    }
    double r = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int c = 0; c < n; ++c) {
        r += ginv(a, c) * out.ricci.at(p, static_cast<std::size_t>(a * n + c));
      }
    }
    out.scalar[p] = r;

    // symmetry residuals
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            auto rm = [&](int i, int j, int k, int l) {
              return out.riem.at(
                  p, static_cast<std::size_t>(((i * n + j) * n + k) * n + l));
            };
            out.antisym_12 =
                std::max(out.antisym_12, std::abs(rm(a, b, c, d) + rm(b, a, c, d)));
            out.antisym_34 =
                std::max(out.antisym_34, std::abs(rm(a, b, c, d) + rm(a, b, d, c)));
            out.pair_swap =
                std::max(out.pair_swap, std::abs(rm(a, b, c, d) - rm(c, d, a, b)));
          }
  }
  return out;
}

ScalarField scalar_curvature(const DiscreteManifold& m) {
  return riemann(m).scalar;
}

// ------------------------------------------------------- covariant derivative

TensorField covariant_derivative(const DiscreteManifold& m,
                                 const TensorField& t, int order) {
  if (order < 1) throw std::invalid_argument("covariant_derivative: order >= 1");
  const int n = m.dim;
  const std::size_t n_nodes = m.node_count();
  ConnectionField cf = christoffel(m);

  TensorField cur = t;
  for (int step = 0; step < order; ++step) {
    const std::size_t comps = cur.comps();
    TensorField next(n, cur.rank + 1, n_nodes);
    next.variance.assign(cur.rank + 1, true);
    next.variance[0] = true;  // new covariant slot in front
    for (int s = 0; s < cur.rank; ++s) next.variance[s + 1] = cur.variance[s];

    // partial derivatives: d_a T[slots]
    std::vector<double> dT(static_cast<std::size_t>(n) * n_nodes * comps);
    for (int a = 0; a < n; ++a) {
      fd_derivative(m, cur.data.data(), comps, a,
                    dT.data() + static_cast<std::size_t>(a) * n_nodes * comps);
    }

    // strides over old slots for swapping one index
    std::vector<std::size_t> stride(cur.rank, 1);
    for (int s = cur.rank - 2; s >= 0; --s) stride[s] = stride[s + 1] * n;

    for (std::size_t p = 0; p < n_nodes; ++p) {
      for (int a = 0; a < n; ++a) {
        for (std::size_t idx = 0; idx < comps; ++idx) {
          double s =
              dT[(static_cast<std::size_t>(a) * n_nodes + p) * comps + idx];
          // connection corrections slot by slot
          std::size_t rem = idx;
          for (int slot = 0; slot < cur.rank; ++slot) {
            const int isl = static_cast<int>(rem / stride[slot]);
            rem %= stride[slot];
            const std::size_t base = idx - static_cast<std::size_t>(isl) * stride[slot];
            if (cur.variance[slot]) {
              // covariant: - Gamma^mm_{a isl} T[... mm ...]
              for (int mm = 0; mm < n; ++mm) {
                s -= cf.at(p, mm, a, isl) *
                     cur.at(p, base + static_cast<std::size_t>(mm) * stride[slot]);
              }
            } else {
              // contravariant: + Gamma^isl_{a mm} T[... mm ...]
              for (int mm = 0; mm < n; ++mm) {
                s += cf.at(p, isl, a, mm) *
                     cur.at(p, base + static_cast<std::size_t>(mm) * stride[slot]);
              }
            }
          }
          next.at(p, static_cast<std::size_t>(a) * comps + idx) = s;
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

// ---------------------------------------------------------------- tensor norm

ScalarField tensor_norm(const DiscreteManifold& m, const TensorField& t) {
  const int n = m.dim;
  const std::size_t n_nodes = m.node_count();
  const std::size_t comps = t.comps();
  ScalarField out = ScalarField::Zero(n_nodes);
  std::vector<std::size_t> stride(t.rank, 1);
  for (int s = t.rank - 2; s >= 0; --s) stride[s] = stride[s + 1] * n;

  std::vector<int> ii(t.rank), jj(t.rank);
  for (std::size_t p = 0; p < n_nodes; ++p) {
    const Eigen::MatrixXd& g = m.metric.g[p];
    const Eigen::MatrixXd& ginv = m.metric.g_inv[p];
    double total = 0.0;
    for (std::size_t ia = 0; ia < comps; ++ia) {
      std::size_t rem = ia;
      for (int s = 0; s < t.rank; ++s) {
        ii[s] = static_cast<int>(rem / stride[s]);
        rem %= stride[s];
      }
      const double ta = t.at(p, ia);
      if (ta == 0.0) continue;
      for (std::size_t ib = 0; ib < comps; ++ib) {
        rem = ib;
        double w = 1.0;
        for (int s = 0; s < t.rank; ++s) {
          jj[s] = static_cast<int>(rem / stride[s]);
          rem %= stride[s];
        }
        for (int s = 0; s < t.rank; ++s) {
          w *= t.variance[s] ? ginv(ii[s], jj[s]) : g(ii[s], jj[s]);
          if (w == 0.0) break;
        }
        if (w != 0.0) total += w * ta * t.at(p, ib);
      }
    }
    out[p] = std::sqrt(std::abs(total));
  }
  return out;
}

// ------------------------------------------------------------ laplace-beltrami

LaplaceOperator assemble_laplace(const DiscreteManifold& m) {
  const int n = m.dim;
  const std::size_t n_nodes = m.node_count();
  const double vol_el = m.cell_volume_element();

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(n_nodes * (2 * n + 1));

  // a^{ij} = sqrt(det g) g^{ij}
  auto acoef = [&](std::size_t p, int i, int j) {
    return m.metric.sqrt_det[p] * m.metric.g_inv[p](i, j);
  };

  // flux form for the diagonal terms over forward edges
  for (int ax = 0; ax < n; ++ax) {
    const double h = m.axes[ax].spacing();
    for (std::size_t p = 0; p < n_nodes; ++p) {
      const std::size_t q = m.shift(p, ax, +1);
      if (q == DiscreteManifold::npos) continue;
      // transverse trapezoid weight (all non-periodic ends except axis ax)
      double w = 1.0;
      auto mi = m.multi_index(p);
      for (int k = 0; k < n; ++k) {
        if (k == ax || m.axes[k].periodic) continue;
        if (mi[k] == 0 || mi[k] == m.axes[k].count - 1) w *= 0.5;
      }
      const double c = 0.5 * (acoef(p, ax, ax) + acoef(q, ax, ax)) / (h * h) *
                       vol_el * w;
      trips.emplace_back(p, p, c);
      trips.emplace_back(q, q, c);
      trips.emplace_back(p, q, -c);
      trips.emplace_back(q, p, -c);
    }
  }

  // cross terms via central differences: sum_p w_p a^{ij} (D_i u)(D_j v)
  bool any_cross = false;
  for (std::size_t p = 0; p < n_nodes && !any_cross; ++p) {
    for (int i = 0; i < n && !any_cross; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && std::abs(m.metric.g_inv[p](i, j)) > 1e-15) {
          any_cross = true;
          break;
        }
  }
  if (any_cross) {
    // build sparse D_ax once per axis
    std::vector<Eigen::SparseMatrix<double>> D(n);
    for (int ax = 0; ax < n; ++ax) {
      const double h = m.axes[ax].spacing();
      std::vector<Eigen::Triplet<double>> dt;
      dt.reserve(3 * n_nodes);
      for (std::size_t p = 0; p < n_nodes; ++p) {
        const std::size_t pp = m.shift(p, ax, +1);
        const std::size_t pm = m.shift(p, ax, -1);
        if (pp != DiscreteManifold::npos && pm != DiscreteManifold::npos) {
          dt.emplace_back(p, pp, 1.0 / (2 * h));
          dt.emplace_back(p, pm, -1.0 / (2 * h));
        } else if (pm == DiscreteManifold::npos) {
          const std::size_t p2 = m.shift(pp, ax, +1);
          dt.emplace_back(p, p, -3.0 / (2 * h));
          dt.emplace_back(p, pp, 4.0 / (2 * h));
          dt.emplace_back(p, p2, -1.0 / (2 * h));
        } else {
          const std::size_t p2 = m.shift(pm, ax, -1);
          dt.emplace_back(p, p, 3.0 / (2 * h));
          dt.emplace_back(p, pm, -4.0 / (2 * h));
          dt.emplace_back(p, p2, 1.0 / (2 * h));
        }
      }
      D[ax].resize(n_nodes, n_nodes);
      D[ax].setFromTriplets(dt.begin(), dt.end());
    }
    Eigen::SparseMatrix<double> cross(n_nodes, n_nodes);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        Eigen::VectorXd w(n_nodes);
        for (std::size_t p = 0; p < n_nodes; ++p) {
          w[p] = acoef(p, i, j) * vol_el * m.node_weight(p);
        }
        if (w.cwiseAbs().maxCoeff() == 0.0) continue;
        cross += Eigen::SparseMatrix<double>(
            D[i].transpose() * w.asDiagonal() * D[j]);
      }
    }
    for (int k = 0; k < cross.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(cross, k); it; ++it) {
        trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
  }

  LaplaceOperator op;
  op.stiffness.resize(n_nodes, n_nodes);
  op.stiffness.setFromTriplets(trips.begin(), trips.end());
  op.mass.resize(n_nodes);
  for (std::size_t p = 0; p < n_nodes; ++p) {
    op.mass[p] = m.metric.sqrt_det[p] * vol_el * m.node_weight(p);
  }
  return op;
}

ScalarField laplace_beltrami(const DiscreteManifold& m, const ScalarField& f) {
  LaplaceOperator op = assemble_laplace(m);
  ScalarField kf = op.stiffness * f;
  return (-kf.array() / op.mass.array()).matrix();
}

// ------------------------------------------------------------ boundary data

BoundaryData boundary_geometry(const DiscreteManifold& m) {
  BoundaryData bd;
  const int n = m.dim;
  bool any = false;
  for (int k = 0; k < n; ++k) {
    if (!m.axes[k].periodic) any = true;
  }
  if (!any) return bd;

  const std::size_t n_nodes = m.node_count();
  ConnectionField cf = christoffel(m);

  for (int ax = 0; ax < n; ++ax) {
    if (m.axes[ax].periodic) continue;
    for (int side = 0; side < 2; ++side) {
      const double sign = side == 0 ? +1.0 : -1.0;
      // inward contravariant unit normal field nu^i = sign g^{i,ax}/sqrt(g^{ax,ax})
      std::vector<double> nu(n_nodes * n);
      for (std::size_t p = 0; p < n_nodes; ++p) {
        const Eigen::MatrixXd& ginv = m.metric.g_inv[p];
        const double s = sign / std::sqrt(ginv(ax, ax));
        for (int i = 0; i < n; ++i) nu[p * n + i] = s * ginv(i, ax);
      }
      // tangential derivatives of nu
      std::vector<std::vector<double>> dnu(n);
      for (int a = 0; a < n; ++a) {
        if (a == ax) continue;
        dnu[a].resize(n_nodes * n);
        fd_derivative(m, nu.data(), n, a, dnu[a].data());
      }

      std::vector<int> tang;
      for (int a = 0; a < n; ++a) {
        if (a != ax) tang.push_back(a);
      }
      double area_el = 1.0;
      for (int a : tang) area_el *= m.axes[a].spacing();

      const int face_layer = side == 0 ? 0 : m.axes[ax].count - 1;
      for (std::size_t p = 0; p < n_nodes; ++p) {
        auto mi = m.multi_index(p);
        if (mi[ax] != face_layer) continue;
        BoundaryNode e;
        e.node = p;
        e.axis = ax;
        e.side = side;
        e.normal = Eigen::VectorXd(n);
        for (int i = 0; i < n; ++i) e.normal[i] = nu[p * n + i];

        const Eigen::MatrixXd& g = m.metric.g[p];
        e.induced.resize(n - 1, n - 1);
        for (int ia = 0; ia < n - 1; ++ia)
          for (int ib = 0; ib < n - 1; ++ib)
            e.induced(ia, ib) = g(tang[ia], tang[ib]);

        // A(a,b) = g( d_a nu + Gamma(nu), e_b ) for tangential a,b
        e.second_fundamental.resize(n - 1, n - 1);
        for (int ia = 0; ia < n - 1; ++ia) {
          const int a = tang[ia];
          for (int ib = 0; ib < n - 1; ++ib) {
            const int b = tang[ib];
            double s = 0.0;
            for (int mm = 0; mm < n; ++mm) {
              double cov = dnu[a][p * n + mm];
              for (int l = 0; l < n; ++l) {
                cov += cf.at(p, mm, a, l) * nu[p * n + l];
              }
              s += g(b, mm) * cov;
            }
            e.second_fundamental(ia, ib) = s;
          }
        }
        // symmetrize (A is symmetric up to discretization error)
        e.second_fundamental =
            0.5 * (e.second_fundamental + e.second_fundamental.transpose())
                .eval();
        e.mean_curvature =
            e.induced.ldlt()
                .solve(e.second_fundamental)
                .trace() /
            (n - 1);

        double w = 1.0;
        for (int a : tang) {
          if (!m.axes[a].periodic && (mi[a] == 0 || mi[a] == m.axes[a].count - 1)) {
            w *= 0.5;
          }
        }
        e.area_weight = std::sqrt(e.induced.determinant()) * area_el * w;

        bd.by_node[p].push_back(bd.entries.size());
        bd.entries.push_back(std::move(e));
      }
    }
  }
  return bd;
}

// ------------------------------------------------------------------- bianchi

ScalarField bianchi_residual(const DiscreteManifold& m) {
  const int n = m.dim;
  const std::size_t n_nodes = m.node_count();
  CurvatureBundle cb = riemann(m);

  // dR
  std::vector<ScalarField> dR(n);
  for (int a = 0; a < n; ++a) dR[a] = fd_derivative(m, cb.scalar, a);

  // div Ric: (div Ric)_c = g^{ab} (grad Ric)_{a b c}
  TensorField gradric = covariant_derivative(m, cb.ricci, 1);
  ScalarField out = ScalarField::Zero(n_nodes);
  for (std::size_t p = 0; p < n_nodes; ++p) {
    const Eigen::MatrixXd& ginv = m.metric.g_inv[p];
    double worst = 0.0;
    for (int c = 0; c < n; ++c) {
      double div = 0.0;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          div += ginv(a, b) *
                 gradric.at(p, static_cast<std::size_t>((a * n + b) * n + c));
        }
      }
      worst = std::max(worst, std::abs(dR[c][p] - 2.0 * div));
    }
    out[p] = worst;
  }
  return out;
}

}  // namespace satlab
