#include "satlab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <cmath>

#include "satlab/geometry.hpp"

namespace satlab {

OperatorPair assemble(const DiscreteManifold& m) {
  const int n = m.dim;
  OperatorPair op;
  op.dim = n;
  op.a_n = 4.0 * (n - 1) / (n - 2);
  op.b_n = (n - 2) / 2.0;
  // consistency of the boundary coefficient with a_n, b_n
  if (std::abs(op.a_n * op.b_n - 2.0 * (n - 1)) > 1e-12) {
    throw std::logic_error("a_n b_n != 2(n-1)");
  }

  LaplaceOperator lap = assemble_laplace(m);
  op.stiffness = std::move(lap.stiffness);
  op.mass = std::move(lap.mass);
  op.scalar_curvature = scalar_curvature(m);

  const std::size_t n_nodes = m.node_count();
  op.boundary_mass = Eigen::VectorXd::Zero(n_nodes);
  Eigen::VectorXd h_form = Eigen::VectorXd::Zero(n_nodes);
  for (const auto& e : m.boundary.entries) {
    op.boundary_mass[e.node] += e.area_weight;
    // outward-convention boundary term: -h_inward
    h_form[e.node] += (-e.mean_curvature) * e.area_weight;
  }

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::SparseMatrix<double> num = op.a_n * op.stiffness;
  for (std::size_t p = 0; p < n_nodes; ++p) {
    const double d = op.mass[p] * op.scalar_curvature[p] +
                     2.0 * (n - 1) * h_form[p];
    if (d != 0.0) trips.emplace_back(p, p, d);
  }
  Eigen::SparseMatrix<double> diag(n_nodes, n_nodes);
  diag.setFromTriplets(trips.begin(), trips.end());
  op.numerator = num + diag;

  // strong-form B rows: d_nu + b_n h (inward convention), one-sided stencil
  // along the face axis, central tangentially
  std::vector<Eigen::Triplet<double>> bt;
  op.boundary_rows.clear();
  for (std::size_t e_id = 0; e_id < m.boundary.entries.size(); ++e_id) {
    const auto& e = m.boundary.entries[e_id];
    const std::size_t p = e.node;
    for (int i = 0; i < n; ++i) {
      const double c = e.normal[i];
      if (c == 0.0) continue;
      const double h = m.axes[i].spacing();
      const std::size_t pp = m.shift(p, i, +1);
      const std::size_t pm = m.shift(p, i, -1);
      if (pp != DiscreteManifold::npos && pm != DiscreteManifold::npos) {
        bt.emplace_back(e_id, pp, c / (2 * h));
        bt.emplace_back(e_id, pm, -c / (2 * h));
      } else if (pm == DiscreteManifold::npos) {
        const std::size_t p2 = m.shift(pp, i, +1);
        bt.emplace_back(e_id, p, -3 * c / (2 * h));
        bt.emplace_back(e_id, pp, 4 * c / (2 * h));
        bt.emplace_back(e_id, p2, -c / (2 * h));
      } else {
        const std::size_t p2 = m.shift(pm, i, -1);
        bt.emplace_back(e_id, p, 3 * c / (2 * h));
        bt.emplace_back(e_id, pm, -4 * c / (2 * h));
        bt.emplace_back(e_id, p2, c / (2 * h));
      }
    }
    bt.emplace_back(e_id, p, op.b_n * e.mean_curvature);
    op.boundary_rows.push_back(p);
  }
  op.boundary_op.resize(static_cast<long>(m.boundary.entries.size()), n_nodes);
  op.boundary_op.setFromTriplets(bt.begin(), bt.end());
  return op;
}

double rayleigh_quotient(const OperatorPair& op, const ScalarField& f,
                         SpectralMode s) {
  const double num = f.dot(op.numerator * f);
  double den = 0.0;
  switch (s) {
    case SpectralMode::Closed:
    case SpectralMode::Robin:
      den = f.dot(op.mass.cwiseProduct(f));
      break;
    case SpectralMode::Steklov:
      den = f.dot(op.boundary_mass.cwiseProduct(f));
      break;
  }
  if (den <= 0.0) {
    throw std::invalid_argument("rayleigh_quotient: zero denominator");
  }
  return num / den;
}

namespace {

double envelope_bound(const DiscreteManifold& m, const OperatorPair& op,
                      SpectralMode s) {
  const int n = m.dim;
  const double sup_r = op.scalar_curvature.cwiseAbs().maxCoeff();
  double sup_h = 0.0;
  for (const auto& e : m.boundary.entries) {
    sup_h = std::max(sup_h, std::abs(e.mean_curvature));
  }
  const double vol = m.volume();
  const double vol_b = m.boundary.total_area();
  switch (s) {
    case SpectralMode::Closed:
      return sup_r;
    case SpectralMode::Steklov:
      return sup_r * vol / vol_b + 2.0 * (n - 1) * sup_h;
    default:
      return sup_r + 2.0 * (n - 1) * sup_h * vol_b / vol;
  }
}

}  // namespace

EigenSolution solve_principal(const DiscreteManifold& m, SpectralMode s,
                              const SolveOptions& opts) {
  OperatorPair op = assemble(m);
  return solve_principal(m, op, s, opts);
}

EigenSolution solve_principal(const DiscreteManifold& m, const OperatorPair& op,
                              SpectralMode s, const SolveOptions& opts) {
  const std::size_t n_nodes = m.node_count();
  if (s != SpectralMode::Closed && m.boundary.empty()) {
    throw SolverError("boundary problem on a closed manifold", {});
  }

  const Eigen::VectorXd& mvec =
      (s == SpectralMode::Steklov) ? op.boundary_mass : op.mass;

  // fixed shift strictly below the spectrum (envelope lower bound)
  const double env = envelope_bound(m, op, s);
  const double sigma = -env - opts.shift_margin;

  Eigen::SparseMatrix<double> shifted = op.numerator;
  {
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t p = 0; p < n_nodes; ++p) {
      if (mvec[p] != 0.0) trips.emplace_back(p, p, -sigma * mvec[p]);
    }
    Eigen::SparseMatrix<double> d(n_nodes, n_nodes);
    d.setFromTriplets(trips.begin(), trips.end());
    shifted += d;
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) {
    throw SolverError("factorization of shifted operator failed", {});
  }

  // deterministic inverse power iteration, all-ones start
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n_nodes);
  double lambda = 0.0;
  std::vector<double> history;
  int it = 0;
  int stagnant = 0;
  double best = std::numeric_limits<double>::infinity();
  for (; it < opts.max_iter; ++it) {
    Eigen::VectorXd w = lu.solve(mvec.cwiseProduct(v));
    const double nrm = std::sqrt(w.dot(mvec.cwiseProduct(w)));
    if (!(nrm > 0.0) || !w.allFinite()) {
      throw SolverError("inverse iteration produced a degenerate vector",
                        history);
    }
    w /= nrm;
    const double num = w.dot(op.numerator * w);
    const double den = w.dot(mvec.cwiseProduct(w));
    const double lam = num / den;
    Eigen::VectorXd resid = op.numerator * w - lam * mvec.cwiseProduct(w);
    // scale by the shift magnitude (a spectral scale that stays away from
    // zero even when lambda = 0 and K w vanishes)
    const double rel = resid.norm() /
                       ((std::abs(lam) + std::abs(sigma)) *
                            mvec.cwiseProduct(w).norm() +
                        1e-300);
    history.push_back(rel);
    v = w;
    lambda = lam;
    if (rel < opts.tol) break;
    // roundoff floor: stop once the residual stops improving
    stagnant = rel < 0.9 * best ? 0 : stagnant + 1;
    best = std::min(best, rel);
    if (stagnant >= 5) {
      if (best <= 100.0 * opts.tol) break;
      throw SolverError("inverse iteration stagnated above tolerance",
                        history);
    }
  }
  if (it == opts.max_iter && !history.empty() &&
      history.back() > 100.0 * opts.tol) {
    throw SolverError("inverse iteration did not converge within max_iter",
                      history);
  }

  // sign-fix per connected component (single chart = single component)
  double msum = 0.0;
  for (std::size_t p = 0; p < n_nodes; ++p) msum += mvec[p] * v[p];
  if (msum < 0.0) v = -v;
  if (v.minCoeff() <= 0.0) {
    throw SolverError(
        "principal eigenfunction not positive after sign fix "
        "(non-principal mode; grid too coarse)",
        history);
  }
  // normalization u(basepoint) = 1
  v /= v[m.basepoint];

  EigenSolution sol;
  sol.mode = s;
  sol.lambda = lambda;
  sol.u = v;
  sol.iterations = it + 1;
  sol.algebraic_residual = history.empty() ? 0.0 : history.back();

  // strong-form residual diagnostics
  {
    ScalarField lap = laplace_beltrami(m, sol.u);
    ScalarField lu_field =
        -op.a_n * lap.array() + op.scalar_curvature.array() * sol.u.array();
    double pr = 0.0;
    if (s == SpectralMode::Steklov) {
      for (std::size_t p = 0; p < n_nodes; ++p) {
        if (op.boundary_mass[p] == 0.0) pr = std::max(pr, std::abs(lu_field[p]));
      }
    } else {
      for (std::size_t p = 0; p < n_nodes; ++p) {
        if (op.boundary_mass[p] == 0.0) {
          pr = std::max(pr, std::abs(lu_field[p] - lambda * sol.u[p]));
        }
      }
    }
    sol.pde_residual = pr;
    if (op.boundary_op.rows() > 0) {
      Eigen::VectorXd bu = op.boundary_op * sol.u;
      double br = 0.0;
      for (long r = 0; r < bu.size(); ++r) {
        const std::size_t node = op.boundary_rows[r];
        // natural boundary condition with inward-convention B:
        //   s=0: a_n B u = -lambda u;   s=1 (and closed): B u = 0
        const double target = (s == SpectralMode::Steklov)
                                  ? -lambda * sol.u[node] / op.a_n
                                  : 0.0;
        br = std::max(br, std::abs(bu[r] - target));
      }
      sol.boundary_residual = br;
    }
  }
  return sol;
}

double dense_principal_eigenvalue(const DiscreteManifold& m, SpectralMode s) {
  OperatorPair op = assemble(m);
  const std::size_t n_nodes = m.node_count();
  Eigen::MatrixXd K = Eigen::MatrixXd(op.numerator);
  const Eigen::VectorXd& mvec =
      (s == SpectralMode::Steklov) ? op.boundary_mass : op.mass;
  if (s == SpectralMode::Steklov) {
    // eliminate interior unknowns: Schur complement onto the boundary
    std::vector<long> bnd, interior;
    for (std::size_t p = 0; p < n_nodes; ++p) {
      (mvec[p] > 0.0 ? bnd : interior).push_back(static_cast<long>(p));
    }
    Eigen::MatrixXd kii(interior.size(), interior.size());
    Eigen::MatrixXd kib(interior.size(), bnd.size());
    Eigen::MatrixXd kbb(bnd.size(), bnd.size());
    for (std::size_t i = 0; i < interior.size(); ++i) {
      for (std::size_t j = 0; j < interior.size(); ++j) {
        kii(i, j) = K(interior[i], interior[j]);
      }
      for (std::size_t j = 0; j < bnd.size(); ++j) {
        kib(i, j) = K(interior[i], bnd[j]);
      }
    }
    for (std::size_t i = 0; i < bnd.size(); ++i) {
      for (std::size_t j = 0; j < bnd.size(); ++j) {
        kbb(i, j) = K(bnd[i], bnd[j]);
      }
    }
    Eigen::MatrixXd schur = kbb - kib.transpose() * kii.ldlt().solve(kib);
    Eigen::VectorXd mb(bnd.size());
    for (std::size_t i = 0; i < bnd.size(); ++i) mb[i] = mvec[bnd[i]];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        0.5 * (schur + schur.transpose()), mb.asDiagonal().toDenseMatrix());
    return ges.eigenvalues().minCoeff();
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
      0.5 * (K + K.transpose()), mvec.asDiagonal().toDenseMatrix());
  return ges.eigenvalues().minCoeff();
}

BoundsReport eigen_bounds_check(const DiscreteManifold& m,
                                const EigenSolution& sol, double slack) {
  OperatorPair op = assemble(m);
  BoundsReport rep;
  rep.lambda = sol.lambda;
  rep.slack = slack;
  rep.sup_R = op.scalar_curvature.cwiseAbs().maxCoeff();
  for (const auto& e : m.boundary.entries) {
    rep.sup_h = std::max(rep.sup_h, std::abs(e.mean_curvature));
  }
  rep.vol = m.volume();
  rep.vol_bnd = m.boundary.total_area();
  rep.envelope = envelope_bound(m, op, sol.mode);
  rep.margin = rep.envelope * (1.0 + slack) - std::abs(sol.lambda);
  rep.passes = rep.margin >= -1e-10;
  return rep;
}

double harnack_ratio(const ScalarField& u,
                     const std::vector<std::size_t>& k_set) {
  if (k_set.empty()) throw std::invalid_argument("harnack_ratio: empty set");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (auto p : k_set) {
    lo = std::min(lo, u[p]);
    hi = std::max(hi, u[p]);
  }
  if (lo <= 0.0) throw std::invalid_argument("harnack_ratio: u must be positive");
  return lo / hi;
}

HarnackStability harnack_stability(const DiscreteManifold& m, SpectralMode s,
                                   const std::vector<std::size_t>& k_set,
                                   double eps, const SolveOptions& opts) {
  HarnackStability out;
  EigenSolution base = solve_principal(m, s, opts);
  out.ratio = harnack_ratio(base.u, k_set);

  // smooth diagonal perturbation delta g = eps * s(x) * g
  const std::size_t n_nodes = m.node_count();
  std::vector<Eigen::MatrixXd> g(n_nodes);
  ScalarField bump(n_nodes);
  for (std::size_t p = 0; p < n_nodes; ++p) {
    Eigen::VectorXd x = m.coords(p);
    double sfun = 1.0;
    for (int k = 0; k < m.dim; ++k) {
      const double xi = (x[k] - m.axes[k].lo) / (m.axes[k].hi - m.axes[k].lo);
      sfun *= std::cos(2.0 * 3.14159265358979323846 * xi);
    }
    bump[p] = sfun;
    g[p] = (1.0 + eps * sfun) * m.metric.g[p];
  }
  DiscreteManifold mp = rebuild_with_metric(m, std::move(g));
  EigenSolution pert = solve_principal(mp, s, opts);
  out.perturbed_ratio = harnack_ratio(pert.u, k_set);
  out.drift = std::abs(out.perturbed_ratio - out.ratio) / out.ratio;

  // measured C^2 size of the change (sup of value and two derivative orders)
  double c2 = eps * bump.cwiseAbs().maxCoeff();
  for (int a = 0; a < m.dim; ++a) {
    ScalarField d1 = fd_derivative(m, bump, a);
    c2 = std::max(c2, eps * d1.cwiseAbs().maxCoeff());
    for (int b = 0; b < m.dim; ++b) {
      ScalarField d2 = fd_derivative(m, d1, b);
      c2 = std::max(c2, eps * d2.cwiseAbs().maxCoeff());
    }
  }
  out.perturbation_c2 = c2;
  return out;
}

}  // namespace satlab
