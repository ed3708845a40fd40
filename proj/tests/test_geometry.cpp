#include <doctest.h>

#include <cmath>
#include <random>

#include "satlab/geometry.hpp"

using namespace satlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

ManifoldSpec flat_torus(int n = 8) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{0, 1, n, true}, {0, 1, n, true}, {0, 1, n, true}};
  s.formula = "flat";
  return s;
}

ManifoldSpec cylinder_chart(int nr = 13, int nt = 8) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{1, 2, nr, false}, {0, 2 * kPi, nt, true}, {0, 2 * kPi, nt, true}};
  s.formula = "diag-cylinder";
  return s;
}

ManifoldSpec bump_torus(int n, double amp = 0.15) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{0, 1, n, true}, {0, 1, n, true}, {0, 1, n, true}};
  s.formula = "conformal-bump-periodic";
  s.params["amp"] = amp;
  return s;
}

}  // namespace

TEST_CASE("christoffel symbols vanish for flat and constant-conformal metrics") {
  DiscreteManifold m = build_box_manifold(flat_torus());
  ConnectionField cf = christoffel(m);
  for (double v : cf.gamma.data) CHECK(v == 0.0);

  ManifoldSpec s = flat_torus();
  s.formula = "flat";
  s.params["scale"] = std::exp(2.0 * 0.7);
  DiscreteManifold mc = build_box_manifold(s);
  ConnectionField cfc = christoffel(mc);
  for (double v : cfc.gamma.data) CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("cylinder chart christoffels match the hand values") {
  DiscreteManifold m = build_box_manifold(cylinder_chart());
  ConnectionField cf = christoffel(m);
  // metric entries are polynomial in r, so the stencils are exact:
  // Gamma^r_tt = -r, Gamma^t_rt = 1/r
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    const double r = m.coords(p)[0];
    CHECK(cf.at(p, 0, 1, 1) == doctest::Approx(-r).epsilon(1e-10));
    CHECK(cf.at(p, 1, 0, 1) == doctest::Approx(1.0 / r).epsilon(1e-10));
    CHECK(std::abs(cf.at(p, 2, 0, 0)) <= 1e-12);
  }
}

TEST_CASE("flat torus curvature is zero to machine precision") {
  DiscreteManifold m = build_box_manifold(flat_torus());
  CurvatureBundle cb = riemann(m);
  for (double v : cb.riem.data) CHECK(std::abs(v) <= 1e-13);
  CHECK(cb.scalar.cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("cylinder chart is flat with curvature O(h^2)") {
  // coordinate chart of flat space: Riemann must vanish as the grid refines
  auto sup_riem = [](int nr, int nt) {
    DiscreteManifold m = build_box_manifold(cylinder_chart(nr, nt));
    return tensor_norm(m, riemann(m).riem).maxCoeff();
  };
  const double coarse = sup_riem(9, 8);
  const double fine = sup_riem(17, 16);
  CHECK(fine < coarse / 2.5);
  CHECK(fine <= 0.05);
}

TEST_CASE("scalar curvature of a conformal bump matches the analytic formula") {
  // R(e^{2u} delta) = e^{-2u}(-2(n-1) lap u - (n-1)(n-2)|grad u|^2), n = 3
  auto check_at = [](int n, double* max_err) {
    DiscreteManifold m = build_box_manifold(bump_torus(n));
    ScalarField r = scalar_curvature(m);
    double err = 0.0;
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      Eigen::VectorXd x = m.coords(p);
      const double amp = 0.15;
      const double s1 = std::sin(2 * kPi * x[0]), c1 = std::cos(2 * kPi * x[0]);
      const double s2 = std::sin(2 * kPi * x[1]), c2 = std::cos(2 * kPi * x[1]);
      const double s3 = std::sin(2 * kPi * x[2]), c3 = std::cos(2 * kPi * x[2]);
      const double u = amp * s1 * s2 * c3;
      const double w = 2 * kPi;
      Eigen::Vector3d du(amp * w * c1 * s2 * c3, amp * w * s1 * c2 * c3,
                         -amp * w * s1 * s2 * s3);
      const double lap = -3 * w * w * u;
      const double exact = std::exp(-2 * u) * (-4 * lap - 2 * du.squaredNorm());
      err = std::max(err, std::abs(r[p] - exact));
    }
    *max_err = err;
  };
  double e8 = 0, e16 = 0;
  check_at(8, &e8);
  check_at(16, &e16);
  CHECK(e16 < e8 / 3.0);          // second-order trend
  CHECK(e16 <= 0.05 * 96.0);      // ~4% of the curvature scale at 16^3
}

TEST_CASE("riemann symmetry residuals shrink at second order") {
  auto residuals = [](int n) {
    DiscreteManifold m = build_box_manifold(bump_torus(n));
    CurvatureBundle cb = riemann(m);
    CHECK(cb.antisym_12 == 0.0);  // algebraically exact in this pipeline
    return std::max(cb.antisym_34, cb.pair_swap);
  };
  const double coarse = residuals(12);
  const double fine = residuals(24);
  CHECK(fine < coarse / 2.5);
}

TEST_CASE("covariant derivative reduces to partials on the flat metric") {
  DiscreteManifold m = build_box_manifold(flat_torus());
  // f = sin(2 pi x1): on the flat torus the second covariant derivative is
  // the plain second difference, symmetric exactly
  ScalarField f(m.node_count());
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    f[p] = std::sin(2 * kPi * m.coords(p)[0]);
  }
  // rank-1: the FD gradient as a covariant field
  TensorField grad(3, 1, m.node_count());
  for (int a = 0; a < 3; ++a) {
    ScalarField d = fd_derivative(m, f, a);
    for (std::size_t p = 0; p < m.node_count(); ++p) grad.at(p, a) = d[p];
  }
  TensorField hess = covariant_derivative(m, grad, 1);
  // on the flat torus Hess is symmetric exactly (Gamma = 0, FD commute)
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        CHECK(hess.at(p, static_cast<std::size_t>(a * 3 + b)) ==
              doctest::Approx(hess.at(p, static_cast<std::size_t>(b * 3 + a)))
                  .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("metric compatibility: grad g vanishes") {
  // the connection is built from the same finite-difference metric
  // derivatives, so grad g = 0 holds as an algebraic identity on the lattice
  DiscreteManifold m = build_box_manifold(bump_torus(12));
  TensorField g(3, 2, m.node_count());
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        g.at(p, static_cast<std::size_t>(i * 3 + j)) = m.metric.g[p](i, j);
  }
  CHECK(tensor_norm(m, covariant_derivative(m, g, 1)).maxCoeff() <= 1e-12);
}

TEST_CASE("covariant derivative of dr on the cylinder chart") {
  DiscreteManifold m = build_box_manifold(cylinder_chart());
  TensorField dr(3, 1, m.node_count());
  for (std::size_t p = 0; p < m.node_count(); ++p) dr.at(p, 0) = 1.0;
  TensorField nd = covariant_derivative(m, dr, 1);
  // (grad dr)_{ab} = -Gamma^r_{ab}: only the (theta,theta) entry = +r
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    const double r = m.coords(p)[0];
    CHECK(nd.at(p, static_cast<std::size_t>(1 * 3 + 1)) ==
          doctest::Approx(r).epsilon(1e-10));
    CHECK(std::abs(nd.at(p, 0)) <= 1e-10);
    CHECK(std::abs(nd.at(p, static_cast<std::size_t>(2 * 3 + 2))) <= 1e-10);
  }
}

TEST_CASE("tensor norm") {
  DiscreteManifold m = build_box_manifold(cylinder_chart(9, 8));
  SUBCASE("zero tensor has zero norm") {
    TensorField t(3, 2, m.node_count());
    CHECK(tensor_norm(m, t).maxCoeff() == 0.0);
  }
  SUBCASE("|g|_g = sqrt(n)") {
    TensorField g(3, 2, m.node_count());
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          g.at(p, static_cast<std::size_t>(i * 3 + j)) = m.metric.g[p](i, j);
    }
    ScalarField nrm = tensor_norm(m, g);
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      CHECK(nrm[p] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    }
  }
  SUBCASE("random covariant 2-tensor matches the orthonormal-frame oracle") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t p = m.basepoint;
    TensorField t(3, 2, m.node_count());
    Eigen::Matrix3d tv;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        tv(i, j) = gauss(rng);
        t.at(p, static_cast<std::size_t>(i * 3 + j)) = tv(i, j);
      }
    // oracle: sum of squares of components in a g-orthonormal frame built
    // from the Cholesky factor (frame vectors = columns of L^{-T})
    Eigen::Matrix3d lmat = m.metric.g[p].llt().matrixL();
    Eigen::Matrix3d frame = lmat.transpose().inverse();
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double tij = frame.col(i).transpose() * tv * frame.col(j);
        total += tij * tij;
      }
    }
    CHECK(tensor_norm(m, t)[p] ==
          doctest::Approx(std::sqrt(total)).epsilon(1e-12));
  }
}

TEST_CASE("laplace-beltrami") {
  SUBCASE("constants map to zero exactly") {
    DiscreteManifold m = build_box_manifold(bump_torus(8));
    ScalarField f = ScalarField::Constant(m.node_count(), 3.7);
    CHECK(laplace_beltrami(m, f).cwiseAbs().maxCoeff() <= 1e-11);
  }
  SUBCASE("fourier mode on the flat torus") {
    auto err_at = [](int n) {
      DiscreteManifold m = build_box_manifold(flat_torus(n));
      ScalarField f(m.node_count());
      for (std::size_t p = 0; p < m.node_count(); ++p) {
        f[p] = std::sin(2 * kPi * m.coords(p)[0]);
      }
      ScalarField lap = laplace_beltrami(m, f);
      double err = 0.0;
      for (std::size_t p = 0; p < m.node_count(); ++p) {
        err = std::max(err, std::abs(lap[p] + 4 * kPi * kPi * f[p]));
      }
      return err;
    };
    const double e8 = err_at(8);
    const double e16 = err_at(16);
    CHECK(e16 < e8 / 3.0);
    CHECK(e16 <= 4 * kPi * kPi * 0.06);
  }
  SUBCASE("constant conformal scaling of the laplacian is exact") {
    DiscreteManifold m = build_box_manifold(bump_torus(8));
    const double c = 0.4;
    std::vector<Eigen::MatrixXd> g(m.node_count());
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      g[p] = std::exp(2 * c) * m.metric.g[p];
    }
    DiscreteManifold mc = rebuild_with_metric(m, std::move(g));
    ScalarField f(m.node_count());
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      f[p] = std::cos(2 * kPi * m.coords(p)[1]);
    }
    ScalarField a = laplace_beltrami(m, f);
    ScalarField b = laplace_beltrami(mc, f);
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      CHECK(b[p] == doctest::Approx(std::exp(-2 * c) * a[p]).epsilon(1e-11));
    }
  }
}

TEST_CASE("assembled operator is self-adjoint for non-diagonal metrics") {
  // random smooth SPD metric with off-diagonal terms
  ManifoldSpec s = flat_torus(8);
  DiscreteManifold flat = build_box_manifold(s);
  std::vector<Eigen::MatrixXd> g(flat.node_count());
  for (std::size_t p = 0; p < flat.node_count(); ++p) {
    Eigen::VectorXd x = flat.coords(p);
    Eigen::Matrix3d b = Eigen::Matrix3d::Identity();
    b(0, 1) = b(1, 0) = 0.2 * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[2]);
    b(1, 2) = b(2, 1) = 0.15 * std::cos(2 * kPi * x[1]);
    g[p] = b;
  }
  DiscreteManifold m = rebuild_with_metric(flat, std::move(g));
  LaplaceOperator op = assemble_laplace(m);
  Eigen::SparseMatrix<double> diff = op.stiffness;
  diff -= Eigen::SparseMatrix<double>(op.stiffness.transpose());
  double asym = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) {
      asym = std::max(asym, std::abs(it.value()));
    }
  }
  CHECK(asym <= 1e-12);
  // constants in the kernel
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.node_count());
  CHECK((op.stiffness * ones).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("contracted second bianchi identity residual decreases with h") {
  auto worst = [](int n) {
    DiscreteManifold m = build_box_manifold(bump_torus(n));
    return bianchi_residual(m).maxCoeff();
  };
  const double coarse = worst(8);
  const double fine = worst(16);
  CHECK(fine < coarse / 1.5);
}

TEST_CASE("boundary geometry of the conformally scaled slab") {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{0, 1, 8, true}, {0, 1, 8, true}, {0, 1, 9, false}};
  s.formula = "flat";
  s.params["scale"] = std::exp(2 * 0.3);
  DiscreteManifold m = build_box_manifold(s);
  for (const auto& e : m.boundary.entries) {
    CHECK(std::abs(e.mean_curvature) <= 1e-12);
    // normal is still g-unit
    const double len = e.normal.dot(m.metric.g[e.node] * e.normal);
    CHECK(len == doctest::Approx(1.0).epsilon(1e-12));
  }
}
