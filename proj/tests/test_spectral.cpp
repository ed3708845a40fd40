#include <doctest.h>

#include <cmath>
#include <random>

#include "satlab/geometry.hpp"
#include "satlab/spectral.hpp"

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

ManifoldSpec flat_slab(int n = 8) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{0, 1, n, true}, {0, 1, n, true}, {0, 1, n + 1, false}};
  s.formula = "flat";
  return s;
}

ManifoldSpec annulus(int nr = 13, int nt = 12) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{1, 2, nr, false}, {0, 2 * kPi, nt, true}, {0, 2 * kPi, nt, true}};
  s.formula = "diag-cylinder";
  return s;
}

ManifoldSpec bump_slab(int n = 8) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{0, 1, n, true}, {0, 1, n, true}, {0, 1, n + 1, false}};
  s.formula = "conformal-bump";
  s.params["amp"] = 0.15;
  s.params["ripple"] = 0.3;
  return s;
}

ManifoldSpec warped_torus(int n = 8) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{0, 1, n, true}, {0, 1, n, true}, {0, 1, n, true}};
  s.formula = "warped-torus";
  s.params["a"] = 0.3;
  return s;
}

}  // namespace

TEST_CASE("operator assembly constants and structure") {
  DiscreteManifold m = build_box_manifold(flat_slab());
  OperatorPair op = assemble(m);
  CHECK(op.a_n == doctest::Approx(8.0));
  CHECK(op.b_n == doctest::Approx(0.5));
  CHECK(op.a_n * op.b_n == doctest::Approx(2.0 * (m.dim - 1)));
  // flat slab: R = 0, h = 0: numerator is a_n * stiffness; constants in kernel
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.node_count());
  CHECK((op.numerator * ones).cwiseAbs().maxCoeff() <= 1e-10);
  // B rows applied to u = 1 give b_n h = 0 on the flat slab
  Eigen::VectorXd bu = op.boundary_op * ones;
  CHECK(bu.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("strong boundary operator contains the mean-curvature term") {
  DiscreteManifold m = build_box_manifold(annulus());
  OperatorPair op = assemble(m);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.node_count());
  Eigen::VectorXd bu = op.boundary_op * ones;
  // B 1 = b_n h: +0.25 on the r=1 face, -0.125 on the r=2 face
  for (long r = 0; r < bu.size(); ++r) {
    const auto& e = m.boundary.entries[r];
    const double expect = 0.5 * (e.side == 0 ? 0.5 : -0.25);
    CHECK(bu[r] == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("rayleigh quotient values") {
  SUBCASE("flat slab, f = 1, s = 0 gives zero") {
    DiscreteManifold m = build_box_manifold(flat_slab());
    OperatorPair op = assemble(m);
    Eigen::VectorXd f = Eigen::VectorXd::Ones(m.node_count());
    CHECK(std::abs(rayleigh_quotient(op, f, SpectralMode::Steklov)) <= 1e-11);
  }
  SUBCASE("closed case with f = 1 equals the mean of R") {
    DiscreteManifold m = build_box_manifold(warped_torus());
    OperatorPair op = assemble(m);
    Eigen::VectorXd f = Eigen::VectorXd::Ones(m.node_count());
    const double mean_r = op.mass.dot(op.scalar_curvature) / op.mass.sum();
    CHECK(rayleigh_quotient(op, f, SpectralMode::Closed) ==
          doctest::Approx(mean_r).epsilon(1e-12));
  }
  SUBCASE("annulus with f = r: hand-quadrature value 2") {
    // numerator: a_n vol + 2(n-1) sum h_out f^2 = 48 pi^2 + 24 pi^2,
    // denominator: 36 pi^2
    auto q_at = [](int nr, int nt) {
      DiscreteManifold m = build_box_manifold(annulus(nr, nt));
      OperatorPair op = assemble(m);
      Eigen::VectorXd f(m.node_count());
      for (std::size_t p = 0; p < m.node_count(); ++p) f[p] = m.coords(p)[0];
      return rayleigh_quotient(op, f, SpectralMode::Steklov);
    };
    CHECK(std::abs(q_at(13, 12) - 2.0) <= 0.02);
    CHECK(std::abs(q_at(25, 24) - 2.0) <= 0.006);
  }
  SUBCASE("scale invariance is exact") {
    DiscreteManifold m = build_box_manifold(annulus());
    OperatorPair op = assemble(m);
    Eigen::VectorXd f(m.node_count());
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      f[p] = 1.0 + 0.5 * m.coords(p)[0];
    }
    const double q1 = rayleigh_quotient(op, f, SpectralMode::Robin);
    const double q2 = rayleigh_quotient(op, (-2.5 * f).eval(), SpectralMode::Robin);
    CHECK(q1 == doctest::Approx(q2).epsilon(1e-13));
  }
  SUBCASE("zero function is rejected") {
    DiscreteManifold m = build_box_manifold(flat_slab());
    OperatorPair op = assemble(m);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(m.node_count());
    CHECK_THROWS(rayleigh_quotient(op, f, SpectralMode::Robin));
  }
}

TEST_CASE("trivial principal solves are exact") {
  SUBCASE("flat torus closed") {
    DiscreteManifold m = build_box_manifold(flat_torus());
    EigenSolution sol = solve_principal(m, SpectralMode::Closed);
    CHECK(std::abs(sol.lambda) <= 1e-10);
    CHECK((sol.u.array() - 1.0).abs().maxCoeff() <= 1e-8);
    CHECK(sol.u[m.basepoint] == 1.0);
  }
  SUBCASE("flat slab, both boundary problems") {
    DiscreteManifold m = build_box_manifold(flat_slab());
    for (SpectralMode s : {SpectralMode::Steklov, SpectralMode::Robin}) {
      EigenSolution sol = solve_principal(m, s);
      CHECK(std::abs(sol.lambda) <= 1e-10);
      CHECK((sol.u.array() - 1.0).abs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("iterative eigenvalue matches the dense oracle at 8^3") {
  DiscreteManifold m = build_box_manifold(bump_slab(8));
  for (SpectralMode s :
       {SpectralMode::Robin, SpectralMode::Steklov, SpectralMode::Closed}) {
    if (s == SpectralMode::Closed) continue;  // boundary present
    EigenSolution sol = solve_principal(m, s);
    const double dense = dense_principal_eigenvalue(m, s);
    CHECK(std::abs(sol.lambda - dense) <= 1e-8);
  }
  DiscreteManifold t = build_box_manifold(warped_torus(6));
  EigenSolution sol = solve_principal(t, SpectralMode::Closed);
  CHECK(std::abs(sol.lambda - dense_principal_eigenvalue(t, SpectralMode::Closed)) <=
        1e-8);
}

TEST_CASE("variational minimality over random positive test functions") {
  DiscreteManifold m = build_box_manifold(annulus());
  OperatorPair op = assemble(m);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(0.2, 2.0);
  for (SpectralMode s : {SpectralMode::Steklov, SpectralMode::Robin}) {
    EigenSolution sol = solve_principal(m, op, s);
    CHECK(rayleigh_quotient(op, sol.u, s) ==
          doctest::Approx(sol.lambda).epsilon(1e-9));
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd f(m.node_count());
      for (std::size_t p = 0; p < m.node_count(); ++p) f[p] = uni(rng);
      CHECK(rayleigh_quotient(op, f, s) >= sol.lambda - 1e-8);
    }
  }
}

TEST_CASE("conformal covariance of the closed principal eigenvalue") {
  DiscreteManifold m = build_box_manifold(warped_torus());
  EigenSolution base = solve_principal(m, SpectralMode::Closed);
  const double c = 0.35;
  std::vector<Eigen::MatrixXd> g(m.node_count());
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    g[p] = std::exp(2 * c) * m.metric.g[p];
  }
  DiscreteManifold mc = rebuild_with_metric(m, std::move(g));
  EigenSolution scaled = solve_principal(mc, SpectralMode::Closed);
  CHECK(scaled.lambda ==
        doctest::Approx(std::exp(-2 * c) * base.lambda).epsilon(1e-9));
}

TEST_CASE("eigen bounds check") {
  SUBCASE("flat torus passes at equality") {
    DiscreteManifold m = build_box_manifold(flat_torus());
    EigenSolution sol = solve_principal(m, SpectralMode::Closed);
    BoundsReport rep = eigen_bounds_check(m, sol);
    CHECK(rep.passes);
    CHECK(rep.envelope == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("flat slab s=0 passes at equality") {
    DiscreteManifold m = build_box_manifold(flat_slab());
    EigenSolution sol = solve_principal(m, SpectralMode::Steklov);
    BoundsReport rep = eigen_bounds_check(m, sol);
    CHECK(rep.passes);
    CHECK(std::abs(rep.lambda) <= 1e-10);
  }
  SUBCASE("bump manifold has a positive margin") {
    DiscreteManifold m = build_box_manifold(bump_slab());
    EigenSolution sol = solve_principal(m, SpectralMode::Robin);
    BoundsReport rep = eigen_bounds_check(m, sol);
    CHECK(rep.passes);
    CHECK(rep.margin > 0.0);
  }
}

TEST_CASE("harnack ratios") {
  DiscreteManifold m = build_box_manifold(bump_slab());
  SUBCASE("constant function has ratio 1") {
    ScalarField u = ScalarField::Constant(m.node_count(), 2.0);
    auto ball = metric_ball(m, m.basepoint, 0.3);
    CHECK(harnack_ratio(u, ball) == doctest::Approx(1.0));
  }
  SUBCASE("flat slab trivial solution has ratio 1") {
    DiscreteManifold flat = build_box_manifold(flat_slab());
    EigenSolution sol = solve_principal(flat, SpectralMode::Robin);
    auto ball = metric_ball(flat, flat.basepoint, 0.3);
    CHECK(harnack_ratio(sol.u, ball) == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("perturbation drift is small") {
    auto ball = metric_ball(m, m.basepoint, 0.3);
    HarnackStability hs =
        harnack_stability(m, SpectralMode::Robin, ball, 0.01);
    CHECK(hs.ratio > 0.0);
    CHECK(hs.ratio <= 1.0);
    CHECK(hs.drift <= 0.10);
  }
}

TEST_CASE("solver error paths") {
  DiscreteManifold m = build_box_manifold(flat_torus());
  SUBCASE("boundary problem on a closed manifold") {
    CHECK_THROWS_AS(solve_principal(m, SpectralMode::Steklov), SolverError);
  }
  SUBCASE("non-convergence carries a residual history") {
    DiscreteManifold b = build_box_manifold(bump_slab());
    SolveOptions opts;
    opts.tol = 1e-16;  // unreachable
    opts.max_iter = 2;
    try {
      solve_principal(b, SpectralMode::Robin, opts);
      CHECK(false);
    } catch (const SolverError& e) {
      CHECK_FALSE(e.residual_history.empty());
    }
  }
}

TEST_CASE("strong-form residual diagnostics shrink with resolution") {
  auto resid = [](int n) {
    DiscreteManifold m = build_box_manifold(bump_slab(n));
    EigenSolution sol = solve_principal(m, SpectralMode::Robin);
    return std::pair{sol.pde_residual, sol.boundary_residual};
  };
  auto [pde8, bnd8] = resid(8);
  auto [pde16, bnd16] = resid(16);
  CHECK(pde16 < pde8 / 1.5);
  CHECK(bnd16 < bnd8 / 1.5);
}
