#include <doctest.h>

#include <cmath>
#include <random>

#include "satlab/extension.hpp"

using namespace satlab;

namespace {

ManifoldSpec flat_slab(int n = 8) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{0, 1, n, true}, {0, 1, n, true}, {0, 1, n + 1, false}};
  s.formula = "flat";
  return s;
}

}  // namespace

TEST_CASE("seeley scheme weights") {
  SUBCASE("m = 0 gives the even reflection") {
    SeeleyScheme s = SeeleyScheme::make(0);
    CHECK(s.a.size() == 1);
    CHECK(s.a[0] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("m = 1, b = (1,2): hand-solved weights (3, -2)") {
    SeeleyScheme s = SeeleyScheme::make(1);
    CHECK(s.a[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(s.a[1] == doctest::Approx(-2.0).epsilon(1e-12));
  }
  SUBCASE("m = 2, b = (1,2,4): hand-solved weights (5, -5, 1)") {
    SeeleyScheme s = SeeleyScheme::make(2);
    CHECK(s.a[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(s.a[1] == doctest::Approx(-5.0).epsilon(1e-12));
    CHECK(s.a[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.weight_l1() == doctest::Approx(11.0).epsilon(1e-12));
  }
  SUBCASE("solve residual stays below 1e-10 up to m = 4") {
    for (int m = 0; m <= 4; ++m) {
      CHECK(SeeleyScheme::make(m).solve_residual <= 1e-10);
    }
  }
  SUBCASE("duplicate nodes are rejected") {
    CHECK_THROWS(SeeleyScheme::make(1, {2.0, 2.0}));
  }
}

TEST_CASE("polynomial reproduction through the interface") {
  // (Ef)(-t) must equal f(-t) for polynomials of degree <= m
  const int samples = 300;
  const double h = 0.01;
  for (int m = 0; m <= 4; ++m) {
    SeeleyScheme s = SeeleyScheme::make(m);
    for (int deg = 0; deg <= m; ++deg) {
      std::vector<double> f(samples);
      for (int i = 0; i < samples; ++i) f[i] = std::pow(i * h, deg);
      SeeleyExtension e = seeley_extend(s, f, 8);
      CHECK_FALSE(e.clamped);
      for (int i = 1; i <= 8; ++i) {
        const double want = std::pow(-i * h, deg);
        CHECK(std::abs(e.values[i - 1] - want) <= 1e-10);
      }
    }
  }
}

TEST_CASE("extension is linear") {
  SeeleyScheme s = SeeleyScheme::make(2);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> f(100), g(100), combo(100);
  for (int i = 0; i < 100; ++i) {
    f[i] = uni(rng);
    g[i] = uni(rng);
    combo[i] = 1.5 * f[i] - 0.7 * g[i];
  }
  auto ef = seeley_extend(s, f, 6);
  auto eg = seeley_extend(s, g, 6);
  auto ec = seeley_extend(s, combo, 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(ec.values[i] ==
          doctest::Approx(1.5 * ef.values[i] - 0.7 * eg.values[i])
              .epsilon(1e-12));
  }
}

TEST_CASE("range overflow clamps with a flag") {
  SeeleyScheme s = SeeleyScheme::make(2);  // needs samples at 4*t
  std::vector<double> f(10, 1.0);
  SeeleyExtension e = seeley_extend(s, f, 5);  // 4*5 = 20 > 9
  CHECK(e.clamped);
}

TEST_CASE("positive extension") {
  SUBCASE("constants are fixed") {
    SeeleyScheme s = SeeleyScheme::make(3);
    std::vector<double> u(50, 0.7);
    PositiveExtension e = positive_extend(s, u, 5, 0.7);
    for (double v : e.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
  }
  SUBCASE("u = 1 + t against the closed-form oracle") {
    // m=1, b=(1,2), a=(3,-2): F(u)(-t) = (1+t)^3 / (1+2t)^2
    SeeleyScheme s = SeeleyScheme::make(1);
    const double h = 0.02;
    std::vector<double> u(200);
    for (int i = 0; i < 200; ++i) u[i] = 1.0 + i * h;
    PositiveExtension e = positive_extend(s, u, 10, 1.0);
    for (int i = 1; i <= 10; ++i) {
      const double t = i * h;
      const double want = std::pow(1 + t, 3) / std::pow(1 + 2 * t, 2);
      CHECK(e.values[i - 1] == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(e.values[0] > 0.0);
  }
  SUBCASE("positivity floor over randomized fields") {
    SeeleyScheme s = SeeleyScheme::make(2);
    const double b = 0.5;
    const double beta = std::exp(-s.weight_l1() * std::abs(std::log(b)));
    CHECK(beta == doctest::Approx(std::pow(2.0, -11.0)).epsilon(1e-12));
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> uni(b, 1.0 / b);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> u(80);
      for (auto& v : u) v = uni(rng);
      PositiveExtension e = positive_extend(s, u, 6, b);
      for (double v : e.values) {
        CHECK(v > 0.0);
        CHECK(v >= beta - 1e-15);
      }
    }
  }
  SUBCASE("nonpositive input is rejected") {
    SeeleyScheme s = SeeleyScheme::make(1);
    std::vector<double> u(10, 1.0);
    u[3] = 0.0;
    CHECK_THROWS(positive_extend(s, u, 2, 0.5));
  }
}

TEST_CASE("metric extension of the flat slab is identity everywhere") {
  DiscreteManifold m = build_box_manifold(flat_slab());
  ExtendedManifold x = extend_metric(m, SeeleyScheme::make(2), 3);
  CHECK(x.ext_lo == 3);
  CHECK(x.ext_hi == 3);
  for (std::size_t p = 0; p < x.manifold.node_count(); ++p) {
    CHECK((x.manifold.metric.g[p] - Eigen::MatrixXd::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
  CHECK(x.spd_floor == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("polynomial conformal metric extends to its analytic continuation") {
  // g = e^{2 eps phi(x3)} delta with phi quadratic: the log-metric entries
  // are degree-2 polynomials along the normal axis, reproduced exactly by
  // the m = 2 scheme (17 layers keep the b_k = 4 samples on the grid)
  ManifoldSpec s = flat_slab(16);
  DiscreteManifold flat = build_box_manifold(s);
  const double eps = 0.3;
  auto phi = [](double t) { return t * t - 0.3 * t; };
  std::vector<Eigen::MatrixXd> g(flat.node_count());
  for (std::size_t p = 0; p < flat.node_count(); ++p) {
    g[p] = std::exp(2 * eps * phi(flat.coords(p)[2])) *
           Eigen::MatrixXd::Identity(3, 3);
  }
  DiscreteManifold m = rebuild_with_metric(flat, std::move(g));
  ExtendedManifold x = extend_metric(m, SeeleyScheme::make(2), 3);
  REQUIRE_FALSE(x.clamped);
  double err = 0.0;
  for (std::size_t p = 0; p < x.manifold.node_count(); ++p) {
    const double t = x.manifold.coords(p)[2];
    const double want = std::exp(2 * eps * phi(t));
    err = std::max(err, std::abs(x.manifold.metric.g[p](0, 0) - want));
  }
  CHECK(err <= 1e-8);
  CHECK(x.spd_floor > 0.0);
  // restriction is exact
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    CHECK((x.manifold.metric.g[x.to_extended(m, p)] - m.metric.g[p])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("extension requires a single boundary axis") {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{0, 1, 9, false}, {0, 1, 8, true}, {0, 1, 9, false}};
  s.formula = "flat";
  DiscreteManifold m = build_box_manifold(s);
  CHECK_THROWS_AS(extend_metric(m, SeeleyScheme::make(1), 2),
                  ConstructionError);
}

TEST_CASE("height function on the extended slab") {
  ManifoldSpec s = flat_slab(16);
  DiscreteManifold m = build_box_manifold(s);
  ExtendedManifold x = extend_metric(m, SeeleyScheme::make(2), 4);
  const double r2 = 1.0;
  HeightField hf = build_height_function(x, r2);
  // f = taper(x3) near the lo face, r2/2 deep inside, negative outside
  for (std::size_t p = 0; p < x.manifold.node_count(); ++p) {
    const double t = x.manifold.coords(p)[2];
    if (std::abs(t - 0.5) < 1e-9) {
      CHECK(hf.f[p] == doctest::Approx(r2 / 2).epsilon(1e-12));
    }
    if (std::abs(t) < 1e-9) CHECK(hf.f[p] == doctest::Approx(0.0));
    if (t < -1e-9) CHECK(hf.f[p] < 0.0);
    if (t > 1e-9 && t < r2 / 4) {
      CHECK(hf.f[p] == doctest::Approx(std::min(t, 1.0 - t)).epsilon(1e-9));
    }
  }
  CHECK(hf.delta_bnd >= 0.9);  // taper slope 1 near the zero level
  CHECK_FALSE(hf.zero_level.empty());
  // basepoint sits mid-slab with the plateau value
  CHECK(hf.f[x.to_extended(m, m.basepoint)] == doctest::Approx(r2 / 2));
  SUBCASE("taper window too coarse for the grid is rejected") {
    CHECK_THROWS_AS(build_height_function(x, 16.0 * (1.0 / 16) / 2),
                    ConstructionError);
  }
}

TEST_CASE("cut undoes extend exactly") {
  ManifoldSpec s = flat_slab(16);
  s.formula = "conformal-bump";
  s.params["amp"] = 0.1;
  s.params["ripple"] = 0.3;
  DiscreteManifold m = build_box_manifold(s);
  ExtendedManifold x = extend_metric(m, SeeleyScheme::make(2), 4);
  HeightField hf = build_height_function(x, 1.0);
  DiscreteManifold back = cut_manifold(x, hf, 0.0);
  REQUIRE(back.node_count() == m.node_count());
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    CHECK((back.metric.g[p] - m.metric.g[p]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(back.boundary.entries.size() == m.boundary.entries.size());

  SUBCASE("shifting the level one grid step moves the boundary out a layer") {
    // flat metric keeps the arclength steps exactly h on both sides
    DiscreteManifold fm = build_box_manifold(flat_slab(16));
    ExtendedManifold fx = extend_metric(fm, SeeleyScheme::make(2), 4);
    HeightField fhf = build_height_function(fx, 1.0);
    const double h = fm.axes[2].spacing();
    DiscreteManifold wider = cut_manifold(fx, fhf, -h - 1e-9);
    CHECK(wider.axes[2].count == fm.axes[2].count + 2);
    CHECK(wider.boundary.entries.size() == fm.boundary.entries.size());
  }
  SUBCASE("cutting everything is an error") {
    CHECK_THROWS_AS(cut_manifold(x, hf, 10.0), ConstructionError);
  }
}

TEST_CASE("gradient flow to a level") {
  ManifoldSpec s = flat_slab(16);
  DiscreteManifold m = build_box_manifold(s);
  ExtendedManifold x = extend_metric(m, SeeleyScheme::make(2), 4);
  HeightField hf = build_height_function(x, 1.0);

  // start on the zero level: zero flow time
  const std::size_t face_node = hf.zero_level.front();
  FlowResult trivial = flow_to_level(x, hf, face_node, 0.0);
  CHECK(trivial.time == 0.0);
  CHECK(std::abs(trivial.f_value) <= 1e-6);

  // flat product: the flow is a straight line with unit gradient, so the
  // flow time matches the level difference
  FlowResult run = flow_to_level(x, hf, face_node, 0.2);
  CHECK(std::abs(run.f_value - 0.2) <= 1e-6);
  CHECK(run.time <= 0.2 / hf.delta_bnd * 1.10 + 1e-9);
  CHECK(run.time >= 0.19);

  SUBCASE("perturbed metric still meets the flow-time bound") {
    ManifoldSpec sp = flat_slab(16);
    sp.formula = "conformal-bump";
    sp.params["amp"] = 0.1;
    sp.params["ripple"] = 0.3;
    DiscreteManifold mp = build_box_manifold(sp);
    ExtendedManifold xp = extend_metric(mp, SeeleyScheme::make(2), 4);
    HeightField hp = build_height_function(xp, 1.0);
    FlowResult r2 = flow_to_level(xp, hp, hp.zero_level.front(), 0.2);
    CHECK(std::abs(r2.f_value - 0.2) <= 1e-6);
    CHECK(r2.time <= 0.2 / hp.delta_bnd * 1.15);
  }
}

TEST_CASE("two-chart overlap partition of unity") {
  PartitionOfUnity pu = make_overlap_partition(101, 0.35, 0.65);
  CHECK(pu.sum_error <= 1e-10);
  CHECK(pu.multiplicity == 2);
  CHECK(pu.c0 > 0.0);
  CHECK(std::isfinite(pu.c0));
  // members stay in [0,1]
  for (const auto& f : pu.psi) {
    CHECK(f.minCoeff() >= -1e-12);
    CHECK(f.maxCoeff() <= 1.0 + 1e-12);
  }
}
