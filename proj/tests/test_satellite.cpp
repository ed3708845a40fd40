#include <doctest.h>

#include <cmath>

#include "satlab/satellite.hpp"

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

ManifoldSpec annulus(int nr, int nt) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{1, 2, nr, false}, {0, 2 * kPi, nt, true}, {0, 2 * kPi, nt, true}};
  s.formula = "diag-cylinder";
  return s;
}

ManifoldSpec warped_torus(int n = 10) {
  ManifoldSpec s;
  s.dim = 3;
  s.axes = {{0, 1, n, true}, {0, 1, n, true}, {0, 1, n, true}};
  s.formula = "warped-torus";
  s.params["a"] = 0.3;
  return s;
}

}  // namespace

TEST_CASE("flat satellites reproduce the base metric") {
  SUBCASE("closed flat torus") {
    DiscreteManifold m = build_box_manifold(flat_torus());
    SatelliteManifold sat = make_satellite(m, SpectralMode::Closed);
    CHECK((sat.solution.u.array() - 1.0).abs().maxCoeff() <= 1e-8);
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      CHECK((sat.manifold.metric.g[p] - m.metric.g[p]).cwiseAbs().maxCoeff() <=
            1e-7);
    }
    IdentityReport rep = verify_identities(sat);
    CHECK(rep.scalar_residual <= 1e-6);
    CHECK(rep.sign_law_ok);
  }
  SUBCASE("flat slab, both boundary problems") {
    DiscreteManifold m = build_box_manifold(flat_slab());
    for (SpectralMode s : {SpectralMode::Steklov, SpectralMode::Robin}) {
      SatelliteManifold sat = make_satellite(m, s);
      IdentityReport rep = verify_identities(sat);
      CHECK(rep.scalar_residual <= 1e-6);
      CHECK(rep.mean_curvature_residual <= 1e-8);
    }
  }
}

TEST_CASE("satellite metric equals the conformal-module construction bit for bit") {
  DiscreteManifold m = build_box_manifold(annulus(9, 8));
  SatelliteManifold sat = make_satellite(m, SpectralMode::Steklov);
  ConformalFactor f = ConformalFactor::from_positive(sat.solution.u, m.dim);
  DiscreteManifold mc = conformal_metric(m, f);
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    CHECK((sat.manifold.metric.g[p] - mc.metric.g[p]).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("annulus satellite identities converge with the derived constants") {
  // scalar-flat satellite: R -> 0 and h = -lambda/(2(n-1)) u^{-2/(n-2)};
  // minimal-boundary satellite: h -> 0 and R = lambda u^{-4/(n-2)}
  auto residuals = [](int nr, int nt, SpectralMode s) {
    DiscreteManifold m = build_box_manifold(annulus(nr, nt));
    SatelliteManifold sat = make_satellite(m, s);
    IdentityReport rep = verify_identities(sat);
    return rep;
  };
  SUBCASE("steklov chain") {
    IdentityReport coarse = residuals(13, 12, SpectralMode::Steklov);
    IdentityReport fine = residuals(25, 24, SpectralMode::Steklov);
    CHECK(fine.scalar_residual < coarse.scalar_residual / 1.6);
    CHECK(fine.mean_curvature_residual <
          coarse.mean_curvature_residual / 1.6);
    CHECK(std::abs(fine.lambda - (-0.1215)) <= 0.01);  // regression anchor
  }
  SUBCASE("robin chain") {
    IdentityReport coarse = residuals(13, 12, SpectralMode::Robin);
    IdentityReport fine = residuals(25, 24, SpectralMode::Robin);
    CHECK(fine.mean_curvature_residual <
          coarse.mean_curvature_residual / 1.6);
    CHECK(fine.scalar_residual < coarse.scalar_residual / 1.6);
    CHECK(std::abs(fine.lambda - (-0.2400)) <= 0.01);  // regression anchor
  }
}

TEST_CASE("closed-case sign law on the warped torus") {
  DiscreteManifold m = build_box_manifold(warped_torus());
  SatelliteManifold sat = make_satellite(m, SpectralMode::Closed);
  CHECK(sat.solution.lambda < -1.0);  // strictly negative family
  IdentityReport rep = verify_identities(sat);
  CHECK(rep.sign_law_ok);
  // identity residual at two resolutions
  DiscreteManifold m2 = build_box_manifold(warped_torus(20));
  SatelliteManifold sat2 = make_satellite(m2, SpectralMode::Closed);
  IdentityReport rep2 = verify_identities(sat2);
  CHECK(rep2.scalar_residual < rep.scalar_residual / 2.0);
}

TEST_CASE("construction commutes with eigenfunction rescaling") {
  // scaling the solver output by a constant and re-normalizing at the
  // basepoint reproduces the same satellite metric
  DiscreteManifold m = build_box_manifold(annulus(9, 8));
  SatelliteManifold sat = make_satellite(m, SpectralMode::Steklov);
  ScalarField scaled = 3.7 * sat.solution.u;
  scaled /= scaled[m.basepoint];
  DiscreteManifold rebuilt =
      conformal_metric(m, ConformalFactor::from_positive(scaled, m.dim));
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    CHECK((rebuilt.metric.g[p] - sat.manifold.metric.g[p])
              .cwiseAbs()
              .maxCoeff() <= 1e-14);
  }
}

TEST_CASE("satellite construction is reproducible") {
  DiscreteManifold m = build_box_manifold(annulus(9, 8));
  SatelliteManifold a = make_satellite(m, SpectralMode::Robin);
  SatelliteManifold b = make_satellite(m, SpectralMode::Robin);
  CHECK(a.solution.lambda == b.solution.lambda);
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    CHECK((a.manifold.metric.g[p] - b.manifold.metric.g[p])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("graph systole of the unit torus") {
  DiscreteManifold m = build_box_manifold(flat_torus(8));
  const double sys = graph_systole(m);
  CHECK(sys == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("bounded geometry report") {
  SUBCASE("flat torus passes at c = 4, k = 2") {
    DiscreteManifold m = build_box_manifold(flat_torus(8));
    BoundedGeometryReport rep = bounded_geometry_report(m, 4.0, 2);
    for (const auto& it : rep.items) {
      INFO(it.name, ": ", it.measured, " vs ", it.threshold);
      CHECK(it.passes);
    }
    CHECK(rep.all_pass());
  }
  SUBCASE("flat slab basepoint distance passes at equality for c = 4") {
    DiscreteManifold m = build_box_manifold(flat_slab(8));
    BoundedGeometryReport rep = bounded_geometry_report(m, 4.0, 1);
    bool found = false;
    for (const auto& it : rep.items) {
      if (it.name == "basepoint-distance") {
        found = true;
        CHECK(it.measured == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(it.threshold == doctest::Approx(0.5));
        CHECK(it.passes);
      }
    }
    CHECK(found);
  }
  SUBCASE("strong bump fails the curvature item, naming the level") {
    ManifoldSpec s = flat_torus(10);
    s.formula = "conformal-bump-periodic";
    s.params["amp"] = 0.5;
    DiscreteManifold m = build_box_manifold(s);
    BoundedGeometryReport rep = bounded_geometry_report(m, 20.0, 2);
    bool curvature_failed = false;
    for (const auto& it : rep.items) {
      if (it.name.rfind("curvature-derivative-l", 0) == 0 && !it.passes) {
        curvature_failed = true;
        CHECK_FALSE(it.note.empty());
      }
    }
    CHECK(curvature_failed);
    CHECK_FALSE(rep.all_pass());
  }
  SUBCASE("collar injectivity fails when 1/c exceeds the collision depth") {
    DiscreteManifold m = build_box_manifold(flat_slab(8));
    BoundedGeometryReport rep = bounded_geometry_report(m, 1.0, 1);
    bool collar_failed = false;
    for (const auto& it : rep.items) {
      if (it.name == "collar-injectivity" && !it.passes) collar_failed = true;
    }
    CHECK(collar_failed);  // opposite-face flows collide at depth 1 > 1/2
  }
}
