#include "satlab/scenarios.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "satlab/conformal.hpp"
#include "satlab/csv.hpp"
#include "satlab/extension.hpp"
#include "satlab/satellite.hpp"
#include "satlab/sequences.hpp"

namespace satlab {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

SpectralMode parse_mode(const std::string& s) {
  if (s == "closed") return SpectralMode::Closed;
  if (s == "s0" || s == "steklov") return SpectralMode::Steklov;
  if (s == "s1" || s == "robin") return SpectralMode::Robin;
  throw ConfigError("unknown spectral mode: " + s, 0, "s");
}

Axis parse_axis(const std::string& v, int line_hint) {
  auto parts = split_list(v);
  if (parts.size() != 4) {
    throw ConfigError("axis needs 'lo, hi, count, periodic|interval'",
                      line_hint, "axis");
  }
  Axis ax;
  ax.lo = std::stod(parts[0]);
  ax.hi = std::stod(parts[1]);
  ax.count = std::stoi(parts[2]);
  if (parts[3] == "periodic") {
    ax.periodic = true;
  } else if (parts[3] == "interval") {
    ax.periodic = false;
  } else {
    throw ConfigError("axis kind must be periodic or interval", line_hint,
                      "axis");
  }
  return ax;
}

ManifoldSpec refine(const ManifoldSpec& spec, int factor) {
  ManifoldSpec out = spec;
  for (auto& ax : out.axes) {
    ax.count = ax.periodic ? ax.count * factor : (ax.count - 1) * factor + 1;
  }
  out.basepoint.reset();
  return out;
}

ManifoldSpec with_resolution(const ManifoldSpec& spec, int nodes) {
  ManifoldSpec out = spec;
  for (auto& ax : out.axes) ax.count = ax.periodic ? nodes : nodes + 1;
  out.basepoint.reset();
  return out;
}

std::string fmt(double v) { return csv_number(v); }

}  // namespace

Scenario Scenario::from_config(const Config& cfg) {
  Scenario sc;
  sc.raw = cfg;
  sc.name = cfg.get_string("scenario", "name");
  sc.mode = parse_mode(cfg.get_string("scenario", "s", "s1"));
  sc.checks = split_list(cfg.get_string("scenario", "checks"));
  sc.seed = static_cast<unsigned>(cfg.get_int("scenario", "seed", 1));
  sc.solver.tol = cfg.get_double("solver", "tol", 1e-10);
  sc.solver.max_iter = static_cast<int>(cfg.get_int("solver", "max_iter", 400));

  sc.manifold.dim = static_cast<int>(cfg.get_int("manifold", "dim"));
  sc.manifold.formula = cfg.get_string("manifold", "formula", "flat");
  for (int k = 0; k < sc.manifold.dim; ++k) {
    sc.manifold.axes.push_back(
        parse_axis(cfg.get_string("manifold", "axis" + std::to_string(k)), 0));
  }
  if (const auto* tbl = cfg.section("manifold")) {
    for (const auto& [key, value] : *tbl) {
      if (key.rfind("param.", 0) == 0) {
        sc.manifold.params[key.substr(6)] = std::stod(value);
      }
    }
  }
  return sc;
}

Scenario Scenario::from_text(const std::string& text) {
  return from_config(Config::parse(text));
}

// ----------------------------------------------------------------- checks

namespace {

void check_identity(const Scenario& sc, const std::string& out_dir,
                    ScenarioResult& res) {
  const Config& cfg = sc.raw;
  const bool two_res = cfg.get_bool("identity", "two_resolution", false);
  const double zero_tol = cfg.get_double("identity", "zero_tol", 1e-7);
  const double factor_min = cfg.get_double("identity", "factor_min", 2.0);
  const double abs_max = cfg.get_double("identity", "abs_max", 1e-2);

  CsvWriter csv(out_dir + "/identity.csv");
  csv.row({"resolution", "lambda", "scalar_residual", "mean_curvature_residual"});

  auto run_at = [&](const ManifoldSpec& ms, const std::string& tag) {
    DiscreteManifold m = build_box_manifold(ms);
    SatelliteManifold sat = make_satellite(m, sc.mode, sc.solver);
    IdentityReport rep = verify_identities(sat);
    csv.cells({tag, rep.lambda, rep.scalar_residual,
               rep.mean_curvature_residual});
    if (tag == "base") {
      // field dump + curvature symmetry summary at the base resolution
      CurvatureBundle cb = riemann(sat.manifold);
      export_field_csv(out_dir + "/satellite_fields.csv", sat.manifold,
                       {"eigenfunction", "satellite_scalar_curvature"},
                       {&sat.solution.u, &cb.scalar});
      std::ofstream rep_txt(out_dir + "/curvature_report.txt",
                            std::ios::binary);
      rep_txt << "satellite curvature symmetry residuals (sup norms)\n"
              << "antisymmetry (1,2): " << fmt(cb.antisym_12) << "\n"
              << "antisymmetry (3,4): " << fmt(cb.antisym_34) << "\n"
              << "pair swap:          " << fmt(cb.pair_swap) << "\n";
      res.artifacts.push_back(out_dir + "/satellite_fields.csv");
      res.artifacts.push_back(out_dir + "/curvature_report.txt");
    }
    return rep;
  };

  if (!two_res) {
    IdentityReport rep = run_at(sc.manifold, "base");
    const double worst =
        std::max(rep.scalar_residual, rep.mean_curvature_residual);
    Verdict v;
    v.check = "identity";
    v.pass = worst <= zero_tol && rep.sign_law_ok;
    v.detail = "sup residual " + fmt(worst) + " (tol " + fmt(zero_tol) + ")";
    res.verdicts.push_back(v);
  } else {
    IdentityReport coarse = run_at(sc.manifold, "base");
    IdentityReport fine = run_at(refine(sc.manifold, 2), "refined");
    const bool steklov = sc.mode == SpectralMode::Steklov;
    const double rc = steklov ? coarse.scalar_residual
                              : coarse.mean_curvature_residual;
    const double rf =
        steklov ? fine.scalar_residual : fine.mean_curvature_residual;
    Verdict v;
    v.check = "identity";
    const double factor = rc / rf;
    v.pass = factor >= factor_min && rf <= abs_max;
    v.detail = "residual " + fmt(rc) + " -> " + fmt(rf) + " (factor " +
               fmt(factor) + ", need >= " + fmt(factor_min) + " and <= " +
               fmt(abs_max) + ")";
    res.verdicts.push_back(v);
  }
  res.artifacts.push_back(out_dir + "/identity.csv");
}

void check_bounds(const Scenario& sc, const std::string& out_dir,
                  ScenarioResult& res) {
  DiscreteManifold m = build_box_manifold(sc.manifold);
  EigenSolution sol = solve_principal(m, sc.mode, sc.solver);
  BoundsReport rep = eigen_bounds_check(m, sol);
  CsvWriter csv(out_dir + "/bounds.csv");
  csv.row({"mode", "lambda", "envelope", "margin", "sup_R", "sup_h", "vol",
           "vol_bnd", "algebraic_residual", "pde_residual",
           "boundary_residual", "iterations"});
  csv.cells({mode_name(sc.mode), rep.lambda, rep.envelope, rep.margin,
             rep.sup_R, rep.sup_h, rep.vol, rep.vol_bnd,
             sol.algebraic_residual, sol.pde_residual, sol.boundary_residual,
             sol.iterations});
  Verdict v;
  v.check = "bounds";
  v.pass = rep.passes;
  v.detail = "|lambda| " + fmt(std::abs(rep.lambda)) + " vs envelope " +
             fmt(rep.envelope) + " (margin " + fmt(rep.margin) + ")";
  res.verdicts.push_back(v);
  res.artifacts.push_back(out_dir + "/bounds.csv");
}

void check_harnack(const Scenario& sc, const std::string& out_dir,
                   ScenarioResult& res) {
  const Config& cfg = sc.raw;
  const double radius = cfg.get_double("harnack", "ball_radius", 0.3);
  const double eps = cfg.get_double("harnack", "perturbation", 0.01);
  const double max_drift = cfg.get_double("harnack", "max_drift", 0.10);

  DiscreteManifold m = build_box_manifold(sc.manifold);
  auto k_set = metric_ball(m, m.basepoint, radius);
  HarnackStability hs =
      harnack_stability(m, sc.mode, k_set, eps, sc.solver);
  CsvWriter csv(out_dir + "/harnack.csv");
  csv.row({"ratio", "perturbed_ratio", "drift", "perturbation_c2"});
  csv.cells({hs.ratio, hs.perturbed_ratio, hs.drift, hs.perturbation_c2});
  Verdict v;
  v.check = "harnack";
  v.pass = hs.ratio > 0.0 && hs.ratio <= 1.0 + 1e-12 && hs.drift <= max_drift;
  v.detail = "ratio " + fmt(hs.ratio) + ", drift " + fmt(hs.drift) +
             " (max " + fmt(max_drift) + ")";
  res.verdicts.push_back(v);
  res.artifacts.push_back(out_dir + "/harnack.csv");
}

void check_flatzoomer(const Scenario& sc, const std::string& out_dir,
                      ScenarioResult& res) {
  const Config& cfg = sc.raw;
  std::vector<double> shifts = cfg.has("flatzoomer", "shifts")
                                   ? cfg.get_list("flatzoomer", "shifts")
                                   : std::vector<double>{0, 0.5, 1, 1.5, 2};
  std::vector<double> ks = cfg.has("flatzoomer", "k")
                               ? cfg.get_list("flatzoomer", "k")
                               : std::vector<double>{0, 1};
  const double tol = cfg.get_double("flatzoomer", "fit_tol", 1e-6);

  DiscreteManifold m = build_box_manifold(sc.manifold);
  ScalarField zero = ScalarField::Zero(m.node_count());
  CsvWriter csv(out_dir + "/flatzoomer.csv");
  csv.row({"k", "shift", "sup_phi", "fitted_exponent"});
  bool all_ok = true;
  std::string detail;
  for (double kd : ks) {
    const int k = static_cast<int>(kd);
    FlatzoomerSweep sw = flatzoomer_sweep(m, zero, k, shifts);
    for (std::size_t i = 0; i < shifts.size(); ++i) {
      csv.cells({k, sw.shifts[i], sw.sup_phi[i], sw.fitted_exponent});
    }
    const double want = -(k + 2.0);
    const bool ok = std::abs(sw.fitted_exponent - want) <= tol;
    all_ok = all_ok && ok;
    if (!detail.empty()) detail += "; ";
    detail += "k=" + std::to_string(k) + " exponent " +
              fmt(sw.fitted_exponent) + " (want " + fmt(want) + ")";
  }
  Verdict v;
  v.check = "flatzoomer-sweep";
  v.pass = all_ok;
  v.detail = detail;
  res.verdicts.push_back(v);
  res.artifacts.push_back(out_dir + "/flatzoomer.csv");
}

void check_quasi(const Scenario& sc, const std::string& out_dir,
                 ScenarioResult& res) {
  const Config& cfg = sc.raw;
  const double slack = cfg.get_double("quasi", "slack", 0.0);
  DiscreteManifold m = build_box_manifold(sc.manifold);
  ScalarField zero = ScalarField::Zero(m.node_count());
  QuasiFlatzoomerData q = quasi_flatzoomer_psi(m, zero, slack, sc.seed);
  CsvWriter csv(out_dir + "/quasi_psi.csv");
  csv.row({"phi0", "phi1", "phi2", "psi", "A", "C", "H", "u1", "conv_est",
           "conv_valid", "bound_holds"});
  csv.cells({q.phi0, q.phi1, q.phi2, q.psi, q.chart_A, q.chart_C, q.big_h,
             q.u1, q.conv_est, q.conv_est_valid ? "1" : "0",
             q.bound_holds ? "1" : "0"});
  {
    std::ofstream txt(out_dir + "/quasi_psi.txt", std::ios::binary);
    txt << "quasi-flatzoomer report\n"
        << "phi0 (curvature sup):      " << fmt(q.phi0) << "\n"
        << "phi1 (christoffel bound):  " << fmt(q.phi1) << "\n"
        << "phi2 (ball threshold):     " << fmt(q.phi2) << "\n"
        << "psi = phi0 + phi1 + phi2:  " << fmt(q.psi) << "\n"
        << "chart constants: A = " << fmt(q.chart_A) << ", C = "
        << fmt(q.chart_C) << ", H = 4 n^2 A C^3 = " << fmt(q.big_h) << "\n"
        << "ball-fitting threshold u1: " << fmt(q.u1) << "\n"
        << "convexity-radius estimate: " << fmt(q.conv_est)
        << (q.conv_est_valid ? "" : " (degenerate)") << "\n"
        << "bound 1/conv <= psi:       "
        << (q.bound_holds ? "holds" : "VIOLATED") << "\n";
  }
  Verdict v;
  v.check = "quasi-psi";
  v.pass = q.bound_holds;
  v.detail = q.conv_est_valid
                 ? "1/conv " + fmt(1.0 / q.conv_est) + " <= psi " + fmt(q.psi)
                 : "convexity estimate degenerate; check skipped";
  res.verdicts.push_back(v);
  res.artifacts.push_back(out_dir + "/quasi_psi.csv");
  res.artifacts.push_back(out_dir + "/quasi_psi.txt");
}

void check_bounded_geometry(const Scenario& sc, const std::string& out_dir,
                            ScenarioResult& res) {
  const Config& cfg = sc.raw;
  const double c = cfg.get_double("bounded", "c", 4.0);
  const int k = static_cast<int>(cfg.get_int("bounded", "k", 2));
  DiscreteManifold m = build_box_manifold(sc.manifold);
  BoundedGeometryReport rep = bounded_geometry_report(m, c, k);
  CsvWriter csv(out_dir + "/bounded_geometry.csv");
  csv.row({"item", "measured", "threshold", "passes", "note"});
  for (const auto& it : rep.items) {
    csv.cells({it.name, it.measured, it.threshold, it.passes ? "1" : "0",
               it.note});
  }
  Verdict v;
  v.check = "bounded-geometry";
  v.pass = rep.all_pass();
  std::string detail = "c=" + fmt(c) + " k=" + std::to_string(k);
  for (const auto& it : rep.items) {
    if (!it.passes) detail += ", " + it.name + " FAIL";
  }
  v.detail = detail;
  res.verdicts.push_back(v);
  res.artifacts.push_back(out_dir + "/bounded_geometry.csv");
}

void check_extension(const Scenario& sc, const std::string& out_dir,
                     ScenarioResult& res) {
  const Config& cfg = sc.raw;
  const int order = static_cast<int>(cfg.get_int("extension", "order", 2));
  const int n_ext = static_cast<int>(cfg.get_int("extension", "n_ext", 3));

  DiscreteManifold m = build_box_manifold(sc.manifold);
  SeeleyScheme scheme = SeeleyScheme::make(order);
  ExtendedManifold x = extend_metric(m, scheme, n_ext);

  // restriction identity, SPD floor, round trip
  double restrict_err = 0.0;
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    const std::size_t q = x.to_extended(m, p);
    restrict_err = std::max(
        restrict_err,
        (x.manifold.metric.g[q] - m.metric.g[p]).cwiseAbs().maxCoeff());
  }
  const double r2 = cfg.get_double("extension", "r2",
                                   16.0 * m.axes[x.axis].spacing());
  HeightField hf = build_height_function(x, r2);
  DiscreteManifold back = cut_manifold(x, hf, 0.0);
  bool roundtrip = back.node_count() == m.node_count();
  double metric_err = 0.0;
  if (roundtrip) {
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      metric_err = std::max(
          metric_err,
          (back.metric.g[p] - m.metric.g[p]).cwiseAbs().maxCoeff());
    }
  }
  CsvWriter csv(out_dir + "/extension.csv");
  csv.row({"order", "n_ext", "restriction_error", "spd_floor", "roundtrip",
           "roundtrip_metric_error", "delta_bnd", "clamped"});
  csv.cells({order, n_ext, restrict_err, x.spd_floor, roundtrip ? "1" : "0",
             metric_err, hf.delta_bnd, x.clamped ? "1" : "0"});
  Verdict v;
  v.check = "extension-roundtrip";
  v.pass = restrict_err == 0.0 && x.spd_floor > 0.0 && roundtrip &&
           metric_err == 0.0 && hf.delta_bnd > 0.5;
  v.detail = "restriction " + fmt(restrict_err) + ", spd floor " +
             fmt(x.spd_floor) + ", roundtrip metric error " + fmt(metric_err);
  res.verdicts.push_back(v);
  res.artifacts.push_back(out_dir + "/extension.csv");
}

void check_sequence(const Scenario& sc, const std::string& out_dir,
                    ScenarioResult& res) {
  const Config& cfg = sc.raw;
  SequenceSpec spec;
  spec.base = sc.manifold;
  spec.family = cfg.get_string("sequence", "family", "perturbed-sequence");
  spec.amplitude = cfg.get_double("sequence", "amp", 0.1);
  spec.count = static_cast<int>(cfg.get_int("sequence", "count", 8));
  spec.mode = sc.mode;
  spec.seed = sc.seed;

  SequenceDiagnostics diag = satellite_sequence_diagnostics(spec);
  CsvWriter csv(out_dir + "/sequence.csv");
  csv.row({"index", "lambda", "distortion_to_last", "ck_distance_to_limit",
           "epsilon_isometry", "harnack", "bounds_ok"});
  for (const auto& r : diag.rows) {
    csv.cells({r.index, r.lambda, r.distortion_to_last,
               r.ck_distance_to_limit, r.epsilon_isometry, r.harnack,
               r.bounds_ok ? "1" : "0"});
  }
  Verdict v;
  v.check = "sequence-diagnostics";
  v.pass = !diag.partial && diag.lambda_cauchy_trend &&
           diag.distortion_collapses && diag.epsilon_monotone &&
           diag.bounds_all_ok && diag.sign_verdict_ok;
  std::ostringstream d;
  d << (diag.lambda_cauchy_trend ? "cauchy ok" : "cauchy FAIL") << ", "
    << (diag.distortion_collapses ? "distortion ok" : "distortion FAIL")
    << ", " << (diag.epsilon_monotone ? "epsilon ok" : "epsilon FAIL") << ", "
    << (diag.bounds_all_ok ? "bounds ok" : "bounds FAIL");
  if (diag.limiting_sign != 0) {
    d << ", limiting sign " << (diag.limiting_sign > 0 ? "+" : "-")
      << (diag.sign_verdict_ok ? " (satellite sign ok)"
                               : " (satellite sign FAIL)");
  }
  if (diag.partial) d << ", PARTIAL: " << diag.failures.size() << " failures";
  v.detail = d.str();
  res.verdicts.push_back(v);
  res.artifacts.push_back(out_dir + "/sequence.csv");
}

}  // namespace

ScenarioResult run_scenario(const Scenario& sc_in, const std::string& out_dir,
                            int resolution_override) {
  Scenario sc = sc_in;
  if (resolution_override > 0) {
    sc.manifold = with_resolution(sc.manifold, resolution_override);
  }
  std::filesystem::create_directories(out_dir);
  ScenarioResult res;
  res.name = sc.name;
  for (const std::string& check : sc.checks) {
    if (check == "identity") check_identity(sc, out_dir, res);
    else if (check == "bounds") check_bounds(sc, out_dir, res);
    else if (check == "harnack") check_harnack(sc, out_dir, res);
    else if (check == "flatzoomer-sweep") check_flatzoomer(sc, out_dir, res);
    else if (check == "quasi-psi") check_quasi(sc, out_dir, res);
    else if (check == "extension-roundtrip") check_extension(sc, out_dir, res);
    else if (check == "sequence-diagnostics") check_sequence(sc, out_dir, res);
    else if (check == "bounded-geometry") check_bounded_geometry(sc, out_dir, res);
    else throw ConfigError("unknown check: " + check, 0, "checks");
  }
  // summary
  std::ofstream sum(out_dir + "/summary.txt", std::ios::binary);
  sum << "scenario: " << sc.name << "\n";
  for (const auto& v : res.verdicts) {
    sum << (v.pass ? "PASS" : "FAIL") << "  " << v.check << ": " << v.detail
        << "\n";
  }
  sum << (res.all_pass() ? "RESULT: PASS\n" : "RESULT: FAIL\n");
  res.artifacts.push_back(out_dir + "/summary.txt");
  return res;
}

// ------------------------------------------------------------- bundled set

namespace {

struct Bundled {
  const char* name;
  const char* description;
  const char* text;
};

const Bundled kBundled[] = {
    {"flat-slab-s0",
     "Flat product slab, Steklov-type problem: the scalar-flat satellite "
     "identities hold exactly (zero eigenvalue, unit eigenfunction); "
     "envelope bounds sit at equality.",
     R"(
[scenario]
name = flat-slab-s0
s = s0
checks = identity, bounds, harnack
seed = 1

[manifold]
dim = 3
formula = flat
axis0 = 0, 1, 12, periodic
axis1 = 0, 1, 12, periodic
axis2 = 0, 1, 13, interval

[identity]
zero_tol = 1e-7
)"},
    {"flat-torus-closed",
     "Flat torus, closed conformal-Laplacian problem: zero principal "
     "eigenvalue, constant eigenfunction, satellite equals the base metric.",
     R"(
[scenario]
name = flat-torus-closed
s = closed
checks = identity, bounds, harnack, bounded-geometry
seed = 1

[manifold]
dim = 3
formula = flat
axis0 = 0, 1, 12, periodic
axis1 = 0, 1, 12, periodic
axis2 = 0, 1, 12, periodic

[identity]
zero_tol = 1e-7

[bounded]
c = 4
k = 2
)"},
    {"annulus-s1",
     "Flat annular chart with curved boundary faces, Robin-type problem: "
     "minimal-boundary satellite (boundary mean curvature driven to zero), "
     "nonzero principal eigenvalue inside the envelope bounds.",
     R"(
[scenario]
name = annulus-s1
s = s1
checks = identity, bounds, harnack
seed = 1

[manifold]
dim = 3
formula = diag-cylinder
axis0 = 1, 2, 13, interval
axis1 = 0, 6.283185307179586, 12, periodic
axis2 = 0, 6.283185307179586, 12, periodic

[identity]
two_resolution = true
factor_min = 1.5
abs_max = 0.2

[harnack]
ball_radius = 0.45
)"},
    {"bump-slab-s0",
     "Conformal-bump slab, Steklov-type problem at two resolutions: the "
     "scalar curvature of the scalar-flat satellite converges to zero at "
     "second order.",
     R"(
[scenario]
name = bump-slab-s0
s = s0
checks = identity, bounds
seed = 1

[manifold]
dim = 3
formula = conformal-bump
param.amp = 0.1
param.ripple = 0.03
axis0 = 0, 2, 16, periodic
axis1 = 0, 2, 16, periodic
axis2 = 0, 2, 17, interval

[identity]
two_resolution = true
factor_min = 2.0
abs_max = 1e-2
)"},
    {"bump-slab-s1",
     "Conformal-bump slab, Robin-type problem at two resolutions: the "
     "boundary mean curvature of the minimal-boundary satellite converges "
     "to zero.",
     R"(
[scenario]
name = bump-slab-s1
s = s1
checks = identity, bounds, harnack
seed = 1

[manifold]
dim = 3
formula = conformal-bump
param.amp = 0.1
param.ripple = 0.03
axis0 = 0, 2, 16, periodic
axis1 = 0, 2, 16, periodic
axis2 = 0, 2, 17, interval

[identity]
two_resolution = true
factor_min = 2.0
abs_max = 1e-2
)"},
    {"bump-torus-conformal",
     "Conformal bump on the torus: constant-shift flatzoomer sweep recovers "
     "the exact decay degree; quasi-flatzoomer bound against the measured "
     "convexity radius.",
     R"(
[scenario]
name = bump-torus-conformal
s = closed
checks = flatzoomer-sweep, quasi-psi
seed = 1

[manifold]
dim = 3
formula = conformal-bump-periodic
param.amp = 0.1
axis0 = 0, 1, 12, periodic
axis1 = 0, 1, 12, periodic
axis2 = 0, 1, 12, periodic

[flatzoomer]
k = 0, 1
shifts = 0, 0.5, 1, 1.5, 2
fit_tol = 1e-6
)"},
    {"quasi-psi-suite",
     "Quasi-flatzoomer bound on the flat torus: inverse convexity radius "
     "against Psi = Phi0 + Phi1 + Phi2.",
     R"(
[scenario]
name = quasi-psi-suite
s = closed
checks = quasi-psi
seed = 1

[manifold]
dim = 3
formula = flat
axis0 = 0, 1, 16, periodic
axis1 = 0, 1, 16, periodic
axis2 = 0, 1, 16, periodic
)"},
    {"extension-roundtrip",
     "Metric extension past the slab boundary (matrix log/exp with a "
     "finite-order reflection scheme), height function, and the exact "
     "extend-then-cut round trip.",
     R"(
[scenario]
name = extension-roundtrip
s = s1
checks = extension-roundtrip
seed = 1

[manifold]
dim = 3
formula = conformal-bump
param.amp = 0.1
param.ripple = 0.03
axis0 = 0, 1, 12, periodic
axis1 = 0, 1, 12, periodic
axis2 = 0, 1, 17, interval

[extension]
order = 2
n_ext = 4
)"},
    {"bump-seq-s1",
     "Decaying perturbation family over the flat slab, Robin-type "
     "satellites: eigenvalue trace is Cauchy-trending, conformal distortion "
     "to the last satellite collapses, epsilon-isometries decrease.",
     R"(
[scenario]
name = bump-seq-s1
s = s1
checks = sequence-diagnostics
seed = 1

[manifold]
dim = 3
formula = flat
axis0 = 0, 1, 10, periodic
axis1 = 0, 1, 10, periodic
axis2 = 0, 1, 11, interval

[sequence]
family = perturbed-sequence
amp = 0.2
count = 8
)"},
    {"warped-torus-sign",
     "Doubly-warped torus family with strictly negative principal "
     "eigenvalue: the closed-case satellite scalar curvature carries the "
     "sign of the limiting eigenvalue.",
     R"(
[scenario]
name = warped-torus-sign
s = closed
checks = sequence-diagnostics, bounds
seed = 1

[manifold]
dim = 3
formula = warped-torus
param.a = 0.3
axis0 = 0, 1, 12, periodic
axis1 = 0, 1, 12, periodic
axis2 = 0, 1, 12, periodic

[sequence]
family = perturbed-sequence
amp = 0.15
count = 8
)"},
    {"warped-slab-bounds",
     "Positively curved warped slab, Robin-type problem: envelope bounds, "
     "Harnack ratio and its stability under a metric perturbation.",
     R"(
[scenario]
name = warped-slab-bounds
s = s1
checks = bounds, harnack
seed = 1

[manifold]
dim = 3
formula = warped-slab
param.alpha = 1.5
axis0 = 0, 1, 12, periodic
axis1 = 0, 1, 12, periodic
axis2 = 0, 1, 13, interval

[harnack]
ball_radius = 0.3
perturbation = 0.01
max_drift = 0.10
)"},
};

}  // namespace

std::vector<std::string> list_scenarios() {
  std::vector<std::string> names;
  for (const auto& b : kBundled) names.push_back(b.name);
  std::sort(names.begin(), names.end());
  return names;
}

bool has_scenario(const std::string& name) {
  for (const auto& b : kBundled) {
    if (name == b.name) return true;
  }
  return false;
}

std::string scenario_text(const std::string& name) {
  for (const auto& b : kBundled) {
    if (name == b.name) return b.text;
  }
  throw ConfigError("unknown scenario: " + name, 0, "name");
}

std::string describe_scenario(const std::string& name) {
  for (const auto& b : kBundled) {
    if (name == b.name) return b.description;
  }
  throw ConfigError("unknown scenario: " + name, 0, "name");
}

std::string nearest_scenario(const std::string& name) {
  // smallest edit distance over the bundled names
  auto dist = [](const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      cur[0] = i;
      for (std::size_t j = 1; j <= b.size(); ++j) {
        const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      }
      std::swap(prev, cur);
    }
    return prev[b.size()];
  };
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& b : kBundled) {
    const std::size_t d = dist(name, b.name);
    if (d < best_d) {
      best_d = d;
      best = b.name;
    }
  }
  return best;
}

int run_scenario_file(const std::string& name_or_path,
                      const std::string& out_dir, int resolution_override,
                      long seed_override, std::string* log) {
  std::ostringstream out;
  int code = kExitPass;
  try {
    Config cfg = has_scenario(name_or_path)
                     ? Config::parse(scenario_text(name_or_path))
                     : Config::parse_file(name_or_path);
    Scenario sc = Scenario::from_config(cfg);
    if (seed_override >= 0) sc.seed = static_cast<unsigned>(seed_override);
    const std::string dir =
        out_dir.empty() ? ("out/" + sc.name) : (out_dir + "/" + sc.name);
    ScenarioResult res = run_scenario(sc, dir, resolution_override);
    for (const auto& v : res.verdicts) {
      out << (v.pass ? "PASS" : "FAIL") << "  " << v.check << ": " << v.detail
          << "\n";
    }
    out << "artifacts under " << dir << "\n";
    if (!res.all_pass()) {
      code = kExitVerdictFailure;
      out << "result: FAIL\n";
    } else {
      out << "result: PASS\n";
    }
  } catch (const ConfigError& e) {
    out << "config error: " << e.what() << "\n";
    code = kExitConfigError;
  } catch (const SolverError& e) {
    out << "solver error: " << e.what() << "\n";
    if (!e.residual_history.empty()) {
      out << "residual history:";
      for (double r : e.residual_history) out << " " << csv_number(r);
      out << "\n";
    }
    code = kExitSolverFailure;
  } catch (const ConstructionError& e) {
    out << "validation error: " << e.what() << "\n";
    code = kExitConfigError;
  }
  if (log) *log = out.str();
  return code;
}

}  // namespace satlab
