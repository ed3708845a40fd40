#include "satlab/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace satlab {

std::vector<DiscreteManifold> generate_sequence(const SequenceSpec& spec) {
  if (spec.count < 2) {
    throw std::invalid_argument("sequence needs at least 2 indices");
  }
  DiscreteManifold base = build_box_manifold(spec.base);

  std::vector<DiscreteManifold> seq;
  seq.reserve(spec.count);
  double prev_amp = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= spec.count; ++i) {
    const double amp = spec.amplitude / i;
    // zero amplitude is the constant sequence; otherwise strictly decreasing
    if (spec.amplitude != 0.0 && !(amp < prev_amp)) {
      throw ConstructionError("perturbation amplitude must strictly decrease");
    }
    prev_amp = amp;
    ManifoldSpec pert = spec.base;
    pert.formula = spec.family;
    pert.params["amp"] = amp;
    std::vector<Eigen::MatrixXd> g(base.node_count());
    for (std::size_t p = 0; p < base.node_count(); ++p) {
      Eigen::MatrixXd delta =
          metric_formula(spec.family, pert.params, base.coords(p), base.axes) -
          Eigen::MatrixXd::Identity(base.dim, base.dim);
      g[p] = base.metric.g[p] + delta;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g[p]);
      if (es.eigenvalues().minCoeff() <= 0.0) {
        throw ConstructionError("sequence metric not SPD at index " +
                                std::to_string(i));
      }
    }
    seq.push_back(rebuild_with_metric(base, std::move(g)));
  }
  return seq;
}

double conformal_distortion(const MetricField& g1, const MetricField& g2,
                            const std::vector<std::size_t>& region) {
  double sup = 0.0;
  for (std::size_t p : region) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(g2.g[p],
                                                                  g1.g[p]);
    const auto& ev = ges.eigenvalues();
    sup = std::max(sup, ev.maxCoeff() - ev.minCoeff());
  }
  return sup;
}

double ck_distance(const DiscreteManifold& m1, const MetricField& g2, int k,
                   const std::vector<std::size_t>& region) {
  const int n = m1.dim;
  TensorField diff(n, 2, m1.node_count());
  for (std::size_t p = 0; p < m1.node_count(); ++p) {
    const Eigen::MatrixXd d = g2.g[p] - m1.metric.g[p];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        diff.at(p, static_cast<std::size_t>(i * n + j)) = d(i, j);
      }
    }
  }
  double dist = 0.0;
  TensorField t = diff;
  for (int l = 0; l <= k; ++l) {
    ScalarField nrm = tensor_norm(m1, t);
    for (std::size_t p : region) dist = std::max(dist, nrm[p]);
    if (l < k) t = covariant_derivative(m1, t, 1);
  }
  return dist;
}

EpsilonIsometry epsilon_isometry_check(const DiscreteManifold& m1,
                                       const DiscreteManifold& m2,
                                       const std::vector<std::size_t>& phi,
                                       int sample_pairs, unsigned seed) {
  if (phi.size() != m1.node_count()) {
    throw std::invalid_argument("correspondence must cover all nodes");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, m1.node_count() - 1);

  // draw distinct source nodes, reuse distance fields
  const int n_sources = std::max(2, static_cast<int>(std::sqrt(sample_pairs)));
  EpsilonIsometry out;
  double eps = 0.0;
  for (int si = 0; si < n_sources; ++si) {
    const std::size_t a = pick(rng);
    auto d1 = distance_field(m1, a);
    auto d2 = distance_field(m2, phi[a]);
    for (int t = 0; t < n_sources; ++t) {
      const std::size_t b = pick(rng);
      const double da = d1[b];
      const double db = d2[phi[b]];
      if (std::isfinite(da) && std::isfinite(db)) {
        eps = std::max(eps, std::abs(db - da));
      }
      ++out.pairs_sampled;
    }
  }
  out.epsilon = eps;

  // surjectivity slack: nodes of m2 must be near the image of phi
  std::vector<bool> in_image(m2.node_count(), false);
  for (std::size_t p : phi) in_image[p] = true;
  std::vector<std::size_t> image_nodes;
  for (std::size_t p = 0; p < m2.node_count(); ++p) {
    if (in_image[p]) image_nodes.push_back(p);
  }
  auto dimg = distance_field(m2, image_nodes);
  double gap = 0.0;
  for (int t = 0; t < 4 * n_sources; ++t) {
    const std::size_t p = pick(rng) % m2.node_count();
    if (std::isfinite(dimg[p])) gap = std::max(gap, dimg[p]);
  }
  out.surjectivity_gap = gap;
  return out;
}

SequenceDiagnostics satellite_sequence_diagnostics(const SequenceSpec& spec) {
  SequenceDiagnostics diag;
  auto seq = generate_sequence(spec);
  const int big_n = static_cast<int>(seq.size());

  std::vector<SatelliteManifold> sats;
  sats.reserve(big_n);
  for (int i = 0; i < big_n; ++i) {
    try {
      sats.push_back(make_satellite(seq[i], spec.mode));
    } catch (const std::exception& e) {
      diag.partial = true;
      diag.failures.push_back("index " + std::to_string(i + 1) + ": " +
                              e.what());
      sats.emplace_back();  // placeholder
    }
  }

  // fixed ball around the basepoint on the shared chart
  const DiscreteManifold& m0 = seq.front();
  double extent = 0.0;
  for (const auto& ax : m0.axes) extent = std::max(extent, ax.hi - ax.lo);
  std::vector<std::size_t> ball = metric_ball(m0, m0.basepoint, 0.3 * extent);

  const SatelliteManifold& last = sats.back();
  std::vector<std::size_t> identity(m0.node_count());
  for (std::size_t p = 0; p < identity.size(); ++p) identity[p] = p;

  for (int i = 0; i < big_n; ++i) {
    SequenceRow row;
    row.index = i + 1;
    if (sats[i].base == nullptr) {
      diag.rows.push_back(row);
      continue;
    }
    row.lambda = sats[i].solution.lambda;
    row.distortion_to_last = conformal_distortion(
        sats[i].manifold.metric, last.manifold.metric, ball);
    row.ck_distance_to_limit =
        ck_distance(seq[i], seq.back().metric, 2, identity);
    row.epsilon_isometry =
        epsilon_isometry_check(sats[i].manifold, last.manifold, identity, 64,
                               spec.seed)
            .epsilon;
    row.harnack = harnack_ratio(sats[i].solution.u, ball);
    row.bounds_ok = eigen_bounds_check(seq[i], sats[i].solution).passes;
    diag.rows.push_back(row);
  }

  // verdicts
  if (!diag.partial) {
    diag.bounds_all_ok = true;
    for (const auto& r : diag.rows) diag.bounds_all_ok &= r.bounds_ok;

    // lambda Cauchy trend: |l_{2k} - l_k| decreasing over available doublings
    diag.lambda_cauchy_trend = true;
    std::vector<double> gaps;
    for (int k = 1; 2 * k <= big_n; k *= 2) {
      gaps.push_back(
          std::abs(diag.rows[2 * k - 1].lambda - diag.rows[k - 1].lambda));
    }
    for (std::size_t i = 1; i < gaps.size(); ++i) {
      if (!(gaps[i] < gaps[i - 1] + 1e-15)) diag.lambda_cauchy_trend = false;
    }

    const double d_first = diag.rows.front().distortion_to_last;
    const double d_last_nz =
        big_n >= 2 ? diag.rows[big_n - 2].distortion_to_last : 0.0;
    diag.distortion_collapses = d_last_nz < 0.1 * d_first;

    int violations = 0;
    for (int i = 1; i + 1 < big_n; ++i) {  // last index compares to itself
      if (diag.rows[i].epsilon_isometry >
          diag.rows[i - 1].epsilon_isometry + 1e-15) {
        ++violations;
      }
    }
    diag.epsilon_monotone = violations <= 1;

    const double lam_n = diag.rows.back().lambda;
    const double tol = 1e-8;
    diag.limiting_sign = std::abs(lam_n) > tol ? (lam_n > 0 ? 1 : -1) : 0;
    if (spec.mode == SpectralMode::Closed && diag.limiting_sign != 0) {
      IdentityReport rep = verify_identities(sats.back());
      diag.sign_verdict_ok = rep.sign_law_ok;
    }
  }
  return diag;
}

}  // namespace satlab
