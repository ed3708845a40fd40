#pragma once

#include "satlab/satellite.hpp"

// Synthetic converging manifold sequences and their satellite diagnostics:
// conformal distortion, C^k metric distances, epsilon-isometry measurements
// and the finite-prefix convergence verdicts.

namespace satlab {

struct SequenceSpec {
  ManifoldSpec base;          // the limit manifold g_infinity
  std::string family = "perturbed-sequence";
  double amplitude = 0.1;     // delta_i = (amplitude / i) * family bump
  int count = 8;              // indices 1..count
  SpectralMode mode = SpectralMode::Robin;
  unsigned seed = 1;
};

// g_i = g_infing + delta_i on a shared chart; checks SPD and strictly
// decreasing perturbation amplitude.
std::vector<DiscreteManifold> generate_sequence(const SequenceSpec& spec);

// sup over the region of (lambda_max - lambda_min) of the g1-relative
// eigenvalues of g2; zero iff g2 is pointwise conformal to g1 on the region.
double conformal_distortion(const MetricField& g1, const MetricField& g2,
                            const std::vector<std::size_t>& region);

// max over l <= k of sup |grad^l_{g1} (g2 - g1)|_{g1} over the region.
double ck_distance(const DiscreteManifold& m1, const MetricField& g2, int k,
                   const std::vector<std::size_t>& region);

struct EpsilonIsometry {
  double epsilon = 0.0;        // max distance distortion over sampled pairs
  double surjectivity_gap = 0.0;  // max distance of target nodes to the image
  int pairs_sampled = 0;
};

// Measures ||phi^* d2 - d1||_inf over seeded random node pairs for the given
// node correspondence (phi maps m1 nodes to m2 nodes), plus a surjectivity
// slack over a sampled target ball.
EpsilonIsometry epsilon_isometry_check(const DiscreteManifold& m1,
                                       const DiscreteManifold& m2,
                                       const std::vector<std::size_t>& phi,
                                       int sample_pairs, unsigned seed);

struct SequenceRow {
  int index = 0;
  double lambda = 0.0;
  double distortion_to_last = 0.0;
  double ck_distance_to_limit = 0.0;
  double epsilon_isometry = 0.0;
  double harnack = 0.0;
  bool bounds_ok = false;
};

struct SequenceDiagnostics {
  std::vector<SequenceRow> rows;
  bool lambda_cauchy_trend = false;   // successive gaps decreasing
  bool distortion_collapses = false;  // final < 10% of initial
  bool epsilon_monotone = false;      // decreasing with at most one violation
  bool bounds_all_ok = false;
  int limiting_sign = 0;              // sign(lambda_N) if |.| > tol else 0
  bool sign_verdict_ok = true;        // closed case: sign(R~_N) matches
  bool partial = false;               // some index failed to solve
  std::vector<std::string> failures;
};

SequenceDiagnostics satellite_sequence_diagnostics(const SequenceSpec& spec);

}  // namespace satlab
