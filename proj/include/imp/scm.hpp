#pragma once

#include "imp/common.hpp"

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace imp {

// Mixture-of-linear-SCMs model over d predictors and one response. For each
// environment label u the system is
//   X = pred_coef * X + child_coef * Y + noise_x
//   Y = (invariant_coef + env_coef(u))' * X + noise_y
// with jointly independent zero-mean Gaussian noise. Environment labels are
// opaque strings; no arithmetic is ever done on them.
struct ScmSpec {
  int d = 0;
  Matrix pred_coef;      // d x d, entry (i, j) = effect of predictor j on predictor i
  Vector child_coef;     // d, effect of the response on each predictor
  Vector invariant_coef; // d, response coefficients shared by all environments
  std::vector<std::pair<std::string, Vector>> env_coef;  // per-environment response coefficients
  Vector pred_noise_var; // d
  double resp_noise_var = 1.0;

  std::size_t env_count() const { return env_coef.size(); }
  const Vector* find_env(const std::string& label) const;

  // Coordinates j with env_coef_j(u) != 0 for at least one u.
  std::vector<int> intervened_support() const;
  std::vector<int> response_parents() const;
  std::vector<int> response_children() const;
};

// One environment's worth of i.i.d. samples. The response column is absent
// for test data.
struct EnvDataset {
  std::string env_label;
  Matrix x;  // n x d
  std::optional<Vector> y;

  Eigen::Index rows() const { return x.rows(); }
};

// Exact second moments of (X, Y) conditional on one environment; the closed
// form oracle behind all sample-based estimates.
struct PopulationMoments {
  std::string env_label;
  Matrix cov_xx;  // d x d
  Vector cov_xy;  // d
  double var_y = 0.0;
};

enum class SpecViolation {
  shape_mismatch,
  nonpositive_noise,
  acyclicity_violated,
  support_overlap,
  alpha_degenerate,
};

const char* violation_name(SpecViolation code);

struct SpecIssue {
  SpecViolation code;
  std::string detail;
};

// Checks every ScmSpec invariant and reports all violations; an empty result
// means the spec is a well-posed mixture of linear SCMs.
std::vector<SpecIssue> validate(const ScmSpec& spec);

// Subset of validate() that sampling and moment computation genuinely need:
// shapes, positive noise, acyclicity. Throws errc::invalid_spec on failure.
// Degenerate env_coef maps are allowed here so that unintervened test systems
// remain usable.
void require_structural(const ScmSpec& spec);

// Topological order over the d+1 nodes (0..d-1 predictors, d the response)
// of the union coefficient graph, or nullopt if some environment has a cycle.
std::optional<std::vector<int>> topological_order(const ScmSpec& spec);

// The three-predictor example system: Y = a(u) X1 + X2 + N_Y, X3 = Y + X1 + N3,
// with X1, X2 root predictors and unit noise everywhere.
ScmSpec toy_scm(const std::vector<std::pair<std::string, double>>& slope_per_env);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct GenConfig {
  double edge_prob = 0.5;
  Interval coef_magnitude{0.5, 1.5};  // invariant coefficients, random sign
  Interval alpha_range{-2.0, 2.0};
  int max_retries = 1000;
};

// Random acyclic spec: random topological order over (X_1..X_d, Y), each
// forward edge kept with probability edge_prob, redrawn until the response
// has at least one parent and one child. A uniformly chosen nonempty subset
// of the response's parents is intervened (env_coef drawn i.i.d. from
// alpha_range per environment); the rest carry invariant coefficients.
ScmSpec random_scm(int d, const std::vector<std::string>& env_labels,
                   const GenConfig& config, std::mt19937_64& rng);

// Same graph, coefficients and noise as spec; only the environment label set
// changes and env_coef is redrawn from alpha_range on exactly the coordinates
// that were intervened in training.
ScmSpec derive_test_spec(const ScmSpec& spec, const std::vector<std::string>& test_labels,
                         const Interval& alpha_range, std::mt19937_64& rng);

// n i.i.d. rows from the environment's linear system, solved by forward
// substitution in topological order. The response column is always populated.
EnvDataset sample(const ScmSpec& spec, const std::string& env_label, int n,
                  std::mt19937_64& rng);

// Closed-form joint covariance (I - A)^-1 Sigma (I - A)^-T sliced into the
// predictor block, the cross-covariance and the response variance.
PopulationMoments population_moments(const ScmSpec& spec, const std::string& env_label);

}  // namespace imp
