#pragma once

#include "imp/estimators.hpp"
#include "imp/matching.hpp"
#include "imp/scm.hpp"

#include <optional>
#include <span>
#include <vector>

namespace imp {

// Coefficients of E[X_target | X_given; u] embedded into a d-vector, zero off
// the conditioning set.
Vector population_feature_coef(const PopulationMoments& moments, int target,
                               const std::vector<int>& given);

// Coefficients of E[Y | X; u] on the full predictor set.
Vector population_response_coef(const PopulationMoments& moments);

// Exact minimum of E[(Y - b' X)^2] over b within one environment.
double population_lmmse_mse(const PopulationMoments& moments);

// Environment-weighted average of the per-environment minima; the benchmark
// every augmented regression is measured against. Empty weights mean uniform.
double population_pooled_lmmse_mse(std::span<const PopulationMoments> moments,
                                   std::span<const double> weights = {});

struct PopulationCandidateFit {
  FeatureIndex feature;
  Vector beta;  // size d + 1, feature coefficient first
  double mse = 0.0;
};

// Population analogue of fit_candidate: the mixture regression of Y on
// [feature, X] assembled from exact per-environment moments, solved in
// minimum-norm form. mse is the achieved mixture mean squared error.
PopulationCandidateFit population_candidate_fit(std::span<const PopulationMoments> moments,
                                                const FeatureIndex& feature,
                                                std::span<const double> weights = {});

// Least squares fit of per-environment coefficient vectors t(u) to the form
// t(u) = lambda * alpha(u) + eta. residual is the largest absolute
// discrepancy of the fitted form; it vanishes exactly when the decomposition
// holds in every environment.
struct InvariantDecomposition {
  double lambda = 0.0;
  Vector eta;
  double residual = 0.0;
};

InvariantDecomposition decompose_on_alpha(std::span<const Vector> coefs,
                                          std::span<const Vector> alpha);

// Candidates whose index structure meets the sufficient conditions: the
// target is unintervened and every intervened coordinate lies in the
// conditioning set. The nonzero-lambda condition is left to the caller.
std::vector<FeatureIndex> theorem_valid_pairs(const ScmSpec& spec,
                                              std::optional<int> max_subset_size = {});

}  // namespace imp
