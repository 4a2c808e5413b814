#pragma once

#include "imp/estimators.hpp"
#include "imp/scm.hpp"

#include <optional>
#include <span>
#include <vector>

namespace imp {

// One candidate's pooled augmented regression. beta holds the feature
// coefficient first, then the d plain predictor coefficients.
struct CandidateFit {
  FeatureIndex feature;
  Vector beta;  // size d + 1
  double train_rss = 0.0;
};

struct ImpModel {
  int d = 0;
  double alpha_quantile = 0.05;
  double epsilon = 0.0;
  std::vector<CandidateFit> candidates;  // every enumerated candidate; empty after load
  std::vector<CandidateFit> selected;    // candidates with train_rss <= epsilon
};

// All (target, given) pairs with a nonempty conditioning set, in
// lexicographic order: target ascending, then the sorted conditioning tuples
// compared elementwise. Without a size cap the count is d * (2^(d-1) - 1),
// so above d = 16 a cap is required.
std::vector<FeatureIndex> enumerate_features(int d,
                                             std::optional<int> max_subset_size = {});

// Pooled ordinary least squares of the response on [feature column, X].
CandidateFit fit_candidate(std::span<const EnvDataset> train, const FeatureIndex& feature);

// Fits every candidate, sets epsilon to the alpha_quantile quantile of all
// training residual norms, and marks the candidates at or below it.
ImpModel train(std::span<const EnvDataset> train, double alpha_quantile = 0.05,
               std::optional<int> max_subset_size = {});

// Recomputes each selected feature column on the test environments, applies
// the stored coefficients and averages over the selected candidates. Rows
// align with the pooled order of `test`.
Vector predict(const ImpModel& model, std::span<const EnvDataset> test);

// Mean residual sum of squares, (1/n) * sum (pred - truth)^2.
double evaluate_rss(const Vector& pred, const Vector& truth);

}  // namespace imp
