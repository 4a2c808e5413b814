#pragma once

#include "imp/common.hpp"
#include "imp/scm.hpp"

#include <span>
#include <string>
#include <vector>

namespace imp {

struct OlsFit {
  Vector coef;
  double rss = 0.0;
  int rank = 0;
};

// Minimum-norm least squares without intercept, via a rank-revealing
// complete orthogonal decomposition. Rank-deficient designs resolve to the
// minimum-norm solution instead of failing.
OlsFit ols(const Matrix& design, const Vector& target);

// Candidate feature identity: predict predictor `target` from the predictors
// in `given`. Indices are 0-based; `given` is kept sorted and never contains
// `target`.
struct FeatureIndex {
  int target = 0;
  std::vector<int> given;

  bool operator==(const FeatureIndex& other) const = default;
};

// Human-readable "(k,{i,j})" with 1-based indices, matching the column names
// x1..xd used in files.
std::string to_string(const FeatureIndex& f);

// Per-environment fitted values of one feature regression, concatenated in
// the pooled row order of the input datasets.
struct FeatureColumn {
  FeatureIndex feature;
  Vector values;
};

FeatureColumn env_feature(std::span<const EnvDataset> datasets, int target,
                          const std::vector<int>& given);

// Exact conditional-on-environment regression coefficients from oracle
// moments: Cov(X_S, X_S)^-1 Cov(X_S, target).
Vector population_ols_response(const PopulationMoments& moments,
                               const std::vector<int>& given);
Vector population_ols_predictor(const PopulationMoments& moments, int target,
                                const std::vector<int>& given);

// Linear-interpolation quantile on the sorted values, inclusive endpoints:
// quantile(v, 0) is the minimum, quantile(v, 1) the maximum. This convention
// is part of the model-file contract; the selection fraction is interpreted
// through it.
double quantile(std::vector<double> values, double fraction);

}  // namespace imp
