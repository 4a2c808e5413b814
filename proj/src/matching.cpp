#include "imp/matching.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace imp {

namespace {

// Subsets of {first..d-1}\{target} extended from `prefix`, emitted in tuple
// lexicographic order: (1) < (1,2) < (1,2,3) < (1,3) < (2) < ...
void extend_subsets(int d, int target, int first, std::vector<int>& prefix,
                    std::optional<int> cap, std::vector<FeatureIndex>& out) {
  for (int j = first; j < d; ++j) {
    if (j == target) continue;
    prefix.push_back(j);
    out.push_back(FeatureIndex{target, prefix});
    if (!cap || static_cast<int>(prefix.size()) < *cap) {
      extend_subsets(d, target, j + 1, prefix, cap, out);
    }
    prefix.pop_back();
  }
}

Vector pooled_response(std::span<const EnvDataset> datasets) {
  Eigen::Index total = 0;
  for (const EnvDataset& env : datasets) {
    if (!env.y) {
      fail(errc::invalid_argument,
           "environment " + env.env_label + " carries no response column");
    }
    total += env.rows();
  }
  Vector y(total);
  Eigen::Index offset = 0;
  for (const EnvDataset& env : datasets) {
    y.segment(offset, env.rows()) = *env.y;
    offset += env.rows();
  }
  return y;
}

Matrix pooled_predictors(std::span<const EnvDataset> datasets) {
  const Eigen::Index d = datasets.front().x.cols();
  Eigen::Index total = 0;
  for (const EnvDataset& env : datasets) {
    if (env.x.cols() != d) {
      fail(errc::length_mismatch, "environments disagree on predictor count");
    }
    total += env.rows();
  }
  Matrix x(total, d);
  Eigen::Index offset = 0;
  for (const EnvDataset& env : datasets) {
    x.middleRows(offset, env.rows()) = env.x;
    offset += env.rows();
  }
  return x;
}

}  // namespace

std::vector<FeatureIndex> enumerate_features(int d, std::optional<int> max_subset_size) {
  if (d < 2) {
    fail(errc::invalid_argument, "feature enumeration requires at least two predictors");
  }
  if (max_subset_size && *max_subset_size < 1) {
    fail(errc::invalid_argument, "max_subset_size must be positive");
  }
  if (!max_subset_size && d > 16) {
    fail(errc::invalid_argument,
         "unbounded enumeration above 16 predictors; pass max_subset_size");
  }
  std::vector<FeatureIndex> out;
  std::vector<int> prefix;
  for (int target = 0; target < d; ++target) {
    extend_subsets(d, target, 0, prefix, max_subset_size, out);
  }
  return out;
}

CandidateFit fit_candidate(std::span<const EnvDataset> train, const FeatureIndex& feature) {
  if (train.empty()) {
    fail(errc::empty_input, "fit_candidate requires at least one environment");
  }
  const FeatureColumn column = env_feature(train, feature.target, feature.given);
  const Matrix x = pooled_predictors(train);
  const Vector y = pooled_response(train);
  const Eigen::Index d = x.cols();
  if (x.rows() < d + 2) {
    fail(errc::insufficient_samples, "pooled training size must be at least d + 2");
  }

  Matrix design(x.rows(), d + 1);
  design.col(0) = column.values;
  design.rightCols(d) = x;

  const OlsFit fit = ols(design, y);
  return CandidateFit{column.feature, fit.coef, fit.rss};
}

ImpModel train(std::span<const EnvDataset> train_data, double alpha_quantile,
               std::optional<int> max_subset_size) {
  if (train_data.empty()) {
    fail(errc::empty_input, "train requires at least one environment");
  }
  if (!(alpha_quantile >= 0.0 && alpha_quantile <= 1.0)) {
    fail(errc::invalid_argument, "alpha_quantile must lie in [0, 1]");
  }
  std::set<std::string> labels;
  for (const EnvDataset& env : train_data) labels.insert(env.env_label);
  if (labels.size() < 2) {
    fail(errc::no_environment_variation,
         "training requires at least two distinct environment labels");
  }

  ImpModel model;
  model.d = static_cast<int>(train_data.front().x.cols());
  model.alpha_quantile = alpha_quantile;

  const std::vector<FeatureIndex> features = enumerate_features(model.d, max_subset_size);
  model.candidates.resize(features.size());
  parallel_for(features.size(), [&](std::size_t i) {
    model.candidates[i] = fit_candidate(train_data, features[i]);
  });

  std::vector<double> rss;
  rss.reserve(model.candidates.size());
  for (const CandidateFit& c : model.candidates) rss.push_back(c.train_rss);
  model.epsilon = quantile(rss, alpha_quantile);
  for (const CandidateFit& c : model.candidates) {
    if (c.train_rss <= model.epsilon) model.selected.push_back(c);
  }
  return model;
}

Vector predict(const ImpModel& model, std::span<const EnvDataset> test) {
  if (model.selected.empty()) {
    fail(errc::empty_selection, "model holds no selected candidates");
  }
  if (test.empty()) {
    fail(errc::empty_input, "predict requires at least one environment");
  }
  const Matrix x = pooled_predictors(test);
  if (x.cols() != model.d) {
    fail(errc::length_mismatch, "test predictor count differs from the trained model");
  }

  std::vector<Vector> per_candidate(model.selected.size());
  parallel_for(model.selected.size(), [&](std::size_t i) {
    const CandidateFit& c = model.selected[i];
    const FeatureColumn column = env_feature(test, c.feature.target, c.feature.given);
    per_candidate[i] = c.beta(0) * column.values + x * c.beta.tail(model.d);
  });

  Vector mean = Vector::Zero(x.rows());
  for (const Vector& pred : per_candidate) mean += pred;
  mean /= static_cast<double>(per_candidate.size());
  return mean;
}

double evaluate_rss(const Vector& pred, const Vector& truth) {
  if (pred.size() != truth.size()) {
    fail(errc::length_mismatch, "prediction and truth lengths differ");
  }
  if (pred.size() == 0) {
    fail(errc::empty_input, "evaluate_rss of empty vectors");
  }
  return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

}  // namespace imp
