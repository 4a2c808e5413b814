#include "imp/population.hpp"

#include <algorithm>
#include <cmath>

namespace imp {

namespace {

std::vector<double> resolve_weights(std::size_t count, std::span<const double> weights) {
  if (count == 0) {
    fail(errc::empty_input, "at least one environment is required");
  }
  if (weights.empty()) {
    return std::vector<double>(count, 1.0 / static_cast<double>(count));
  }
  if (weights.size() != count) {
    fail(errc::length_mismatch, "one weight per environment is required");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      fail(errc::invalid_argument, "environment weights must be nonnegative");
    }
    total += w;
  }
  if (total <= 0.0) {
    fail(errc::invalid_argument, "environment weights must not all vanish");
  }
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w /= total;
  return out;
}

}  // namespace

Vector population_feature_coef(const PopulationMoments& moments, int target,
                               const std::vector<int>& given) {
  const Vector coef = population_ols_predictor(moments, target, given);
  Vector embedded = Vector::Zero(moments.cov_xx.rows());
  for (std::size_t i = 0; i < given.size(); ++i) {
    embedded(given[i]) = coef(static_cast<Eigen::Index>(i));
  }
  return embedded;
}

Vector population_response_coef(const PopulationMoments& moments) {
  std::vector<int> all(static_cast<std::size_t>(moments.cov_xx.rows()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
  return population_ols_response(moments, all);
}

double population_lmmse_mse(const PopulationMoments& moments) {
  const Vector coef = population_response_coef(moments);
  return moments.var_y - moments.cov_xy.dot(coef);
}

double population_pooled_lmmse_mse(std::span<const PopulationMoments> moments,
                                   std::span<const double> weights) {
  const std::vector<double> w = resolve_weights(moments.size(), weights);
  double out = 0.0;
  for (std::size_t i = 0; i < moments.size(); ++i) {
    out += w[i] * population_lmmse_mse(moments[i]);
  }
  return out;
}

PopulationCandidateFit population_candidate_fit(std::span<const PopulationMoments> moments,
                                                const FeatureIndex& feature,
                                                std::span<const double> weights) {
  const std::vector<double> w = resolve_weights(moments.size(), weights);
  const Eigen::Index d = moments.front().cov_xx.rows();

  // Gram matrix and cross moments of the augmented vector (phi, X) under the
  // environment mixture, with phi = theta_f(u)' X inside environment u.
  Matrix gram = Matrix::Zero(d + 1, d + 1);
  Vector cross = Vector::Zero(d + 1);
  double var_y = 0.0;
  for (std::size_t i = 0; i < moments.size(); ++i) {
    const PopulationMoments& m = moments[i];
    if (m.cov_xx.rows() != d) {
      fail(errc::length_mismatch, "environments disagree on predictor count");
    }
    const Vector theta = population_feature_coef(m, feature.target, feature.given);
    const Vector sigma_theta = m.cov_xx * theta;
    gram(0, 0) += w[i] * theta.dot(sigma_theta);
    gram.col(0).tail(d) += w[i] * sigma_theta;
    gram.bottomRightCorner(d, d) += w[i] * m.cov_xx;
    cross(0) += w[i] * theta.dot(m.cov_xy);
    cross.tail(d) += w[i] * m.cov_xy;
    var_y += w[i] * m.var_y;
  }
  gram.row(0).tail(d) = gram.col(0).tail(d).transpose();

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(gram);
  PopulationCandidateFit fit;
  fit.feature = feature;
  fit.beta = cod.solve(cross);
  fit.mse = var_y - 2.0 * fit.beta.dot(cross) + fit.beta.dot(gram * fit.beta);
  return fit;
}

InvariantDecomposition decompose_on_alpha(std::span<const Vector> coefs,
                                          std::span<const Vector> alpha) {
  if (coefs.empty()) {
    fail(errc::empty_input, "decomposition needs at least one environment");
  }
  if (coefs.size() != alpha.size()) {
    fail(errc::length_mismatch, "one alpha vector per coefficient vector is required");
  }
  const Eigen::Index d = coefs.front().size();
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    if (coefs[i].size() != d || alpha[i].size() != d) {
      fail(errc::length_mismatch, "coefficient and alpha vectors must share one dimension");
    }
  }

  // Stacked system [alpha(u) | I] (lambda, eta)' = t(u) over environments.
  const Eigen::Index rows = static_cast<Eigen::Index>(coefs.size()) * d;
  Matrix design = Matrix::Zero(rows, d + 1);
  Vector target(rows);
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    const Eigen::Index offset = static_cast<Eigen::Index>(i) * d;
    design.col(0).segment(offset, d) = alpha[i];
    design.block(offset, 1, d, d).setIdentity();
    target.segment(offset, d) = coefs[i];
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  const Vector solution = cod.solve(target);
  InvariantDecomposition out;
  out.lambda = solution(0);
  out.eta = solution.tail(d);
  out.residual = (design * solution - target).cwiseAbs().maxCoeff();
  return out;
}

std::vector<FeatureIndex> theorem_valid_pairs(const ScmSpec& spec,
                                              std::optional<int> max_subset_size) {
  const std::vector<int> support = spec.intervened_support();
  std::vector<FeatureIndex> out;
  for (FeatureIndex& f : enumerate_features(spec.d, max_subset_size)) {
    if (std::binary_search(support.begin(), support.end(), f.target)) continue;
    const bool covered = std::includes(f.given.begin(), f.given.end(),
                                       support.begin(), support.end());
    if (covered) out.push_back(std::move(f));
  }
  return out;
}

}  // namespace imp
