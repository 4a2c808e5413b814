#pragma once

#include "imp/estimators.hpp"
#include "imp/scm.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace imp {

// Single least squares fit of the pooled response on the pooled predictors,
// environment labels ignored.
Vector pooled_ols(std::span<const EnvDataset> train);

// Anchor regression with environment one-hot anchors: minimizes
// ||(I - P_A)(y - X b)||^2 + gamma ||P_A (y - X b)||^2, solved by applying
// W = (I - P_A) + sqrt(gamma) P_A to both sides. P_A replaces each row by its
// environment mean, so a single environment degenerates to the global mean.
Vector anchor_fit(std::span<const EnvDataset> train, double gamma);

std::array<double, 9> anchor_gamma_grid();

struct AnchorFit {
  double gamma = 1.0;
  Vector coef;
  std::vector<std::pair<double, double>> cv_table;  // grid order
};

// Five-fold cross-validation over the gamma grid. Folds are stratified by
// environment from a seeded shuffle; validation error is the squared
// prediction error on raw X. Ties resolve to the smaller gamma.
AnchorFit anchor_cv(std::span<const EnvDataset> train, std::uint64_t seed = 0);

}  // namespace imp
