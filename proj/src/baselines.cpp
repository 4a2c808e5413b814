#include "imp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace imp {

namespace {

constexpr std::uint64_t kFoldStream = 0x0af1;

struct Pooled {
  Matrix x;
  Vector y;
};

Pooled pool(std::span<const EnvDataset> datasets) {
  if (datasets.empty()) {
    fail(errc::empty_input, "at least one environment is required");
  }
  const Eigen::Index d = datasets.front().x.cols();
  Eigen::Index total = 0;
  for (const EnvDataset& env : datasets) {
    if (env.x.cols() != d) {
      fail(errc::length_mismatch, "environments disagree on predictor count");
    }
    if (!env.y) {
      fail(errc::invalid_argument,
           "environment " + env.env_label + " carries no response column");
    }
    total += env.rows();
  }
  Pooled out{Matrix(total, d), Vector(total)};
  Eigen::Index offset = 0;
  for (const EnvDataset& env : datasets) {
    out.x.middleRows(offset, env.rows()) = env.x;
    out.y.segment(offset, env.rows()) = *env.y;
    offset += env.rows();
  }
  return out;
}

// W z per environment block: z - mean + sqrt(gamma) * mean, with the mean
// taken inside the block.
void apply_anchor_transform(Matrix& x, Vector& y,
                            std::span<const Eigen::Index> block_sizes, double gamma) {
  const double scale = std::sqrt(gamma);
  Eigen::Index offset = 0;
  for (Eigen::Index rows : block_sizes) {
    auto xb = x.middleRows(offset, rows);
    auto yb = y.segment(offset, rows);
    const Eigen::RowVectorXd x_mean = xb.colwise().mean();
    const double y_mean = yb.mean();
    xb.rowwise() += (scale - 1.0) * x_mean;
    yb.array() += (scale - 1.0) * y_mean;
    offset += rows;
  }
}

}  // namespace

Vector pooled_ols(std::span<const EnvDataset> train) {
  Pooled p = pool(train);
  if (p.x.rows() < p.x.cols() + 1) {
    fail(errc::insufficient_samples, "pooled size must be at least d + 1");
  }
  return ols(p.x, p.y).coef;
}

Vector anchor_fit(std::span<const EnvDataset> train, double gamma) {
  if (!(gamma > 0.0)) {
    fail(errc::invalid_argument, "anchor penalty must be positive");
  }
  Pooled p = pool(train);
  if (p.x.rows() < p.x.cols() + 1) {
    fail(errc::insufficient_samples, "pooled size must be at least d + 1");
  }
  std::vector<Eigen::Index> blocks;
  blocks.reserve(train.size());
  for (const EnvDataset& env : train) blocks.push_back(env.rows());
  apply_anchor_transform(p.x, p.y, blocks, gamma);
  return ols(p.x, p.y).coef;
}

std::array<double, 9> anchor_gamma_grid() {
  return {0.2, 0.4, 0.6, 0.8, 1.0, 2.0, 3.0, 4.0, 5.0};
}

AnchorFit anchor_cv(std::span<const EnvDataset> train, std::uint64_t seed) {
  constexpr int kFolds = 5;
  Eigen::Index total = 0;
  for (const EnvDataset& env : train) total += env.rows();
  if (train.empty() || total < 10) {
    fail(errc::insufficient_samples, "cross-validation needs at least 10 pooled rows");
  }

  // Stratified fold labels: each environment's rows are shuffled once, then
  // dealt round-robin, so folds partition every environment evenly.
  std::vector<std::vector<int>> fold_of(train.size());
  std::mt19937_64 engine = make_engine(mix_seed(seed, {kFoldStream}));
  for (std::size_t e = 0; e < train.size(); ++e) {
    std::vector<int> order(static_cast<std::size_t>(train[e].rows()));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), engine);
    fold_of[e].resize(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
      fold_of[e][static_cast<std::size_t>(order[r])] = static_cast<int>(r % kFolds);
    }
  }

  struct Split {
    std::vector<EnvDataset> fit;
    Matrix holdout_x;
    Vector holdout_y;
  };
  std::vector<Split> splits(kFolds);
  for (int f = 0; f < kFolds; ++f) {
    Split& split = splits[static_cast<std::size_t>(f)];
    Eigen::Index held = 0;
    for (std::size_t e = 0; e < train.size(); ++e) {
      held += std::count(fold_of[e].begin(), fold_of[e].end(), f);
    }
    split.holdout_x.resize(held, train.front().x.cols());
    split.holdout_y.resize(held);
    Eigen::Index h = 0;
    for (std::size_t e = 0; e < train.size(); ++e) {
      const EnvDataset& env = train[e];
      if (!env.y) {
        fail(errc::invalid_argument,
             "environment " + env.env_label + " carries no response column");
      }
      const Eigen::Index keep =
          env.rows() - std::count(fold_of[e].begin(), fold_of[e].end(), f);
      EnvDataset part;
      part.env_label = env.env_label;
      part.x.resize(keep, env.x.cols());
      part.y.emplace(keep);
      Eigen::Index k = 0;
      for (Eigen::Index r = 0; r < env.rows(); ++r) {
        if (fold_of[e][static_cast<std::size_t>(r)] == f) {
          split.holdout_x.row(h) = env.x.row(r);
          split.holdout_y(h) = (*env.y)(r);
          ++h;
        } else {
          part.x.row(k) = env.x.row(r);
          (*part.y)(k) = (*env.y)(r);
          ++k;
        }
      }
      if (keep > 0) split.fit.push_back(std::move(part));
    }
  }

  const std::array<double, 9> grid = anchor_gamma_grid();
  std::array<double, 9> cv_error{};
  parallel_for(grid.size(), [&](std::size_t g) {
    double squared = 0.0;
    Eigen::Index rows = 0;
    for (const Split& split : splits) {
      if (split.holdout_x.rows() == 0) continue;
      const Vector coef = anchor_fit(split.fit, grid[g]);
      squared += (split.holdout_y - split.holdout_x * coef).squaredNorm();
      rows += split.holdout_x.rows();
    }
    cv_error[g] = squared / static_cast<double>(rows);
  });

  AnchorFit out;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out.cv_table.emplace_back(grid[g], cv_error[g]);
    if (cv_error[g] < cv_error[best]) best = g;
  }
  out.gamma = grid[best];
  out.coef = anchor_fit(train, out.gamma);
  return out;
}

}  // namespace imp
