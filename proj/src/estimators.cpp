#include "imp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace imp {

namespace {

void check_feature_indices(int d, int target, const std::vector<int>& given) {
  if (given.empty()) {
    fail(errc::invalid_argument, "feature conditioning set must be nonempty");
  }
  if (target < 0 || target >= d) {
    fail(errc::invalid_argument, "feature target index out of range");
  }
  for (int j : given) {
    if (j < 0 || j >= d) {
      fail(errc::invalid_argument, "feature conditioning index out of range");
    }
    if (j == target) {
      fail(errc::invalid_argument, "feature conditioning set must not contain the target");
    }
  }
}

Matrix select_columns(const Matrix& x, const std::vector<int>& columns) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = x.col(columns[c]);
  }
  return out;
}

Matrix submatrix(const Matrix& m, const std::vector<int>& rows,
                 const std::vector<int>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
    }
  }
  return out;
}

Vector population_ols_impl(const Matrix& cov_given, const Vector& cross) {
  Eigen::FullPivLU<Matrix> lu(cov_given);
  if (!lu.isInvertible()) {
    fail(errc::singular_covariance,
         "conditioning covariance block is singular");
  }
  return lu.solve(cross);
}

}  // namespace

OlsFit ols(const Matrix& design, const Vector& target) {
  if (design.rows() < 1 || design.cols() < 1) {
    fail(errc::invalid_argument, "ols requires a nonempty design");
  }
  if (design.rows() != target.size()) {
    fail(errc::length_mismatch, "design and target row counts differ");
  }
  if (!design.allFinite() || !target.allFinite()) {
    fail(errc::non_finite_input, "ols inputs must be finite");
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  OlsFit fit;
  fit.coef = cod.solve(target);
  fit.rank = static_cast<int>(cod.rank());
  fit.rss = (target - design * fit.coef).squaredNorm();
  return fit;
}

std::string to_string(const FeatureIndex& f) {
  std::ostringstream oss;
  oss << "(" << (f.target + 1) << ",{";
  for (std::size_t i = 0; i < f.given.size(); ++i) {
    if (i > 0) oss << ",";
    oss << (f.given[i] + 1);
  }
  oss << "})";
  return oss.str();
}

FeatureColumn env_feature(std::span<const EnvDataset> datasets, int target,
                          const std::vector<int>& given) {
  if (datasets.empty()) {
    fail(errc::empty_input, "env_feature requires at least one environment");
  }
  const int d = static_cast<int>(datasets.front().x.cols());
  check_feature_indices(d, target, given);

  Eigen::Index total = 0;
  for (const EnvDataset& env : datasets) {
    if (env.x.cols() != d) {
      fail(errc::length_mismatch, "environments disagree on predictor count");
    }
    if (env.rows() < static_cast<Eigen::Index>(given.size()) + 1) {
      fail(errc::insufficient_samples,
           "environment " + env.env_label + " has fewer rows than |S| + 1");
    }
    total += env.rows();
  }

  FeatureColumn column;
  column.feature = FeatureIndex{target, given};
  std::sort(column.feature.given.begin(), column.feature.given.end());
  column.values.resize(total);

  Eigen::Index offset = 0;
  for (const EnvDataset& env : datasets) {
    const Matrix design = select_columns(env.x, given);
    const OlsFit fit = ols(design, env.x.col(target));
    column.values.segment(offset, env.rows()) = design * fit.coef;
    offset += env.rows();
  }
  return column;
}

Vector population_ols_response(const PopulationMoments& moments,
                               const std::vector<int>& given) {
  const int d = static_cast<int>(moments.cov_xx.rows());
  if (given.empty()) {
    fail(errc::invalid_argument, "conditioning set must be nonempty");
  }
  for (int j : given) {
    if (j < 0 || j >= d) {
      fail(errc::invalid_argument, "conditioning index out of range");
    }
  }
  Vector cross(static_cast<Eigen::Index>(given.size()));
  for (std::size_t i = 0; i < given.size(); ++i) {
    cross(static_cast<Eigen::Index>(i)) = moments.cov_xy(given[i]);
  }
  return population_ols_impl(submatrix(moments.cov_xx, given, given), cross);
}

Vector population_ols_predictor(const PopulationMoments& moments, int target,
                                const std::vector<int>& given) {
  const int d = static_cast<int>(moments.cov_xx.rows());
  check_feature_indices(d, target, given);
  Vector cross(static_cast<Eigen::Index>(given.size()));
  for (std::size_t i = 0; i < given.size(); ++i) {
    cross(static_cast<Eigen::Index>(i)) = moments.cov_xx(given[i], target);
  }
  return population_ols_impl(submatrix(moments.cov_xx, given, given), cross);
}

double quantile(std::vector<double> values, double fraction) {
  if (values.empty()) {
    fail(errc::empty_input, "quantile of an empty list");
  }
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    fail(errc::invalid_argument, "quantile fraction must lie in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double position = fraction * static_cast<double>(values.size() - 1);
  const std::size_t below = static_cast<std::size_t>(std::floor(position));
  const std::size_t above = std::min(below + 1, values.size() - 1);
  const double weight = position - static_cast<double>(below);
  return values[below] + weight * (values[above] - values[below]);
}

}  // namespace imp
