#include "imp/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace imp {

namespace {

// Combined (d+1) x (d+1) coefficient matrix over (X, Y) for one environment;
// the response occupies index d.
Matrix combined_matrix(const ScmSpec& spec, const Vector& env_alpha) {
  const int d = spec.d;
  Matrix a = Matrix::Zero(d + 1, d + 1);
  a.topLeftCorner(d, d) = spec.pred_coef;
  a.topRightCorner(d, 1) = spec.child_coef;
  a.block(d, 0, 1, d) = (spec.invariant_coef + env_alpha).transpose();
  return a;
}

// Union adjacency over all environments: edge j -> i iff coefficient (i, j)
// is nonzero somewhere. A cycle in any single environment is a cycle here,
// because only the response row varies with u and each of its entries comes
// from a concrete environment.
std::vector<std::vector<bool>> union_adjacency(const ScmSpec& spec) {
  const int d = spec.d;
  std::vector<std::vector<bool>> edge(d + 1, std::vector<bool>(d + 1, false));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (spec.pred_coef(i, j) != 0.0) edge[j][i] = true;
    }
    if (spec.child_coef(i) != 0.0) edge[d][i] = true;
    if (spec.invariant_coef(i) != 0.0) edge[i][d] = true;
  }
  for (const auto& [label, alpha] : spec.env_coef) {
    for (int i = 0; i < d; ++i) {
      if (alpha(i) != 0.0) edge[i][d] = true;
    }
  }
  return edge;
}

std::optional<std::vector<int>> kahn_order(const std::vector<std::vector<bool>>& edge) {
  const int n = static_cast<int>(edge.size());
  std::vector<int> indegree(n, 0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (edge[j][i]) ++indegree[i];
    }
  }
  std::vector<int> ready;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    // Smallest-index-first keeps the order a pure function of the spec.
    std::sort(ready.begin(), ready.end(), std::greater<int>());
    int v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (int i = 0; i < n; ++i) {
      if (edge[v][i] && --indegree[i] == 0) ready.push_back(i);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    return std::nullopt;
  }
  return order;
}

bool shapes_ok(const ScmSpec& spec) {
  const int d = spec.d;
  if (d < 1) return false;
  if (spec.pred_coef.rows() != d || spec.pred_coef.cols() != d) return false;
  if (spec.child_coef.size() != d) return false;
  if (spec.invariant_coef.size() != d) return false;
  if (spec.pred_noise_var.size() != d) return false;
  for (const auto& [label, alpha] : spec.env_coef) {
    if (alpha.size() != d) return false;
  }
  return true;
}

double uniform_in(const Interval& range, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(range.lo, range.hi);
  return dist(rng);
}

double signed_magnitude(const Interval& magnitude, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(magnitude.lo, magnitude.hi);
  const double value = dist(rng);
  std::bernoulli_distribution flip(0.5);
  return flip(rng) ? -value : value;
}

}  // namespace

const Vector* ScmSpec::find_env(const std::string& label) const {
  for (const auto& [name, alpha] : env_coef) {
    if (name == label) return &alpha;
  }
  return nullptr;
}

std::vector<int> ScmSpec::intervened_support() const {
  std::vector<int> support;
  for (int j = 0; j < d; ++j) {
    for (const auto& [label, alpha] : env_coef) {
      if (alpha(j) != 0.0) {
        support.push_back(j);
        break;
      }
    }
  }
  return support;
}

std::vector<int> ScmSpec::response_parents() const {
  std::vector<int> parents;
  const std::vector<int> intervened = intervened_support();
  for (int j = 0; j < d; ++j) {
    const bool invariant = invariant_coef(j) != 0.0;
    const bool varying = std::binary_search(intervened.begin(), intervened.end(), j);
    if (invariant || varying) parents.push_back(j);
  }
  return parents;
}

std::vector<int> ScmSpec::response_children() const {
  std::vector<int> children;
  for (int j = 0; j < d; ++j) {
    if (child_coef(j) != 0.0) children.push_back(j);
  }
  return children;
}

const char* violation_name(SpecViolation code) {
  switch (code) {
    case SpecViolation::shape_mismatch: return "ShapeMismatch";
    case SpecViolation::nonpositive_noise: return "NonPositiveNoise";
    case SpecViolation::acyclicity_violated: return "AcyclicityViolated";
    case SpecViolation::support_overlap: return "SupportOverlap";
    case SpecViolation::alpha_degenerate: return "AlphaDegenerate";
  }
  return "Unknown";
}

std::vector<SpecIssue> validate(const ScmSpec& spec) {
  std::vector<SpecIssue> issues;
  if (!shapes_ok(spec)) {
    issues.push_back({SpecViolation::shape_mismatch,
                      "coefficient or noise dimensions do not match d"});
    return issues;  // nothing else is checkable on malformed shapes
  }

  for (int j = 0; j < spec.d; ++j) {
    if (!(spec.pred_noise_var(j) > 0.0)) {
      std::ostringstream oss;
      oss << "predictor noise variance " << (j + 1) << " must be > 0";
      issues.push_back({SpecViolation::nonpositive_noise, oss.str()});
    }
  }
  if (!(spec.resp_noise_var > 0.0)) {
    issues.push_back({SpecViolation::nonpositive_noise,
                      "response noise variance must be > 0"});
  }

  if (!topological_order(spec)) {
    issues.push_back({SpecViolation::acyclicity_violated,
                      "combined coefficient graph contains a directed cycle"});
  }

  const std::vector<int> intervened = spec.intervened_support();
  for (int j : intervened) {
    if (spec.invariant_coef(j) != 0.0) {
      std::ostringstream oss;
      oss << "predictor " << (j + 1)
          << " carries both an invariant and an environment coefficient";
      issues.push_back({SpecViolation::support_overlap, oss.str()});
    }
  }

  bool distinct = false;
  for (std::size_t a = 0; a + 1 < spec.env_coef.size() && !distinct; ++a) {
    for (std::size_t b = a + 1; b < spec.env_coef.size() && !distinct; ++b) {
      if (spec.env_coef[a].second != spec.env_coef[b].second) distinct = true;
    }
  }
  if (!distinct) {
    issues.push_back({SpecViolation::alpha_degenerate,
                      "environment coefficients must differ between at least two labels"});
  }

  return issues;
}

void require_structural(const ScmSpec& spec) {
  if (!shapes_ok(spec)) {
    fail(errc::invalid_spec, "spec dimensions do not match d");
  }
  for (int j = 0; j < spec.d; ++j) {
    if (!(spec.pred_noise_var(j) > 0.0)) {
      fail(errc::invalid_spec, "noise variances must be strictly positive");
    }
  }
  if (!(spec.resp_noise_var > 0.0)) {
    fail(errc::invalid_spec, "noise variances must be strictly positive");
  }
  if (!topological_order(spec)) {
    fail(errc::invalid_spec, "combined coefficient graph contains a directed cycle");
  }
}

std::optional<std::vector<int>> topological_order(const ScmSpec& spec) {
  if (!shapes_ok(spec)) return std::nullopt;
  return kahn_order(union_adjacency(spec));
}

ScmSpec toy_scm(const std::vector<std::pair<std::string, double>>& slope_per_env) {
  ScmSpec spec;
  spec.d = 3;
  spec.pred_coef = Matrix::Zero(3, 3);
  spec.pred_coef(2, 0) = 1.0;  // X1 -> X3
  spec.child_coef = Vector::Zero(3);
  spec.child_coef(2) = 1.0;  // Y -> X3
  spec.invariant_coef = Vector::Zero(3);
  spec.invariant_coef(1) = 1.0;  // X2 -> Y
  spec.pred_noise_var = Vector::Ones(3);
  spec.resp_noise_var = 1.0;
  for (const auto& [label, slope] : slope_per_env) {
    Vector alpha = Vector::Zero(3);
    alpha(0) = slope;  // X1 -> Y, environment dependent
    spec.env_coef.emplace_back(label, std::move(alpha));
  }
  return spec;
}

ScmSpec random_scm(int d, const std::vector<std::string>& env_labels,
                   const GenConfig& config, std::mt19937_64& rng) {
  if (d < 2) {
    fail(errc::invalid_argument, "random_scm requires d >= 2");
  }
  if (env_labels.empty()) {
    fail(errc::invalid_argument, "random_scm requires at least one environment label");
  }

  const int n_nodes = d + 1;
  std::bernoulli_distribution keep_edge(config.edge_prob);

  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    // Random topological order over (X_1..X_d, Y); node d is the response.
    std::vector<int> order(n_nodes);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<int> position(n_nodes);
    for (int p = 0; p < n_nodes; ++p) position[order[p]] = p;

    // Forward edges drawn in a fixed scan order so that the stream of rng
    // draws is a function of nothing but the seed.
    std::vector<std::pair<int, int>> edges;  // from -> to
    for (int a = 0; a < n_nodes; ++a) {
      for (int b = a + 1; b < n_nodes; ++b) {
        const int from = order[a];
        const int to = order[b];
        if (keep_edge(rng)) edges.emplace_back(from, to);
      }
    }

    std::vector<int> resp_parents;
    std::vector<int> resp_children;
    for (const auto& [from, to] : edges) {
      if (to == d && from != d) resp_parents.push_back(from);
      if (from == d && to != d) resp_children.push_back(to);
    }
    if (resp_parents.empty() || resp_children.empty()) {
      continue;
    }
    std::sort(resp_parents.begin(), resp_parents.end());

    ScmSpec spec;
    spec.d = d;
    spec.pred_coef = Matrix::Zero(d, d);
    spec.child_coef = Vector::Zero(d);
    spec.invariant_coef = Vector::Zero(d);
    spec.pred_noise_var = Vector::Ones(d);
    spec.resp_noise_var = 1.0;

    for (const auto& [from, to] : edges) {
      if (from == d) {
        spec.child_coef(to) = signed_magnitude(config.coef_magnitude, rng);
      } else if (to == d) {
        // parent coefficients are assigned after the intervened set is known
      } else {
        spec.pred_coef(to, from) = signed_magnitude(config.coef_magnitude, rng);
      }
    }

    std::uniform_int_distribution<int> n_intervened_dist(
        1, static_cast<int>(resp_parents.size()));
    const int n_intervened = n_intervened_dist(rng);
    std::vector<int> pool = resp_parents;
    std::vector<int> intervened;
    for (int pick = 0; pick < n_intervened; ++pick) {
      std::uniform_int_distribution<std::size_t> idx(0, pool.size() - 1);
      const std::size_t chosen = idx(rng);
      intervened.push_back(pool[chosen]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
    std::sort(intervened.begin(), intervened.end());

    for (int j : resp_parents) {
      if (!std::binary_search(intervened.begin(), intervened.end(), j)) {
        spec.invariant_coef(j) = signed_magnitude(config.coef_magnitude, rng);
      }
    }
    for (const std::string& label : env_labels) {
      Vector alpha = Vector::Zero(d);
      for (int j : intervened) {
        alpha(j) = uniform_in(config.alpha_range, rng);
      }
      spec.env_coef.emplace_back(label, std::move(alpha));
    }

    return spec;
  }

  fail(errc::generation_failed,
       "could not draw a graph where the response has a parent and a child");
}

ScmSpec derive_test_spec(const ScmSpec& spec, const std::vector<std::string>& test_labels,
                         const Interval& alpha_range, std::mt19937_64& rng) {
  require_structural(spec);
  const std::vector<int> intervened = spec.intervened_support();

  ScmSpec out = spec;
  out.env_coef.clear();
  for (const std::string& label : test_labels) {
    Vector alpha = Vector::Zero(spec.d);
    for (int j : intervened) {
      alpha(j) = uniform_in(alpha_range, rng);
    }
    out.env_coef.emplace_back(label, std::move(alpha));
  }
  return out;
}

EnvDataset sample(const ScmSpec& spec, const std::string& env_label, int n,
                  std::mt19937_64& rng) {
  require_structural(spec);
  if (n < 1) {
    fail(errc::invalid_argument, "sample requires n >= 1");
  }
  const Vector* alpha = spec.find_env(env_label);
  if (alpha == nullptr) {
    fail(errc::invalid_argument, "unknown environment label: " + env_label);
  }

  const int d = spec.d;
  const std::vector<int> order = *topological_order(spec);
  const Matrix a = combined_matrix(spec, *alpha);

  // Noise is drawn variable-by-variable in index order, independent of the
  // topological order, so equal seeds give equal datasets for any two specs
  // that share dimensions.
  Matrix z(n, d + 1);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  for (int v = 0; v <= d; ++v) {
    const double sd = std::sqrt(v < d ? spec.pred_noise_var(v) : spec.resp_noise_var);
    for (int row = 0; row < n; ++row) {
      z(row, v) = sd * unit_normal(rng);
    }
  }

  for (int v : order) {
    for (int p = 0; p <= d; ++p) {
      const double coef = a(v, p);
      if (coef != 0.0) {
        z.col(v) += coef * z.col(p);
      }
    }
  }

  EnvDataset out;
  out.env_label = env_label;
  out.x = z.leftCols(d);
  out.y = Vector(z.col(d));
  return out;
}

PopulationMoments population_moments(const ScmSpec& spec, const std::string& env_label) {
  require_structural(spec);
  const Vector* alpha = spec.find_env(env_label);
  if (alpha == nullptr) {
    fail(errc::invalid_argument, "unknown environment label: " + env_label);
  }

  const int d = spec.d;
  const Matrix a = combined_matrix(spec, *alpha);
  Vector noise_var(d + 1);
  noise_var.head(d) = spec.pred_noise_var;
  noise_var(d) = spec.resp_noise_var;

  // z = A z + eps  =>  Cov(z) = (I - A)^-1 diag(noise) (I - A)^-T
  const Matrix system = Matrix::Identity(d + 1, d + 1) - a;
  const Matrix resolvent = system.partialPivLu().solve(Matrix::Identity(d + 1, d + 1));
  const Matrix cov = resolvent * noise_var.asDiagonal() * resolvent.transpose();

  PopulationMoments out;
  out.env_label = env_label;
  out.cov_xx = cov.topLeftCorner(d, d);
  out.cov_xy = cov.topRightCorner(d, 1);
  out.var_y = cov(d, d);
  return out;
}

}  // namespace imp
