#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>

namespace imp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Machine-readable failure categories. The C API and the CLI map these to
// status values and exit codes, so additions must keep existing values stable.
enum class errc {
  invalid_argument,
  invalid_spec,
  non_finite_input,
  insufficient_samples,
  singular_covariance,
  empty_input,
  length_mismatch,
  no_environment_variation,
  empty_selection,
  generation_failed,
  experiment_aborted,
  unknown_preset,
  io_error,
  bad_format,
};

const char* errc_name(errc code);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw error(code, message);
}

// Deterministic seed derivation. Streams are identified by a path of ids
// hanging off a root seed, e.g. mix_seed(seed, {kModelStream, model_index}).
// Any two distinct paths yield independent-looking engine states, and the
// result does not depend on how many sibling streams exist.
std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

std::mt19937_64 make_engine(std::uint64_t seed);

// Worker count for parallel sections: IMP_THREADS if set (clamped to >= 1),
// otherwise the hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, count). Work is distributed dynamically but each
// index touches only its own output slot, so results never depend on the
// schedule or the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Shortest round-trip decimal form, locale independent. All file formats go
// through this so that repeated runs are byte identical.
std::string format_double(double value);

}  // namespace imp
