#include "imp/common.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <system_error>
#include <thread>
#include <vector>

namespace imp {

const char* errc_name(errc code) {
  switch (code) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::non_finite_input: return "NonFiniteInput";
    case errc::insufficient_samples: return "InsufficientSamples";
    case errc::singular_covariance: return "SingularCovariance";
    case errc::empty_input: return "EmptyInput";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::no_environment_variation: return "NoEnvironmentVariation";
    case errc::empty_selection: return "EmptySelection";
    case errc::generation_failed: return "GenerationFailed";
    case errc::experiment_aborted: return "ExperimentAborted";
    case errc::unknown_preset: return "UnknownPreset";
    case errc::io_error: return "IoError";
    case errc::bad_format: return "BadFormat";
  }
  return "Unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t state = seed ^ 0x6a09e667f3bcc908ull;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t id : ids) {
    state ^= id + 0x9e3779b97f4a7c15ull + (out << 6) + (out >> 2);
    out = splitmix64(state);
  }
  return out;
}

std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

int worker_count() {
  if (const char* env = std::getenv("IMP_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && n >= 1) {
      return static_cast<int>(n);
    }
    return 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// Nested parallel sections run inline on the calling worker, so the pool
// size stays bounded by worker_count regardless of call depth.
thread_local bool inside_parallel_section = false;

}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  if (count == 0) {
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1 || inside_parallel_section) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto run = [&]() {
    inside_parallel_section = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) {
        break;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
      }
    }
    inside_parallel_section = false;
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    pool.emplace_back(run);
  }
  run();
  for (auto& t : pool) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) {
    return "nan";
  }
  return std::string(buffer, ptr);
}

}  // namespace imp
