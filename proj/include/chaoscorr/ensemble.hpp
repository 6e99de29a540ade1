#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <numbers>
#include <random>
#include <span>
#include <type_traits>
#include <vector>

#include "chaoscorr/spin_ops.hpp"

namespace chaoscorr {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the stream addressed by `path` under a root seed. Distinct paths give
/// statistically independent streams; the mapping is platform independent.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (const std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) from the top 53 bits; identical across standard libraries.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller, no cached second draw so the stream stays stateless per call.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct EnsembleEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double std_dev = 0.0;
  Index n = 0;
};

inline EnsembleEstimate mean_and_error(std::span<const double> values) {
  EnsembleEstimate e;
  e.n = static_cast<Index>(values.size());
  if (values.empty()) return e;
  double sum = 0.0;
  for (const double v : values) sum += v;
  e.mean = sum / static_cast<double>(e.n);
  if (e.n > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - e.mean) * (v - e.mean);
    e.std_dev = std::sqrt(ss / static_cast<double>(e.n - 1));
    e.std_error = e.std_dev / std::sqrt(static_cast<double>(e.n));
  }
  return e;
}

/// Evaluates f(0..n-1) in parallel and returns the results in index order.
/// The first failing index (lowest) has its exception rethrown.
template <typename F>
auto parallel_map(Index n, F&& f) -> std::vector<std::invoke_result_t<F&, Index>> {
  using Result = std::invoke_result_t<F&, Index>;
  std::vector<Result> out(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace chaoscorr
