#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sparsedom/dyadic.hpp"

namespace sparsedom::testing {

// Deterministic generator for property tests (same splitmix64 core as the
// corpus module, different streams).
struct TestRng {
  std::uint64_t state;
  explicit TestRng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

inline GridFunction random_function(const DyadicGrid& g, TestRng& rng,
                                    bool nonnegative = true) {
  std::vector<double> v(g.cell_count());
  for (double& x : v) {
    x = rng.log_uniform(0.02, 50.0);
    if (!nonnegative && rng.uniform() < 0.5) x = -x;
  }
  return GridFunction(g, std::move(v));
}

inline GridFunction random_weight(const DyadicGrid& g, TestRng& rng) {
  std::vector<double> v(g.cell_count());
  for (double& x : v) x = rng.log_uniform(0.05, 20.0);
  return GridFunction(g, std::move(v), true);
}

inline bool close(double a, double b, double rel = 1e-9, double abs_tol = 1e-12) {
  return std::abs(a - b) <= abs_tol + rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace sparsedom::testing
