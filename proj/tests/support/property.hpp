#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include <doctest.h>

#include "idci/core_model.hpp"

namespace prop {

inline constexpr std::size_t kCases = 1000;

/// Runs `body(rng)` for `cases` independently seeded generators; a failure
/// reports the case index so it can be replayed.
template <class F>
void for_all(std::uint64_t seed, F&& body, std::size_t cases = kCases) {
  for (std::size_t c = 0; c < cases; ++c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(c), 0x9e37u};
    std::mt19937_64 rng(seq);
    INFO("property case " << c << " (seed " << seed << ")");
    body(rng);
  }
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline idci::Matrix normal_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  idci::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline idci::Vector positive_vector(std::mt19937_64& rng, std::size_t n, double lo = 0.1, double hi = 2.0) {
  idci::Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

inline std::vector<double> simplex(std::mt19937_64& rng, std::size_t n, double lo = 0.0) {
  std::vector<double> p(n);
  double s = 0.0;
  for (double& v : p) s += (v = uniform(rng, lo, 1.0));
  for (double& v : p) v /= s;
  return p;
}

}  // namespace prop
