#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "coevo/layout.hpp"

namespace coevo {

// Seedable, splittable generator. Built on mt19937_64 with hand-written
// distributions so draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Index k with probability weights[k] / sum(weights).
  std::size_t categorical(std::span<const double> weights);

  // Independent child stream; the same (seed, stream) always gives the
  // same child.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Uniform point in the interior of the (k-1)-simplex.
std::vector<double> random_simplex_point(Rng& rng, std::size_t k);

// Random interior state for a layout: simplex blocks uniform on the simplex,
// unit coordinates uniform on (0,1), free coordinates standard uniform.
std::vector<double> random_state(const StateLayout& layout, Rng& rng);

}  // namespace coevo
