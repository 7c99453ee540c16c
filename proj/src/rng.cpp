#include "coevo/rng.hpp"

#include <cmath>

#include "coevo/error.hpp"

namespace coevo {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw InvalidArgument("categorical weights must have positive mass");
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = k;
    if (u < acc) return k;
  }
  return last_positive;  // rounding at the top end
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 1)));
}

std::vector<double> random_simplex_point(Rng& rng, std::size_t k) {
  std::vector<double> v(k);
  double sum = 0.0;
  for (double& e : v) {
    // 1 - u lies in (0, 1], so the log is finite.
    e = -std::log(1.0 - rng.uniform());
    sum += e;
  }
  for (double& e : v) e /= sum;
  return v;
}

std::vector<double> random_state(const StateLayout& layout, Rng& rng) {
  std::vector<double> x(layout.dim());
  for (const Block& b : layout.blocks()) {
    switch (b.kind) {
      case BlockKind::simplex: {
        const auto p = random_simplex_point(rng, b.size);
        std::copy(p.begin(), p.end(), x.begin() + static_cast<std::ptrdiff_t>(b.offset));
        break;
      }
      case BlockKind::unit:
      case BlockKind::free:
        for (std::size_t a = 0; a < b.size; ++a) {
          double u = rng.uniform();
          while (u == 0.0) u = rng.uniform();
          x[b.offset + a] = u;
        }
        break;
    }
  }
  return x;
}

}  // namespace coevo
