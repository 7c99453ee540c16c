#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coevo/strategy.hpp"

namespace coevo {

enum class BlockKind {
  simplex,  // entries sum to 1
  unit,     // single coordinate c in [0,1] with implicit complement 1-c
  free,     // unconstrained
};

struct Block {
  std::size_t offset = 0;
  std::size_t size = 0;
  BlockKind kind = BlockKind::free;
};

// Describes how a flat state vector decomposes into probability simplices.
// Used to project integrator steps back onto the state space and to build
// tangent coordinates for rest-point analysis.
class StateLayout {
 public:
  StateLayout() = default;
  explicit StateLayout(std::vector<Block> blocks);

  static StateLayout unconstrained(std::size_t dim);
  // (c_xy, c_yz, c_zx), complements implicit.
  static StateLayout link3();
  static StateLayout joint(const PairShape& shape);
  static StateLayout factored(std::size_t num_agents, std::size_t num_actions);

  std::size_t dim() const { return dim_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  // Clamp probabilities to [floor, 1] and renormalize each simplex. A unit
  // coordinate is treated as the pair (c, 1-c).
  void project(std::span<double> x, double floor = kProbFloor) const;

  // Largest |sum - 1| over simplex blocks.
  double max_simplex_drift(std::span<const double> x) const;

  // Largest |sum| of a derivative over simplex blocks (tangency check).
  double max_tangent_defect(std::span<const double> dx) const;

 private:
  std::vector<Block> blocks_;
  std::size_t dim_ = 0;
};

}  // namespace coevo
