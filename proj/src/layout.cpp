#include "coevo/layout.hpp"

#include <algorithm>
#include <cmath>

#include "coevo/error.hpp"

namespace coevo {

StateLayout::StateLayout(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  std::size_t expected = 0;
  for (const Block& b : blocks_) {
    if (b.offset != expected) throw InvalidArgument("layout blocks must be contiguous");
    if (b.size == 0) throw InvalidArgument("layout block must be nonempty");
    if (b.kind == BlockKind::unit && b.size != 1)
      throw InvalidArgument("unit block holds exactly one coordinate");
    expected += b.size;
  }
  dim_ = expected;
}

StateLayout StateLayout::unconstrained(std::size_t dim) {
  return StateLayout({Block{0, dim, BlockKind::free}});
}

StateLayout StateLayout::link3() {
  return StateLayout({Block{0, 1, BlockKind::unit}, Block{1, 1, BlockKind::unit},
                      Block{2, 1, BlockKind::unit}});
}

StateLayout StateLayout::joint(const PairShape& shape) {
  std::vector<Block> blocks;
  for (std::size_t x = 0; x < shape.num_agents(); ++x)
    blocks.push_back({x * shape.block_size(), shape.block_size(), BlockKind::simplex});
  return StateLayout(std::move(blocks));
}

StateLayout StateLayout::factored(std::size_t num_agents, std::size_t num_actions) {
  std::vector<Block> blocks;
  const std::size_t partners = num_agents - 1;
  for (std::size_t x = 0; x < num_agents; ++x)
    blocks.push_back({x * partners, partners, BlockKind::simplex});
  const std::size_t base = num_agents * partners;
  for (std::size_t x = 0; x < num_agents; ++x)
    blocks.push_back({base + x * num_actions, num_actions, BlockKind::simplex});
  return StateLayout(std::move(blocks));
}

void StateLayout::project(std::span<double> x, double floor) const {
  if (x.size() != dim_) throw InvalidArgument("state dimension does not match layout");
  for (const Block& b : blocks_) {
    auto v = x.subspan(b.offset, b.size);
    switch (b.kind) {
      case BlockKind::free:
        break;
      case BlockKind::unit: {
        const double c = std::clamp(v[0], floor, 1.0);
        const double d = std::clamp(1.0 - v[0], floor, 1.0);
        v[0] = c / (c + d);
        break;
      }
      case BlockKind::simplex: {
        double sum = 0.0;
        for (double& e : v) {
          e = std::clamp(e, floor, 1.0);
          sum += e;
        }
        for (double& e : v) e /= sum;
        break;
      }
    }
  }
}

double StateLayout::max_simplex_drift(std::span<const double> x) const {
  double drift = 0.0;
  for (const Block& b : blocks_) {
    if (b.kind != BlockKind::simplex) continue;
    double sum = 0.0;
    for (double e : x.subspan(b.offset, b.size)) sum += e;
    drift = std::max(drift, std::abs(sum - 1.0));
  }
  return drift;
}

double StateLayout::max_tangent_defect(std::span<const double> dx) const {
  double defect = 0.0;
  for (const Block& b : blocks_) {
    if (b.kind != BlockKind::simplex) continue;
    double sum = 0.0;
    for (double e : dx.subspan(b.offset, b.size)) sum += e;
    defect = std::max(defect, std::abs(sum));
  }
  return defect;
}

}  // namespace coevo
