#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coevo/games.hpp"

namespace coevo {

// Floor applied to probabilities before any logarithm is taken.
inline constexpr double kProbFloor = 1e-12;

// Index arithmetic for tables keyed by (agent x, partner y != x, action i).
// Each agent owns a contiguous block of (n-1)*m entries; partners are
// stored in increasing order with x itself skipped.
class PairShape {
 public:
  PairShape() = default;
  PairShape(std::size_t num_agents, std::size_t num_actions);
  explicit PairShape(const GameSpec& game)
      : PairShape(game.num_agents(), game.num_actions()) {}

  std::size_t num_agents() const { return n_; }
  std::size_t num_actions() const { return m_; }
  std::size_t num_partners() const { return n_ - 1; }
  std::size_t block_size() const { return (n_ - 1) * m_; }
  std::size_t size() const { return n_ * block_size(); }

  std::size_t slot(Agent x, Agent y) const { return y < x ? y : y - 1; }
  Agent partner(Agent x, std::size_t slot) const { return slot < x ? slot : slot + 1; }
  std::size_t index(Agent x, Agent y, Action i) const {
    return (x * (n_ - 1) + slot(x, y)) * m_ + i;
  }

  bool operator==(const PairShape&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
};

// Value table over (x, y, i). The tag keeps joint strategies, Q-values and
// reward estimates from being mixed up.
template <class Tag>
class PairTable {
 public:
  PairTable() = default;
  explicit PairTable(PairShape shape, double fill = 0.0)
      : shape_(shape), values_(shape.size(), fill) {}
  PairTable(PairShape shape, std::vector<double> values);

  const PairShape& shape() const { return shape_; }
  double operator()(Agent x, Agent y, Action i) const { return values_[shape_.index(x, y, i)]; }
  double& operator()(Agent x, Agent y, Action i) { return values_[shape_.index(x, y, i)]; }

  std::span<const double> agent_block(Agent x) const {
    return std::span<const double>(values_).subspan(x * shape_.block_size(), shape_.block_size());
  }
  std::span<double> agent_block(Agent x) {
    return std::span<double>(values_).subspan(x * shape_.block_size(), shape_.block_size());
  }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool operator==(const PairTable&) const = default;

 private:
  PairShape shape_;
  std::vector<double> values_;
};

void check_table_size(const PairShape& shape, std::size_t size);

template <class Tag>
PairTable<Tag>::PairTable(PairShape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  check_table_size(shape_, values_.size());
}

struct JointTag;
struct QTag;
struct RewardTag;

// p_{xy}^i: probability that x picks partner y and action i.
using JointState = PairTable<JointTag>;
// Q_{xy}^i.
using QTable = PairTable<QTag>;
// R_{x,y}^i.
using RewardEstimate = PairTable<RewardTag>;

// Link distribution c_{xy} and action distribution p_x^i per agent.
// Flattened order (see flat()): all links agent by agent, then all actions.
class FactoredState {
 public:
  FactoredState() = default;
  FactoredState(std::size_t num_agents, std::size_t num_actions);
  // Inverse of flat().
  FactoredState(std::size_t num_agents, std::size_t num_actions, std::span<const double> flat);

  std::size_t num_agents() const { return shape_.num_agents(); }
  std::size_t num_actions() const { return shape_.num_actions(); }

  double link(Agent x, Agent y) const { return links_[link_index(x, y)]; }
  double& link(Agent x, Agent y) { return links_[link_index(x, y)]; }
  double action(Agent x, Action i) const { return actions_[x * num_actions() + i]; }
  double& action(Agent x, Action i) { return actions_[x * num_actions() + i]; }

  std::span<const double> links_of(Agent x) const {
    return std::span<const double>(links_).subspan(x * shape_.num_partners(), shape_.num_partners());
  }
  std::span<const double> actions_of(Agent x) const {
    return std::span<const double>(actions_).subspan(x * num_actions(), num_actions());
  }

  std::vector<double> flat() const;
  std::size_t flat_size() const { return links_.size() + actions_.size(); }
  std::size_t link_index(Agent x, Agent y) const {
    return x * shape_.num_partners() + shape_.slot(x, y);
  }

  bool operator==(const FactoredState&) const = default;

 private:
  PairShape shape_;
  std::vector<double> links_;
  std::vector<double> actions_;
};

class PolicyParams {
 public:
  explicit PolicyParams(double temperature);
  double temperature() const { return temperature_; }
  double beta() const { return 1.0 / temperature_; }

 private:
  double temperature_;
};

struct FactorResult {
  FactoredState state;
  double residual = 0.0;  // max |p_xy^i - c_xy p_x^i|
};

struct SimplexViolation {
  Agent agent = 0;
  std::string group;  // "joint", "links" or "actions"
  double sum = 0.0;
  std::string message;
};

// Per-agent softmax of beta*Q over all (partner, action) pairs.
JointState boltzmann_policy(const QTable& q, const PolicyParams& params);

FactorResult factor_state(const JointState& s);
JointState compose_state(const FactoredState& f);

std::vector<SimplexViolation> validate_simplex(const JointState& s, double tol);
std::vector<SimplexViolation> validate_simplex(const FactoredState& f, double tol);

JointState uniform_joint_state(const PairShape& shape);
FactoredState uniform_factored_state(std::size_t num_agents, std::size_t num_actions);

}  // namespace coevo
