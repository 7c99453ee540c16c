#pragma once

#include <cstdint>
#include <vector>

#include "coevo/dynamics.hpp"
#include "coevo/games.hpp"
#include "coevo/rng.hpp"
#include "coevo/strategy.hpp"

namespace coevo {

enum class LearningMode { expected, sampled };

const char* to_string(LearningMode mode);

struct LearningParams {
  double alpha = 0.01;          // (0, 1]
  PolicyParams policy{1.0};
  long long rounds = 1000;
  LearningMode mode = LearningMode::expected;
  std::size_t interactions = 1;  // encounters per update in sampled mode
  std::uint64_t seed = 0;

  void validate() const;
  // Rescaled time advanced by one update: alpha * beta.
  double time_per_round() const { return alpha * policy.beta(); }
};

// One realized game. The partner's action is its own independent draw;
// payoffs are nonzero only when the partner also chose the initiator.
struct Encounter {
  Agent initiator = 0;
  Agent partner = 0;
  Action initiator_action = 0;
  Action partner_action = 0;
  bool reciprocated = false;
  double initiator_payoff = 0.0;
  double partner_payoff = 0.0;

  bool operator==(const Encounter&) const = default;
};

// R_{x,y}^i = sum_j A_xy^ij p_yx^j, with p_yx^j the partner's joint
// probability of choosing x and playing j.
RewardEstimate expected_reward(const GameSpec& game, const JointState& policies);

// Q + alpha (R - Q), entrywise.
QTable q_update(const QTable& q, const RewardEstimate& r, double alpha);

// Every agent draws one (partner, action) from its joint policy; one
// encounter per agent, in agent order.
std::vector<Encounter> sample_round(const JointState& policies, const GameSpec& game, Rng& rng);

// Q-values whose Boltzmann policy is `policy`: Q = T ln p (up to a per-agent
// constant, which the softmax ignores).
QTable q_from_policy(const JointState& policy, const PolicyParams& params);

// Iterates Boltzmann policy and Q-update. The trajectory holds the joint
// policy at round 0 and after every update; times are rescaled by
// alpha*beta, steps are round numbers.
Trajectory run_learning(const QTable& q0, const GameSpec& game, const LearningParams& params);

struct DeviationReport {
  double max_deviation = 0.0;
  double mean_deviation = 0.0;
  std::size_t points = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
};

// Linear interpolation of `ode` at the times of `learn` inside the common
// time range; max and mean absolute coordinate deviation.
DeviationReport compare_to_ode(const Trajectory& learn, const Trajectory& ode);

}  // namespace coevo
