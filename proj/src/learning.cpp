#include "coevo/learning.hpp"

#include <algorithm>
#include <cmath>

#include "coevo/error.hpp"

namespace coevo {

const char* to_string(LearningMode mode) {
  return mode == LearningMode::expected ? "expected" : "sampled";
}

void LearningParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  if (rounds < 1) throw InvalidArgument("rounds must be >= 1");
  if (interactions < 1) throw InvalidArgument("interactions per update must be >= 1");
}

RewardEstimate expected_reward(const GameSpec& game, const JointState& policies) {
  const PairShape& shape = policies.shape();
  if (!(shape == PairShape(game))) throw InvalidArgument("policy shape does not match game");
  RewardEstimate r(shape);
  const std::size_t n = shape.num_agents(), m = shape.num_actions();
  for (Agent x = 0; x < n; ++x)
    for (Agent y = 0; y < n; ++y) {
      if (y == x) continue;
      for (Action i = 0; i < m; ++i) {
        double v = 0.0;
        for (Action j = 0; j < m; ++j) v += game.at(x, y, i, j) * policies(y, x, j);
        r(x, y, i) = v;
      }
    }
  return r;
}

QTable q_update(const QTable& q, const RewardEstimate& r, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  if (!(q.shape() == r.shape())) throw InvalidArgument("Q-table and reward shapes differ");
  QTable out(q.shape());
  for (std::size_t k = 0; k < q.values().size(); ++k)
    out.values()[k] = q.values()[k] + alpha * (r.values()[k] - q.values()[k]);
  return out;
}

std::vector<Encounter> sample_round(const JointState& policies, const GameSpec& game, Rng& rng) {
  const PairShape& shape = policies.shape();
  if (!(shape == PairShape(game))) throw InvalidArgument("policy shape does not match game");
  const std::size_t n = shape.num_agents(), m = shape.num_actions();
  std::vector<Agent> partner(n);
  std::vector<Action> action(n);
  for (Agent x = 0; x < n; ++x) {
    const std::size_t k = rng.categorical(policies.agent_block(x));
    partner[x] = shape.partner(x, k / m);
    action[x] = k % m;
  }
  std::vector<Encounter> out;
  out.reserve(n);
  for (Agent x = 0; x < n; ++x) {
    Encounter e;
    e.initiator = x;
    e.partner = partner[x];
    e.initiator_action = action[x];
    e.partner_action = action[e.partner];
    e.reciprocated = partner[e.partner] == x;
    if (e.reciprocated) {
      e.initiator_payoff = game.at(x, e.partner, e.initiator_action, e.partner_action);
      e.partner_payoff = game.at(e.partner, x, e.partner_action, e.initiator_action);
    }
    out.push_back(e);
  }
  return out;
}

QTable q_from_policy(const JointState& policy, const PolicyParams& params) {
  QTable q(policy.shape());
  for (std::size_t k = 0; k < q.values().size(); ++k)
    q.values()[k] = params.temperature() * std::log(std::max(policy.values()[k], kProbFloor));
  return q;
}

Trajectory run_learning(const QTable& q0, const GameSpec& game, const LearningParams& params) {
  params.validate();
  const PairShape shape(game);
  if (!(q0.shape() == shape)) throw InvalidArgument("initial Q-table shape does not match game");

  Trajectory traj;
  traj.names = joint_coordinate_names(shape);
  traj.metadata["learning"] = {{"mode", to_string(params.mode)},
                               {"alpha", params.alpha},
                               {"T", params.policy.temperature()},
                               {"K", params.interactions},
                               {"rounds", params.rounds},
                               {"seed", params.seed}};
  const double dtau = params.time_per_round();

  QTable q = q0;
  JointState policy = boltzmann_policy(q, params.policy);
  traj.push(0.0, 0, policy.values());

  Rng rng(params.seed);
  std::vector<double> sums(shape.size());
  std::vector<std::size_t> counts(shape.size());
  for (long long round = 1; round <= params.rounds; ++round) {
    if (params.mode == LearningMode::expected) {
      q = q_update(q, expected_reward(game, policy), params.alpha);
    } else {
      std::fill(sums.begin(), sums.end(), 0.0);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t k = 0; k < params.interactions; ++k)
        for (const Encounter& e : sample_round(policy, game, rng)) {
          const std::size_t idx = shape.index(e.initiator, e.partner, e.initiator_action);
          sums[idx] += e.initiator_payoff;
          ++counts[idx];
        }
      // Unvisited entries keep their value.
      for (std::size_t k = 0; k < sums.size(); ++k)
        if (counts[k] > 0) {
          const double r = sums[k] / static_cast<double>(counts[k]);
          q.values()[k] += params.alpha * (r - q.values()[k]);
        }
    }
    policy = boltzmann_policy(q, params.policy);
    traj.push(static_cast<double>(round) * dtau, round, policy.values());
  }
  return traj;
}

DeviationReport compare_to_ode(const Trajectory& learn, const Trajectory& ode) {
  if (learn.size() == 0 || ode.size() == 0) throw InvalidArgument("empty trajectory");
  if (learn.states.front().size() != ode.states.front().size())
    throw InvalidArgument("trajectories have different state dimensions");
  const double lo = std::max(learn.times.front(), ode.times.front());
  const double hi = std::min(learn.times.back(), ode.times.back());
  if (lo > hi) throw InvalidArgument("trajectories cover disjoint time ranges");

  DeviationReport report;
  report.t_begin = lo;
  report.t_end = hi;
  double total = 0.0;
  std::size_t terms = 0;
  const std::size_t d = ode.states.front().size();
  std::vector<double> interp(d);
  for (std::size_t k = 0; k < learn.size(); ++k) {
    const double t = learn.times[k];
    if (t < lo || t > hi) continue;
    auto it = std::upper_bound(ode.times.begin(), ode.times.end(), t);
    std::size_t b = static_cast<std::size_t>(it - ode.times.begin());
    if (b >= ode.size()) b = ode.size() - 1;
    const std::size_t a = b == 0 ? 0 : b - 1;
    const double span = ode.times[b] - ode.times[a];
    const double w = span > 0.0 ? (t - ode.times[a]) / span : 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      interp[c] = (1.0 - w) * ode.states[a][c] + w * ode.states[b][c];
      const double dev = std::abs(learn.states[k][c] - interp[c]);
      report.max_deviation = std::max(report.max_deviation, dev);
      total += dev;
      ++terms;
    }
    ++report.points;
  }
  report.mean_deviation = terms > 0 ? total / static_cast<double>(terms) : 0.0;
  return report;
}

}  // namespace coevo
