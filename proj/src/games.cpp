#include "coevo/games.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "coevo/error.hpp"

namespace coevo {

GameSpec::GameSpec(std::string name, std::size_t num_agents, std::size_t num_actions,
                   std::vector<double> entries)
    : name_(std::move(name)),
      num_agents_(num_agents),
      num_actions_(num_actions),
      entries_(std::move(entries)) {
  if (num_agents_ < 2) throw InvalidArgument("game needs at least 2 agents");
  if (num_actions_ < 1) throw InvalidArgument("game needs at least 1 action");
  const std::size_t expected = num_agents_ * num_agents_ * num_actions_ * num_actions_;
  if (entries_.size() != expected)
    throw InvalidArgument("payoff tensor has " + std::to_string(entries_.size()) +
                          " entries, expected " + std::to_string(expected));
  for (Agent x = 0; x < num_agents_; ++x)
    for (Agent y = 0; y < num_agents_; ++y) {
      if (x == y) continue;
      for (Action i = 0; i < num_actions_; ++i)
        for (Action j = 0; j < num_actions_; ++j)
          if (!std::isfinite(at(x, y, i, j)))
            throw InvalidArgument("payoff entry is not finite");
    }
}

GameSpec GameSpec::homogeneous(std::string name, std::size_t num_agents,
                               std::size_t num_actions, const std::vector<double>& matrix) {
  if (num_agents < 2) throw InvalidArgument("game needs at least 2 agents");
  if (num_actions < 1) throw InvalidArgument("game needs at least 1 action");
  if (matrix.size() != num_actions * num_actions)
    throw InvalidArgument("payoff matrix must be square in the number of actions");
  const std::size_t m2 = num_actions * num_actions;
  std::vector<double> entries(num_agents * num_agents * m2, 0.0);
  for (Agent x = 0; x < num_agents; ++x)
    for (Agent y = 0; y < num_agents; ++y) {
      if (x == y) continue;
      std::copy(matrix.begin(), matrix.end(),
                entries.begin() + static_cast<std::ptrdiff_t>((x * num_agents + y) * m2));
    }
  return GameSpec(std::move(name), num_agents, num_actions, std::move(entries));
}

double GameSpec::payoff(Agent x, Agent y, Action i, Action j) const {
  if (x == y) throw InvalidArgument("payoff undefined for self-play");
  if (x >= num_agents_ || y >= num_agents_)
    throw InvalidArgument("agent index out of range");
  if (i >= num_actions_ || j >= num_actions_)
    throw InvalidArgument("action index out of range");
  return at(x, y, i, j);
}

GameSpec build_coordination_game(std::size_t num_agents) {
  if (num_agents < 2) throw InvalidArgument("coordination game needs at least 2 agents");
  return GameSpec::homogeneous("coordination", num_agents, 2, {1.0, 0.0, 0.0, 0.0});
}

GameSpec build_rps_game(std::size_t num_agents, RpsParams params) {
  const double e = params.epsilon;
  if (!(e > -1.0 && e < 1.0))
    throw InvalidArgument("rps epsilon must lie strictly inside (-1, 1)");
  return GameSpec::homogeneous("rps", num_agents, 3,
                               {e, -1.0, 1.0,
                                1.0, e, -1.0,
                                -1.0, 1.0, e});
}

GameSpec build_matrix_game(std::size_t num_agents,
                           const std::vector<std::vector<double>>& matrix) {
  const std::size_t m = matrix.size();
  std::vector<double> flat;
  flat.reserve(m * m);
  for (const auto& row : matrix) {
    if (row.size() != m) throw InvalidArgument("payoff matrix must be square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return GameSpec::homogeneous("matrix", num_agents, m, flat);
}

}  // namespace coevo
