#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace coevo {

using Agent = std::size_t;
using Action = std::size_t;

struct RpsParams {
  double epsilon = 0.0;  // strictly inside (-1, 1)
};

// Pairwise normal-form game among num_agents agents with num_actions
// actions each. payoff(x, y, i, j) is what x receives for playing i
// against y playing j; the co-player receives payoff(y, x, j, i).
//
// Indices are 0-based in code. Action 0 is the first row of the
// matrices written in the documentation.
class GameSpec {
 public:
  // entries are laid out as [x][y][i][j]; diagonal (x == y) blocks ignored.
  GameSpec(std::string name, std::size_t num_agents, std::size_t num_actions,
           std::vector<double> entries);

  // Every ordered pair shares the same num_actions x num_actions matrix
  // (row-major).
  static GameSpec homogeneous(std::string name, std::size_t num_agents,
                              std::size_t num_actions,
                              const std::vector<double>& matrix);

  double payoff(Agent x, Agent y, Action i, Action j) const;

  std::size_t num_agents() const { return num_agents_; }
  std::size_t num_actions() const { return num_actions_; }
  const std::string& name() const { return name_; }

  // Unchecked access for inner loops. Caller guarantees x != y and ranges.
  double at(Agent x, Agent y, Action i, Action j) const {
    return entries_[((x * num_agents_ + y) * num_actions_ + i) * num_actions_ + j];
  }

 private:
  std::string name_;
  std::size_t num_agents_;
  std::size_t num_actions_;
  std::vector<double> entries_;
};

// A = [[1,0],[0,0]] for every ordered pair.
GameSpec build_coordination_game(std::size_t num_agents);

// A = [[e,-1,1],[1,e,-1],[-1,1,e]] for every ordered pair.
GameSpec build_rps_game(std::size_t num_agents, RpsParams params);

// Explicit square matrix shared by every ordered pair.
GameSpec build_matrix_game(std::size_t num_agents,
                           const std::vector<std::vector<double>>& matrix);

}  // namespace coevo
