#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/games.hpp"
#include "coevo/layout.hpp"
#include "coevo/strategy.hpp"

namespace coevo {

// Three-agent link state (c_xy, c_yz, c_zx). The complementary links are
// c_xz = 1 - c_xy, c_yx = 1 - c_yz, c_zy = 1 - c_zx.
using LinkState3 = std::array<double, 3>;

// Replicator field on joint strategies, including the Boltzmann entropy
// term. T = 0 drops the entropy term exactly.
JointState full_replicator_rhs(const JointState& s, const GameSpec& game, double temperature);

// Coupled action and link field for factored strategies.
FactoredState factored_rhs(const FactoredState& f, const GameSpec& game, double temperature);

// Coordination game with every agent pinned to action 0.
LinkState3 link_rhs_coordination(const LinkState3& c, double temperature);

// RPS game with every agent at the uniform mixed equilibrium.
LinkState3 link_rhs_rps(const LinkState3& c, double temperature, double epsilon);

// c(1-c) ln((1-c)/c), with its limit 0 returned within kProbFloor of {0,1}.
double binary_entropy_drift(double c);

// Map a factored three-agent state onto (c_xy, c_yz, c_zx) and back. The
// inverse fills the complementary links.
LinkState3 links_of_factored(const FactoredState& f);
void set_links3(FactoredState& f, const LinkState3& c);

using RhsFunction = std::function<void(std::span<const double>, std::span<double>)>;

// A flattened ODE system with the simplex layout of its state.
struct OdeSystem {
  StateLayout layout;
  RhsFunction rhs;
  std::vector<std::string> names;

  std::size_t dim() const { return layout.dim(); }
  std::vector<double> operator()(std::span<const double> x) const;
};

OdeSystem coordination_link_system(double temperature);
OdeSystem rps_link_system(double temperature, double epsilon);
OdeSystem factored_system(const GameSpec& game, double temperature);
OdeSystem joint_system(const GameSpec& game, double temperature);

// Coordinate labels: x, y, z for up to three agents, 1-based numbers
// otherwise; actions are 1-based.
std::string agent_label(std::size_t num_agents, Agent a);
std::vector<std::string> joint_coordinate_names(const PairShape& shape);
std::vector<std::string> factored_coordinate_names(std::size_t num_agents, std::size_t num_actions);

enum class IntegratorMethod { rk4, rk45 };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::rk4;
  double dt = 0.01;       // rk4 step
  double t_end = 500.0;
  std::size_t record_every = 1;
  double abs_tol = 1e-9;  // rk45
  double rel_tol = 1e-9;  // rk45
  double dt_init = 0.01;  // rk45

  void validate() const;
  bool operator==(const IntegratorConfig&) const = default;
};

const char* to_string(IntegratorMethod m);

// Times are in rescaled units (t -> alpha*beta*t). states[k] is the state at
// times[k]. steps[k] counts integrator steps or learning rounds.
struct Trajectory {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<long long> steps;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return times.size(); }
  void push(double t, long long step, std::vector<double> state);
};

struct IntegrationOutcome {
  Trajectory trajectory;
  std::optional<std::string> failure;  // set when stopped by a numerical failure
  double failure_time = 0.0;
};

// Advances state0 to config.t_end. Each accepted step is projected with
// system.layout. Never throws on numerical trouble; the partial trajectory
// is returned with failure set.
IntegrationOutcome integrate_checked(const OdeSystem& system, std::vector<double> state0,
                                     const IntegratorConfig& config);

// As above but throws NumericalFailure.
Trajectory integrate(const OdeSystem& system, std::vector<double> state0,
                     const IntegratorConfig& config);

}  // namespace coevo
