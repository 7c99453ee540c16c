#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/dynamics.hpp"
#include "coevo/games.hpp"
#include "coevo/learning.hpp"

namespace coevo {

enum class GameKind { coordination, rps, matrix };
enum class SystemKind { full, factored, link_only };

const char* to_string(GameKind g);
const char* to_string(SystemKind s);

struct InitialState {
  enum class Kind { uniform, random, values };
  Kind kind = Kind::uniform;
  std::optional<std::uint64_t> seed;  // random(seed); falls back to RunConfig::seed
  std::vector<double> values;

  bool operator==(const InitialState&) const = default;
};

struct LearningConfig {
  double alpha = 0.01;
  long long rounds = 1000;
  LearningMode mode = LearningMode::expected;
  std::size_t interactions = 1;

  bool operator==(const LearningConfig&) const = default;
};

struct AnalysisConfig {
  double bracket_lo = 0.0;
  double bracket_hi = 1.0;
  double tol = 1e-6;
  double rest_point_tol = 1e-10;

  bool operator==(const AnalysisConfig&) const = default;
};

struct RunConfig {
  GameKind game = GameKind::coordination;
  std::optional<double> epsilon;               // rps
  std::vector<std::vector<double>> matrix;     // matrix
  std::size_t num_agents = 3;
  SystemKind system = SystemKind::link_only;
  double temperature = 0.0;
  IntegratorConfig integrator;
  std::optional<LearningConfig> learning;
  InitialState initial_state;
  AnalysisConfig analysis;
  std::uint64_t seed = 0;
  std::string output;

  bool operator==(const RunConfig&) const = default;
};

// Parses and validates a JSON document. Throws ParseError naming the key
// and its line.
RunConfig parse_config(std::string_view text);

nlohmann::json config_to_json(const RunConfig& config);
std::string serialize_config(const RunConfig& config);

GameSpec make_game(const RunConfig& config);
OdeSystem make_system(const RunConfig& config);
// Dimension of the state vector for the configured system.
std::size_t state_dimension(const RunConfig& config);
// Initial state in the configured system's coordinates (joint for learning).
std::vector<double> make_initial_state(const RunConfig& config);
std::uint64_t initial_state_seed(const RunConfig& config);

}  // namespace coevo
