#include "coevo/coevo.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "coevo/analysis.hpp"
#include "coevo/commands.hpp"
#include "coevo/config.hpp"
#include "coevo/dynamics.hpp"
#include "coevo/error.hpp"
#include "coevo/games.hpp"
#include "coevo/learning.hpp"

struct coevo_game {
  coevo::GameSpec spec;
};

struct coevo_config {
  coevo::RunConfig config;
};

struct coevo_trajectory {
  coevo::Trajectory traj;
};

namespace {

thread_local std::string last_error;

coevo_status fail(coevo_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
coevo_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const coevo::ParseError& e) {
    return fail(COEVO_ERR_PARSE, e.what());
  } catch (const coevo::InvalidArgument& e) {
    return fail(COEVO_ERR_INVALID_ARGUMENT, e.what());
  } catch (const coevo::NumericalFailure& e) {
    return fail(COEVO_ERR_NUMERICAL, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(COEVO_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(COEVO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(COEVO_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw coevo::InvalidArgument(what);
}

coevo::LinkSystemSpec link_spec(coevo_link_game game, double epsilon) {
  switch (game) {
    case COEVO_LINK_COORDINATION: return coevo::LinkSystemSpec::coordination();
    case COEVO_LINK_RPS: return coevo::LinkSystemSpec::rps(epsilon);
  }
  throw coevo::InvalidArgument("unknown link game");
}

coevo_status from_command(const coevo::CommandResult& r) {
  switch (r.exit_code) {
    case coevo::kExitOk: return COEVO_OK;
    case coevo::kExitNumerical: return fail(COEVO_ERR_NUMERICAL, r.message);
    case coevo::kExitPartial: return fail(COEVO_ERR_PARTIAL, r.message);
    default: return fail(COEVO_ERR_INVALID_ARGUMENT, r.message);
  }
}

std::filesystem::path out_path(const char* dir) { return dir ? std::filesystem::path(dir) : std::filesystem::path(); }

template <class T>
coevo_status vector_rhs(const coevo_game* game, const double* state, size_t len, double* out,
                        std::size_t dim, T&& rhs) {
  require(game && state && out, "null argument");
  require(len == dim, "state length does not match the game");
  const auto d = rhs(std::span<const double>(state, len));
  std::copy(d.begin(), d.end(), out);
  return COEVO_OK;
}

}  // namespace

extern "C" {

const char* coevo_version(void) { return COEVO_VERSION_STRING; }

const char* coevo_last_error(void) { return last_error.c_str(); }

const char* coevo_status_name(coevo_status status) {
  switch (status) {
    case COEVO_OK: return "ok";
    case COEVO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case COEVO_ERR_PARSE: return "parse error";
    case COEVO_ERR_NUMERICAL: return "numerical failure";
    case COEVO_ERR_IO: return "i/o error";
    case COEVO_ERR_PARTIAL: return "partial failure";
    case COEVO_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

int coevo_exit_code(coevo_status status) {
  switch (status) {
    case COEVO_OK: return 0;
    case COEVO_ERR_NUMERICAL: return 2;
    case COEVO_ERR_PARTIAL: return 3;
    default: return 1;
  }
}

void coevo_init_logging(void) {
  try {
    coevo::init_logging();
  } catch (...) {
  }
}

coevo_status coevo_game_coordination(size_t num_agents, coevo_game** out) {
  return guarded([&] {
    require(out, "null output");
    *out = new coevo_game{coevo::build_coordination_game(num_agents)};
    return COEVO_OK;
  });
}

coevo_status coevo_game_rps(size_t num_agents, double epsilon, coevo_game** out) {
  return guarded([&] {
    require(out, "null output");
    *out = new coevo_game{coevo::build_rps_game(num_agents, coevo::RpsParams{epsilon})};
    return COEVO_OK;
  });
}

coevo_status coevo_game_matrix(size_t num_agents, size_t num_actions, const double* payoff,
                               coevo_game** out) {
  return guarded([&] {
    require(out && payoff, "null argument");
    std::vector<std::vector<double>> a(num_actions, std::vector<double>(num_actions));
    for (size_t i = 0; i < num_actions; ++i)
      for (size_t j = 0; j < num_actions; ++j) a[i][j] = payoff[i * num_actions + j];
    *out = new coevo_game{coevo::build_matrix_game(num_agents, a)};
    return COEVO_OK;
  });
}

void coevo_game_free(coevo_game* game) { delete game; }

coevo_status coevo_game_shape(const coevo_game* game, size_t* num_agents, size_t* num_actions) {
  return guarded([&] {
    require(game && num_agents && num_actions, "null argument");
    *num_agents = game->spec.num_agents();
    *num_actions = game->spec.num_actions();
    return COEVO_OK;
  });
}

coevo_status coevo_game_payoff(const coevo_game* game, size_t x, size_t y, size_t i, size_t j,
                               double* out) {
  return guarded([&] {
    require(game && out, "null argument");
    *out = game->spec.payoff(x, y, i, j);
    return COEVO_OK;
  });
}

coevo_status coevo_link_rhs(coevo_link_game game, const double* c, double temperature,
                            double epsilon, double* out) {
  return guarded([&] {
    require(c && out, "null argument");
    const coevo::LinkState3 s{c[0], c[1], c[2]};
    const auto d = game == COEVO_LINK_RPS ? coevo::link_rhs_rps(s, temperature, epsilon)
                   : game == COEVO_LINK_COORDINATION
                       ? coevo::link_rhs_coordination(s, temperature)
                       : throw coevo::InvalidArgument("unknown link game");
    std::copy(d.begin(), d.end(), out);
    return COEVO_OK;
  });
}

coevo_status coevo_factored_rhs(const coevo_game* game, double temperature, const double* state,
                                size_t len, double* out) {
  return guarded([&] {
    require(game, "null game");
    const std::size_t n = game->spec.num_agents(), m = game->spec.num_actions();
    return vector_rhs(game, state, len, out, n * (n - 1) + n * m, [&](std::span<const double> x) {
      return coevo::factored_rhs(coevo::FactoredState(n, m, x), game->spec, temperature).flat();
    });
  });
}

coevo_status coevo_joint_rhs(const coevo_game* game, double temperature, const double* state,
                             size_t len, double* out) {
  return guarded([&] {
    require(game, "null game");
    const coevo::PairShape shape(game->spec);
    return vector_rhs(game, state, len, out, shape.size(), [&](std::span<const double> x) {
      const coevo::JointState s(shape, std::vector<double>(x.begin(), x.end()));
      return coevo::full_replicator_rhs(s, game->spec, temperature).values();
    });
  });
}

coevo_status coevo_interior_jacobian(coevo_link_game game, double temperature, double epsilon,
                                     double* out9) {
  return guarded([&] {
    require(out9, "null output");
    const Eigen::Matrix3d j = coevo::interior_jacobian(link_spec(game, epsilon), temperature);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out9[3 * r + c] = j(r, c);
    return COEVO_OK;
  });
}

coevo_status coevo_critical_temperature(coevo_link_game game, double epsilon, double lo, double hi,
                                        double tol, double* out) {
  return guarded([&] {
    require(out, "null output");
    *out = coevo::critical_temperature(link_spec(game, epsilon), lo, hi, tol).value;
    return COEVO_OK;
  });
}

coevo_status coevo_config_parse(const char* text, coevo_config** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new coevo_config{coevo::parse_config(text)};
    return COEVO_OK;
  });
}

coevo_status coevo_config_load(const char* path, coevo_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    std::ifstream is(path, std::ios::binary);
    if (!is) return fail(COEVO_ERR_IO, std::string("cannot read config file ") + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    *out = new coevo_config{coevo::parse_config(ss.str())};
    return COEVO_OK;
  });
}

void coevo_config_free(coevo_config* config) { delete config; }

coevo_status coevo_config_set_seed(coevo_config* config, uint64_t seed) {
  return guarded([&] {
    require(config, "null config");
    config->config.seed = seed;
    return COEVO_OK;
  });
}

coevo_status coevo_config_set_output(coevo_config* config, const char* dir) {
  return guarded([&] {
    require(config && dir, "null argument");
    config->config.output = dir;
    return COEVO_OK;
  });
}

coevo_status coevo_config_to_json(const coevo_config* config, char** out) {
  return guarded([&] {
    require(config && out, "null argument");
    const std::string s = coevo::serialize_config(config->config);
    char* buf = static_cast<char*>(std::malloc(s.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *out = buf;
    return COEVO_OK;
  });
}

void coevo_string_free(char* s) { std::free(s); }

coevo_status coevo_simulate(const coevo_config* config, coevo_trajectory** out) {
  return guarded([&] {
    require(config && out, "null argument");
    *out = new coevo_trajectory{coevo::simulate(config->config)};
    return COEVO_OK;
  });
}

void coevo_trajectory_free(coevo_trajectory* traj) { delete traj; }

size_t coevo_trajectory_rows(const coevo_trajectory* traj) { return traj ? traj->traj.size() : 0; }

size_t coevo_trajectory_dim(const coevo_trajectory* traj) {
  return traj ? traj->traj.names.size() : 0;
}

const char* coevo_trajectory_name(const coevo_trajectory* traj, size_t k) {
  if (!traj || k >= traj->traj.names.size()) return nullptr;
  return traj->traj.names[k].c_str();
}

double coevo_trajectory_time(const coevo_trajectory* traj, size_t row) {
  if (!traj || row >= traj->traj.size()) return 0.0;
  return traj->traj.times[row];
}

const double* coevo_trajectory_state(const coevo_trajectory* traj, size_t row) {
  if (!traj || row >= traj->traj.size()) return nullptr;
  return traj->traj.states[row].data();
}

coevo_status coevo_run(const coevo_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "null config");
    return from_command(coevo::cmd_run(config->config, out_path(out_dir)));
  });
}

coevo_status coevo_sweep(const coevo_config* config, const char* param, const double* grid,
                         size_t count, const char* out_dir, size_t jobs) {
  return guarded([&] {
    require(config && param, "null argument");
    require(count == 0 || grid, "null grid");
    const std::vector<double> values(grid, grid + count);
    return from_command(coevo::cmd_sweep(config->config, coevo::parse_sweep_param(param), values,
                                         out_path(out_dir), jobs));
  });
}

coevo_status coevo_analyze(const coevo_config* config, const char* out_dir, int critical_temp) {
  return guarded([&] {
    require(config, "null config");
    return from_command(
        coevo::cmd_analyze(config->config, out_path(out_dir), critical_temp != 0));
  });
}

coevo_status coevo_compare(const coevo_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "null config");
    return from_command(coevo::cmd_compare(config->config, out_path(out_dir)));
  });
}

coevo_status coevo_parse_grid(const char* text, double** values, size_t* count) {
  return guarded([&] {
    require(text && values && count, "null argument");
    const auto grid = coevo::parse_grid(text);
    double* buf = static_cast<double*>(std::malloc(std::max<size_t>(1, grid.size()) * sizeof(double)));
    if (!buf) throw std::bad_alloc();
    std::copy(grid.begin(), grid.end(), buf);
    *values = buf;
    *count = grid.size();
    return COEVO_OK;
  });
}

void coevo_doubles_free(double* values) { std::free(values); }

}  // extern "C"
