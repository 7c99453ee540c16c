/* C interface to the coevo library. All functions return a coevo_status;
 * on failure coevo_last_error() describes the problem (per thread). */
#ifndef COEVO_COEVO_H
#define COEVO_COEVO_H

#include <stddef.h>
#include <stdint.h>

#if defined(COEVO_BUILDING_LIBRARY)
#define COEVO_API __attribute__((visibility("default")))
#else
#define COEVO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum coevo_status {
  COEVO_OK = 0,
  COEVO_ERR_INVALID_ARGUMENT = 1,
  COEVO_ERR_PARSE = 2,
  COEVO_ERR_NUMERICAL = 3,
  COEVO_ERR_IO = 4,
  COEVO_ERR_PARTIAL = 5, /* some sweep points failed */
  COEVO_ERR_INTERNAL = 6
} coevo_status;

typedef enum coevo_link_game {
  COEVO_LINK_COORDINATION = 0,
  COEVO_LINK_RPS = 1
} coevo_link_game;

typedef struct coevo_game coevo_game;
typedef struct coevo_config coevo_config;
typedef struct coevo_trajectory coevo_trajectory;

COEVO_API const char* coevo_version(void);
COEVO_API const char* coevo_last_error(void);
COEVO_API const char* coevo_status_name(coevo_status status);
/* 0 ok, 1 usage/parse, 2 numerical, 3 partial sweep. */
COEVO_API int coevo_exit_code(coevo_status status);
/* Reads COEVO_LOG once. */
COEVO_API void coevo_init_logging(void);

/* Games. Indices are 0-based. */
COEVO_API coevo_status coevo_game_coordination(size_t num_agents, coevo_game** out);
COEVO_API coevo_status coevo_game_rps(size_t num_agents, double epsilon, coevo_game** out);
/* Row-major m x m payoff shared by every ordered pair. */
COEVO_API coevo_status coevo_game_matrix(size_t num_agents, size_t num_actions,
                                         const double* payoff, coevo_game** out);
COEVO_API void coevo_game_free(coevo_game* game);
COEVO_API coevo_status coevo_game_shape(const coevo_game* game, size_t* num_agents,
                                        size_t* num_actions);
COEVO_API coevo_status coevo_game_payoff(const coevo_game* game, size_t x, size_t y, size_t i,
                                         size_t j, double* out);

/* Vector fields. `len` must equal the state dimension:
 * factored n(n-1) + n m, joint n(n-1) m, link 3. */
COEVO_API coevo_status coevo_link_rhs(coevo_link_game game, const double* c, double temperature,
                                      double epsilon, double* out);
COEVO_API coevo_status coevo_factored_rhs(const coevo_game* game, double temperature,
                                          const double* state, size_t len, double* out);
COEVO_API coevo_status coevo_joint_rhs(const coevo_game* game, double temperature,
                                       const double* state, size_t len, double* out);

/* Analytic Jacobian at (1/2, 1/2, 1/2), row-major 3x3. */
COEVO_API coevo_status coevo_interior_jacobian(coevo_link_game game, double temperature,
                                               double epsilon, double* out9);
COEVO_API coevo_status coevo_critical_temperature(coevo_link_game game, double epsilon, double lo,
                                                  double hi, double tol, double* out);

/* Configuration. */
COEVO_API coevo_status coevo_config_parse(const char* text, coevo_config** out);
COEVO_API coevo_status coevo_config_load(const char* path, coevo_config** out);
COEVO_API void coevo_config_free(coevo_config* config);
COEVO_API coevo_status coevo_config_set_seed(coevo_config* config, uint64_t seed);
COEVO_API coevo_status coevo_config_set_output(coevo_config* config, const char* dir);
/* Caller frees *out with coevo_string_free. */
COEVO_API coevo_status coevo_config_to_json(const coevo_config* config, char** out);
COEVO_API void coevo_string_free(char* s);

/* Trajectories: integrates (or runs learning for) the configured system
 * without writing files. */
COEVO_API coevo_status coevo_simulate(const coevo_config* config, coevo_trajectory** out);
COEVO_API void coevo_trajectory_free(coevo_trajectory* traj);
COEVO_API size_t coevo_trajectory_rows(const coevo_trajectory* traj);
COEVO_API size_t coevo_trajectory_dim(const coevo_trajectory* traj);
COEVO_API const char* coevo_trajectory_name(const coevo_trajectory* traj, size_t k);
COEVO_API double coevo_trajectory_time(const coevo_trajectory* traj, size_t row);
COEVO_API const double* coevo_trajectory_state(const coevo_trajectory* traj, size_t row);

/* Commands. out_dir may be NULL to use the config's output. */
COEVO_API coevo_status coevo_run(const coevo_config* config, const char* out_dir);
/* param is "T" or "epsilon". */
COEVO_API coevo_status coevo_sweep(const coevo_config* config, const char* param,
                                   const double* grid, size_t count, const char* out_dir,
                                   size_t jobs);
COEVO_API coevo_status coevo_analyze(const coevo_config* config, const char* out_dir,
                                     int critical_temp);
COEVO_API coevo_status coevo_compare(const coevo_config* config, const char* out_dir);

/* "a:b:step" or "v1,v2,...". Caller frees *values with coevo_doubles_free. */
COEVO_API coevo_status coevo_parse_grid(const char* text, double** values, size_t* count);
COEVO_API void coevo_doubles_free(double* values);

#ifdef __cplusplus
}
#endif

#endif
