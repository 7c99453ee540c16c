#include "coevo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coevo/error.hpp"

namespace coevo {

namespace {

void check_temperature(double temperature) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature))
    throw InvalidArgument("temperature must be finite and >= 0");
}

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

void check_finite(std::span<const double> values, const char* what) {
  for (std::size_t k = 0; k < values.size(); ++k)
    if (!std::isfinite(values[k])) {
      std::ostringstream msg;
      msg << what << ": non-finite derivative at index " << k;
      throw NumericalFailure(msg.str());
    }
}

void joint_rhs_flat(const PairShape& shape, const GameSpec& game, double temperature,
                    std::span<const double> p, std::span<double> dp) {
  const std::size_t n = shape.num_agents(), m = shape.num_actions();
  const std::size_t block = shape.block_size();
  std::vector<double> fitness(block);
  for (Agent x = 0; x < n; ++x) {
    auto px = p.subspan(x * block, block);
    auto dx = dp.subspan(x * block, block);
    // fitness of (y, i): sum_j A_xy^ij p_yx^j
    double mean_fitness = 0.0, mass = 0.0;
    for (std::size_t s = 0; s < shape.num_partners(); ++s) {
      const Agent y = shape.partner(x, s);
      for (Action i = 0; i < m; ++i) {
        double f = 0.0;
        for (Action j = 0; j < m; ++j) f += game.at(x, y, i, j) * p[shape.index(y, x, j)];
        fitness[s * m + i] = f;
        mean_fitness += px[s * m + i] * f;
        mass += px[s * m + i];
      }
    }
    double neg_entropy = 0.0;
    if (temperature > 0.0)
      for (double v : px) neg_entropy += v * safe_log(v);
    for (std::size_t k = 0; k < block; ++k) {
      double rate = fitness[k] - mean_fitness;
      if (temperature > 0.0) rate += temperature * (neg_entropy - mass * safe_log(px[k]));
      dx[k] = px[k] * rate;
    }
  }
  check_finite(dp, "full replicator");
}

// Flat factored layout: links (n x (n-1)) then actions (n x m).
void factored_rhs_flat(std::size_t n, std::size_t m, const GameSpec& game, double temperature,
                       std::span<const double> state, std::span<double> out) {
  const std::size_t partners = n - 1;
  auto slot = [](Agent x, Agent y) { return y < x ? y : y - 1; };
  auto c = [&](Agent x, Agent y) { return state[x * partners + slot(x, y)]; };
  auto p = [&](Agent x, Action i) { return state[n * partners + x * m + i]; };

  std::vector<double> action_fitness(m);
  for (Agent x = 0; x < n; ++x) {
    // Mutual-selection weight c_xy c_yx scales every encounter.
    std::fill(action_fitness.begin(), action_fitness.end(), 0.0);
    double shared = 0.0;
    for (Agent y = 0; y < n; ++y) {
      if (y == x) continue;
      const double w = c(x, y) * c(y, x);
      for (Action i = 0; i < m; ++i) {
        double f = 0.0;
        for (Action j = 0; j < m; ++j) f += game.at(x, y, i, j) * p(y, j);
        action_fitness[i] += w * f;
      }
    }
    for (Action i = 0; i < m; ++i) shared += p(x, i) * action_fitness[i];

    // Actions.
    double action_mass = 0.0, action_negent = 0.0;
    for (Action i = 0; i < m; ++i) {
      action_mass += p(x, i);
      if (temperature > 0.0) action_negent += p(x, i) * safe_log(p(x, i));
    }
    for (Action i = 0; i < m; ++i) {
      double rate = action_fitness[i] - shared;
      if (temperature > 0.0)
        rate += temperature * (action_negent - action_mass * safe_log(p(x, i)));
      out[n * partners + x * m + i] = p(x, i) * rate;
    }

    // Links.
    double link_mass = 0.0, link_negent = 0.0;
    for (Agent y = 0; y < n; ++y) {
      if (y == x) continue;
      link_mass += c(x, y);
      if (temperature > 0.0) link_negent += c(x, y) * safe_log(c(x, y));
    }
    for (Agent y = 0; y < n; ++y) {
      if (y == x) continue;
      double pair_payoff = 0.0;
      for (Action i = 0; i < m; ++i)
        for (Action j = 0; j < m; ++j) pair_payoff += game.at(x, y, i, j) * p(x, i) * p(y, j);
      double rate = c(y, x) * pair_payoff - shared;
      if (temperature > 0.0)
        rate += temperature * (link_negent - link_mass * safe_log(c(x, y)));
      out[x * partners + slot(x, y)] = c(x, y) * rate;
    }
  }
  check_finite(out, "factored replicator");
}

// Unchecked: Runge-Kutta stages may sit marginally outside [0,1].
void link_rhs_flat(std::span<const double> c, double temperature, double scale,
                   std::span<double> d) {
  for (std::size_t k = 0; k < 3; ++k) {
    const double self = c[k];
    const double other_a = c[(k + 1) % 3];
    const double other_b = c[(k + 2) % 3];
    d[k] = self * (1.0 - self) * scale * (1.0 - other_a - other_b);
    if (temperature > 0.0) d[k] += temperature * binary_entropy_drift(self);
  }
}

LinkState3 link_rhs(const LinkState3& c, double temperature, double scale) {
  check_temperature(temperature);
  for (double v : c)
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("link weights must lie in [0,1]");
  LinkState3 d{};
  link_rhs_flat(c, temperature, scale, d);
  return d;
}

}  // namespace

double binary_entropy_drift(double c) {
  if (c <= kProbFloor || c >= 1.0 - kProbFloor) return 0.0;
  return c * (1.0 - c) * std::log((1.0 - c) / c);
}

JointState full_replicator_rhs(const JointState& s, const GameSpec& game, double temperature) {
  check_temperature(temperature);
  if (!(s.shape() == PairShape(game))) throw InvalidArgument("state shape does not match game");
  JointState d(s.shape());
  joint_rhs_flat(s.shape(), game, temperature, s.values(), d.values());
  return d;
}

FactoredState factored_rhs(const FactoredState& f, const GameSpec& game, double temperature) {
  check_temperature(temperature);
  if (f.num_agents() != game.num_agents() || f.num_actions() != game.num_actions())
    throw InvalidArgument("state shape does not match game");
  const auto in = f.flat();
  std::vector<double> out(in.size());
  factored_rhs_flat(f.num_agents(), f.num_actions(), game, temperature, in, out);
  return FactoredState(f.num_agents(), f.num_actions(), out);
}

LinkState3 link_rhs_coordination(const LinkState3& c, double temperature) {
  return link_rhs(c, temperature, 1.0);
}

LinkState3 link_rhs_rps(const LinkState3& c, double temperature, double epsilon) {
  if (!(epsilon > -1.0 && epsilon < 1.0))
    throw InvalidArgument("rps epsilon must lie strictly inside (-1, 1)");
  return link_rhs(c, temperature, epsilon / 3.0);
}

LinkState3 links_of_factored(const FactoredState& f) {
  if (f.num_agents() != 3) throw InvalidArgument("link reduction needs exactly 3 agents");
  return {f.link(0, 1), f.link(1, 2), f.link(2, 0)};
}

void set_links3(FactoredState& f, const LinkState3& c) {
  if (f.num_agents() != 3) throw InvalidArgument("link reduction needs exactly 3 agents");
  f.link(0, 1) = c[0];
  f.link(0, 2) = 1.0 - c[0];
  f.link(1, 2) = c[1];
  f.link(1, 0) = 1.0 - c[1];
  f.link(2, 0) = c[2];
  f.link(2, 1) = 1.0 - c[2];
}

std::vector<double> OdeSystem::operator()(std::span<const double> x) const {
  std::vector<double> out(x.size());
  rhs(x, out);
  return out;
}

OdeSystem coordination_link_system(double temperature) {
  check_temperature(temperature);
  return OdeSystem{StateLayout::link3(),
                   [temperature](std::span<const double> x, std::span<double> out) {
                     link_rhs_flat(x, temperature, 1.0, out);
                   },
                   {"c_xy", "c_yz", "c_zx"}};
}

OdeSystem rps_link_system(double temperature, double epsilon) {
  check_temperature(temperature);
  if (!(epsilon > -1.0 && epsilon < 1.0))
    throw InvalidArgument("rps epsilon must lie strictly inside (-1, 1)");
  return OdeSystem{StateLayout::link3(),
                   [temperature, epsilon](std::span<const double> x, std::span<double> out) {
                     link_rhs_flat(x, temperature, epsilon / 3.0, out);
                   },
                   {"c_xy", "c_yz", "c_zx"}};
}

OdeSystem factored_system(const GameSpec& game, double temperature) {
  check_temperature(temperature);
  const std::size_t n = game.num_agents(), m = game.num_actions();
  return OdeSystem{StateLayout::factored(n, m),
                   [game, temperature, n, m](std::span<const double> x, std::span<double> out) {
                     factored_rhs_flat(n, m, game, temperature, x, out);
                   },
                   factored_coordinate_names(n, m)};
}

OdeSystem joint_system(const GameSpec& game, double temperature) {
  check_temperature(temperature);
  const PairShape shape(game);
  return OdeSystem{StateLayout::joint(shape),
                   [game, temperature, shape](std::span<const double> x, std::span<double> out) {
                     joint_rhs_flat(shape, game, temperature, x, out);
                   },
                   joint_coordinate_names(shape)};
}

std::string agent_label(std::size_t num_agents, Agent a) {
  static const char* kNames[] = {"x", "y", "z"};
  if (num_agents <= 3) return kNames[a];
  return std::to_string(a + 1);
}

std::vector<std::string> joint_coordinate_names(const PairShape& shape) {
  std::vector<std::string> names;
  const std::size_t n = shape.num_agents();
  for (Agent x = 0; x < n; ++x)
    for (std::size_t s = 0; s < shape.num_partners(); ++s)
      for (Action i = 0; i < shape.num_actions(); ++i)
        names.push_back("p_" + agent_label(n, x) + "_" + agent_label(n, shape.partner(x, s)) +
                        "_" + std::to_string(i + 1));
  return names;
}

std::vector<std::string> factored_coordinate_names(std::size_t n, std::size_t m) {
  std::vector<std::string> names;
  for (Agent x = 0; x < n; ++x)
    for (Agent y = 0; y < n; ++y)
      if (y != x) names.push_back("c_" + agent_label(n, x) + "_" + agent_label(n, y));
  for (Agent x = 0; x < n; ++x)
    for (Action i = 0; i < m; ++i)
      names.push_back("p_" + agent_label(n, x) + "_" + std::to_string(i + 1));
  return names;
}

void IntegratorConfig::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be positive");
  if (record_every < 1) throw InvalidArgument("record_every must be >= 1");
  if (method == IntegratorMethod::rk4) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  } else {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
      throw InvalidArgument("rk45 tolerances must be positive");
    if (!(dt_init > 0.0)) throw InvalidArgument("dt_init must be positive");
  }
}

const char* to_string(IntegratorMethod m) {
  return m == IntegratorMethod::rk4 ? "rk4" : "rk45";
}

void Trajectory::push(double t, long long step, std::vector<double> state) {
  times.push_back(t);
  steps.push_back(step);
  states.push_back(std::move(state));
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

struct Stepper {
  const OdeSystem& system;
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp;

  explicit Stepper(const OdeSystem& s) : system(s) {
    const std::size_t d = s.dim();
    for (auto* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &tmp}) v->assign(d, 0.0);
  }

  void eval(std::span<const double> x, std::vector<double>& out) { system.rhs(x, out); }

  // Classical fourth-order step; writes into y.
  void rk4(std::vector<double>& y, double h) {
    const std::size_t d = y.size();
    eval(y, k1);
    for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + 0.5 * h * k1[a];
    eval(tmp, k2);
    for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + 0.5 * h * k2[a];
    eval(tmp, k3);
    for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + h * k3[a];
    eval(tmp, k4);
    for (std::size_t a = 0; a < d; ++a)
      y[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
  }

  // Dormand-Prince 5(4). Returns the scaled error norm; candidate in y5.
  double dopri(const std::vector<double>& y, double h, double abs_tol, double rel_tol,
               std::vector<double>& y5) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    const std::size_t d = y.size();
    eval(y, k1);
    for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + h * a21 * k1[a];
    eval(tmp, k2);
    for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + h * (a31 * k1[a] + a32 * k2[a]);
    eval(tmp, k3);
    for (std::size_t a = 0; a < d; ++a)
      tmp[a] = y[a] + h * (a41 * k1[a] + a42 * k2[a] + a43 * k3[a]);
    eval(tmp, k4);
    for (std::size_t a = 0; a < d; ++a)
      tmp[a] = y[a] + h * (a51 * k1[a] + a52 * k2[a] + a53 * k3[a] + a54 * k4[a]);
    eval(tmp, k5);
    for (std::size_t a = 0; a < d; ++a)
      tmp[a] = y[a] + h * (a61 * k1[a] + a62 * k2[a] + a63 * k3[a] + a64 * k4[a] + a65 * k5[a]);
    eval(tmp, k6);
    for (std::size_t a = 0; a < d; ++a)
      y5[a] = y[a] + h * (b1 * k1[a] + b3 * k3[a] + b4 * k4[a] + b5 * k5[a] + b6 * k6[a]);
    eval(y5, k7);
    double err = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double e =
          h * (e1 * k1[a] + e3 * k3[a] + e4 * k4[a] + e5 * k5[a] + e6 * k6[a] + e7 * k7[a]);
      const double scale = abs_tol + rel_tol * std::max(std::abs(y[a]), std::abs(y5[a]));
      err += (e / scale) * (e / scale);
    }
    return std::sqrt(err / static_cast<double>(d));
  }
};

}  // namespace

IntegrationOutcome integrate_checked(const OdeSystem& system, std::vector<double> state,
                                     const IntegratorConfig& config) {
  config.validate();
  if (state.size() != system.dim())
    throw InvalidArgument("initial state has " + std::to_string(state.size()) +
                          " coordinates, system needs " + std::to_string(system.dim()));
  if (!all_finite(state)) throw InvalidArgument("initial state is not finite");

  IntegrationOutcome outcome;
  Trajectory& traj = outcome.trajectory;
  traj.names = system.names;
  traj.metadata["integrator"] = {{"method", to_string(config.method)},
                                 {"dt", config.dt},
                                 {"t_end", config.t_end},
                                 {"record_every", config.record_every}};
  if (config.method == IntegratorMethod::rk45) {
    traj.metadata["integrator"]["abs_tol"] = config.abs_tol;
    traj.metadata["integrator"]["rel_tol"] = config.rel_tol;
    traj.metadata["integrator"]["dt_init"] = config.dt_init;
  }
  traj.push(0.0, 0, state);

  auto fail = [&](const std::string& what, double t) {
    outcome.failure = what;
    outcome.failure_time = t;
    return outcome;
  };

  Stepper stepper(system);
  try {
    if (config.method == IntegratorMethod::rk4) {
      const double raw = config.t_end / config.dt;
      const auto n_steps = static_cast<long long>(std::ceil(raw - 1e-9 * raw));
      for (long long k = 1; k <= n_steps; ++k) {
        const double t_prev = static_cast<double>(k - 1) * config.dt;
        const double t = k == n_steps ? config.t_end : static_cast<double>(k) * config.dt;
        stepper.rk4(state, t - t_prev);
        if (!all_finite(state)) return fail("non-finite state at t=" + std::to_string(t), t);
        system.layout.project(state);
        if (k % static_cast<long long>(config.record_every) == 0 || k == n_steps)
          traj.push(t, k, state);
      }
    } else {
      std::vector<double> candidate(state.size());
      double t = 0.0, h = std::min(config.dt_init, config.t_end);
      long long accepted = 0;
      while (t < config.t_end) {
        const bool last = t + h >= config.t_end;
        const double step = last ? config.t_end - t : h;
        const double err = stepper.dopri(state, step, config.abs_tol, config.rel_tol, candidate);
        if (!std::isfinite(err)) return fail("non-finite error estimate", t);
        if (err <= 1.0) {
          t = last ? config.t_end : t + step;
          state.swap(candidate);
          system.layout.project(state);
          ++accepted;
          if (accepted % static_cast<long long>(config.record_every) == 0 || last)
            traj.push(t, accepted, state);
        }
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = step * factor;
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
          return fail("adaptive step size underflow at t=" + std::to_string(t), t);
      }
    }
  } catch (const NumericalFailure& e) {
    const double t = traj.times.empty() ? 0.0 : traj.times.back();
    return fail(e.what(), t);
  }
  return outcome;
}

Trajectory integrate(const OdeSystem& system, std::vector<double> state0,
                     const IntegratorConfig& config) {
  auto outcome = integrate_checked(system, std::move(state0), config);
  if (outcome.failure) throw NumericalFailure(*outcome.failure, outcome.failure_time);
  return std::move(outcome.trajectory);
}

}  // namespace coevo
