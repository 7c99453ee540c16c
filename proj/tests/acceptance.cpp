// Acceptance suite: one PASS/FAIL line per criterion A1..A9. Exit status is
// nonzero when any criterion fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coevo/analysis.hpp"
#include "coevo/dynamics.hpp"
#include "coevo/learning.hpp"
#include "coevo/rng.hpp"

using namespace coevo;
namespace fs = std::filesystem;

namespace tol {
constexpr double kA1Critical = 1e-3;
constexpr double kA2Critical = 1e-3;
constexpr double kA3FiniteDifference = 1e-5;
constexpr double kA4Drift = 1e-9;
constexpr double kA5Specialization = 1e-12;
constexpr double kA6Boundary = 1e-3;
constexpr double kA6Interior = 1e-4;
constexpr double kA7RatioLo = 0.3;
constexpr double kA7RatioHi = 0.7;
constexpr double kA7StdErrors = 4.0;
constexpr double kA8Residual = 1e-10;
constexpr double kA8Terminal = 1e-3;
}  // namespace tol

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double inf_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

Outcome a1() {
  const auto tc = critical_temperature(LinkSystemSpec::coordination(), 0.0, 1.0, 1e-6);
  const auto above = perturbation_check(LinkSystemSpec::coordination(), 0.3);
  const auto below = perturbation_check(LinkSystemSpec::coordination(), 0.2);
  const bool ok_tc = std::abs(tc.value - 0.25) <= tol::kA1Critical;
  // Back to the interior point at T = 0.3; carried far from it at T = 0.2.
  const bool ok_above = above.final_distance < 1e-6;
  const bool ok_below = below.final_distance > 10.0 * below.initial_distance;
  return {ok_tc && ok_above && ok_below,
          fmt("T_c=%.9f; T=0.3 final dist %.2e; T=0.2 final dist %.3f (start %.3f)", tc.value,
              above.final_distance, below.final_distance, below.initial_distance)};
}

Outcome a2() {
  const double pos = critical_temperature(LinkSystemSpec::rps(0.6), 0.0, 1.0, 1e-6).value;
  const double neg = critical_temperature(LinkSystemSpec::rps(-0.6), 0.0, 1.0, 1e-6).value;
  return {std::abs(pos - 0.05) <= tol::kA2Critical && std::abs(neg - 0.1) <= tol::kA2Critical,
          fmt("eps=0.6 -> %.9f, eps=-0.6 -> %.9f", pos, neg)};
}

Outcome a3() {
  bool displayed = true;
  for (double T : {0.0, 0.1, 0.25, 0.7}) {
    const Eigen::Matrix3d c = coordination_jacobian_interior(T);
    for (double eps : {-0.6, 0.2, 0.6}) {
      const Eigen::Matrix3d r = rps_jacobian_interior(T, eps);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          displayed = displayed && c(i, j) == (i == j ? -T : -0.25);
          displayed = displayed && std::abs(r(i, j) - (i == j ? -T : -eps / 12.0)) < 1e-15;
        }
    }
  }
  Rng rng(2024);
  double worst_interior = 0.0, worst_state = 0.0;
  const std::vector<double> mid{0.5, 0.5, 0.5};
  for (int draw = 0; draw < 100; ++draw) {
    const double T = rng.uniform();
    const double eps = 1.8 * rng.uniform() - 0.9;
    const LinkState3 c{0.02 + 0.96 * rng.uniform(), 0.02 + 0.96 * rng.uniform(),
                       0.02 + 0.96 * rng.uniform()};
    const std::vector<double> x(c.begin(), c.end());
    for (const LinkSystemSpec& spec : {LinkSystemSpec::coordination(), LinkSystemSpec::rps(eps)}) {
      const OdeSystem sys = link_system(spec, T);
      worst_interior = std::max(
          worst_interior, (numeric_jacobian(sys, mid) - interior_jacobian(spec, T)).cwiseAbs().maxCoeff());
      worst_state = std::max(
          worst_state, (numeric_jacobian(sys, x) - link_jacobian(spec, c, T)).cwiseAbs().maxCoeff());
    }
  }
  return {displayed && worst_interior < tol::kA3FiniteDifference &&
              worst_state < tol::kA3FiniteDifference,
          fmt("displayed entries %s; max |FD - analytic| interior %.2e, random states %.2e",
              displayed ? "exact" : "WRONG", worst_interior, worst_state)};
}

Outcome a4() {
  const OdeSystem sys = factored_system(build_coordination_game(3), 0.5);
  Rng rng(4);
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 1000.0;  // 1e5 steps
  cfg.record_every = 1;
  const Trajectory t = integrate(sys, random_state(sys.layout, rng), cfg);
  double drift = 0.0;
  for (const auto& s : t.states) drift = std::max(drift, sys.layout.max_simplex_drift(s));
  return {t.steps.back() == 100000 && drift <= tol::kA4Drift,
          fmt("%lld steps, max simplex drift %.2e", t.steps.back(), drift)};
}

Outcome a5() {
  Rng rng(5);
  double worst_c = 0.0, worst_r = 0.0;
  const GameSpec coord = build_coordination_game(3);
  const GameSpec rps = build_rps_game(3, RpsParams{-0.4});
  for (int draw = 0; draw < 1000; ++draw) {
    const LinkState3 c{rng.uniform(), rng.uniform(), rng.uniform()};
    const double T = rng.uniform();
    FactoredState fc(3, 2), fr(3, 3);
    set_links3(fc, c);
    set_links3(fr, c);
    for (Agent x = 0; x < 3; ++x) {
      fc.action(x, 0) = 1.0;
      for (Action i = 0; i < 3; ++i) fr.action(x, i) = 1.0 / 3.0;
    }
    const LinkState3 dc = links_of_factored(factored_rhs(fc, coord, T));
    const LinkState3 dr = links_of_factored(factored_rhs(fr, rps, T));
    const LinkState3 lc = link_rhs_coordination(c, T);
    const LinkState3 lr = link_rhs_rps(c, T, -0.4);
    for (int k = 0; k < 3; ++k) {
      worst_c = std::max(worst_c, std::abs(dc[k] - lc[k]));
      worst_r = std::max(worst_r, std::abs(dr[k] - lr[k]));
    }
  }
  return {worst_c <= tol::kA5Specialization && worst_r <= tol::kA5Specialization,
          fmt("max diff coordination %.2e, rps %.2e", worst_c, worst_r)};
}

// Distance to the nearest boundary NE family {c_k = 1, c_{k+1} = 0} under
// agent relabeling (cyclic shifts and reflections).
double family_distance(const std::vector<double>& c) {
  double d = INFINITY;
  for (int k = 0; k < 3; ++k) {
    const int n = (k + 1) % 3;
    d = std::min(d, std::max(std::abs(c[k] - 1.0), std::abs(c[n])));
    d = std::min(d, std::max(std::abs(c[k]), std::abs(c[n] - 1.0)));
  }
  return d;
}

Outcome a6() {
  Rng rng(6);
  IntegratorConfig cfg;
  cfg.t_end = 2000.0;
  cfg.record_every = 1000000;
  double worst_low = 0.0, worst_high = 0.0;
  for (int start = 0; start < 20; ++start) {
    const auto x0 = random_state(StateLayout::link3(), rng);
    const auto low = integrate(coordination_link_system(0.1), x0, cfg).states.back();
    const auto high = integrate(coordination_link_system(0.5), x0, cfg).states.back();
    worst_low = std::max(worst_low, family_distance(low));
    worst_high = std::max(worst_high, inf_dist(high, {0.5, 0.5, 0.5}));
  }
  const bool ok_low = worst_low <= tol::kA6Boundary;
  const bool ok_high = worst_high <= tol::kA6Interior;
  std::string detail = fmt("T=0.1 worst distance to boundary family %.3e (tol %.0e) %s; "
                           "T=0.5 worst distance to interior point %.2e %s",
                           worst_low, tol::kA6Boundary, ok_low ? "ok" : "FAIL", worst_high,
                           ok_high ? "ok" : "FAIL");
  if (!ok_low) {
    const auto rp = refine_rest_point(coordination_link_system(0.1),
                                      std::vector<double>{0.01, 0.5, 0.99});
    if (rp)
      detail += fmt("; T=0.1 attractor (%.6f, %.6f, %.6f) sits %.3e from the family", rp->state[0],
                    rp->state[1], rp->state[2], family_distance(rp->state));
  }
  return {ok_low && ok_high, detail};
}

double learning_deviation(double alpha, const JointState& p0, const GameSpec& g, double T,
                          double tau_end) {
  LearningParams lp;
  lp.alpha = alpha;
  lp.policy = PolicyParams(T);
  lp.rounds = std::llround(tau_end / lp.time_per_round());
  const Trajectory learn = run_learning(q_from_policy(p0, lp.policy), g, lp);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = tau_end;
  cfg.record_every = 10;
  const Trajectory ode = integrate(joint_system(g, T), p0.values(), cfg);
  return compare_to_ode(learn, ode).max_deviation;
}

Outcome a7() {
  const GameSpec g = build_coordination_game(3);
  const PairShape shape(g);
  const double T = 0.5;
  Rng rng(7);
  JointState p0(shape, random_state(StateLayout::joint(shape), rng));
  const double d02 = learning_deviation(0.02, p0, g, T, 20.0);
  const double d01 = learning_deviation(0.01, p0, g, T, 20.0);
  const double ratio = d01 / d02;
  const bool ok_ratio = ratio >= tol::kA7RatioLo && ratio <= tol::kA7RatioHi;

  // Sampled-mode reward estimates against expected_reward over seeds.
  const RewardEstimate expected = expected_reward(g, p0);
  const int seeds = 2000;
  const int rounds = 20;
  std::vector<double> sum(shape.size()), sq(shape.size());
  std::vector<int> count(shape.size());
  const Rng base(77);
  for (int s = 0; s < seeds; ++s) {
    Rng r = base.split(static_cast<std::uint64_t>(s));
    std::vector<double> acc(shape.size());
    std::vector<int> n(shape.size());
    for (int k = 0; k < rounds; ++k)
      for (const Encounter& e : sample_round(p0, g, r)) {
        const std::size_t idx = shape.index(e.initiator, e.partner, e.initiator_action);
        acc[idx] += e.initiator_payoff;
        ++n[idx];
      }
    for (std::size_t idx = 0; idx < shape.size(); ++idx)
      if (n[idx] > 0) {
        const double est = acc[idx] / n[idx];
        sum[idx] += est;
        sq[idx] += est * est;
        ++count[idx];
      }
  }
  double worst_z = 0.0;
  bool ok_bias = true;
  for (std::size_t idx = 0; idx < shape.size(); ++idx) {
    if (count[idx] < 2) {
      ok_bias = false;
      continue;
    }
    const double mean = sum[idx] / count[idx];
    const double var = std::max(0.0, (sq[idx] - count[idx] * mean * mean) / (count[idx] - 1));
    const double se = std::sqrt(var / count[idx]);
    const double gap = std::abs(mean - expected.values()[idx]);
    if (se == 0.0) {
      ok_bias = ok_bias && gap < 1e-15;
      continue;
    }
    worst_z = std::max(worst_z, gap / se);
    ok_bias = ok_bias && gap <= tol::kA7StdErrors * se;
  }
  return {ok_ratio && ok_bias,
          fmt("max dev alpha=0.02 %.3e, alpha=0.01 %.3e, ratio %.3f; sampled worst |z| %.2f over %d seeds",
              d02, d01, ratio, worst_z, seeds)};
}

Outcome a8() {
  const OdeSystem sys = rps_link_system(0.0, -0.5);
  const auto search = find_rest_points(sys, link_seed_grid({0.0, 0.5, 1.0}));
  double r_ones = INFINITY, r_zeros = INFINITY;
  for (const auto& p : search.points) {
    if (inf_dist(p.state, {1, 1, 1}) < 1e-12) r_ones = p.residual;
    if (inf_dist(p.state, {0, 0, 0}) < 1e-12) r_zeros = p.residual;
  }
  const bool found = r_ones < tol::kA8Residual && r_zeros < tol::kA8Residual;

  Rng rng(8);
  IntegratorConfig cfg;
  cfg.t_end = 1000.0;
  cfg.record_every = 1000000;
  double worst = 0.0;
  int to_ones = 0;
  for (int start = 0; start < 20; ++start) {
    const auto end = integrate(sys, random_state(sys.layout, rng), cfg).states.back();
    const double d1 = inf_dist(end, {1, 1, 1}), d0 = inf_dist(end, {0, 0, 0});
    worst = std::max(worst, std::min(d1, d0));
    to_ones += d1 < d0;
  }
  return {found && worst <= tol::kA8Terminal,
          fmt("(1,1,1) residual %.1e, (0,0,0) residual %.1e; 20 starts -> %d at (1,1,1), %d at (0,0,0), "
              "worst terminal distance %.2e",
              r_ones, r_zeros, to_ones, 20 - to_ones, worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome a9(const std::string& cli, const fs::path& work) {
  if (cli.empty()) return {false, "no --cli given"};
  fs::remove_all(work);
  fs::create_directories(work);
  std::ofstream(work / "link.json")
      << R"({"game": "coordination", "system": "link-only", "T": 0.15, "initial_state": "random",
             "integrator": {"t_end": 200, "record_every": 50}})";
  std::ofstream(work / "rps.json")
      << R"({"game": "rps", "epsilon": -0.5, "system": "link-only", "T": 0, "initial_state": "random",
             "integrator": {"method": "rk45", "t_end": 100}})";
  std::ofstream(work / "learn.json")
      << R"({"game": "coordination", "system": "full", "T": 0.5, "initial_state": "random",
             "learning": {"alpha": 0.02, "rounds": 400, "mode": "sampled", "K": 3}})";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run_link", "run --config link.json --seed 3"},
      {"run_rps", "run --config rps.json --seed 3"},
      {"run_learn", "run --config learn.json --seed 3"},
      {"sweep", "sweep --config link.json --seed 3 --grid 0.1:0.5:0.1 --jobs 3"},
      {"sweep_eps", "sweep --config rps.json --seed 3 --param epsilon --grid=-0.6,-0.2,0.3 --jobs 2"},
      {"analyze", "analyze --config rps.json --seed 3 --critical-temp"},
      {"compare", "compare --config learn.json --seed 3"},
  };
  std::size_t files = 0;
  for (const auto& [name, args] : commands) {
    for (int rep = 0; rep < 2; ++rep) {
      const std::string cmd = "cd '" + work.string() + "' && '" + cli + "' " + args + " --out " + name +
                              std::to_string(rep) + " 2>/dev/null";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) return {false, fmt("'%s' exited with status %d", args.c_str(), rc)};
    }
    const fs::path a = work / (name + "0"), b = work / (name + "1");
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (!entry.is_regular_file()) continue;
      const fs::path rel = fs::relative(entry.path(), a);
      std::string ca = slurp(entry.path()), cb = slurp(b / rel);
      if (rel.filename() == "manifest.json") {
        auto ja = nlohmann::json::parse(ca), jb = nlohmann::json::parse(cb);
        ja.erase("wall_time");
        jb.erase("wall_time");
        ca = ja.dump();
        cb = jb.dump();
      }
      if (ca != cb) return {false, name + ": " + rel.string() + " differs between reruns"};
      ++files;
    }
  }
  return {true, fmt("%zu files byte-identical across reruns of %zu commands", files, commands.size())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria A1-A9"};
  std::string cli;
  std::string work = (fs::temp_directory_path() / "coevo_acceptance").string();
  app.add_option("--cli", cli, "path to the coevo executable (A9)");
  app.add_option("--work", work, "scratch directory for A9");
  CLI11_PARSE(app, argc, argv);
  if (!cli.empty()) cli = fs::absolute(cli).string();

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8},
      {"A9", [&] { return a9(cli, work); }},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
