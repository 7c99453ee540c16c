#include "coevo/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "coevo/analysis.hpp"
#include "coevo/error.hpp"
#include "coevo/export.hpp"
#include "coevo/learning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace coevo {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path resolve_out(const RunConfig& config, const fs::path& out) {
  fs::path dir = out.empty() ? fs::path(config.output) : out;
  if (dir.empty()) throw InvalidArgument("no output directory: pass --out or set \"output\"");
  fs::create_directories(dir);
  return dir;
}

// Writes files under `root` and records them for the manifest.
class FileLog {
 public:
  explicit FileLog(fs::path root) : root_(std::move(root)) {}

  void write(const fs::path& rel, std::string_view content) {
    const std::string digest = write_file(root_ / rel, content);
    entries_.push_back({{"path", rel.generic_string()}, {"bytes", content.size()}, {"sha256", digest}});
  }
  void append(const json& entries) {
    for (const auto& e : entries) entries_.push_back(e);
  }
  const json& entries() const { return entries_; }
  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  json entries_ = json::array();
};

struct Manifest {
  std::string command;
  json config;
  json seeds = json::object();
  std::string started = utc_now();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  CommandResult finish(FileLog& files, int exit_code, const std::string& status, bool partial,
                       std::string message) const {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json m;
    m["tool"] = "coevo";
    m["version"] = COEVO_VERSION_STRING;
    m["command"] = command;
    m["config"] = config;
    m["seeds"] = seeds;
    m["status"] = status;
    m["partial"] = partial;
    m["files"] = files.entries();
    m["wall_time"] = {{"start", started}, {"end", utc_now()}, {"seconds", seconds}};
    write_file(files.root() / "manifest.json", dump_json(m));
    spdlog::info("{}: {}", command, message);
    return CommandResult{exit_code, std::move(m), std::move(message)};
  }
};

json describe(const RunConfig& c) {
  json j{{"game", to_string(c.game)},
         {"system", to_string(c.system)},
         {"num_agents", c.num_agents},
         {"T", c.temperature}};
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  return j;
}

struct RunPiece {
  Trajectory trajectory;
  std::optional<std::string> failure;
  double failure_time = 0.0;
};

JointState initial_policy(const RunConfig& c, const GameSpec& game) {
  JointState s(PairShape(game), make_initial_state(c));
  const auto bad = validate_simplex(s, 1e-9);
  if (!bad.empty()) throw InvalidArgument("initial state: " + bad.front().message);
  return s;
}

Trajectory learning_trajectory(const RunConfig& c) {
  const GameSpec game = make_game(c);
  const LearningParams params = learning_params(c);
  const QTable q0 = q_from_policy(initial_policy(c, game), params.policy);
  return run_learning(q0, game, params);
}

RunPiece ode_trajectory(const RunConfig& c) {
  const OdeSystem system = make_system(c);
  auto outcome = integrate_checked(system, make_initial_state(c), c.integrator);
  return RunPiece{std::move(outcome.trajectory), std::move(outcome.failure), outcome.failure_time};
}

RunPiece produce(const RunConfig& c) {
  if (c.learning) {
    try {
      return RunPiece{learning_trajectory(c), std::nullopt, 0.0};
    } catch (const NumericalFailure& e) {
      return RunPiece{Trajectory{}, std::string(e.what()), e.time()};
    }
  }
  return ode_trajectory(c);
}

json run_metadata(const RunConfig& c, const RunPiece& piece) {
  json m = describe(c);
  const Trajectory& t = piece.trajectory;
  m["kind"] = c.learning ? "learning" : "ode";
  m["coordinates"] = t.names;
  m["rows"] = t.size();
  if (t.size() > 0) {
    m["t_final"] = t.times.back();
    m["steps"] = t.steps.back();
  }
  m["initial_state_seed"] = initial_state_seed(c);
  m["status"] = piece.failure ? "numerical_failure" : "ok";
  if (piece.failure) {
    m["failure"] = *piece.failure;
    m["failure_time"] = piece.failure_time;
  }
  m.update(t.metadata);
  return m;
}

void write_run(FileLog& files, const fs::path& prefix, const RunConfig& c, const RunPiece& piece) {
  files.write(prefix / "trajectory.csv", trajectory_csv(piece.trajectory));
  files.write(prefix / "metadata.json", dump_json(run_metadata(c, piece)));
}

Manifest start_manifest(const std::string& command, const RunConfig& c) {
  Manifest m;
  m.command = command;
  m.config = config_to_json(c);
  m.seeds = {{"seed", c.seed}, {"initial_state", initial_state_seed(c)}};
  if (c.learning) m.seeds["learning"] = Rng(c.seed).split(1).next();
  return m;
}

std::string point_dir(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "point_%03zu", k);
  return buf;
}

struct SweepRow {
  double value = 0.0;
  std::string status = "ok";
  std::string error;
  std::vector<double> terminal;
  double max_rhs = std::numeric_limits<double>::quiet_NaN();
  std::string classification = "none";
  json files = json::array();
};

SweepRow sweep_point(const RunConfig& base, SweepParam param, double value, const fs::path& root,
                     const fs::path& rel) {
  SweepRow row;
  row.value = value;
  RunConfig c = base;
  try {
    if (param == SweepParam::temperature) c.temperature = value;
    else c.epsilon = value;
    // Same validation as the config parser applies.
    c = parse_config(serialize_config(c));
    fs::create_directories(root / rel);
    FileLog files(root);
    RunPiece piece = ode_trajectory(c);
    write_run(files, rel, c, piece);
    row.files = files.entries();
    if (piece.trajectory.size() > 0) row.terminal = piece.trajectory.states.back();
    if (piece.failure) {
      row.status = "numerical_failure";
      row.error = *piece.failure;
      return row;
    }
    const OdeSystem system = make_system(c);
    double m = 0.0;
    for (double v : system(row.terminal)) m = std::max(m, std::abs(v));
    row.max_rhs = m;
    RestPointOptions opts;
    opts.tol = c.analysis.rest_point_tol;
    if (auto rp = refine_rest_point(system, row.terminal, opts))
      row.classification = to_string(rp->classification);
  } catch (const ParseError& e) {
    // The line number refers to the regenerated config, not the user's file.
    const std::string what = e.what();
    const auto colon = what.find(": ");
    row.status = "invalid";
    row.error = colon == std::string::npos ? what : what.substr(colon + 2);
  } catch (const InvalidArgument& e) {
    row.status = "invalid";
    row.error = e.what();
  } catch (const NumericalFailure& e) {
    row.status = "numerical_failure";
    row.error = e.what();
  }
  return row;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::vector<double>> analysis_seeds(double temperature) {
  const std::vector<double> interior{0.01, 0.1, 0.5, 0.9, 0.99};
  auto seeds = link_seed_grid(interior);
  if (temperature == 0.0) {
    auto corners = link_seed_grid({0.0, 0.5, 1.0});
    seeds.insert(seeds.begin(), corners.begin(), corners.end());
  }
  return seeds;
}

LinkSystemSpec link_spec(const RunConfig& c) {
  if (c.system != SystemKind::link_only)
    throw InvalidArgument("analyze needs system \"link-only\"");
  return c.game == GameKind::rps ? LinkSystemSpec::rps(c.epsilon.value_or(0.0))
                                 : LinkSystemSpec::coordination();
}

}  // namespace

LearningParams learning_params(const RunConfig& c) {
  if (!c.learning) throw InvalidArgument("config has no \"learning\" section");
  LearningParams p;
  p.alpha = c.learning->alpha;
  p.policy = PolicyParams(c.temperature);
  p.rounds = c.learning->rounds;
  p.mode = c.learning->mode;
  p.interactions = c.learning->interactions;
  p.seed = Rng(c.seed).split(1).next();
  return p;
}

Trajectory simulate(const RunConfig& c) {
  if (c.learning) return learning_trajectory(c);
  return integrate(make_system(c), make_initial_state(c), c.integrator);
}

CommandResult cmd_run(const RunConfig& config, const fs::path& out) {
  FileLog files(resolve_out(config, out));
  Manifest manifest = start_manifest("run", config);
  const RunPiece piece = produce(config);
  write_run(files, "", config, piece);
  if (piece.failure)
    return manifest.finish(files, kExitNumerical, "numerical_failure", true,
                           "numerical failure: " + *piece.failure);
  return manifest.finish(files, kExitOk, "ok", false,
                         "wrote " + std::to_string(piece.trajectory.size()) + " rows");
}

CommandResult cmd_sweep(const RunConfig& config, SweepParam param, const std::vector<double>& grid,
                        const fs::path& out, std::size_t jobs) {
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  if (config.learning) throw InvalidArgument("sweeps integrate the ODE; remove the \"learning\" section");
  if (param == SweepParam::epsilon && config.game != GameKind::rps)
    throw InvalidArgument("epsilon sweeps need game \"rps\"");
  if (jobs == 0) throw InvalidArgument("--jobs must be at least 1");

  FileLog files(resolve_out(config, out));
  Manifest manifest = start_manifest("sweep", config);
  const std::string pname = param == SweepParam::temperature ? "T" : "epsilon";
  manifest.config["sweep"] = {{"param", pname}, {"grid", grid}};

  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < grid.size(); k = next++) {
      spdlog::debug("sweep point {} ({} = {})", k, pname, grid[k]);
      rows[k] = sweep_point(config, param, grid[k], files.root(), point_dir(k));
    }
  };
  const std::size_t n_threads = std::min(jobs, grid.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const OdeSystem probe = make_system(config);
  std::ostringstream csv;
  csv << "point," << pname << ",status";
  for (const auto& name : probe.names) csv << ",final_" << name;
  csv << ",max_abs_rhs,classification,error\n";
  std::size_t failed = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const SweepRow& r = rows[k];
    if (r.status != "ok") ++failed;
    csv << k << ',' << format_double(r.value) << ',' << r.status;
    for (std::size_t a = 0; a < probe.dim(); ++a)
      csv << ',' << (a < r.terminal.size() ? format_double(r.terminal[a]) : std::string());
    csv << ',' << (std::isnan(r.max_rhs) ? std::string() : format_double(r.max_rhs)) << ','
        << r.classification << ',' << csv_field(r.error) << '\n';
    files.append(r.files);
  }
  files.write("summary.csv", csv.str());

  const std::string msg = std::to_string(grid.size() - failed) + "/" + std::to_string(grid.size()) +
                          " points succeeded";
  if (failed > 0) return manifest.finish(files, kExitPartial, "partial", true, msg);
  return manifest.finish(files, kExitOk, "ok", false, msg);
}

CommandResult cmd_analyze(const RunConfig& config, const fs::path& out, bool critical_temp) {
  const LinkSystemSpec spec = link_spec(config);
  FileLog files(resolve_out(config, out));
  Manifest manifest = start_manifest("analyze", config);
  manifest.config["critical_temp"] = critical_temp;

  const OdeSystem system = make_system(config);
  RestPointOptions opts;
  opts.tol = config.analysis.rest_point_tol;
  opts.allow_boundary = config.temperature == 0.0;
  const RestPointSearch search = find_rest_points(system, analysis_seeds(config.temperature), opts);
  json rp = describe(config);
  rp["coordinates"] = system.names;
  rp.update(to_json(search));
  files.write("rest_points.json", dump_json(rp));

  if (critical_temp) {
    const CriticalTemperature tc =
        critical_temperature(spec, config.analysis.bracket_lo, config.analysis.bracket_hi,
                             config.analysis.tol);
    json j = describe(config);
    j.erase("T");
    j["critical_temperature"] = to_json(tc);
    j["verification"] = to_json(verify_critical_temperature(spec, tc));
    files.write("critical_temperature.json", dump_json(j));
  }
  return manifest.finish(files, kExitOk, "ok", false,
                         std::to_string(search.points.size()) + " rest points");
}

CommandResult cmd_compare(const RunConfig& config, const fs::path& out) {
  if (!config.learning) throw InvalidArgument("compare needs a \"learning\" section");
  FileLog files(resolve_out(config, out));
  Manifest manifest = start_manifest("compare", config);

  const Trajectory learn = learning_trajectory(config);
  IntegratorConfig ic = config.integrator;
  ic.t_end = learn.times.back();
  const OdeSystem system = joint_system(make_game(config), config.temperature);
  auto ode = integrate_checked(system, make_initial_state(config), ic);

  files.write("learning.csv", trajectory_csv(learn));
  files.write("ode.csv", trajectory_csv(ode.trajectory));
  json j = describe(config);
  j["learning"] = learn.metadata["learning"];
  j["ode"] = ode.trajectory.metadata;
  if (ode.failure) {
    j["status"] = "numerical_failure";
    j["failure"] = *ode.failure;
    files.write("comparison.json", dump_json(j));
    return manifest.finish(files, kExitNumerical, "numerical_failure", true,
                           "ODE failed: " + *ode.failure);
  }
  const DeviationReport report = compare_to_ode(learn, ode.trajectory);
  j["status"] = "ok";
  j["deviation"] = to_json(report);
  files.write("comparison.json", dump_json(j));
  return manifest.finish(files, kExitOk, "ok", false,
                         "max deviation " + format_double(report.max_deviation));
}

std::vector<double> parse_grid(std::string_view text) {
  auto number = [&](std::string_view s) {
    std::string str(s);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(str, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("grid: cannot parse '" + str + "'");
    }
    while (used < str.size() && std::isspace(static_cast<unsigned char>(str[used]))) ++used;
    if (used != str.size() || !std::isfinite(v)) throw InvalidArgument("grid: cannot parse '" + str + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos)
      throw InvalidArgument("grid: expected a:b:step");
    const double a = number(text.substr(0, c1));
    const double b = number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = number(text.substr(c2 + 1));
    if (!(step > 0.0)) throw InvalidArgument("grid: step must be positive");
    if (b < a) throw InvalidArgument("grid: end is below start");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count > 1000000) throw InvalidArgument("grid: too many points");
    for (std::size_t k = 0; k < count; ++k) out.push_back(a + static_cast<double>(k) * step);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                        : comma - pos);
    if (piece.find_first_not_of(" \t") == std::string_view::npos) {
      if (comma == std::string_view::npos && out.empty() && piece.empty()) break;
      throw InvalidArgument("grid: empty entry");
    }
    out.push_back(number(piece));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "T") return SweepParam::temperature;
  if (name == "epsilon") return SweepParam::epsilon;
  throw InvalidArgument("sweep parameter must be \"T\" or \"epsilon\"");
}

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("coevo");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("COEVO_LOG")) {
      const auto parsed = spdlog::level::from_str(env);
      // from_str maps unknown names to off; keep the default for those.
      if (parsed != spdlog::level::off || std::string_view(env) == "off") level = parsed;
    }
    spdlog::set_level(level);
  });
}

}  // namespace coevo
