#include "coevo/config.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "coevo/error.hpp"
#include "coevo/rng.hpp"

namespace coevo {

using nlohmann::json;

const char* to_string(GameKind g) {
  switch (g) {
    case GameKind::coordination: return "coordination";
    case GameKind::rps: return "rps";
    case GameKind::matrix: return "matrix";
  }
  return "coordination";
}

const char* to_string(SystemKind s) {
  switch (s) {
    case SystemKind::full: return "full";
    case SystemKind::factored: return "factored";
    case SystemKind::link_only: return "link-only";
  }
  return "full";
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const int line = line_of(key);
    throw ParseError(key, line, "line " + std::to_string(line) + ": '" + key + "': " + msg);
  }

  // Line of the first occurrence of "key" in the text, 1 if absent.
  int line_of(const std::string& key) const {
    const std::string leaf = key.substr(key.rfind('.') == std::string::npos ? 0 : key.rfind('.') + 1);
    const auto pos = text_.find("\"" + leaf + "\"");
    if (pos == std::string_view::npos) return 1;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  int line_at(std::size_t byte) const {
    byte = std::min(byte, text_.size());
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
  }

  void check_keys(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : obj.items())
      if (!allowed.contains(k)) fail(prefix + k, "unknown key");
  }

  double number(const json& obj, const std::string& key, const std::string& path) const {
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }

  std::uint64_t unsigned_int(const json& obj, const std::string& key, const std::string& path) const {
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const json& obj, const std::string& key, const std::string& path) const {
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

 private:
  std::string_view text_;
};

const std::set<std::string> kTopKeys = {"game", "epsilon", "matrix", "num_agents", "system",
                                        "T", "integrator", "learning", "initial_state",
                                        "analysis", "seed", "output"};
const std::set<std::string> kIntegratorKeys = {"method", "dt", "t_end", "record_every",
                                               "abs_tol", "rel_tol", "dt_init"};
const std::set<std::string> kLearningKeys = {"alpha", "rounds", "mode", "K"};
const std::set<std::string> kAnalysisKeys = {"bracket", "tol", "rest_point_tol"};

InitialState parse_initial_state(const Reader& r, const json& v) {
  InitialState s;
  if (v.is_string()) {
    const auto text = v.get<std::string>();
    static const std::regex random_re(R"(random\((\d+)\))");
    std::smatch m;
    if (text == "uniform") {
      s.kind = InitialState::Kind::uniform;
    } else if (text == "random") {
      s.kind = InitialState::Kind::random;
    } else if (std::regex_match(text, m, random_re)) {
      s.kind = InitialState::Kind::random;
      try {
        s.seed = std::stoull(m[1].str());
      } catch (const std::exception&) {
        r.fail("initial_state", "seed out of range");
      }
    } else {
      r.fail("initial_state", "expected \"uniform\", \"random\", \"random(<seed>)\" or an array");
    }
  } else if (v.is_array()) {
    s.kind = InitialState::Kind::values;
    for (const auto& e : v) {
      if (!e.is_number()) r.fail("initial_state", "explicit state must be an array of numbers");
      s.values.push_back(e.get<double>());
    }
  } else {
    r.fail("initial_state", "expected a string or an array of numbers");
  }
  return s;
}

void validate(const Reader& r, const RunConfig& c) {
  if (c.num_agents < 2) r.fail("num_agents", "need at least 2 agents");
  if (!(c.temperature >= 0.0)) r.fail("T", "temperature must be >= 0");
  if (c.game == GameKind::rps) {
    if (!c.epsilon) r.fail("epsilon", "missing required key for game \"rps\"");
    if (!(*c.epsilon > -1.0 && *c.epsilon < 1.0)) r.fail("epsilon", "must lie strictly inside (-1, 1)");
  } else if (c.epsilon) {
    r.fail("epsilon", "only valid for game \"rps\"");
  }
  if (c.game == GameKind::matrix) {
    if (c.matrix.empty()) r.fail("matrix", "missing required key for game \"matrix\"");
    for (const auto& row : c.matrix)
      if (row.size() != c.matrix.size()) r.fail("matrix", "payoff matrix must be square");
  } else if (!c.matrix.empty()) {
    r.fail("matrix", "only valid for game \"matrix\"");
  }
  if (c.system == SystemKind::link_only) {
    if (c.game == GameKind::matrix) r.fail("system", "link-only systems exist for coordination and rps only");
    if (c.num_agents != 3) r.fail("num_agents", "link-only systems need exactly 3 agents");
  }
  try {
    c.integrator.validate();
  } catch (const InvalidArgument& e) {
    r.fail("integrator", e.what());
  }
  if (c.learning) {
    if (c.system != SystemKind::full) r.fail("system", "learning runs use the full system");
    if (!(c.temperature > 0.0)) r.fail("T", "learning needs T > 0");
    if (!(c.learning->alpha > 0.0 && c.learning->alpha <= 1.0)) r.fail("learning.alpha", "must lie in (0, 1]");
    if (c.learning->rounds < 1) r.fail("learning.rounds", "must be >= 1");
    if (c.learning->interactions < 1) r.fail("learning.K", "must be >= 1");
  }
  if (!(c.analysis.bracket_lo >= 0.0 && c.analysis.bracket_lo < c.analysis.bracket_hi))
    r.fail("analysis.bracket", "need 0 <= lo < hi");
  if (!(c.analysis.tol > 0.0)) r.fail("analysis.tol", "must be positive");
  if (!(c.analysis.rest_point_tol > 0.0)) r.fail("analysis.rest_point_tol", "must be positive");
  if (c.initial_state.kind == InitialState::Kind::values &&
      c.initial_state.values.size() != state_dimension(c))
    r.fail("initial_state", "explicit state needs " + std::to_string(state_dimension(c)) +
                                " values for this game and system");
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  Reader r(text);
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    const int line = r.line_at(e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("", line, "line " + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw ParseError("", 1, "line 1: config must be a JSON object");
  r.check_keys(doc, "", kTopKeys);

  RunConfig c;
  if (!doc.contains("game")) r.fail("game", "missing required key");
  const auto game = r.string(doc, "game", "game");
  if (game == "coordination") c.game = GameKind::coordination;
  else if (game == "rps") c.game = GameKind::rps;
  else if (game == "matrix") c.game = GameKind::matrix;
  else r.fail("game", "expected \"coordination\", \"rps\" or \"matrix\"");

  if (doc.contains("epsilon")) c.epsilon = r.number(doc, "epsilon", "epsilon");
  if (doc.contains("matrix")) {
    const auto& m = doc["matrix"];
    if (!m.is_array()) r.fail("matrix", "expected an array of rows");
    for (const auto& row : m) {
      if (!row.is_array()) r.fail("matrix", "expected an array of rows");
      std::vector<double> values;
      for (const auto& e : row) {
        if (!e.is_number()) r.fail("matrix", "entries must be numbers");
        values.push_back(e.get<double>());
      }
      c.matrix.push_back(std::move(values));
    }
  }
  if (doc.contains("num_agents")) c.num_agents = r.unsigned_int(doc, "num_agents", "num_agents");

  if (!doc.contains("system")) r.fail("system", "missing required key");
  const auto system = r.string(doc, "system", "system");
  if (system == "full") c.system = SystemKind::full;
  else if (system == "factored") c.system = SystemKind::factored;
  else if (system == "link-only") c.system = SystemKind::link_only;
  else r.fail("system", "expected \"full\", \"factored\" or \"link-only\"");

  if (!doc.contains("T")) r.fail("T", "missing required key");
  c.temperature = r.number(doc, "T", "T");

  if (doc.contains("integrator")) {
    const auto& in = doc["integrator"];
    if (!in.is_object()) r.fail("integrator", "expected an object");
    r.check_keys(in, "integrator.", kIntegratorKeys);
    if (in.contains("method")) {
      const auto m = r.string(in, "method", "integrator.method");
      if (m == "rk4") c.integrator.method = IntegratorMethod::rk4;
      else if (m == "rk45") c.integrator.method = IntegratorMethod::rk45;
      else r.fail("integrator.method", "expected \"rk4\" or \"rk45\"");
    }
    if (in.contains("dt")) c.integrator.dt = r.number(in, "dt", "integrator.dt");
    if (in.contains("t_end")) c.integrator.t_end = r.number(in, "t_end", "integrator.t_end");
    if (in.contains("record_every"))
      c.integrator.record_every = r.unsigned_int(in, "record_every", "integrator.record_every");
    if (in.contains("abs_tol")) c.integrator.abs_tol = r.number(in, "abs_tol", "integrator.abs_tol");
    if (in.contains("rel_tol")) c.integrator.rel_tol = r.number(in, "rel_tol", "integrator.rel_tol");
    if (in.contains("dt_init")) c.integrator.dt_init = r.number(in, "dt_init", "integrator.dt_init");
  }

  if (doc.contains("learning")) {
    const auto& in = doc["learning"];
    if (!in.is_object()) r.fail("learning", "expected an object");
    r.check_keys(in, "learning.", kLearningKeys);
    LearningConfig l;
    if (in.contains("alpha")) l.alpha = r.number(in, "alpha", "learning.alpha");
    if (in.contains("rounds")) l.rounds = static_cast<long long>(r.unsigned_int(in, "rounds", "learning.rounds"));
    if (in.contains("mode")) {
      const auto m = r.string(in, "mode", "learning.mode");
      if (m == "expected") l.mode = LearningMode::expected;
      else if (m == "sampled") l.mode = LearningMode::sampled;
      else r.fail("learning.mode", "expected \"expected\" or \"sampled\"");
    }
    if (in.contains("K")) l.interactions = r.unsigned_int(in, "K", "learning.K");
    c.learning = l;
  }

  if (doc.contains("initial_state")) c.initial_state = parse_initial_state(r, doc["initial_state"]);

  if (doc.contains("analysis")) {
    const auto& in = doc["analysis"];
    if (!in.is_object()) r.fail("analysis", "expected an object");
    r.check_keys(in, "analysis.", kAnalysisKeys);
    if (in.contains("bracket")) {
      const auto& b = in["bracket"];
      if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
        r.fail("analysis.bracket", "expected [lo, hi]");
      c.analysis.bracket_lo = b[0].get<double>();
      c.analysis.bracket_hi = b[1].get<double>();
    }
    if (in.contains("tol")) c.analysis.tol = r.number(in, "tol", "analysis.tol");
    if (in.contains("rest_point_tol"))
      c.analysis.rest_point_tol = r.number(in, "rest_point_tol", "analysis.rest_point_tol");
  }

  if (doc.contains("seed")) c.seed = r.unsigned_int(doc, "seed", "seed");
  if (doc.contains("output")) c.output = r.string(doc, "output", "output");

  validate(r, c);
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["game"] = to_string(c.game);
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  if (!c.matrix.empty()) j["matrix"] = c.matrix;
  j["num_agents"] = c.num_agents;
  j["system"] = to_string(c.system);
  j["T"] = c.temperature;
  j["integrator"] = {{"method", to_string(c.integrator.method)},
                     {"dt", c.integrator.dt},
                     {"t_end", c.integrator.t_end},
                     {"record_every", c.integrator.record_every},
                     {"abs_tol", c.integrator.abs_tol},
                     {"rel_tol", c.integrator.rel_tol},
                     {"dt_init", c.integrator.dt_init}};
  if (c.learning)
    j["learning"] = {{"alpha", c.learning->alpha},
                     {"rounds", c.learning->rounds},
                     {"mode", to_string(c.learning->mode)},
                     {"K", c.learning->interactions}};
  switch (c.initial_state.kind) {
    case InitialState::Kind::uniform: j["initial_state"] = "uniform"; break;
    case InitialState::Kind::random:
      j["initial_state"] = c.initial_state.seed
                               ? "random(" + std::to_string(*c.initial_state.seed) + ")"
                               : std::string("random");
      break;
    case InitialState::Kind::values: j["initial_state"] = c.initial_state.values; break;
  }
  j["analysis"] = {{"bracket", {c.analysis.bracket_lo, c.analysis.bracket_hi}},
                   {"tol", c.analysis.tol},
                   {"rest_point_tol", c.analysis.rest_point_tol}};
  j["seed"] = c.seed;
  if (!c.output.empty()) j["output"] = c.output;
  return j;
}

std::string serialize_config(const RunConfig& c) { return config_to_json(c).dump(2) + "\n"; }

GameSpec make_game(const RunConfig& c) {
  switch (c.game) {
    case GameKind::coordination: return build_coordination_game(c.num_agents);
    case GameKind::rps: return build_rps_game(c.num_agents, RpsParams{c.epsilon.value_or(0.0)});
    case GameKind::matrix: return build_matrix_game(c.num_agents, c.matrix);
  }
  throw InvalidArgument("unknown game");
}

OdeSystem make_system(const RunConfig& c) {
  switch (c.system) {
    case SystemKind::link_only:
      if (c.game == GameKind::coordination) return coordination_link_system(c.temperature);
      if (c.game == GameKind::rps) return rps_link_system(c.temperature, c.epsilon.value_or(0.0));
      throw InvalidArgument("link-only systems exist for coordination and rps only");
    case SystemKind::factored: return factored_system(make_game(c), c.temperature);
    case SystemKind::full: return joint_system(make_game(c), c.temperature);
  }
  throw InvalidArgument("unknown system");
}

std::size_t state_dimension(const RunConfig& c) {
  const std::size_t n = c.num_agents;
  const std::size_t m = c.game == GameKind::coordination ? 2
                        : c.game == GameKind::rps        ? 3
                                                         : c.matrix.size();
  switch (c.system) {
    case SystemKind::link_only: return 3;
    case SystemKind::factored: return n * (n - 1) + n * m;
    case SystemKind::full: return n * (n - 1) * m;
  }
  return 0;
}

std::uint64_t initial_state_seed(const RunConfig& c) {
  return c.initial_state.seed.value_or(c.seed);
}

std::vector<double> make_initial_state(const RunConfig& c) {
  const OdeSystem system = make_system(c);
  switch (c.initial_state.kind) {
    case InitialState::Kind::values: {
      if (c.initial_state.values.size() != system.dim())
        throw InvalidArgument("explicit initial state has the wrong dimension");
      return c.initial_state.values;
    }
    case InitialState::Kind::random: {
      Rng rng(initial_state_seed(c));
      return random_state(system.layout, rng);
    }
    case InitialState::Kind::uniform: {
      std::vector<double> x(system.dim());
      for (const Block& b : system.layout.blocks())
        for (std::size_t a = 0; a < b.size; ++a)
          x[b.offset + a] = b.kind == BlockKind::unit ? 0.5 : 1.0 / static_cast<double>(b.size);
      return x;
    }
  }
  throw InvalidArgument("unknown initial state");
}

}  // namespace coevo
