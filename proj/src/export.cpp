#include "coevo/export.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>

#include <openssl/evp.h>

#include "coevo/error.hpp"

namespace coevo {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw NumericalFailure("cannot format number");
  return std::string(buf.data(), end);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  for (const auto& name : traj.names) out += "," + name;
  out += '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += format_double(traj.times[k]);
    for (double v : traj.states[k]) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  std::string hex;
  hex.reserve(2 * len);
  char byte[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(byte, sizeof byte, "%02x", md[k]);
    hex += byte;
  }
  return hex;
}

std::string write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
  return sha256_hex(content);
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

namespace {

nlohmann::json spectrum_json(const Spectrum& s) {
  auto arr = nlohmann::json::array();
  for (const auto& e : s) arr.push_back({{"re", e.real()}, {"im", e.imag()}});
  return arr;
}

}  // namespace

nlohmann::json to_json(const RestPoint& rp) {
  auto jac = nlohmann::json::array();
  for (Eigen::Index r = 0; r < rp.jacobian.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < rp.jacobian.cols(); ++c) row.push_back(rp.jacobian(r, c));
    jac.push_back(row);
  }
  return {{"state", rp.state},
          {"residual", rp.residual},
          {"jacobian", jac},
          {"eigenvalues", spectrum_json(rp.eigenvalues)},
          {"classification", to_string(rp.classification)},
          {"degenerate", rp.degenerate}};
}

nlohmann::json to_json(const RestPointSearch& search) {
  auto points = nlohmann::json::array();
  for (const auto& p : search.points) points.push_back(to_json(p));
  return {{"rest_points", points},
          {"diagnostics", {{"seeds", search.seeds}, {"non_converged", search.non_converged},
                           {"drifted_to_face", search.drifted_to_face}}}};
}

nlohmann::json to_json(const CriticalTemperature& tc) {
  return {{"value", tc.value}, {"bracket", {tc.lo, tc.hi}}, {"criterion", tc.criterion}};
}

nlohmann::json to_json(const CriticalVerification& v) {
  auto side = [](const PerturbationCheck& c) {
    return nlohmann::json{{"T", c.temperature},
                          {"initial_distance", c.initial_distance},
                          {"final_distance", c.final_distance},
                          {"returned_to_interior", c.returned()}};
  };
  return {{"below", side(v.below)}, {"above", side(v.above)}, {"consistent", v.consistent()}};
}

nlohmann::json to_json(const DeviationReport& r) {
  return {{"max_deviation", r.max_deviation},
          {"mean_deviation", r.mean_deviation},
          {"points", r.points},
          {"t_begin", r.t_begin},
          {"t_end", r.t_end}};
}

}  // namespace coevo
