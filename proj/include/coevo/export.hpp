#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "coevo/analysis.hpp"
#include "coevo/dynamics.hpp"
#include "coevo/learning.hpp"

namespace coevo {

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

// Header "t,<names...>", then one row per recorded time.
std::string trajectory_csv(const Trajectory& traj);

std::string sha256_hex(std::string_view data);

// Writes `content` and returns its digest.
std::string write_file(const std::filesystem::path& path, std::string_view content);

// Two-space indented with a trailing newline.
std::string dump_json(const nlohmann::json& j);

nlohmann::json to_json(const RestPoint& rp);
nlohmann::json to_json(const RestPointSearch& search);
nlohmann::json to_json(const CriticalTemperature& tc);
nlohmann::json to_json(const CriticalVerification& v);
nlohmann::json to_json(const DeviationReport& r);

}  // namespace coevo
