#pragma once

// JSON parameter files for the command-line tool: model (de)serialization
// and flag > params > default resolution.

#include <CLI11.hpp>

#include <optional>
#include <string>
#include <utility>

#include "json.hpp"
#include "nvunmix/synth.hpp"

namespace nvunmix::cli {

using nlohmann::json;

/// "lo:hi" or a two-element JSON array.
std::pair<double, double> parse_range(const std::string& text);
std::pair<double, double> range_from_json(const json& j, const char* key);
std::string format_range(std::pair<double, double> r);

json load_params(const std::string& path);

/// Fills `value` from params[key] when `flag` was not given on the command line.
template <typename T>
void resolve(const CLI::App& app, const char* flag, const json& params, const char* key, T& value) {
  if (app.count(flag) > 0 || !params.contains(key)) return;
  try {
    value = params.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("params: bad value for '") + key + "': " + e.what());
  }
}

/// Same for "lo:hi" options; params may hold a string or an array.
void resolve_range(const CLI::App& app, const char* flag, const json& params, const char* key,
                   std::pair<double, double>& value);

/// Uniform grid from {"lo","hi","step"}; default_grid() when absent.
Eigen::VectorXd grid_from_json(const json& j);
json grid_to_json(const Eigen::VectorXd& grid);

SpectralShapeModel shape_from_json(const json& j, const SpectralShapeModel& fallback);
json shape_to_json(const SpectralShapeModel& m);

FieldResponseModel response_from_json(const json& j);
json response_to_json(const FieldResponseModel& m);

NoiseModel noise_from_json(const json& j);
json noise_to_json(const NoiseModel& m);

/// Reads `key` from params with a default, as a typed value.
template <typename T>
T param_or(const json& params, const char* key, T fallback) {
  if (!params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("params: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace nvunmix::cli
