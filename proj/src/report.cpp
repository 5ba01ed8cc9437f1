#include "nvunmix/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "nvunmix/io.hpp"

namespace nvunmix {

using nlohmann::json;

void RunReport::add_input(const std::filesystem::path& path) {
  inputs.push_back({path.generic_string(), io::content_hash(path)});
}

void RunReport::add_output(const std::filesystem::path& path) { outputs.push_back(path.generic_string()); }

void RunReport::add_warnings(const Warnings& w) {
  for (const auto& item : w) warnings.push_back(std::string(to_string(item.code)) + ": " + item.message);
}

json RunReport::to_json() const {
  json in = json::array();
  for (const auto& i : inputs) in.push_back({{"path", i.path}, {"hash", i.hash}});
  return {{"command", command},   {"inputs", in},         {"parameters", parameters},
          {"outputs", outputs},   {"diagnostics", diagnostics}, {"warnings", warnings},
          {"timestamp", timestamp}};
}

RunReport RunReport::from_json(const json& j) {
  RunReport r;
  try {
    r.command = j.at("command").get<std::string>();
    for (const auto& i : j.value("inputs", json::array()))
      r.inputs.push_back({i.at("path").get<std::string>(), i.value("hash", "")});
    r.parameters = j.value("parameters", json::object());
    r.outputs = j.value("outputs", std::vector<std::string>{});
    r.diagnostics = j.value("diagnostics", json::object());
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.timestamp = j.value("timestamp", "");
  } catch (const json::exception& e) {
    throw ParseError(std::string("run report: ") + e.what());
  }
  return r;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_report(const RunReport& report, const std::filesystem::path& path, const json& extra) {
  for (const auto& out : report.outputs)
    if (!std::filesystem::exists(out)) throw IoError("run report lists missing output '" + out + "'");
  json doc = report.to_json();
  for (const auto& [key, value] : extra.items()) doc[key] = value;
  io::write_file(path, doc.dump(2) + "\n");
}

namespace {

std::string short_value(const json& v) {
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array() || v.is_object()) {
    std::string out = v.is_array() ? "[" : "{";
    bool first = true;
    for (const auto& [key, item] : v.items()) {
      if (!first) out += ", ";
      first = false;
      if (v.is_object()) out += key + ": ";
      out += short_value(item);
    }
    return out + (v.is_array() ? "]" : "}");
  }
  return v.dump();
}

void section(std::ostringstream& os, const char* title, const json& obj) {
  if (!obj.is_object() || obj.empty()) return;
  os << title << ":\n";
  for (const auto& [key, value] : obj.items()) os << "  " << key << " = " << short_value(value) << "\n";
}

}  // namespace

std::string pretty_print(const json& doc) {
  const RunReport r = RunReport::from_json(doc);
  std::ostringstream os;
  os << "command:   " << r.command << "\n";
  if (!r.timestamp.empty()) os << "timestamp: " << r.timestamp << "\n";
  if (!r.inputs.empty()) {
    os << "inputs:\n";
    for (const auto& i : r.inputs) os << "  " << i.path << "  " << i.hash << "\n";
  }
  json results = json::object();
  if (doc.is_object())
    for (const auto& [key, value] : doc.items())
      if (!RunReport().to_json().contains(key)) results[key] = value;
  section(os, "results", results);
  section(os, "parameters", r.parameters);
  section(os, "diagnostics", r.diagnostics);
  if (!r.outputs.empty()) {
    os << "outputs:\n";
    for (const auto& o : r.outputs) os << "  " << o << "\n";
  }
  if (!r.warnings.empty()) {
    os << "warnings:\n";
    for (const auto& w : r.warnings) os << "  " << w << "\n";
  }
  return os.str();
}

}  // namespace nvunmix
