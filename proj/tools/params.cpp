#include "params.hpp"

#include "nvunmix/io.hpp"

namespace nvunmix::cli {

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  double lo = 0, hi = 0;
  if (colon == std::string::npos || !io::parse_double(std::string_view(text).substr(0, colon), lo) ||
      !io::parse_double(std::string_view(text).substr(colon + 1), hi))
    throw ValidationError("expected a range 'lo:hi', got '" + text + "'");
  if (!(lo < hi)) throw ValidationError("range '" + text + "' needs lo < hi");
  return {lo, hi};
}

std::pair<double, double> range_from_json(const json& j, const char* key) {
  if (j.is_string()) return parse_range(j.get<std::string>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    const std::pair<double, double> r{j[0].get<double>(), j[1].get<double>()};
    if (!(r.first < r.second)) throw ValidationError(std::string("params: '") + key + "' needs lo < hi");
    return r;
  }
  throw ValidationError(std::string("params: '") + key + "' must be \"lo:hi\" or [lo, hi]");
}

std::string format_range(std::pair<double, double> r) {
  return io::format_double(r.first) + ":" + io::format_double(r.second);
}

json load_params(const std::string& path) {
  if (path.empty()) return json::object();
  const std::string text = io::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path + ": params must be a JSON object");
  return j;
}

void resolve_range(const CLI::App& app, const char* flag, const json& params, const char* key,
                   std::pair<double, double>& value) {
  if (app.count(flag) > 0 || !params.contains(key)) return;
  value = range_from_json(params.at(key), key);
}

namespace {

template <typename T>
T field(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw ValidationError(std::string(what) + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": bad '" + key + "': " + e.what());
  }
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
}

}  // namespace

Eigen::VectorXd grid_from_json(const json& j) {
  if (j.is_null()) return default_grid();
  require_object(j, "grid");
  return uniform_grid(field<double>(j, "lo", "grid"), field<double>(j, "hi", "grid"), field<double>(j, "step", "grid"));
}

json grid_to_json(const Eigen::VectorXd& grid) {
  const double step = (grid[grid.size() - 1] - grid[0]) / static_cast<double>(grid.size() - 1);
  return {{"lo", grid[0]}, {"hi", grid[grid.size() - 1]}, {"step", step}};
}

SpectralShapeModel shape_from_json(const json& j, const SpectralShapeModel& fallback) {
  if (j.is_null()) return fallback;
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "nv0") return SpectralShapeModel::nv0_default();
    if (name == "nvminus") return SpectralShapeModel::nvminus_default();
    throw ValidationError("shape model: unknown preset '" + name + "' (nv0 or nvminus)");
  }
  require_object(j, "shape model");
  SpectralShapeModel m{field<double>(j, "zpl_center", "shape model"), field<double>(j, "zpl_width", "shape model"),
                       field<double>(j, "zpl_weight", "shape model"), {}};
  for (const auto& c : j.value("sidebands", json::array()))
    m.sidebands.push_back(
        {field<double>(c, "center", "sideband"), field<double>(c, "width", "sideband"), field<double>(c, "weight", "sideband")});
  m.validate();
  return m;
}

json shape_to_json(const SpectralShapeModel& m) {
  json sb = json::array();
  for (const auto& c : m.sidebands) sb.push_back({{"center", c.center}, {"width", c.width}, {"weight", c.weight}});
  return {{"zpl_center", m.zpl_center}, {"zpl_width", m.zpl_width}, {"zpl_weight", m.zpl_weight}, {"sidebands", sb}};
}

FieldResponseModel response_from_json(const json& j) {
  if (j.is_null()) return FieldResponseModel::default_model();
  require_object(j, "field response");
  FieldResponseModel m{field<double>(j, "c0_const", "field response"), {}};
  for (const auto& knot : field<json>(j, "cminus_curve", "field response")) {
    if (!knot.is_array() || knot.size() != 2) throw ValidationError("field response: knots are [gauss, counts] pairs");
    m.cminus_curve.emplace_back(knot[0].get<double>(), knot[1].get<double>());
  }
  m.validate();
  return m;
}

json response_to_json(const FieldResponseModel& m) {
  json knots = json::array();
  for (const auto& [b, c] : m.cminus_curve) knots.push_back({b, c});
  return {{"c0_const", m.c0_const}, {"cminus_curve", knots}};
}

NoiseModel noise_from_json(const json& j) {
  NoiseModel m;
  if (j.is_null()) return m;
  require_object(j, "noise");
  const auto kind = j.value("kind", std::string("none"));
  if (kind == "none")
    m.kind = NoiseKind::None;
  else if (kind == "poisson")
    m.kind = NoiseKind::Poisson;
  else if (kind == "gaussian")
    m.kind = NoiseKind::Gaussian;
  else
    throw ValidationError("noise: kind must be none, poisson or gaussian");
  m.scans = j.value("scans", m.scans);
  m.dwell_s = j.value("dwell_s", m.dwell_s);
  m.validate();
  return m;
}

json noise_to_json(const NoiseModel& m) {
  const char* kind = m.kind == NoiseKind::Poisson ? "poisson" : m.kind == NoiseKind::Gaussian ? "gaussian" : "none";
  return {{"kind", kind}, {"scans", m.scans}, {"dwell_s", m.dwell_s}};
}

}  // namespace nvunmix::cli
