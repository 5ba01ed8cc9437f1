#include "nvunmix/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nvunmix::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Calls fn(line_number, line) for each line, stripped of '\r'.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    start = end + 1;
  }
}

double apply_policy(double v, const LoadOptions& options, std::size_t line, bool& clamped) {
  if (v >= 0) return v;
  switch (options.negatives) {
    case NegativePolicy::Allow: return v;
    case NegativePolicy::Clamp: clamped = true; return 0.0;
    case NegativePolicy::Reject: break;
  }
  throw ParseError("negative value " + format_double(v) + " in raw data", line);
}

}  // namespace

bool parse_double(std::string_view token, double& out) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size() && std::isfinite(out);
}

Spectrum parse_spectrum(std::string_view text, const LoadOptions& options, Warnings* warnings) {
  std::vector<double> wl;
  std::vector<double> in;
  bool clamped = false;
  for_each_line(text, [&](std::size_t n, std::string_view line) {
    const auto t = trim(line);
    if (t.empty()) return;
    if (t.front() == '#') {
      const auto body = trim(t.substr(1));
      if (body.starts_with("spec-csv") && body != "spec-csv v1")
        throw ParseError("unsupported spectrum format header '" + std::string(body) + "'", n);
      return;
    }
    const auto fields = split(t, ',');
    double x = 0, y = 0;
    if (fields.size() != 2 || !parse_double(fields[0], x) || !parse_double(fields[1], y))
      throw ParseError("expected 'wavelength_nm,intensity' with two finite numbers", n);
    if (!wl.empty() && !(x > wl.back()))
      throw ParseError("wavelength " + std::string(fields[0]) + " is not greater than the previous row", n);
    wl.push_back(x);
    in.push_back(apply_policy(y, options, n, clamped));
  });
  if (wl.size() < 2) throw ParseError("spectrum needs at least two rows");
  if (clamped && warnings) warnings->push_back({WarningCode::Clamped, "negative intensities clamped to 0"});
  return Spectrum(Eigen::Map<Eigen::VectorXd>(wl.data(), static_cast<Eigen::Index>(wl.size())),
                  Eigen::Map<Eigen::VectorXd>(in.data(), static_cast<Eigen::Index>(in.size())));
}

std::string format_spectrum(const Spectrum& s) {
  std::string out = "# spec-csv v1\n";
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out += format_double(s.wavelengths()[i]);
    out += ',';
    out += format_double(s.intensities()[i]);
    out += '\n';
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Spectrum load_spectrum(const fs::path& path, const LoadOptions& options, Warnings* warnings) {
  try {
    return parse_spectrum(read_file(path), options, warnings);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.message(), e.line());
  }
}

void save_spectrum(const Spectrum& s, const fs::path& path) { write_file(path, format_spectrum(s)); }

TabulatedFilter load_filter_table(const fs::path& path) {
  return TabulatedFilter(load_spectrum(path, {NegativePolicy::Reject}));
}

// ---------------------------------------------------------------------------
// plmap v1

MapPaths map_paths(const fs::path& path) {
  fs::path stem = path;
  const auto ext = path.extension();
  if (ext == ".json" || ext == ".csv") stem.replace_extension();
  return {fs::path(stem).concat(".json"), fs::path(stem).concat(".csv")};
}

PLMap parse_map(std::string_view sidecar_json, std::string_view csv, const LoadOptions& options,
                Warnings* warnings) {
  json meta;
  try {
    meta = json::parse(sidecar_json);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("plmap sidecar is not valid JSON: ") + e.what());
  }
  auto require = [&](const char* key) -> const json& {
    if (!meta.is_object() || !meta.contains(key)) throw ParseError(std::string("plmap sidecar missing '") + key + "'");
    return meta.at(key);
  };
  if (require("format") != "plmap") throw ParseError("plmap sidecar: format must be \"plmap\"");
  if (require("version") != 1) throw ParseError("plmap sidecar: unsupported version");
  const json& jw = require("width");
  const json& jh = require("height");
  const json& jp = require("pixel_pitch_um");
  if (!jw.is_number_integer() || !jh.is_number_integer() || jw.get<long long>() < 1 || jh.get<long long>() < 1)
    throw ParseError("plmap sidecar: width and height must be positive integers");
  if (!jp.is_number() || !(jp.get<double>() > 0)) throw ParseError("plmap sidecar: pixel_pitch_um must be positive");
  const auto width = static_cast<Eigen::Index>(jw.get<long long>());
  const auto height = static_cast<Eigen::Index>(jh.get<long long>());

  PLMap::Array values(height, width);
  Eigen::Index row = 0;
  bool clamped = false;
  for_each_line(csv, [&](std::size_t n, std::string_view line) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') return;
    if (row >= height) throw ParseError("plmap: more than " + std::to_string(height) + " data rows", n);
    const auto fields = split(t, ',');
    if (static_cast<Eigen::Index>(fields.size()) != width)
      throw ParseError("plmap: expected " + std::to_string(width) + " values, found " +
                           std::to_string(fields.size()), n);
    for (Eigen::Index x = 0; x < width; ++x) {
      double v = 0;
      if (!parse_double(fields[static_cast<std::size_t>(x)], v))
        throw ParseError("plmap: invalid number '" + std::string(fields[static_cast<std::size_t>(x)]) + "'", n);
      values(row, x) = apply_policy(v, options, n, clamped);
    }
    ++row;
  });
  if (row != height)
    throw ParseError("plmap: expected " + std::to_string(height) + " data rows, found " + std::to_string(row));
  if (clamped && warnings) warnings->push_back({WarningCode::Clamped, "negative pixels clamped to 0"});
  return PLMap(std::move(values), jp.get<double>());
}

PLMap load_map(const fs::path& path, const LoadOptions& options, Warnings* warnings) {
  const MapPaths p = map_paths(path);
  try {
    return parse_map(read_file(p.sidecar), read_file(p.data), options, warnings);
  } catch (const ParseError& e) {
    throw ParseError(p.data.string() + ": " + e.message(), e.line());
  }
}

MapPaths save_map(const PLMap& map, const fs::path& path) {
  const MapPaths p = map_paths(path);
  json meta = {{"format", "plmap"},
               {"version", 1},
               {"width", map.width()},
               {"height", map.height()},
               {"pixel_pitch_um", map.pixel_pitch()}};
  std::string csv;
  for (Eigen::Index y = 0; y < map.height(); ++y) {
    for (Eigen::Index x = 0; x < map.width(); ++x) {
      if (x) csv += ',';
      csv += format_double(map(y, x));
    }
    csv += '\n';
  }
  write_file(p.sidecar, meta.dump(2) + "\n");
  write_file(p.data, csv);
  return p;
}

// ---------------------------------------------------------------------------

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": manifest is not valid JSON: " + e.what());
  }
  const json& list = doc.is_object() && doc.contains("entries") ? doc.at("entries") : doc;
  if (!list.is_array() || list.empty()) throw ParseError(path.string() + ": manifest needs a nonempty entry list");
  std::vector<ManifestEntry> out;
  for (const auto& e : list) {
    if (!e.is_object() || !e.contains("b_field_gauss") || !e.contains("path") || !e.at("b_field_gauss").is_number() ||
        !e.at("path").is_string())
      throw ParseError(path.string() + ": each entry needs numeric b_field_gauss and string path");
    fs::path p = e.at("path").get<std::string>();
    if (p.is_relative()) p = path.parent_path() / p;
    out.push_back({e.at("b_field_gauss").get<double>(), p});
  }
  return out;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const fs::path& path) {
  json list = json::array();
  for (const auto& e : entries) list.push_back({{"b_field_gauss", e.b_field_gauss}, {"path", e.path.generic_string()}});
  write_file(path, json{{"entries", list}}.dump(2) + "\n");
}

std::string content_hash(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nvunmix::io
