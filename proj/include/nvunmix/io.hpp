#pragma once

// Readers and writers for the on-disk formats:
//   spec-csv v1  optional '#' comment lines, then "wavelength_nm,intensity"
//                rows with strictly increasing wavelengths.
//   plmap v1     JSON sidecar {"format":"plmap","version":1,"width":W,
//                "height":H,"pixel_pitch_um":p} next to a CSV of H rows of
//                W comma-separated values (same stem, .json / .csv).
// Numbers are written in shortest round-trip form, so load(save(x)) == x.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nvunmix/errors.hpp"
#include "nvunmix/filter.hpp"
#include "nvunmix/map_unmix.hpp"
#include "nvunmix/spectrum.hpp"

namespace nvunmix::io {

enum class NegativePolicy {
  Reject,  // raw data: negative values are a ParseError
  Clamp,   // raw data: clamp to zero and warn
  Allow,   // derived data (difference spectra, unmixed maps)
};

struct LoadOptions {
  NegativePolicy negatives = NegativePolicy::Reject;
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// Parses a whole token as a finite double. Returns false on any leftover text.
bool parse_double(std::string_view token, double& out);

Spectrum parse_spectrum(std::string_view text, const LoadOptions& options = {},
                        Warnings* warnings = nullptr);
std::string format_spectrum(const Spectrum& s);

Spectrum load_spectrum(const std::filesystem::path& path, const LoadOptions& options = {},
                       Warnings* warnings = nullptr);
void save_spectrum(const Spectrum& s, const std::filesystem::path& path);

/// Transmission table (wavelength_nm,T) in spec-csv layout.
TabulatedFilter load_filter_table(const std::filesystem::path& path);

struct MapPaths {
  std::filesystem::path sidecar;
  std::filesystem::path data;
};

/// Accepts the sidecar, the CSV, or the bare stem.
MapPaths map_paths(const std::filesystem::path& path);

PLMap parse_map(std::string_view sidecar_json, std::string_view csv, const LoadOptions& options = {},
                Warnings* warnings = nullptr);
PLMap load_map(const std::filesystem::path& path, const LoadOptions& options = {},
               Warnings* warnings = nullptr);
/// Writes both files and returns their paths.
MapPaths save_map(const PLMap& map, const std::filesystem::path& path);

struct ManifestEntry {
  double b_field_gauss;
  std::filesystem::path path;
};

/// {"entries":[{"b_field_gauss":..,"path":..}]} or a bare array of entries.
/// Relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// "fnv1a64:<16 hex digits>" of the file's bytes.
std::string content_hash(const std::filesystem::path& path);

}  // namespace nvunmix::io
