#pragma once

// Presentation-only images. Output bytes depend only on the data and the
// style, so identical inputs render identically.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nvunmix/map_unmix.hpp"
#include "nvunmix/spectrum.hpp"

namespace nvunmix {

enum class Colormap { Gray, Viridis };

struct MapStyle {
  Colormap colormap = Colormap::Gray;
  /// Color scale limits; data min/max when unset.
  std::optional<std::pair<double, double>> range;
  /// Clip values into range before coloring (figures only).
  bool clamp = false;
  std::string title;
  std::string units = "counts/s";
};

/// Display range for fraction maps.
inline constexpr std::pair<double, double> kFractionDisplayRange{-0.25, 1.25};

std::string render_map_svg(const PLMap& map, const MapStyle& style = {});

/// Binary PGM (P5); range, units and axes are recorded as header comments.
std::string render_map_pgm(const PLMap& map, const MapStyle& style = {});

struct SpectrumSeries {
  std::string label;
  Spectrum spectrum;
};

struct SpectrumStyle {
  std::string title;
  bool zpl_guides = false;  // dashed lines at 575 nm and 637 nm
  int width = 800;
  int height = 480;
};

std::string render_spectrum_svg(const std::vector<SpectrumSeries>& series, const SpectrumStyle& style = {});

}  // namespace nvunmix
