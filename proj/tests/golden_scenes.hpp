#pragma once

// Fixed inputs behind the reference images in golden/.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "nvunmix/render.hpp"

namespace nvunmix::golden {

inline std::filesystem::path dir() { return std::filesystem::path(NVUNMIX_TEST_DIR) / "golden"; }

inline PLMap ramp_map() {
  MapArray<double> a(6, 10);
  for (Eigen::Index y = 0; y < 6; ++y)
    for (Eigen::Index x = 0; x < 10; ++x) a(y, x) = 10.0 * x - 7.0 * y;
  return PLMap(a, 0.5);
}

inline Spectrum two_peaks() {
  const Eigen::VectorXd g = uniform_grid(550.0, 700.0, 1.0);
  Eigen::VectorXd y(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    y[i] = 100 * std::exp(-0.5 * std::pow((g[i] - 575) / 3, 2)) + 60 * std::exp(-0.5 * std::pow((g[i] - 650) / 20, 2));
  return Spectrum(g, y);
}

struct Scene {
  std::string file;
  std::string bytes;
};

inline std::vector<Scene> scenes() {
  MapStyle gray;
  gray.title = "ramp";
  MapStyle viridis;
  viridis.colormap = Colormap::Viridis;
  viridis.range = kFractionDisplayRange;
  viridis.clamp = true;
  viridis.units = "fraction";
  SpectrumStyle spec;
  spec.title = "two peaks";
  spec.zpl_guides = true;
  return {{"map_gray.svg", render_map_svg(ramp_map(), gray)},
          {"map_gray.pgm", render_map_pgm(ramp_map(), gray)},
          {"map_viridis.svg", render_map_svg(ramp_map(), viridis)},
          {"spectrum.svg", render_spectrum_svg({{"mix", two_peaks()}, {"half", scale(two_peaks(), 0.5)}}, spec)}};
}

}  // namespace nvunmix::golden
