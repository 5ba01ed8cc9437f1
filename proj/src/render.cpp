#include "nvunmix/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>

namespace nvunmix {

namespace {

struct Rgb {
  int r, g, b;
};

// Viridis anchor colors; intermediate levels interpolate linearly.
constexpr std::array<Rgb, 9> kViridis{{{68, 1, 84},
                                       {71, 44, 122},
                                       {59, 81, 139},
                                       {44, 113, 142},
                                       {33, 144, 141},
                                       {39, 173, 129},
                                       {92, 200, 99},
                                       {170, 220, 50},
                                       {253, 231, 37}}};

Rgb color(int level, Colormap map) {
  if (map == Colormap::Gray) return {level, level, level};
  const double pos = level / 255.0 * (kViridis.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), kViridis.size() - 2);
  const double t = pos - static_cast<double>(i);
  auto mix = [&](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
  return {mix(kViridis[i].r, kViridis[i + 1].r), mix(kViridis[i].g, kViridis[i + 1].g),
          mix(kViridis[i].b, kViridis[i + 1].b)};
}

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string num(double v, const char* fmt = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::pair<double, double> value_range(const PLMap& map, const MapStyle& style) {
  if (style.range) return *style.range;
  return {map.values().minCoeff(), map.values().maxCoeff()};
}

// 0..255 gray level per pixel.
MapArray<int> levels(const PLMap& map, const MapStyle& style) {
  const auto [lo, hi] = value_range(map, style);
  MapArray<int> out(map.height(), map.width());
  for (Eigen::Index y = 0; y < map.height(); ++y) {
    for (Eigen::Index x = 0; x < map.width(); ++x) {
      double v = map(y, x);
      if (style.clamp) v = std::clamp(v, lo, hi);
      const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
      out(y, x) = static_cast<int>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
    }
  }
  return out;
}

// Round step (1, 2 or 5 times a power of ten) giving about `target` ticks.
double tick_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_map_svg(const PLMap& map, const MapStyle& style) {
  constexpr int kCell = 4;
  constexpr int kMargin = 60;
  constexpr int kLegend = 90;
  const auto lv = levels(map, style);
  const auto [lo, hi] = value_range(map, style);
  const int w = static_cast<int>(map.width()) * kCell;
  const int h = static_cast<int>(map.height()) * kCell;
  const int total_w = w + 2 * kMargin + kLegend;
  const int total_h = h + 2 * kMargin;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(total_w) + "\" height=\"" +
         std::to_string(total_h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty())
    svg += "<text x=\"" + std::to_string(kMargin) + "\" y=\"24\" font-size=\"14\">" + escape(style.title) + "</text>\n";
  svg += "<g transform=\"translate(" + std::to_string(kMargin) + "," + std::to_string(kMargin) + ")\" shape-rendering=\"crispEdges\">\n";
  // One rect per run of equal level within a row.
  for (Eigen::Index y = 0; y < lv.rows(); ++y) {
    Eigen::Index x = 0;
    while (x < lv.cols()) {
      Eigen::Index end = x + 1;
      while (end < lv.cols() && lv(y, end) == lv(y, x)) ++end;
      svg += "<rect x=\"" + std::to_string(x * kCell) + "\" y=\"" + std::to_string(y * kCell) + "\" width=\"" +
             std::to_string((end - x) * kCell) + "\" height=\"" + std::to_string(kCell) + "\" fill=\"" +
             hex(color(lv(y, x), style.colormap)) + "\"/>\n";
      x = end;
    }
  }
  svg += "</g>\n";
  svg += "<rect x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(kMargin) + "\" width=\"" +
         std::to_string(w) + "\" height=\"" + std::to_string(h) + "\" fill=\"none\" stroke=\"black\"/>\n";

  const double pitch = map.pixel_pitch();
  svg += "<text x=\"" + std::to_string(kMargin + w / 2) + "\" y=\"" + std::to_string(kMargin + h + 40) +
         "\" text-anchor=\"middle\">X (µm), width " + num(pitch * map.width()) + " µm</text>\n";
  svg += "<text x=\"18\" y=\"" + std::to_string(kMargin + h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         std::to_string(kMargin + h / 2) + ")\">Y (µm), height " + num(pitch * map.height()) + " µm</text>\n";

  // Value legend: vertical color bar with min/max labels.
  const int bar_x = kMargin + w + 20;
  constexpr int kSteps = 32;
  for (int i = 0; i < kSteps; ++i) {
    const int level = static_cast<int>(std::lround(255.0 * (kSteps - 1 - i) / (kSteps - 1)));
    const int y0 = kMargin + h * i / kSteps;
    const int y1 = kMargin + h * (i + 1) / kSteps;
    svg += "<rect x=\"" + std::to_string(bar_x) + "\" y=\"" + std::to_string(y0) + "\" width=\"16\" height=\"" +
           std::to_string(y1 - y0) + "\" fill=\"" + hex(color(level, style.colormap)) + "\"/>\n";
  }
  svg += "<text x=\"" + std::to_string(bar_x + 20) + "\" y=\"" + std::to_string(kMargin + 10) + "\">max " + num(hi) +
         "</text>\n";
  svg += "<text x=\"" + std::to_string(bar_x + 20) + "\" y=\"" + std::to_string(kMargin + h) + "\">min " + num(lo) +
         "</text>\n";
  svg += "<text x=\"" + std::to_string(bar_x) + "\" y=\"" + std::to_string(kMargin - 8) + "\">" + escape(style.units) +
         "</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string render_map_pgm(const PLMap& map, const MapStyle& style) {
  const auto lv = levels(map, style);
  const auto [lo, hi] = value_range(map, style);
  std::string out = "P5\n";
  if (!style.title.empty()) out += "# title: " + style.title + "\n";
  out += "# legend: 0 = " + num(lo) + ", 255 = " + num(hi) + " " + style.units + "\n";
  out += "# axes: X, Y in um; pixel pitch " + num(map.pixel_pitch()) + " um\n";
  out += std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n255\n";
  for (Eigen::Index y = 0; y < lv.rows(); ++y)
    for (Eigen::Index x = 0; x < lv.cols(); ++x) out += static_cast<char>(static_cast<unsigned char>(lv(y, x)));
  return out;
}

std::string render_spectrum_svg(const std::vector<SpectrumSeries>& series, const SpectrumStyle& style) {
  if (series.empty()) throw ValidationError("render_spectrum_svg: no series");
  constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  const double left = 80, right = 30, top = 40, bottom = 60;
  const double pw = style.width - left - right;
  const double ph = style.height - top - bottom;

  double xmin = series[0].spectrum.min_wavelength(), xmax = series[0].spectrum.max_wavelength();
  double ymin = 0.0, ymax = 0.0;
  for (const auto& s : series) {
    xmin = std::min(xmin, s.spectrum.min_wavelength());
    xmax = std::max(xmax, s.spectrum.max_wavelength());
    ymin = std::min(ymin, s.spectrum.intensities().minCoeff());
    ymax = std::max(ymax, s.spectrum.intensities().maxCoeff());
  }
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) +
                    "\" height=\"" + std::to_string(style.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty())
    svg += "<text x=\"" + num(left, "%.1f") + "\" y=\"24\" font-size=\"14\">" + escape(style.title) + "</text>\n";
  svg += "<rect x=\"" + num(left, "%.1f") + "\" y=\"" + num(top, "%.1f") + "\" width=\"" + num(pw, "%.1f") +
         "\" height=\"" + num(ph, "%.1f") + "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = tick_step(xmax - xmin, 8);
  for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-9; t += xs) {
    svg += "<line x1=\"" + num(px(t), "%.2f") + "\" y1=\"" + num(top + ph, "%.2f") + "\" x2=\"" + num(px(t), "%.2f") +
           "\" y2=\"" + num(top + ph + 5, "%.2f") + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(px(t), "%.2f") + "\" y=\"" + num(top + ph + 18, "%.2f") + "\" text-anchor=\"middle\">" +
           num(t) + "</text>\n";
  }
  const double ys = tick_step(ymax - ymin, 6);
  for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-9 * std::abs(ymax); t += ys) {
    svg += "<line x1=\"" + num(left - 5, "%.2f") + "\" y1=\"" + num(py(t), "%.2f") + "\" x2=\"" + num(left, "%.2f") +
           "\" y2=\"" + num(py(t), "%.2f") + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(left - 8, "%.2f") + "\" y=\"" + num(py(t) + 4, "%.2f") + "\" text-anchor=\"end\">" +
           num(t) + "</text>\n";
  }
  svg += "<text x=\"" + num(left + pw / 2, "%.1f") + "\" y=\"" + num(style.height - 15.0, "%.1f") +
         "\" text-anchor=\"middle\">Wavelength (nm)</text>\n";
  svg += "<text x=\"18\" y=\"" + num(top + ph / 2, "%.1f") + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num(top + ph / 2, "%.1f") + ")\">Intensity (counts/s)</text>\n";

  if (style.zpl_guides) {
    for (const auto& [lambda, label] : {std::pair{575.0, "NV0 ZPL 575 nm"}, std::pair{637.0, "NV- ZPL 637 nm"}}) {
      if (lambda < xmin || lambda > xmax) continue;
      svg += "<line class=\"zpl-guide\" x1=\"" + num(px(lambda), "%.2f") + "\" y1=\"" + num(top, "%.2f") + "\" x2=\"" +
             num(px(lambda), "%.2f") + "\" y2=\"" + num(top + ph, "%.2f") +
             "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
      svg += "<text x=\"" + num(px(lambda) + 3, "%.2f") + "\" y=\"" + num(top + 12, "%.2f") + "\" fill=\"gray\">" +
             label + "</text>\n";
    }
  }

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k].spectrum;
    std::string points;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (i) points += ' ';
      points += num(px(s.wavelengths()[i]), "%.2f") + "," + num(py(s.intensities()[i]), "%.2f");
    }
    const char* c = kPalette[k % kPalette.size()];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.2\" points=\"" + points + "\"/>\n";
    const double ly = top + 16 + 16.0 * static_cast<double>(k);
    svg += "<line x1=\"" + num(left + pw - 150, "%.1f") + "\" y1=\"" + num(ly - 4, "%.1f") + "\" x2=\"" +
           num(left + pw - 130, "%.1f") + "\" y2=\"" + num(ly - 4, "%.1f") + "\" stroke=\"" + c + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(left + pw - 125, "%.1f") + "\" y=\"" + num(ly, "%.1f") + "\">" + escape(series[k].label) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace nvunmix
