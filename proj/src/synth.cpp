#include "nvunmix/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace nvunmix {

// ---------------------------------------------------------------------------
// Shape models

void SpectralShapeModel::validate() const {
  double total = zpl_weight;
  if (!(zpl_width > 0) || !(zpl_weight >= 0)) throw ValidationError("shape model: invalid ZPL parameters");
  for (const auto& c : sidebands) {
    if (!(c.width > 0) || !(c.weight >= 0) || !std::isfinite(c.center))
      throw ValidationError("shape model: invalid sideband component");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("shape model: weights must sum to 1");
}

SpectralShapeModel SpectralShapeModel::nv0_default() {
  // Sideband inflection sits near 637 nm so NV0 adds no curvature under the NV- ZPL.
  return {575.0, 1.2, 0.05, {{592.0, 45.0, 0.95}}};
}

SpectralShapeModel SpectralShapeModel::nvminus_default() {
  // Each sideband is >= 7 sigma red of 586 nm: no emission under the NV0 ZPL windows.
  return {637.0, 1.6, 0.04, {{662.0, 10.0, 0.20}, {690.0, 14.0, 0.35}, {725.0, 19.0, 0.27}, {760.0, 24.0, 0.14}}};
}

void FieldResponseModel::validate() const {
  if (!(c0_const >= 0)) throw ValidationError("field response: c0 must be nonnegative");
  if (cminus_curve.size() < 2) throw ValidationError("field response: need at least two knots");
  for (std::size_t i = 0; i < cminus_curve.size(); ++i) {
    if (!(cminus_curve[i].second >= 0)) throw ValidationError("field response: negative cminus knot");
    if (i > 0 && !(cminus_curve[i].first > cminus_curve[i - 1].first))
      throw ValidationError("field response: knot fields must increase");
  }
}

double FieldResponseModel::cminus(double b) const {
  if (!(b >= b_min() && b <= b_max()))
    throw RangeError("field response: field " + std::to_string(b) + " G outside knot range");
  auto hi = std::lower_bound(cminus_curve.begin(), cminus_curve.end(), b,
                             [](const auto& knot, double v) { return knot.first < v; });
  if (hi->first == b) return hi->second;
  auto lo = std::prev(hi);
  const double t = (b - lo->first) / (hi->first - lo->first);
  return lo->second + (hi->second - lo->second) * t;
}

FieldResponseModel FieldResponseModel::default_model() {
  const double c170 = 1.0e6;
  const double c975 = c170 * (1.0 - 1.0 / 6.2);
  const double cmin = c975 / 1.03;
  return {4.0e5,
          {{0.0, c170},
           {170.0, c170},
           {300.0, 0.975e6},
           {450.0, 0.93e6},
           {600.0, 0.88e6},
           {700.0, 0.85e6},
           {829.0, cmin},
           {975.0, c975},
           {1200.0, cmin * 1.045}}};
}

void NoiseModel::validate() const {
  if (scans < 1) throw ValidationError("noise model: scans must be >= 1");
  if (kind != NoiseKind::None && !(dwell_s > 0)) throw ValidationError("noise model: dwell must be positive");
}

Eigen::VectorXd default_grid() { return uniform_grid(500.0, 900.0, 0.2); }

std::vector<double> default_sweep_fields() {
  return {170, 210, 248, 300, 350, 400, 450, 500, 550, 600,
          650, 700, 750, 790, 829, 860, 890, 920, 950, 975};
}

// ---------------------------------------------------------------------------
// Spectra

Spectrum make_spectrum(const SpectralShapeModel& model, const Eigen::VectorXd& grid, double total_counts) {
  model.validate();
  if (!(total_counts >= 0) || !std::isfinite(total_counts))
    throw ValidationError("make_spectrum: total_counts must be nonnegative");
  auto gaussian = [&](double center, double width, double weight) {
    const double norm = weight / (width * std::sqrt(2.0 * std::numbers::pi));
    return (norm * (-0.5 * ((grid.array() - center) / width).square()).exp()).matrix().eval();
  };
  Eigen::VectorXd y = gaussian(model.zpl_center, model.zpl_width, model.zpl_weight);
  for (const auto& c : model.sidebands) y += gaussian(c.center, c.width, c.weight);
  Spectrum shape(grid, std::move(y));
  if (total_counts == 0.0) return shape.with_intensities(Eigen::VectorXd::Zero(grid.size()));
  return scale(normalize_area(shape), total_counts);
}

BasisPair make_basis(const ShapePair& shapes, const Eigen::VectorXd& grid) {
  return BasisPair(make_spectrum(shapes.nv0, grid, 1.0), make_spectrum(shapes.nvminus, grid, 1.0));
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Spectrum apply_noise(const Spectrum& clean, const NoiseModel& noise, std::uint64_t seed) {
  noise.validate();
  if (noise.kind == NoiseKind::None) return clean;
  if (!clean.is_nonnegative()) throw ValidationError("apply_noise: clean spectrum must be nonnegative");
  std::mt19937_64 rng(stream_seed(seed, 0));
  // The sum of n independent Poisson(mu) scans is Poisson(n * mu).
  const double exposure = noise.dwell_s * noise.scans;
  Eigen::VectorXd y(clean.size());
  for (Eigen::Index i = 0; i < clean.size(); ++i) {
    const double mean = clean.intensities()[i] * exposure;
    double counts = 0.0;
    if (mean > 0) {
      if (noise.kind == NoiseKind::Poisson) {
        counts = static_cast<double>(std::poisson_distribution<std::int64_t>(mean)(rng));
      } else {
        counts = std::max(0.0, std::normal_distribution<double>(mean, std::sqrt(mean))(rng));
      }
    }
    y[i] = counts / exposure;
  }
  return clean.with_intensities(std::move(y));
}

Spectrum make_field_spectrum(double b, const FieldResponseModel& response, const ShapePair& shapes,
                             const Eigen::VectorXd& grid, const NoiseModel& noise, std::uint64_t seed) {
  response.validate();
  const double cm = response.cminus(b);
  const BasisPair basis = make_basis(shapes, grid);
  const Spectrum clean = add(scale(basis.s0(), response.c0_const), scale(basis.sminus(), cm));
  return apply_noise(clean, noise, seed);
}

FieldSeries make_field_sweep(const std::vector<double>& fields, const FieldResponseModel& response,
                             const ShapePair& shapes, const Eigen::VectorXd& grid, const NoiseModel& noise,
                             std::uint64_t seed) {
  std::vector<FieldSpectrum> entries;
  entries.reserve(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i)
    entries.push_back({fields[i], make_field_spectrum(fields[i], response, shapes, grid, noise,
                                                      stream_seed(seed, i))});
  return FieldSeries(std::move(entries));
}

// ---------------------------------------------------------------------------
// Maps

namespace {

struct Glyph {
  char c;
  std::array<const char*, 7> rows;
};

constexpr std::array<Glyph, 6> kFont{{
    {'N', {"#...#", "##..#", "##..#", "#.#.#", "#..##", "#..##", "#...#"}},
    {'V', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
    {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
    {'-', {".....", ".....", ".....", "#####", ".....", ".....", "....."}},
    {'+', {".....", "..#..", "..#..", "#####", "..#..", "..#..", "....."}},
    {' ', {".....", ".....", ".....", ".....", ".....", ".....", "....."}},
}};

const Glyph& glyph(char c) {
  for (const auto& g : kFont)
    if (g.c == c) return g;
  throw ValidationError(std::string("text_mask: unsupported glyph '") + c + "'");
}

}  // namespace

Mask text_mask(Eigen::Index width, Eigen::Index height, std::string_view text, const PixelBox& box) {
  if (width < 1 || height < 1) throw ValidationError("text_mask: dimensions must be positive");
  if (box.x < 0 || box.y < 0 || box.width < 1 || box.height < 1 || box.x + box.width > width ||
      box.y + box.height > height)
    throw ValidationError("text_mask: box outside frame");
  Mask mask = Mask::Constant(height, width, false);
  if (text.empty()) return mask;

  const auto cols = static_cast<Eigen::Index>(6 * text.size() - 1);
  const Eigen::Index k = std::min(box.width / cols, box.height / 7);
  if (k < 1) throw ValidationError("text_mask: box too small for text");
  const Eigen::Index x0 = box.x + (box.width - k * cols) / 2;
  const Eigen::Index y0 = box.y + (box.height - k * 7) / 2;
  for (std::size_t n = 0; n < text.size(); ++n) {
    const Glyph& g = glyph(text[n]);
    for (Eigen::Index r = 0; r < 7; ++r)
      for (Eigen::Index c = 0; c < 5; ++c)
        if (g.rows[static_cast<std::size_t>(r)][c] == '#')
          mask.block(y0 + r * k, x0 + (static_cast<Eigen::Index>(6 * n) + c) * k, k, k).setConstant(true);
  }
  return mask;
}

LetterMasks default_letter_masks(Eigen::Index width, Eigen::Index height) {
  const Eigen::Index top = height / 2;
  return {text_mask(width, height, "NV0", {0, 0, width, top}),
          text_mask(width, height, "NV-", {0, top, width, height - top})};
}

std::pair<PLMap, PLMap> make_letter_map(const LetterMasks& masks, double pl_nv0, double pl_nvm,
                                        double pixel_pitch_um) {
  if (masks.nv0.rows() != masks.nvminus.rows() || masks.nv0.cols() != masks.nvminus.cols())
    throw GridMismatchError("make_letter_map: mask dimensions differ");
  if ((masks.nv0 && masks.nvminus).any()) throw ValidationError("make_letter_map: masks overlap");
  if (!(pl_nv0 >= 0) || !(pl_nvm >= 0)) throw ValidationError("make_letter_map: PL values must be nonnegative");
  PLMap::Array nv0 = masks.nv0.select(pl_nv0, PLMap::Array::Zero(masks.nv0.rows(), masks.nv0.cols()));
  PLMap::Array nvm = masks.nvminus.select(pl_nvm, PLMap::Array::Zero(masks.nv0.rows(), masks.nv0.cols()));
  return {PLMap(std::move(nv0), pixel_pitch_um), PLMap(std::move(nvm), pixel_pitch_um)};
}

std::pair<PLMap, PLMap> make_letter_map(Eigen::Index width, Eigen::Index height, double pl_nv0,
                                        double pl_nvm, double pixel_pitch_um) {
  if (width < 1 || height < 1) throw ValidationError("make_letter_map: dimensions must be positive");
  return make_letter_map(default_letter_masks(width, height), pl_nv0, pl_nvm, pixel_pitch_um);
}

std::pair<PLMap, PLMap> make_field_map_pair(const PLMap& nv0_truth, const PLMap& nvm_truth, double suppression) {
  require_same_shape(nv0_truth, nvm_truth, "make_field_map_pair");
  if (!(suppression > 0 && suppression <= 1))
    throw ValidationError("make_field_map_pair: suppression must be in (0, 1]");
  PLMap::Array low = nv0_truth.values() + nvm_truth.values();
  PLMap::Array high = nv0_truth.values() + (1.0 - suppression) * nvm_truth.values();
  return {nv0_truth.with_values(std::move(low)), nv0_truth.with_values(std::move(high))};
}

PLMap make_poisson_map(Eigen::Index width, Eigen::Index height, double mean, std::uint64_t seed,
                       double pixel_pitch_um) {
  if (width < 1 || height < 1 || !(mean >= 0)) throw ValidationError("make_poisson_map: invalid parameters");
  std::mt19937_64 rng(stream_seed(seed, 0));
  std::poisson_distribution<std::int64_t> draw(mean);
  PLMap::Array values(height, width);
  for (Eigen::Index y = 0; y < height; ++y)
    for (Eigen::Index x = 0; x < width; ++x) values(y, x) = mean > 0 ? static_cast<double>(draw(rng)) : 0.0;
  return PLMap(std::move(values), pixel_pitch_um);
}

}  // namespace nvunmix
