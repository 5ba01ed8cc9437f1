#pragma once

// Forward models for synthetic spectra, field sweeps and PL maps. Every
// generator is a pure function of its parameters and seed.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "nvunmix/basis_fit.hpp"
#include "nvunmix/map_unmix.hpp"
#include "nvunmix/spectrum.hpp"

namespace nvunmix {

struct GaussianComponent {
  double center;  // nm
  double width;   // Gaussian sigma, nm
  double weight;
};

/// Gaussian-mixture lineshape: a zero-phonon line plus phonon sidebands.
/// Weights (ZPL included) sum to one.
struct SpectralShapeModel {
  double zpl_center;
  double zpl_width;
  double zpl_weight;
  std::vector<GaussianComponent> sidebands;

  void validate() const;

  /// ZPL at 575 nm on one broad sideband.
  static SpectralShapeModel nv0_default();
  /// ZPL at 637 nm, sidebands peaking near 690 nm.
  static SpectralShapeModel nvminus_default();
};

struct ShapePair {
  SpectralShapeModel nv0 = SpectralShapeModel::nv0_default();
  SpectralShapeModel nvminus = SpectralShapeModel::nvminus_default();
};

/// Field-independent C0 with a piecewise-linear C-(B) curve.
struct FieldResponseModel {
  double c0_const;
  std::vector<std::pair<double, double>> cminus_curve;  // (gauss, counts), increasing gauss

  void validate() const;
  double cminus(double b_gauss) const;
  double b_min() const { return cminus_curve.front().first; }
  double b_max() const { return cminus_curve.back().first; }

  /// Decreasing from 170 G to a minimum at 829 G, then a 3% rise to 975 G.
  /// Scaled so that f(170 G; 975 G) = 6.2. Magnitudes are synthetic.
  static FieldResponseModel default_model();
};

enum class NoiseKind { None, Poisson, Gaussian };

/// Shot noise per scan with expected counts intensity * dwell, averaged
/// over `scans` scans and reported back in counts/s.
struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  int scans = 1;
  double dwell_s = 0.01;

  void validate() const;
};

/// 500-900 nm at 0.2 nm.
Eigen::VectorXd default_grid();

/// Field values of the default 20-point sweep, 170-975 G including 829 G.
std::vector<double> default_sweep_fields();

/// Mixture rendered on grid and scaled to trapezoid area total_counts.
Spectrum make_spectrum(const SpectralShapeModel& model, const Eigen::VectorXd& grid,
                       double total_counts);

/// Unit-area basis pair rendered from the two shape models.
BasisPair make_basis(const ShapePair& shapes, const Eigen::VectorXd& grid);

Spectrum apply_noise(const Spectrum& clean, const NoiseModel& noise, std::uint64_t seed);

/// C0 * S0 + C-(b) * S- with noise; deterministic for a fixed seed.
Spectrum make_field_spectrum(double b_gauss, const FieldResponseModel& response,
                             const ShapePair& shapes, const Eigen::VectorXd& grid,
                             const NoiseModel& noise = {}, std::uint64_t seed = 0);

/// One make_field_spectrum per field; entry i uses stream_seed(seed, i).
FieldSeries make_field_sweep(const std::vector<double>& fields, const FieldResponseModel& response,
                             const ShapePair& shapes, const Eigen::VectorXd& grid,
                             const NoiseModel& noise = {}, std::uint64_t seed = 0);

/// Independent per-stream seed derived from a base seed (splitmix64).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PixelBox {
  Eigen::Index x, y, width, height;
};

/// text drawn with a 5x7 bitmap font, scaled by the largest integer factor
/// that fits box and centered in it. Supported glyphs: N V 0 - + and space.
Mask text_mask(Eigen::Index width, Eigen::Index height, std::string_view text, const PixelBox& box);

struct LetterMasks {
  Mask nv0;
  Mask nvminus;
};

/// "NV0" in the upper half of the frame, "NV-" in the lower half.
LetterMasks default_letter_masks(Eigen::Index width, Eigen::Index height);

/// Truth maps: pl_nv0 inside masks.nv0, pl_nvm inside masks.nvminus, zero elsewhere.
std::pair<PLMap, PLMap> make_letter_map(const LetterMasks& masks, double pl_nv0, double pl_nvm,
                                        double pixel_pitch_um = 1.0);

std::pair<PLMap, PLMap> make_letter_map(Eigen::Index width, Eigen::Index height, double pl_nv0,
                                        double pl_nvm, double pixel_pitch_um = 1.0);

/// lowB = nv0 + nvm, highB = nv0 + (1 - suppression) * nvm. Implied f = 1/suppression.
std::pair<PLMap, PLMap> make_field_map_pair(const PLMap& nv0_truth, const PLMap& nvm_truth,
                                            double suppression);

/// Independent Poisson(mean) pixels.
PLMap make_poisson_map(Eigen::Index width, Eigen::Index height, double mean, std::uint64_t seed,
                       double pixel_pitch_um = 1.0);

}  // namespace nvunmix
