#pragma once

// Magnetic-field difference decomposition of a low-field spectrum into
// NV0 and NV- parts. The high-field spectrum differs from the low-field
// one only in its NV- contribution, so diff = lowB - highB is pure NV-
// and the full NV- part is f * diff for a wavelength-independent f.

#include <optional>

#include "nvunmix/errors.hpp"
#include "nvunmix/spectrum.hpp"

namespace nvunmix {

/// Window layout for the baseline-residual score around a zero-phonon line.
///
/// The baseline is the straight line through the mean intensities of the two
/// edge bands [inner.lo - edge_width, inner.lo] and [inner.hi, inner.hi +
/// edge_width], anchored at the band centers.
struct ZplArtifactConfig {
  double center = 637.0;
  WavelengthWindow inner{630.0, 644.0};
  double edge_width = 4.0;

  /// Same layout around the NV0 ZPL at 575 nm.
  static ZplArtifactConfig nv0_zpl() { return {575.0, WavelengthWindow{568.0, 582.0}, 4.0}; }

  void validate() const;
  WavelengthWindow left_band() const { return {inner.lo() - edge_width, inner.lo()}; }
  WavelengthWindow right_band() const { return {inner.hi(), inner.hi() + edge_width}; }
  WavelengthWindow support() const { return {inner.lo() - edge_width, inner.hi() + edge_width}; }
};

struct FSearch {
  double f_min = 1.0;
  double f_max = 50.0;
  int coarse_steps = 200;
  double tolerance = 1e-4;
};

/// Guard that the NV0 ZPL is absent from a difference spectrum.
struct FlatnessCheck {
  ZplArtifactConfig window = ZplArtifactConfig::nv0_zpl();
  /// Warning threshold on the score, i.e. on the ratio of the residual
  /// feature area to the low-field area in the inner window.
  double threshold = 1e-3;
};

struct DifferenceSpectrum {
  Spectrum diff;
  /// Empty when the grid does not cover the 575 nm windows.
  std::optional<double> zpl575_score;
  Warnings warnings;
};

struct FOptimum {
  double f;
  double zpl_metric;
};

struct DecompositionResult {
  double f;
  Spectrum nv0;
  Spectrum nvminus;
  Spectrum diff;
  double zpl_metric;
  std::optional<double> zpl575_score;
  Warnings warnings;
};

/// Smallest sub-spectrum whose grid covers w.
Spectrum crop(const Spectrum& s, const WavelengthWindow& w);

/// L1 residual of candidate against its edge-band baseline over the inner
/// window. Zero exactly when candidate is that line over the inner window;
/// insensitive to the sign of the feature.
double zpl_artifact(const Spectrum& candidate, const ZplArtifactConfig& cfg = {});

/// Relative NV0-ZPL residual of diff, normalized by the low-field area in
/// the check's inner window.
std::optional<double> zpl575_score(const Spectrum& lowB, const Spectrum& diff,
                                   const FlatnessCheck& check = {});

/// diff = lowB - highB plus the NV0-ZPL flatness diagnostic.
DifferenceSpectrum compute_diff(const Spectrum& lowB, const Spectrum& highB,
                                const FlatnessCheck& check = {});

/// argmin over f in [f_min, f_max] of zpl_artifact(lowB - f * diff). J(f) is
/// convex, so a coarse scan brackets the minimum and golden-section search
/// refines it.
FOptimum optimize_f(const Spectrum& lowB, const Spectrum& diff, const ZplArtifactConfig& cfg = {},
                    const FSearch& search = {});

/// compute_diff -> optimize_f -> nv0 = lowB - f*diff, nvminus = f*diff.
/// Negative nv0 values are kept and reported as a warning.
DecompositionResult decompose(const Spectrum& lowB, const Spectrum& highB,
                              const ZplArtifactConfig& cfg = {}, const FSearch& search = {},
                              const FlatnessCheck& check = {});

}  // namespace nvunmix
