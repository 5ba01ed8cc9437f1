#pragma once

// Two-endmember fits of measured spectra against a normalized basis pair,
// coefficient tables across a magnetic-field sweep, and the scaling factor
// f(B1;B2) derived from those coefficients.

#include <vector>

#include "nvunmix/errors.hpp"
#include "nvunmix/spectrum.hpp"

namespace nvunmix {

struct FieldSpectrum {
  double b_field;  // gauss
  Spectrum spectrum;
};

/// Spectra ordered by strictly increasing positive field, all on one grid.
class FieldSeries {
 public:
  explicit FieldSeries(std::vector<FieldSpectrum> entries);

  /// Resamples every spectrum onto grid before validation.
  static FieldSeries resampled(std::vector<FieldSpectrum> entries, const Eigen::VectorXd& grid);

  const std::vector<FieldSpectrum>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<FieldSpectrum> entries_;
};

struct Coefficients {
  double c0;
  double cminus;
  double residual;  // root-mean-square misfit per grid point
};

struct CoefficientRow {
  double b_field;
  double c0;
  double cminus;
  double fit_residual;
};

using CoefficientTable = std::vector<CoefficientRow>;

enum class FitMode { NonNegative, Unconstrained };

/// Least-squares fit s ~ c0*s0 + cminus*sminus. In NonNegative mode the
/// 2x2 normal equations are solved first; if a coefficient comes out
/// negative each one-coefficient boundary is solved and the better
/// feasible point wins.
Coefficients fit_coefficients(const Spectrum& s, const BasisPair& basis,
                              FitMode mode = FitMode::NonNegative);

/// Per-entry fits in series order. Entries may be fitted concurrently.
CoefficientTable fit_series(const FieldSeries& series, const BasisPair& basis,
                            FitMode mode = FitMode::NonNegative);

/// f = cm_1 / (c0_1 + cm_1 - c0_2 - cm_2). Throws SingularityError when the
/// two fields give the same total PL. Appends NonPhysical to warnings when
/// the result is not positive.
double f_general(double c0_1, double cm_1, double c0_2, double cm_2, Warnings* warnings = nullptr);

/// f = cm_1 / (cm_1 - cm_2), valid when C0 does not depend on field.
double f_reduced(double cm_1, double cm_2, Warnings* warnings = nullptr);

struct FSurfacePoint {
  double b1;
  double b2;
  double f;
};

struct FSurface {
  std::vector<FSurfacePoint> points;
  /// (b1, b2) pairs left out because f was singular there.
  std::vector<std::pair<double, double>> singular;
  Warnings warnings;
};

/// f_reduced over every row pair with b2 > b1, ordered by b1 then b2.
FSurface f_surface(const CoefficientTable& table);

struct FullMixingOptions {
  bool parabolic_refinement = false;
};

struct FullMixingField {
  double b_field;
  Warnings warnings;
};

/// Field of minimum cminus (lowest field wins ties). Throws NoMinimumError
/// when the minimum sits at either end of a non-constant column.
FullMixingField find_full_mixing_field(const CoefficientTable& table,
                                       const FullMixingOptions& options = {});

}  // namespace nvunmix
