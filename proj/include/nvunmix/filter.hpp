#pragma once

// Long-pass filter transmission curves and the intensity-weighted mean
// transmission ("transmissivity") of a spectrum through them.

#include <cmath>
#include <concepts>

#include "nvunmix/errors.hpp"
#include "nvunmix/spectrum.hpp"

namespace nvunmix {

/// Sigmoid long-pass edge: t_max / (1 + exp(-(lambda - center) / width)).
template <typename Scalar>
struct BasicFilterModel {
  Scalar t_max = Scalar(0.9);
  Scalar center = Scalar(645);
  Scalar width = Scalar(6.9);

  void validate() const {
    if (!(t_max > 0 && t_max <= 1)) throw ValidationError("filter: t_max must be in (0, 1]");
    if (!(width > 0)) throw ValidationError("filter: width must be positive");
    if (!std::isfinite(center)) throw ValidationError("filter: center must be finite");
  }
};

using FilterModel = BasicFilterModel<double>;

template <typename Scalar>
Scalar transmission(const BasicFilterModel<Scalar>& fm, Scalar lambda) {
  const Scalar x = (lambda - fm.center) / fm.width;
  // Branches keep exp() from overflowing far from the edge.
  if (x >= 0) return fm.t_max / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return fm.t_max * e / (Scalar(1) + e);
}

/// Transmission sampled from a datasheet; linear between samples and held
/// constant beyond the first and last sample.
class TabulatedFilter {
 public:
  explicit TabulatedFilter(Spectrum curve);

  const Spectrum& curve() const { return curve_; }

 private:
  Spectrum curve_;
};

double transmission(const TabulatedFilter& filter, double lambda);

template <typename F, typename Scalar>
concept TransmissionCurve = requires(const F& f, Scalar x) {
  { transmission(f, x) } -> std::convertible_to<Scalar>;
};

template <typename Scalar, TransmissionCurve<Scalar> Filter>
BasicSpectrum<Scalar> apply_filter(const BasicSpectrum<Scalar>& s, const Filter& filter) {
  VectorX<Scalar> out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    out[i] = s.intensities()[i] * transmission(filter, s.wavelengths()[i]);
  return s.with_intensities(std::move(out));
}

/// Default integration window for transmissivities, nm.
inline WavelengthWindow default_transmissivity_window() { return {550.0, 850.0}; }

/// area(apply_filter(s), w) / area(s, w).
template <typename Scalar, TransmissionCurve<Scalar> Filter>
Scalar transmissivity(const BasicSpectrum<Scalar>& s, const Filter& filter,
                      const BasicWavelengthWindow<Scalar>& w) {
  const Scalar denominator = area(s, w);
  if (!(denominator > 0)) throw ValidationError("transmissivity: spectrum has no positive area in window");
  return area(apply_filter(s, filter), w) / denominator;
}

struct TransmissivityPair {
  double t0;
  double tminus;
};

struct TransmissivityEstimate {
  TransmissivityPair t;
  Warnings warnings;
};

/// Minimum |t0 - tminus| below which the map inversion is flagged.
inline constexpr double kConditioningGap = 0.05;

template <TransmissionCurve<double> Filter>
TransmissivityEstimate transmissivity_pair(const Spectrum& nv0, const Spectrum& nvminus,
                                           const Filter& filter,
                                           const WavelengthWindow& w = default_transmissivity_window()) {
  TransmissivityEstimate out{{transmissivity(nv0, filter, w), transmissivity(nvminus, filter, w)}, {}};
  if (std::abs(out.t.t0 - out.t.tminus) < kConditioningGap)
    out.warnings.push_back({WarningCode::Conditioning,
                            "t0 and tminus differ by less than 0.05; filter inversion is poorly conditioned"});
  return out;
}

}  // namespace nvunmix
