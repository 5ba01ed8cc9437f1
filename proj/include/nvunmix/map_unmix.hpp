#pragma once

// Per-pixel charge-state decomposition of PL maps, either from a low/high
// field pair or from an unfiltered/long-pass-filtered pair.

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <utility>

#include "nvunmix/errors.hpp"
#include "nvunmix/filter.hpp"

namespace nvunmix {

template <typename Scalar>
using MapArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major grid of PL intensities with a square pixel pitch in um.
/// Values must be finite; derived maps (unmixed components) may go negative.
template <typename Scalar>
class BasicPLMap {
 public:
  using Array = MapArray<Scalar>;

  BasicPLMap(Array values, Scalar pixel_pitch_um = Scalar(1))
      : values_(std::move(values)), pixel_pitch_(pixel_pitch_um) {
    if (values_.rows() < 1 || values_.cols() < 1) throw ValidationError("plmap: empty map");
    if (!(pixel_pitch_ > 0) || !std::isfinite(pixel_pitch_))
      throw ValidationError("plmap: pixel pitch must be positive");
    if (!values_.allFinite()) throw ValidationError("plmap: non-finite pixel value");
  }

  static BasicPLMap zeros(Eigen::Index width, Eigen::Index height, Scalar pixel_pitch_um = Scalar(1)) {
    return BasicPLMap(Array::Zero(height, width), pixel_pitch_um);
  }

  Eigen::Index width() const { return values_.cols(); }
  Eigen::Index height() const { return values_.rows(); }
  Scalar pixel_pitch() const { return pixel_pitch_; }
  const Array& values() const { return values_; }
  Scalar operator()(Eigen::Index y, Eigen::Index x) const { return values_(y, x); }

  bool same_shape(const BasicPLMap& other) const {
    return width() == other.width() && height() == other.height();
  }
  bool is_nonnegative() const { return (values_ >= Scalar(0)).all(); }

  BasicPLMap with_values(Array values) const { return BasicPLMap(std::move(values), pixel_pitch_); }

 private:
  Array values_;
  Scalar pixel_pitch_;
};

using PLMap = BasicPLMap<double>;

template <typename Scalar>
void require_same_shape(const BasicPLMap<Scalar>& a, const BasicPLMap<Scalar>& b, const char* what) {
  if (!a.same_shape(b)) throw GridMismatchError(std::string(what) + ": map dimensions differ");
}

template <typename Scalar>
struct BasicUnmixedMaps {
  BasicPLMap<Scalar> nv0;
  BasicPLMap<Scalar> nvminus;
  Eigen::Index negative_pixel_count;
};

using UnmixedMaps = BasicUnmixedMaps<double>;

namespace detail {

template <typename Scalar>
BasicUnmixedMaps<Scalar> make_unmixed(const BasicPLMap<Scalar>& like, MapArray<Scalar> nv0,
                                      MapArray<Scalar> nvminus) {
  const Eigen::Index negatives = (nv0 < Scalar(0)).count() + (nvminus < Scalar(0)).count();
  return {like.with_values(std::move(nv0)), like.with_values(std::move(nvminus)), negatives};
}

}  // namespace detail

/// Field-difference unmixing: nvminus = f*(lowB - highB), nv0 = lowB - nvminus.
/// Negative pixels are kept and counted (once per component).
template <typename Scalar>
BasicUnmixedMaps<Scalar> field_unmix(const BasicPLMap<Scalar>& lowB, const BasicPLMap<Scalar>& highB,
                                     Scalar f) {
  require_same_shape(lowB, highB, "field_unmix");
  if (!(f > 0) || !std::isfinite(f)) throw ValidationError("field_unmix: f must be positive");
  MapArray<Scalar> nvminus = f * (lowB.values() - highB.values());
  MapArray<Scalar> nv0 = lowB.values() - nvminus;
  return detail::make_unmixed(lowB, std::move(nv0), std::move(nvminus));
}

/// Smallest |t0 - tminus| accepted by filter_unmix.
inline constexpr double kMinTransmissivityGap = 1e-6;

/// Filter unmixing: solves m0 = nv0 + nvm, mlpf = t0*nv0 + tminus*nvm per pixel.
template <typename Scalar>
BasicUnmixedMaps<Scalar> filter_unmix(const BasicPLMap<Scalar>& m0, const BasicPLMap<Scalar>& mlpf,
                                      const TransmissivityPair& t) {
  require_same_shape(m0, mlpf, "filter_unmix");
  const Scalar t0 = static_cast<Scalar>(t.t0);
  const Scalar tm = static_cast<Scalar>(t.tminus);
  if (!(std::abs(t0 - tm) >= Scalar(kMinTransmissivityGap)))
    throw SingularityError("filter_unmix: t0 and tminus are equal; inversion is singular");
  const Scalar gap = t0 - tm;
  MapArray<Scalar> nv0 = (mlpf.values() - tm * m0.values()) / gap;
  MapArray<Scalar> nvminus = (t0 * m0.values() - mlpf.values()) / gap;
  return detail::make_unmixed(m0, std::move(nv0), std::move(nvminus));
}

/// Forward model of filter_unmix: (m0, mlpf) from component maps.
template <typename Scalar>
std::pair<BasicPLMap<Scalar>, BasicPLMap<Scalar>> compose_filter_maps(const BasicPLMap<Scalar>& nv0,
                                                                      const BasicPLMap<Scalar>& nvminus,
                                                                      const TransmissivityPair& t) {
  require_same_shape(nv0, nvminus, "compose_filter_maps");
  MapArray<Scalar> m0 = nv0.values() + nvminus.values();
  MapArray<Scalar> mlpf = static_cast<Scalar>(t.t0) * nv0.values() + static_cast<Scalar>(t.tminus) * nvminus.values();
  return {nv0.with_values(std::move(m0)), nv0.with_values(std::move(mlpf))};
}

template <typename Scalar>
struct BasicFractionMaps {
  BasicPLMap<Scalar> frac0;
  BasicPLMap<Scalar> fracminus;
  /// True where the total was too small for a fraction; both fractions are 0 there.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> undefined;
  Eigen::Index undefined_count;
  Warnings warnings;
};

using FractionMaps = BasicFractionMaps<double>;

/// Component / total per pixel, where total > rel_eps * max(total).
template <typename Scalar>
BasicFractionMaps<Scalar> fraction_maps(const BasicUnmixedMaps<Scalar>& unmixed,
                                        const BasicPLMap<Scalar>& total, Scalar rel_eps = Scalar(1e-12)) {
  require_same_shape(unmixed.nv0, total, "fraction_maps");
  require_same_shape(unmixed.nvminus, total, "fraction_maps");
  const Scalar eps = rel_eps * total.values().maxCoeff();
  const auto undefined = (total.values() <= eps).eval();
  const MapArray<Scalar> safe_total = undefined.select(Scalar(1), total.values());
  MapArray<Scalar> f0 = undefined.select(Scalar(0), unmixed.nv0.values() / safe_total);
  MapArray<Scalar> fm = undefined.select(Scalar(0), unmixed.nvminus.values() / safe_total);
  BasicFractionMaps<Scalar> out{total.with_values(std::move(f0)), total.with_values(std::move(fm)),
                                undefined, undefined.count(), {}};
  if (out.undefined_count > 0)
    out.warnings.push_back({WarningCode::ZeroTotal, std::to_string(out.undefined_count) +
                                                        " pixel(s) with zero total set to fraction 0"});
  return out;
}

/// Pixelwise sum of repeated scans.
template <typename Scalar>
BasicPLMap<Scalar> accumulate(std::span<const BasicPLMap<Scalar>> scans) {
  if (scans.empty()) throw ValidationError("accumulate: no maps");
  MapArray<Scalar> sum = scans.front().values();
  for (std::size_t i = 1; i < scans.size(); ++i) {
    require_same_shape(scans.front(), scans[i], "accumulate");
    sum += scans[i].values();
  }
  return scans.front().with_values(std::move(sum));
}

}  // namespace nvunmix
