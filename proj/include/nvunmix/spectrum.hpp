#pragma once

// One-dimensional spectra on irregular wavelength grids: construction,
// piecewise-linear resampling, pointwise arithmetic and trapezoidal
// quadrature over wavelength windows.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <utility>

#include "nvunmix/errors.hpp"

namespace nvunmix {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Closed wavelength interval [lo, hi] in nm.
template <typename Scalar>
class BasicWavelengthWindow {
 public:
  BasicWavelengthWindow(Scalar lo, Scalar hi) : lo_(lo), hi_(hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi))
      throw ValidationError("wavelength window requires finite lo < hi");
  }

  Scalar lo() const { return lo_; }
  Scalar hi() const { return hi_; }
  Scalar width() const { return hi_ - lo_; }
  bool contains(Scalar x) const { return lo_ <= x && x <= hi_; }

 private:
  Scalar lo_;
  Scalar hi_;
};

/// Wavelength grid (nm) paired with intensities (counts/s).
///
/// Grids are strictly increasing with at least two points and need not be
/// uniform. Intensities must be finite; negative values are legal because
/// difference spectra are spectra too. Raw measured data is checked for
/// nonnegativity by the loaders, not here.
template <typename Scalar>
class BasicSpectrum {
 public:
  using Vector = VectorX<Scalar>;

  BasicSpectrum(Vector wavelengths, Vector intensities)
      : wavelengths_(std::move(wavelengths)), intensities_(std::move(intensities)) {
    if (wavelengths_.size() != intensities_.size())
      throw ValidationError("spectrum: wavelength and intensity lengths differ");
    if (wavelengths_.size() < 2) throw ValidationError("spectrum: need at least two samples");
    for (Eigen::Index i = 0; i < wavelengths_.size(); ++i) {
      if (!std::isfinite(wavelengths_[i]) || !std::isfinite(intensities_[i]))
        throw ValidationError("spectrum: non-finite value at index " + std::to_string(i));
      if (i > 0 && !(wavelengths_[i] > wavelengths_[i - 1]))
        throw ValidationError("spectrum: wavelengths not strictly increasing at index " +
                              std::to_string(i));
    }
  }

  const Vector& wavelengths() const { return wavelengths_; }
  const Vector& intensities() const { return intensities_; }
  Eigen::Index size() const { return wavelengths_.size(); }
  Scalar min_wavelength() const { return wavelengths_[0]; }
  Scalar max_wavelength() const { return wavelengths_[wavelengths_.size() - 1]; }

  bool is_nonnegative() const { return (intensities_.array() >= Scalar(0)).all(); }

  bool same_grid(const BasicSpectrum& other) const {
    return wavelengths_.size() == other.wavelengths_.size() &&
           wavelengths_ == other.wavelengths_;
  }

  BasicSpectrum with_intensities(Vector intensities) const {
    return BasicSpectrum(wavelengths_, std::move(intensities));
  }

 private:
  Vector wavelengths_;
  Vector intensities_;
};

/// Normalized fitting dictionary: two unit-area, nonnegative spectra on one grid.
template <typename Scalar>
class BasicBasisPair;

using Spectrum = BasicSpectrum<double>;
using WavelengthWindow = BasicWavelengthWindow<double>;

// ---------------------------------------------------------------------------
// Grids

/// Uniform grid from lo to hi inclusive; both endpoints are hit exactly.
template <typename Scalar = double>
VectorX<Scalar> uniform_grid(Scalar lo, Scalar hi, Scalar step) {
  if (!(hi > lo) || !(step > 0)) throw ValidationError("uniform_grid: need lo < hi and step > 0");
  const auto intervals = static_cast<Eigen::Index>(std::llround((hi - lo) / step));
  if (intervals < 1) throw ValidationError("uniform_grid: step larger than range");
  VectorX<Scalar> grid(intervals + 1);
  for (Eigen::Index i = 0; i <= intervals; ++i)
    grid[i] = lo + (hi - lo) * Scalar(i) / Scalar(intervals);
  grid[intervals] = hi;
  return grid;
}

template <typename Scalar>
BasicWavelengthWindow<Scalar> full_window(const BasicSpectrum<Scalar>& s) {
  return {s.min_wavelength(), s.max_wavelength()};
}

// ---------------------------------------------------------------------------
// Interpolation

/// Piecewise-linear value of s at x. Exact at grid points.
template <typename Scalar>
Scalar interpolate(const BasicSpectrum<Scalar>& s, std::type_identity_t<Scalar> x) {
  const auto& w = s.wavelengths();
  const auto& y = s.intensities();
  if (!(x >= w[0] && x <= w[w.size() - 1]))
    throw RangeError("interpolate: wavelength " + std::to_string(x) + " outside spectrum range");
  const Scalar* begin = w.data();
  const Scalar* end = begin + w.size();
  const Scalar* hi = std::lower_bound(begin, end, x);
  const auto j = static_cast<Eigen::Index>(hi - begin);
  if (*hi == x) return y[j];
  const Eigen::Index i = j - 1;
  const Scalar t = (x - w[i]) / (w[j] - w[i]);
  return y[i] + (y[j] - y[i]) * t;
}

/// Values of s at every point of grid (any nonempty increasing sequence).
template <typename Scalar>
VectorX<Scalar> sample_at(const BasicSpectrum<Scalar>& s, std::span<const std::type_identity_t<Scalar>> grid) {
  if (grid.empty()) throw ValidationError("sample_at: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ValidationError("sample_at: grid not strictly increasing");
  if (!(grid.front() >= s.min_wavelength() && grid.back() <= s.max_wavelength()))
    throw RangeError("sample_at: grid exceeds source range");
  VectorX<Scalar> out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out[static_cast<Eigen::Index>(i)] = interpolate(s, grid[i]);
  return out;
}

/// s resampled onto grid by piecewise-linear interpolation.
template <typename Scalar>
BasicSpectrum<Scalar> resample(const BasicSpectrum<Scalar>& s, const std::type_identity_t<VectorX<Scalar>>& grid) {
  if (grid.size() < 2) throw ValidationError("resample: grid needs at least two points");
  auto values = sample_at(s, std::span<const Scalar>(grid.data(), static_cast<std::size_t>(grid.size())));
  return BasicSpectrum<Scalar>(grid, std::move(values));
}

// ---------------------------------------------------------------------------
// Pointwise arithmetic

template <typename Scalar>
void require_same_grid(const BasicSpectrum<Scalar>& a, const BasicSpectrum<Scalar>& b,
                       const char* what) {
  if (!a.same_grid(b)) throw GridMismatchError(std::string(what) + ": wavelength grids differ");
}

template <typename Scalar>
BasicSpectrum<Scalar> subtract(const BasicSpectrum<Scalar>& a, const BasicSpectrum<Scalar>& b) {
  require_same_grid(a, b, "subtract");
  return a.with_intensities(a.intensities() - b.intensities());
}

template <typename Scalar>
BasicSpectrum<Scalar> add(const BasicSpectrum<Scalar>& a, const BasicSpectrum<Scalar>& b) {
  require_same_grid(a, b, "add");
  return a.with_intensities(a.intensities() + b.intensities());
}

template <typename Scalar>
BasicSpectrum<Scalar> scale(const BasicSpectrum<Scalar>& s, std::type_identity_t<Scalar> k) {
  if (!std::isfinite(k)) throw ValidationError("scale: factor must be finite");
  return s.with_intensities(k * s.intensities());
}

template <typename Scalar>
BasicSpectrum<Scalar> operator-(const BasicSpectrum<Scalar>& a, const BasicSpectrum<Scalar>& b) {
  return subtract(a, b);
}

template <typename Scalar>
BasicSpectrum<Scalar> operator+(const BasicSpectrum<Scalar>& a, const BasicSpectrum<Scalar>& b) {
  return add(a, b);
}

template <typename Scalar>
BasicSpectrum<Scalar> operator*(std::type_identity_t<Scalar> k, const BasicSpectrum<Scalar>& s) {
  return scale(s, k);
}

// ---------------------------------------------------------------------------
// Quadrature

namespace detail {

// Calls fn(xa, ya, xb, yb) for every grid segment clipped to w, with the
// integrand linearly interpolated at the clipped ends.
template <typename Scalar, typename Fn>
void for_each_segment(const BasicSpectrum<Scalar>& s, const BasicWavelengthWindow<Scalar>& w,
                      Fn&& fn) {
  if (w.lo() < s.min_wavelength() || w.hi() > s.max_wavelength())
    throw RangeError("window [" + std::to_string(w.lo()) + ", " + std::to_string(w.hi()) +
                     "] outside spectrum range");
  const auto& x = s.wavelengths();
  const auto& y = s.intensities();
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const Scalar x0 = x[i];
    const Scalar x1 = x[i + 1];
    if (x1 <= w.lo()) continue;
    if (x0 >= w.hi()) break;
    const Scalar slope = (y[i + 1] - y[i]) / (x1 - x0);
    const Scalar xa = std::max(x0, w.lo());
    const Scalar xb = std::min(x1, w.hi());
    const Scalar ya = xa == x0 ? y[i] : y[i] + slope * (xa - x0);
    const Scalar yb = xb == x1 ? y[i + 1] : y[i] + slope * (xb - x0);
    fn(xa, ya, xb, yb);
  }
}

}  // namespace detail

/// Trapezoid-rule integral of s over w.
template <typename Scalar>
Scalar area(const BasicSpectrum<Scalar>& s, const BasicWavelengthWindow<Scalar>& w) {
  Scalar total = 0;
  detail::for_each_segment(s, w, [&](Scalar xa, Scalar ya, Scalar xb, Scalar yb) {
    total += Scalar(0.5) * (ya + yb) * (xb - xa);
  });
  return total;
}

template <typename Scalar>
Scalar area(const BasicSpectrum<Scalar>& s) {
  return area(s, full_window(s));
}

/// Exact integral of |s| over w for the piecewise-linear interpolant of s.
/// Sign changes inside a segment are resolved at their zero crossing.
template <typename Scalar>
Scalar abs_area(const BasicSpectrum<Scalar>& s, const BasicWavelengthWindow<Scalar>& w) {
  Scalar total = 0;
  detail::for_each_segment(s, w, [&](Scalar xa, Scalar ya, Scalar xb, Scalar yb) {
    const Scalar h = xb - xa;
    if ((ya >= 0 && yb >= 0) || (ya <= 0 && yb <= 0)) {
      total += Scalar(0.5) * (std::abs(ya) + std::abs(yb)) * h;
    } else {
      total += Scalar(0.5) * (ya * ya + yb * yb) / (std::abs(ya) + std::abs(yb)) * h;
    }
  });
  return total;
}

/// s scaled to unit area over its full grid.
template <typename Scalar>
BasicSpectrum<Scalar> normalize_area(const BasicSpectrum<Scalar>& s) {
  if (!s.is_nonnegative()) throw ValidationError("normalize_area: spectrum has negative values");
  const Scalar a = area(s);
  if (!(a > 0)) throw ValidationError("normalize_area: spectrum area is not positive");
  return s.with_intensities(s.intensities() / a);
}

// ---------------------------------------------------------------------------

template <typename Scalar>
class BasicBasisPair {
 public:
  BasicBasisPair(BasicSpectrum<Scalar> s0, BasicSpectrum<Scalar> sminus)
      : s0_(std::move(s0)), sminus_(std::move(sminus)) {
    require_same_grid(s0_, sminus_, "basis pair");
    if (!s0_.is_nonnegative() || !sminus_.is_nonnegative())
      throw ValidationError("basis pair: basis spectra must be nonnegative");
    for (const auto* s : {&s0_, &sminus_})
      if (std::abs(area(*s) - Scalar(1)) > Scalar(1e-9))
        throw ValidationError("basis pair: basis spectra must have unit area");
  }

  /// Normalizes both spectra first.
  static BasicBasisPair from_unnormalized(const BasicSpectrum<Scalar>& s0,
                                          const BasicSpectrum<Scalar>& sminus) {
    return BasicBasisPair(normalize_area(s0), normalize_area(sminus));
  }

  const BasicSpectrum<Scalar>& s0() const { return s0_; }
  const BasicSpectrum<Scalar>& sminus() const { return sminus_; }

 private:
  BasicSpectrum<Scalar> s0_;
  BasicSpectrum<Scalar> sminus_;
};

using BasisPair = BasicBasisPair<double>;

}  // namespace nvunmix
