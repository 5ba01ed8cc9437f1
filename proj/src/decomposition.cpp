#include "nvunmix/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nvunmix {

void ZplArtifactConfig::validate() const {
  if (!(edge_width > 0)) throw ValidationError("zpl artifact: edge width must be positive");
  if (!inner.contains(center)) throw ValidationError("zpl artifact: inner window must contain center");
}

Spectrum crop(const Spectrum& s, const WavelengthWindow& w) {
  const auto& x = s.wavelengths();
  if (w.lo() < s.min_wavelength() || w.hi() > s.max_wavelength())
    throw RangeError("crop: window outside spectrum range");
  const double* begin = x.data();
  const double* end = begin + x.size();
  auto first = std::upper_bound(begin, end, w.lo());
  if (first != begin) --first;
  auto last = std::lower_bound(begin, end, w.hi());
  if (last == end) --last;
  Eigen::Index i0 = first - begin;
  Eigen::Index n = (last - begin) - i0 + 1;
  if (n < 2) n = 2, i0 = std::min<Eigen::Index>(i0, x.size() - 2);
  return Spectrum(x.segment(i0, n), s.intensities().segment(i0, n));
}

double zpl_artifact(const Spectrum& candidate, const ZplArtifactConfig& cfg) {
  cfg.validate();
  const auto left = cfg.left_band();
  const auto right = cfg.right_band();
  const double mean_left = area(candidate, left) / left.width();
  const double mean_right = area(candidate, right) / right.width();
  const double x_left = 0.5 * (left.lo() + left.hi());
  const double x_right = 0.5 * (right.lo() + right.hi());
  const double slope = (mean_right - mean_left) / (x_right - x_left);

  const Spectrum local = crop(candidate, cfg.inner);
  const Eigen::VectorXd baseline =
      (mean_left + slope * (local.wavelengths().array() - x_left)).matrix();
  const Spectrum residual = local.with_intensities(local.intensities() - baseline);
  return abs_area(residual, cfg.inner);
}

namespace {

bool covers(const Spectrum& s, const WavelengthWindow& w) {
  return w.lo() >= s.min_wavelength() && w.hi() <= s.max_wavelength();
}

}  // namespace

std::optional<double> zpl575_score(const Spectrum& lowB, const Spectrum& diff,
                                   const FlatnessCheck& check) {
  if (!covers(diff, check.window.support()) || !covers(lowB, check.window.support()))
    return std::nullopt;
  const double j = zpl_artifact(diff, check.window);
  const double norm = abs_area(lowB, check.window.inner);
  if (norm > 0) return j / norm;
  return j;
}

DifferenceSpectrum compute_diff(const Spectrum& lowB, const Spectrum& highB,
                                const FlatnessCheck& check) {
  DifferenceSpectrum out{subtract(lowB, highB), std::nullopt, {}};
  out.zpl575_score = zpl575_score(lowB, out.diff, check);
  if (out.zpl575_score && *out.zpl575_score > check.threshold) {
    std::ostringstream msg;
    msg << "difference spectrum shows an NV0 ZPL feature (score " << *out.zpl575_score
        << " > " << check.threshold << "); NV0 emission changed between fields";
    out.warnings.push_back({WarningCode::ModelViolation, msg.str()});
  }
  return out;
}

FOptimum optimize_f(const Spectrum& lowB, const Spectrum& diff, const ZplArtifactConfig& cfg,
                    const FSearch& search) {
  cfg.validate();
  require_same_grid(lowB, diff, "optimize_f");
  if (!(search.f_min > 0) || !(search.f_max > search.f_min) || search.coarse_steps < 2 ||
      !(search.tolerance > 0) || !std::isfinite(search.f_max))
    throw ValidationError("optimize_f: invalid search range");

  const auto support = cfg.support();
  if (!covers(lowB, support)) throw RangeError("optimize_f: ZPL windows outside spectrum range");
  const Spectrum low = crop(lowB, support);
  const Spectrum d = crop(diff, support);

  const double feature = zpl_artifact(d, cfg);
  const double scale = abs_area(d, support);
  if (!(feature > 1e-9 * scale) || !(area(d, cfg.inner) > 0))
    throw IdentifiabilityError(
        "optimize_f: difference spectrum has no ZPL feature in the inner window; f is "
        "unidentifiable");

  auto cost = [&](double f) {
    return zpl_artifact(low.with_intensities(low.intensities() - f * d.intensities()), cfg);
  };

  const int steps = search.coarse_steps;
  const double span = search.f_max - search.f_min;
  int best = 0;
  double best_cost = cost(search.f_min);
  for (int i = 1; i <= steps; ++i) {
    const double c = cost(search.f_min + span * i / steps);
    if (c < best_cost) best_cost = c, best = i;
  }
  double a = search.f_min + span * std::max(best - 1, 0) / steps;
  double b = search.f_min + span * std::min(best + 1, steps) / steps;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double c1 = cost(x1);
  double c2 = cost(x2);
  while (b - a > search.tolerance) {
    if (c1 <= c2) {
      b = x2, x2 = x1, c2 = c1;
      x1 = b - inv_phi * (b - a);
      c1 = cost(x1);
    } else {
      a = x1, x1 = x2, c1 = c2;
      x2 = a + inv_phi * (b - a);
      c2 = cost(x2);
    }
  }
  const double f = 0.5 * (a + b);
  const double j = cost(f);
  const double coarse_f = search.f_min + span * best / steps;
  if (best_cost < j) return {coarse_f, best_cost};
  return {f, j};
}

DecompositionResult decompose(const Spectrum& lowB, const Spectrum& highB,
                              const ZplArtifactConfig& cfg, const FSearch& search,
                              const FlatnessCheck& check) {
  DifferenceSpectrum d = compute_diff(lowB, highB, check);
  const FOptimum opt = optimize_f(lowB, d.diff, cfg, search);
  Spectrum nvminus = scale(d.diff, opt.f);
  Spectrum nv0 = subtract(lowB, nvminus);

  DecompositionResult out{opt.f,         std::move(nv0),  std::move(nvminus),
                          std::move(d.diff), opt.zpl_metric, d.zpl575_score,
                          std::move(d.warnings)};
  const double min_nv0 = out.nv0.intensities().minCoeff();
  if (min_nv0 < 0) {
    std::ostringstream msg;
    msg << "NV0 component has negative excursions (min " << min_nv0
        << "); f may be wrong or the model violated";
    out.warnings.push_back({WarningCode::NegativeExcursion, msg.str()});
  }
  return out;
}

}  // namespace nvunmix
