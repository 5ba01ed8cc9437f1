#include "nvunmix/basis_fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nvunmix/parallel.hpp"

namespace nvunmix {

FieldSeries::FieldSeries(std::vector<FieldSpectrum> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("field series: no entries");
  std::sort(entries_.begin(), entries_.end(),
            [](const FieldSpectrum& a, const FieldSpectrum& b) { return a.b_field < b.b_field; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!(e.b_field > 0) || !std::isfinite(e.b_field))
      throw ValidationError("field series: field values must be positive");
    if (i > 0 && e.b_field == entries_[i - 1].b_field)
      throw ValidationError("field series: duplicate field " + std::to_string(e.b_field));
    require_same_grid(entries_.front().spectrum, e.spectrum, "field series");
  }
}

FieldSeries FieldSeries::resampled(std::vector<FieldSpectrum> entries, const Eigen::VectorXd& grid) {
  for (auto& e : entries) e.spectrum = resample(e.spectrum, grid);
  return FieldSeries(std::move(entries));
}

namespace {

double rms_misfit(const Eigen::VectorXd& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  double c0, double cm) {
  return std::sqrt((s - c0 * a - cm * b).squaredNorm() / static_cast<double>(s.size()));
}

}  // namespace

Coefficients fit_coefficients(const Spectrum& s, const BasisPair& basis, FitMode mode) {
  require_same_grid(s, basis.s0(), "fit_coefficients");
  const Eigen::VectorXd& y = s.intensities();
  const Eigen::VectorXd& a = basis.s0().intensities();
  const Eigen::VectorXd& b = basis.sminus().intensities();

  // Angle between the columns, stable for nearly parallel vectors.
  const Eigen::VectorXd u = a.normalized();
  const Eigen::VectorXd v = b.normalized();
  const double angle = 2.0 * std::atan2((u - v).norm(), (u + v).norm());
  if (!(angle > 1e-6))
    throw IdentifiabilityError("fit_coefficients: basis spectra are collinear");

  Eigen::Matrix2d gram;
  gram << a.dot(a), a.dot(b), a.dot(b), b.dot(b);
  const Eigen::Vector2d rhs(a.dot(y), b.dot(y));
  const double det = gram(0, 0) * gram(1, 1) - gram(0, 1) * gram(1, 0);
  double c0 = (gram(1, 1) * rhs(0) - gram(0, 1) * rhs(1)) / det;
  double cm = (gram(0, 0) * rhs(1) - gram(1, 0) * rhs(0)) / det;

  if (mode == FitMode::NonNegative && (c0 < 0 || cm < 0)) {
    const double only0 = std::max(0.0, rhs(0) / gram(0, 0));
    const double onlym = std::max(0.0, rhs(1) / gram(1, 1));
    const double r0 = rms_misfit(y, a, b, only0, 0.0);
    const double rm = rms_misfit(y, a, b, 0.0, onlym);
    if (r0 <= rm) {
      c0 = only0, cm = 0.0;
    } else {
      c0 = 0.0, cm = onlym;
    }
  }
  return {c0, cm, rms_misfit(y, a, b, c0, cm)};
}

CoefficientTable fit_series(const FieldSeries& series, const BasisPair& basis, FitMode mode) {
  const auto& entries = series.entries();
  CoefficientTable table(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    const Coefficients c = fit_coefficients(entries[i].spectrum, basis, mode);
    table[i] = {entries[i].b_field, c.c0, c.cminus, c.residual};
  });
  return table;
}

namespace {

double checked_factor(double numerator, double denominator, Warnings* warnings) {
  if (denominator == 0.0)
    throw SingularityError("scaling factor undefined: both fields give the same total PL");
  const double f = numerator / denominator;
  if (warnings && !(f > 0)) {
    std::ostringstream msg;
    msg << "scaling factor f = " << f << " is not positive; NV- PL did not decrease";
    warnings->push_back({WarningCode::NonPhysical, msg.str()});
  }
  return f;
}

}  // namespace

double f_general(double c0_1, double cm_1, double c0_2, double cm_2, Warnings* warnings) {
  // Grouped so that equal C0 values cancel exactly.
  return checked_factor(cm_1, (c0_1 - c0_2) + (cm_1 - cm_2), warnings);
}

double f_reduced(double cm_1, double cm_2, Warnings* warnings) {
  return checked_factor(cm_1, cm_1 - cm_2, warnings);
}

FSurface f_surface(const CoefficientTable& table) {
  if (table.size() < 2) throw ValidationError("f_surface: need at least two rows");
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return table[i].b_field < table[j].b_field; });

  FSurface out;
  std::size_t nonphysical = 0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    for (std::size_t q = p + 1; q < order.size(); ++q) {
      const auto& r1 = table[order[p]];
      const auto& r2 = table[order[q]];
      if (!(r2.b_field > r1.b_field)) continue;
      try {
        const double f = f_reduced(r1.cminus, r2.cminus);
        if (!(f > 0)) ++nonphysical;
        out.points.push_back({r1.b_field, r2.b_field, f});
      } catch (const SingularityError&) {
        out.singular.emplace_back(r1.b_field, r2.b_field);
      }
    }
  }
  if (nonphysical > 0)
    out.warnings.push_back({WarningCode::NonPhysical, std::to_string(nonphysical) +
                                                          " field pair(s) give f <= 0; NV- PL did not decrease"});
  return out;
}

FullMixingField find_full_mixing_field(const CoefficientTable& table,
                                       const FullMixingOptions& options) {
  if (table.size() < 3) throw ValidationError("find_full_mixing_field: need at least three rows");
  CoefficientTable rows = table;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CoefficientRow& a, const CoefficientRow& b) { return a.b_field < b.b_field; });

  FullMixingField out{rows.front().b_field, {}};
  const bool flat = std::all_of(rows.begin(), rows.end(),
                                [&](const CoefficientRow& r) { return r.cminus == rows.front().cminus; });
  if (flat) {
    out.warnings.push_back({WarningCode::Flat, "cminus column is flat; lowest field returned"});
    return out;
  }

  std::size_t k = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].cminus < rows[k].cminus) k = i;
  if (k == 0 || k + 1 == rows.size())
    throw NoMinimumError("find_full_mixing_field: cminus has no interior minimum");

  out.b_field = rows[k].b_field;
  if (options.parabolic_refinement) {
    const double x0 = rows[k - 1].b_field, x1 = rows[k].b_field, x2 = rows[k + 1].b_field;
    const double y0 = rows[k - 1].cminus, y1 = rows[k].cminus, y2 = rows[k + 1].cminus;
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (den != 0.0) out.b_field = std::clamp(x1 - 0.5 * num / den, x0, x2);
  }
  return out;
}

}  // namespace nvunmix
