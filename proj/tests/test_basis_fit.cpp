#include <gtest/gtest.h>

#include <random>

#include "nvunmix/basis_fit.hpp"
#include "nvunmix/synth.hpp"
#include "oracles.hpp"

namespace nvunmix {
namespace {

const BasisPair& default_basis() {
  static const BasisPair basis = make_basis(ShapePair{}, default_grid());
  return basis;
}

Spectrum mix(const BasisPair& b, double c0, double cm) {
  return b.s0().with_intensities(c0 * b.s0().intensities() + cm * b.sminus().intensities());
}

// Gradient of 0.5*|s - c0*a - cm*b|^2 with respect to (c0, cm).
Eigen::Vector2d gradient(const Spectrum& s, const BasisPair& basis, const Coefficients& c) {
  const Eigen::VectorXd& a = basis.s0().intensities();
  const Eigen::VectorXd& b = basis.sminus().intensities();
  const Eigen::VectorXd r = c.c0 * a + c.cminus * b - s.intensities();
  return {a.dot(r), b.dot(r)};
}

TEST(FitCoefficientsTest, PureBasisSpectrum) {
  const auto& b = default_basis();
  const Coefficients c = fit_coefficients(b.s0(), b);
  EXPECT_NEAR(c.c0, 1.0, 1e-12);
  EXPECT_EQ(c.cminus, 0.0);
  EXPECT_NEAR(c.residual, 0.0, 1e-12);
}

TEST(FitCoefficientsTest, ForwardMixture) {
  const auto& b = default_basis();
  const Coefficients c = fit_coefficients(mix(b, 2.0, 3.0), b);
  EXPECT_NEAR(c.c0, 2.0, 1e-10);
  EXPECT_NEAR(c.cminus, 3.0, 1e-10);
  EXPECT_LT(c.residual, 1e-10);
}

TEST(FitCoefficientsTest, InfeasibleTargetProjectsOntoBoundary) {
  const auto& b = default_basis();
  const Spectrum s = mix(b, 1.0, -0.5);
  const Coefficients c = fit_coefficients(s, b);
  EXPECT_EQ(c.cminus, 0.0);
  EXPECT_NEAR(c.c0, oracle::projection(s.intensities(), b.s0().intensities()), 1e-12);
  const Coefficients free = fit_coefficients(s, b, FitMode::Unconstrained);
  EXPECT_NEAR(free.c0, 1.0, 1e-10);
  EXPECT_NEAR(free.cminus, -0.5, 1e-10);
}

TEST(FitCoefficientsTest, Errors) {
  const auto& b = default_basis();
  const BasisPair twin(b.s0(), b.s0());
  EXPECT_THROW(fit_coefficients(b.s0(), twin), IdentifiabilityError);
  const Spectrum other(uniform_grid(500.0, 900.0, 1.0), Eigen::VectorXd::Ones(401));
  EXPECT_THROW(fit_coefficients(other, b), GridMismatchError);
}

TEST(FitCoefficientsProperties, SatisfiesKkt) {
  const auto& b = default_basis();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double c0 = 1e4 * u(rng), cm = 1e4 * u(rng);
    Eigen::VectorXd y = c0 * b.s0().intensities() + cm * b.sminus().intensities();
    y += oracle::random_values(rng, y.size(), -2.0, 2.0);
    const Spectrum s = b.s0().with_intensities(y);
    const Coefficients c = fit_coefficients(s, b);
    ASSERT_GE(c.c0, 0.0);
    ASSERT_GE(c.cminus, 0.0);
    ASSERT_GE(c.residual, 0.0);
    const Eigen::Vector2d g = gradient(s, b, c);
    const double tol = 1e-9 * y.norm();
    const double coef[2] = {c.c0, c.cminus};
    for (int k = 0; k < 2; ++k) {
      if (coef[k] > 0)
        EXPECT_NEAR(g[k], 0.0, tol) << "trial " << trial;
      else
        EXPECT_GE(g[k], -tol) << "trial " << trial;
    }
  }
}

TEST(FitCoefficientsProperties, RoundTrip) {
  const auto& b = default_basis();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c0 = u(rng), cm = trial % 50 == 0 ? 0.0 : u(rng);
    const Coefficients c = fit_coefficients(mix(b, c0, cm), b);
    const double norm = std::hypot(c0, cm);
    ASSERT_NEAR(c.c0, c0, 1e-9 * norm);
    ASSERT_NEAR(c.cminus, cm, 1e-9 * norm);
  }
}

TEST(FitSeriesTest, SingleEntryOfPureNvMinus) {
  const auto& b = default_basis();
  const CoefficientTable t = fit_series(FieldSeries({{100.0, b.sminus()}}), b);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].b_field, 100.0);
  EXPECT_NEAR(t[0].c0, 0.0, 1e-12);
  EXPECT_NEAR(t[0].cminus, 1.0, 1e-12);
}

TEST(FitSeriesTest, EmptyAndInvalidSeries) {
  const auto& b = default_basis();
  EXPECT_THROW(FieldSeries({}), ValidationError);
  EXPECT_THROW(FieldSeries({{0.0, b.s0()}}), ValidationError);
  EXPECT_THROW(FieldSeries({{10.0, b.s0()}, {10.0, b.sminus()}}), ValidationError);
}

TEST(FitSeriesTest, SortsByField) {
  const auto& b = default_basis();
  const FieldSeries s({{300.0, mix(b, 1, 3)}, {100.0, mix(b, 1, 1)}, {200.0, mix(b, 1, 2)}});
  const CoefficientTable t = fit_series(s, b);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t[i].b_field, 100.0 * double(i + 1));
    EXPECT_NEAR(t[i].cminus, double(i + 1), 1e-10);
  }
}

TEST(FitSeriesTest, ResampledIngestion) {
  const auto& b = default_basis();
  const Spectrum coarse = resample(mix(b, 1e5, 2e5), uniform_grid(500.0, 900.0, 0.1));
  const FieldSeries s = FieldSeries::resampled({{50.0, coarse}}, default_grid());
  EXPECT_TRUE(s.entries()[0].spectrum.same_grid(b.s0()));
}

TEST(FitSeriesTest, NoiselessSweepRecoversInjectedCurve) {
  const auto fr = FieldResponseModel::default_model();
  const auto fields = default_sweep_fields();
  const CoefficientTable t = fit_series(make_field_sweep(fields, fr, {}, default_grid()), default_basis());
  ASSERT_EQ(t.size(), fields.size());
  for (const auto& row : t) {
    EXPECT_NEAR(row.c0, fr.c0_const, 1e-9 * fr.c0_const);
    EXPECT_NEAR(row.cminus, fr.cminus(row.b_field), 1e-9 * fr.cminus(row.b_field));
  }
}

TEST(FitSeriesTest, PoissonSweepWithin1Percent) {
  const auto fr = FieldResponseModel::default_model();
  const NoiseModel noise{NoiseKind::Poisson, 3000, 0.01};
  const CoefficientTable t =
      fit_series(make_field_sweep(default_sweep_fields(), fr, {}, default_grid(), noise, 99), default_basis());
  for (const auto& row : t) {
    EXPECT_NEAR(row.c0, fr.c0_const, 0.01 * fr.c0_const);
    EXPECT_NEAR(row.cminus, fr.cminus(row.b_field), 0.01 * fr.cminus(row.b_field));
  }
}

TEST(FFormulaTest, PaperScalingFactor) {
  EXPECT_EQ(f_reduced(620, 520), 6.2);
  EXPECT_EQ(f_general(100, 620, 100, 520), 6.2);
  EXPECT_EQ(f_reduced(1, 0), 1.0);
}

TEST(FFormulaTest, Singular) {
  EXPECT_THROW(f_general(100, 620, 150, 570), SingularityError);
  EXPECT_THROW(f_reduced(300, 300), SingularityError);
}

TEST(FFormulaTest, NonPhysical) {
  Warnings w;
  EXPECT_NEAR(f_reduced(520, 620, &w), -5.2, 1e-12);
  EXPECT_TRUE(has_warning(w, WarningCode::NonPhysical));
  Warnings none;
  f_reduced(620, 520, &none);
  EXPECT_TRUE(none.empty());
}

TEST(FFormulaProperties, GeneralReducesToReducedExactly) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c0 = u(rng), cm1 = u(rng), cm2 = u(rng);
    ASSERT_EQ(f_general(c0, cm1, c0, cm2), f_reduced(cm1, cm2)) << c0 << " " << cm1 << " " << cm2;
  }
}

TEST(FFormulaProperties, ScaleInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1.0, 1e3);
  for (int trial = 0; trial < 500; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (a + b == c + d || b == d) continue;
    for (double k : {2.0, 0.25, 1024.0}) {
      ASSERT_EQ(f_reduced(k * b, k * d), f_reduced(b, d));
      ASSERT_EQ(f_general(k * a, k * b, k * c, k * d), f_general(a, b, c, d));
    }
    const double k = u(rng);
    ASSERT_NEAR(f_general(k * a, k * b, k * c, k * d), f_general(a, b, c, d),
                1e-12 * std::abs(f_general(a, b, c, d)) * (1 + std::abs(b / (a + b - c - d))));
  }
}

CoefficientTable table_from(const std::vector<std::pair<double, double>>& cm) {
  CoefficientTable t;
  for (const auto& [b, c] : cm) t.push_back({b, 100.0, c, 0.0});
  return t;
}

TEST(FSurfaceTest, TwoRows) {
  const FSurface s = f_surface(table_from({{170, 620}, {975, 520}}));
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_EQ(s.points[0].b1, 170);
  EXPECT_EQ(s.points[0].b2, 975);
  EXPECT_EQ(s.points[0].f, 6.2);
  EXPECT_THROW(f_surface(table_from({{170, 620}})), ValidationError);
}

TEST(FSurfaceTest, SingularPairsAreReported) {
  const FSurface s = f_surface(table_from({{100, 5}, {200, 5}, {300, 4}}));
  EXPECT_EQ(s.points.size(), 2u);
  ASSERT_EQ(s.singular.size(), 1u);
  EXPECT_EQ(s.singular[0], std::make_pair(100.0, 200.0));
}

TEST(FSurfaceTest, SyntheticSweepTurnsAtFullMixing) {
  const auto fr = FieldResponseModel::default_model();
  const CoefficientTable t =
      fit_series(make_field_sweep(default_sweep_fields(), fr, {}, default_grid()), default_basis());
  const FSurface s = f_surface(t);
  EXPECT_EQ(s.points.size(), t.size() * (t.size() - 1) / 2);
  std::vector<FSurfacePoint> row;
  for (const auto& p : s.points)
    if (p.b1 == 170.0) row.push_back(p);
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i].b2 <= 829.0)
      EXPECT_LT(row[i].f, row[i - 1].f) << row[i].b2;
    else
      EXPECT_GT(row[i].f, row[i - 1].f) << row[i].b2;
  }
  EXPECT_NEAR(row.back().f, 6.2, 1e-6);
}

TEST(FSurfaceTest, MonotoneColumnGivesMonotoneF) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  std::vector<std::pair<double, double>> cm;
  double level = 1000.0;
  for (int i = 0; i < 12; ++i) cm.push_back({100.0 + 50 * i, level -= u(rng)});
  const FSurface s = f_surface(table_from(cm));
  for (std::size_t i = 1; i < s.points.size(); ++i)
    if (s.points[i].b1 == s.points[i - 1].b1) EXPECT_LT(s.points[i].f, s.points[i - 1].f);
}

TEST(FullMixingTest, InjectedMinimum) {
  const auto fr = FieldResponseModel::default_model();
  const CoefficientTable t =
      fit_series(make_field_sweep(default_sweep_fields(), fr, {}, default_grid()), default_basis());
  ASSERT_EQ(t.size(), 20u);
  EXPECT_EQ(find_full_mixing_field(t).b_field, 829.0);
  const double refined = find_full_mixing_field(t, {true}).b_field;
  EXPECT_GE(refined, 790.0);
  EXPECT_LE(refined, 860.0);
}

TEST(FullMixingTest, MonotoneColumnHasNoMinimum) {
  EXPECT_THROW(find_full_mixing_field(table_from({{1, 5}, {2, 4}, {3, 3}})), NoMinimumError);
  EXPECT_THROW(find_full_mixing_field(table_from({{1, 3}, {2, 4}, {3, 5}})), NoMinimumError);
}

TEST(FullMixingTest, FlatColumn) {
  const FullMixingField r = find_full_mixing_field(table_from({{10, 7}, {20, 7}, {30, 7}}));
  EXPECT_EQ(r.b_field, 10.0);
  EXPECT_TRUE(has_warning(r.warnings, WarningCode::Flat));
}

TEST(FullMixingTest, TiesGoToLowerField) {
  EXPECT_EQ(find_full_mixing_field(table_from({{1, 9}, {2, 3}, {3, 3}, {4, 8}})).b_field, 2.0);
  EXPECT_THROW(find_full_mixing_field(table_from({{1, 9}, {2, 3}})), ValidationError);
}

}  // namespace
}  // namespace nvunmix
