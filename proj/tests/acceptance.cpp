// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "golden_scenes.hpp"
#include "nvunmix/nvunmix.hpp"
#include "oracles.hpp"

namespace nvunmix {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Max over pixels of |got - want| / |want| for nonzero truth; zero-truth
// pixels must come back as exactly zero.
bool exact_recovery(const PLMap& got, const PLMap& want, double& worst_rel) {
  bool zeros_exact = true;
  worst_rel = 0;
  for (Eigen::Index i = 0; i < want.values().size(); ++i) {
    const double w = want.values().data()[i], g = got.values().data()[i];
    if (w == 0)
      zeros_exact = zeros_exact && g == 0;
    else
      worst_rel = std::max(worst_rel, std::abs(g - w) / std::abs(w));
  }
  return zeros_exact;
}

Outcome filter_inversion() {
  const auto t0 = std::chrono::steady_clock::now();
  const TransmissivityPair t{0.3, 0.8};
  const auto [nv0, nvm] = make_letter_map(512, 512, 1000.0, 1500.0, 0.1);
  const auto [m0, mlpf] = compose_filter_maps(nv0, nvm, t);
  const UnmixedMaps u = filter_unmix(m0, mlpf, t);
  const double elapsed = seconds_since(t0);
  double rel0 = 0, relm = 0;
  const bool zeros = exact_recovery(u.nv0, nv0, rel0) && exact_recovery(u.nvminus, nvm, relm);
  const double rel = std::max(rel0, relm);
  const bool letters = (nv0.values() > 0).count() > 0 && (nvm.values() > 0).count() > 0;
  return {zeros && rel <= 1e-12 && elapsed < 1.0 && letters,
          fmt("512x512, max rel err %.3g, zero pixels exact: %s, %.3f s", rel, zeros ? "yes" : "no", elapsed)};
}

Outcome f_recovery() {
  const Eigen::VectorXd grid = default_grid();
  const auto fr = FieldResponseModel::default_model();
  const ShapePair shapes;
  const Spectrum low = make_field_spectrum(170.0, fr, shapes, grid);
  const Spectrum high = make_field_spectrum(975.0, fr, shapes, grid);
  const BasisPair basis = make_basis(shapes, grid);
  const Spectrum truth_nv0 = scale(basis.s0(), fr.c0_const);
  const double implied = f_reduced(fr.cminus(170.0), fr.cminus(975.0));

  const auto t0 = std::chrono::steady_clock::now();
  const DecompositionResult r = decompose(low, high);
  const double elapsed = seconds_since(t0);
  const double peak = truth_nv0.intensities().maxCoeff();
  const double err = (r.nv0.intensities() - truth_nv0.intensities()).cwiseAbs().maxCoeff() / peak;
  const double step = grid[1] - grid[0];
  return {std::abs(r.f - 6.2) <= 0.01 && std::abs(implied - 6.2) < 1e-12 && err < 1e-3 && elapsed < 1.0 &&
              std::abs(step - 0.2) < 1e-12,
          fmt("f = %.6f (implied %.6g), nv0 max err %.3g of peak, %.3f s", r.f, implied, err, elapsed)};
}

Outcome reduced_formula() {
  const double f = f_reduced(620, 520);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  int mismatches = 0, singular = 0;
  for (int i = 0; i < 1000; ++i) {
    const double c0 = u(rng), cm1 = u(rng), cm2 = u(rng);
    if (cm1 == cm2) {
      ++singular;
      continue;
    }
    if (f_general(c0, cm1, c0, cm2) != f_reduced(cm1, cm2)) ++mismatches;
  }
  return {f == 6.2 && mismatches == 0 && singular == 0,
          fmt("f_reduced(620, 520) = %.17g, general/reduced mismatches %d of 1000", f, mismatches)};
}

Outcome flat_transmissivity() {
  const FilterModel fm;
  const WavelengthWindow w = default_transmissivity_window();
  const Eigen::VectorXd g = uniform_grid(550.0, 850.0, 0.1);
  const double t_flat = transmissivity(Spectrum(g, Eigen::VectorXd::Ones(g.size())), fm, w);
  const double oracle_flat = oracle::sigmoid_mean(550.0, 850.0);

  const Eigen::VectorXd dg = default_grid();
  const auto pair = transmissivity_pair(make_spectrum(SpectralShapeModel::nv0_default(), dg, 1.0),
                                        make_spectrum(SpectralShapeModel::nvminus_default(), dg, 1.0), fm, w);
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(g.size());
  Eigen::Index at = 0;
  (g.array() - 637.0).abs().minCoeff(&at);
  spike[at] = 1.0;
  const double spike_factor = apply_filter(Spectrum(g, spike), fm).intensities()[at];

  const bool ok = std::abs(t_flat - 0.6150) <= 1e-3 && std::abs(t_flat - oracle_flat) <= 1e-6 &&
                  pair.t.tminus > t_flat && t_flat > pair.t.t0 && std::abs(spike_factor - 0.2149) <= 1e-4;
  return {ok, fmt("t_flat = %.6f (oracle %.6f), t0 = %.4f < t_flat < tminus = %.4f, spike@637 = %.6f", t_flat,
                  oracle_flat, pair.t.t0, pair.t.tminus, spike_factor)};
}

Outcome nnls_round_trip() {
  const Eigen::VectorXd grid = default_grid();
  const BasisPair basis = make_basis(ShapePair{}, grid);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double c0 = u(rng), cm = u(rng);
    const Spectrum s = basis.s0().with_intensities(c0 * basis.s0().intensities() + cm * basis.sminus().intensities());
    const Coefficients c = fit_coefficients(s, basis);
    const double norm = std::hypot(c0, cm);
    worst = std::max({worst, std::abs(c.c0 - c0) / norm, std::abs(c.cminus - cm) / norm});
  }

  // Poisson, 3000-scan averaging: per coefficient pair, the empirical std over
  // repeated realizations sets the 3-sigma band each realization is judged by.
  const NoiseModel noise{NoiseKind::Poisson, 3000, 0.01};
  std::uniform_real_distribution<double> un(1e5, 1e6);
  constexpr int kPairs = 10, kReps = 100;
  int inside = 0, total = 0;
  for (int p = 0; p < kPairs; ++p) {
    const double c0 = un(rng), cm = un(rng);
    const Spectrum clean =
        basis.s0().with_intensities(c0 * basis.s0().intensities() + cm * basis.sminus().intensities());
    std::vector<Coefficients> fits;
    for (int r = 0; r < kReps; ++r)
      fits.push_back(fit_coefficients(apply_noise(clean, noise, stream_seed(1000 + p, r)), basis));
    double m0 = 0, mm = 0;
    for (const auto& f : fits) m0 += f.c0, mm += f.cminus;
    m0 /= kReps, mm /= kReps;
    double v0 = 0, vm = 0;
    for (const auto& f : fits) v0 += (f.c0 - m0) * (f.c0 - m0), vm += (f.cminus - mm) * (f.cminus - mm);
    const double s0 = std::sqrt(v0 / (kReps - 1)), sm = std::sqrt(vm / (kReps - 1));
    for (const auto& f : fits) {
      inside += std::abs(f.c0 - c0) <= 3 * s0;
      inside += std::abs(f.cminus - cm) <= 3 * sm;
      total += 2;
    }
  }
  const double frac = static_cast<double>(inside) / total;
  return {worst <= 1e-9 && frac >= 0.99,
          fmt("noiseless worst rel err %.3g over 1000 pairs; Poisson within 3 sd: %.2f%% of %d", worst, 100 * frac, total)};
}

Outcome full_mixing() {
  const auto fr = FieldResponseModel::default_model();
  const Eigen::VectorXd grid = default_grid();
  const CoefficientTable table =
      fit_series(make_field_sweep(default_sweep_fields(), fr, {}, grid), make_basis({}, grid));
  const double b = find_full_mixing_field(table).b_field;
  const FSurface s = f_surface(table);
  // Monotone shape is judged on physical pairs; f <= 0 exactly where C-(b2) > C-(b1).
  int violations = 0, rows = 0, nonphysical = 0, misflagged = 0;
  for (const auto& row : table) {
    if (row.b_field >= 829.0) continue;
    ++rows;
    double prev_f = 0;
    bool first = true;
    for (const auto& p : s.points) {
      if (p.b1 != row.b_field) continue;
      const auto b2 = std::find_if(table.begin(), table.end(), [&](const auto& r) { return r.b_field == p.b2; });
      misflagged += (p.f <= 0) != (b2->cminus > row.cminus);
      if (p.f <= 0) {
        ++nonphysical;
        continue;
      }
      if (!first && (p.b2 <= 829.0 ? !(p.f < prev_f) : !(p.f > prev_f))) ++violations;
      first = false;
      prev_f = p.f;
    }
  }
  const bool warned = nonphysical == 0 || std::any_of(s.warnings.begin(), s.warnings.end(), [](const Warning& w) {
                        return w.code == WarningCode::NonPhysical;
                      });
  return {b == 829.0 && violations == 0 && misflagged == 0 && warned && rows > 0 && table.size() == 20,
          fmt("full mixing at %.1f G; shape violations %d over %d b1 rows; %d nonphysical pairs flagged", b,
              violations, rows, nonphysical)};
}

Outcome field_map_identity() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 2e4), us(0.05, 1.0);
  double worst_sum = 0;
  for (int trial = 0; trial < 50; ++trial) {
    MapArray<double> a(40, 60), b(40, 60);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng), b.data()[i] = u(rng);
    const PLMap nv0(a), nvm(b);
    const double s = us(rng);
    const auto [low, high] = make_field_map_pair(nv0, nvm, s);
    const UnmixedMaps r = field_unmix(low, high, 1.0 / s);
    const double scale_ref = low.values().abs().maxCoeff();
    worst_sum = std::max(worst_sum, ((r.nv0.values() + r.nvminus.values()) - low.values()).abs().maxCoeff() / scale_ref);
  }
  const auto [nv0, nvm] = make_letter_map(256, 128, 1000.0, 1500.0);
  const auto [low, high] = make_field_map_pair(nv0, nvm, 1.0 / 6.2);
  const UnmixedMaps r = field_unmix(low, high, 6.2);
  const double truth_err = std::max((r.nv0.values() - nv0.values()).abs().maxCoeff(),
                                    (r.nvminus.values() - nvm.values()).abs().maxCoeff()) /
                           1500.0;
  return {worst_sum <= 1e-12 && truth_err <= 1e-12,
          fmt("sum identity worst rel %.3g over 50 random pairs; letter truths rel err %.3g at f = 6.2", worst_sum,
              truth_err)};
}

Outcome formats_and_rendering() {
  const fs::path dir = fs::temp_directory_path() / "nvunmix_acceptance";
  fs::remove_all(dir);
  std::mt19937_64 rng(5);
  bool exact = true;
  for (int i = 0; i < 20; ++i) {
    const Spectrum s(oracle::random_grid(rng, 400, 1000, 500), oracle::random_values(rng, 500, 0, 1e6));
    io::save_spectrum(s, dir / "s.csv");
    const Spectrum back = io::load_spectrum(dir / "s.csv");
    exact = exact && back.wavelengths() == s.wavelengths() && back.intensities() == s.intensities();
    MapArray<double> a(17, 23);
    for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = std::uniform_real_distribution<double>(-1e4, 1e4)(rng);
    const PLMap m(a, 0.37);
    io::save_map(m, dir / "m");
    const PLMap mb = io::load_map(dir / "m", {io::NegativePolicy::Allow});
    exact = exact && (mb.values() == m.values()).all() && mb.pixel_pitch() == m.pixel_pitch();
  }
  fs::remove_all(dir);

  const auto first = golden::scenes(), second = golden::scenes();
  int golden_ok = 0, repeat_ok = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    repeat_ok += first[i].bytes == second[i].bytes;
    const fs::path path = golden::dir() / first[i].file;
    golden_ok += fs::exists(path) && io::read_file(path) == first[i].bytes;
  }
  const int golden_total = static_cast<int>(first.size());
  const bool repeat = repeat_ok == golden_total;
  return {exact && repeat && golden_ok == golden_total,
          fmt("spectrum/map round trips bit-exact: %s; golden images matched %d/%d", exact ? "yes" : "no", golden_ok,
              golden_total)};
}

}  // namespace
}  // namespace nvunmix

int main() {
  using namespace nvunmix;
  const std::vector<Criterion> criteria = {
      {1, "filter-inversion exactness", filter_inversion},
      {2, "f-recovery", f_recovery},
      {3, "reduced f arithmetic", reduced_formula},
      {4, "flat-spectrum transmissivity", flat_transmissivity},
      {5, "NNLS round trip", nnls_round_trip},
      {6, "full-mixing-field detection", full_mixing},
      {7, "field-map decomposition identity", field_map_identity},
      {8, "format round trips and deterministic rendering", formats_and_rendering},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
