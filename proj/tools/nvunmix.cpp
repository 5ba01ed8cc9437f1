// nvunmix command-line tool.
//
// Exit codes: 0 success, 2 validation/parse error, 3 numerical error,
// 4 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "nvunmix/nvunmix.hpp"
#include "params.hpp"

namespace fs = std::filesystem;

namespace nvunmix::cli {
namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

io::LoadOptions raw_load(bool clamp) {
  return {clamp ? io::NegativePolicy::Clamp : io::NegativePolicy::Reject};
}

const io::LoadOptions kDerivedLoad{io::NegativePolicy::Allow};

RunReport new_report(const std::string& command, const json& parameters) {
  RunReport r;
  r.command = command;
  r.parameters = parameters;
  r.timestamp = utc_timestamp();
  return r;
}

void print_warnings(const Warnings& w) {
  for (const auto& item : w) std::cerr << "warning: " << to_string(item.code) << ": " << item.message << "\n";
}

json map_stats(const PLMap& m) {
  return {{"min", m.values().minCoeff()}, {"max", m.values().maxCoeff()}};
}

// <stem>.nv0 and <stem>.nvm from --out, or from the first input's stem.
fs::path output_stem(const std::string& out, const std::string& first_input) {
  if (!out.empty()) return out;
  const io::MapPaths p = io::map_paths(first_input);
  return fs::path(p.sidecar).replace_extension();
}

// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string low, high, out_nv0, out_nvm, report, params;
  double zpl_center = 637.0;
  std::pair<double, double> zpl_window{630.0, 644.0};
  double edge = 4.0;
  std::pair<double, double> f_range{1.0, 50.0};
  double flatness_threshold = FlatnessCheck{}.threshold;
  bool clamp_negative = false;
  bool resample = false;
};

void add_decompose(CLI::App& app, DecomposeArgs& a) {
  auto* sub = app.add_subcommand("decompose", "Split a low-field spectrum into NV0 and NV- parts");
  sub->add_option("--low", a.low, "Low-field spectrum (spec-csv)")->required();
  sub->add_option("--high", a.high, "High-field spectrum (spec-csv)")->required();
  sub->add_option("--out-nv0", a.out_nv0, "Output NV0 component")->required();
  sub->add_option("--out-nvm", a.out_nvm, "Output NV- component")->required();
  sub->add_option("--report", a.report, "Report path (default <out-nv0 stem>.report.json)");
  sub->add_option("--params", a.params, "JSON parameter file");
  sub->add_option("--zpl-center", a.zpl_center, "ZPL center, nm");
  sub->add_option_function<std::string>(
      "--zpl-window", [&a](const std::string& s) { a.zpl_window = parse_range(s); }, "Inner ZPL window lo:hi, nm");
  sub->add_option("--edge", a.edge, "Baseline edge band width, nm");
  sub->add_option_function<std::string>(
      "--f-range", [&a](const std::string& s) { a.f_range = parse_range(s); }, "Search range for f, lo:hi");
  sub->add_option("--flatness-threshold", a.flatness_threshold, "Relative 575 nm score that raises a warning");
  sub->add_flag("--clamp-negative", a.clamp_negative, "Clamp negative input values to zero");
  sub->add_flag("--resample", a.resample, "Resample the high-field spectrum onto the low-field grid");
}

int run_decompose(const CLI::App& sub, DecomposeArgs a) {
  const json params = load_params(a.params);
  resolve(sub, "--zpl-center", params, "zpl_center", a.zpl_center);
  resolve_range(sub, "--zpl-window", params, "zpl_window", a.zpl_window);
  resolve(sub, "--edge", params, "edge", a.edge);
  resolve_range(sub, "--f-range", params, "f_range", a.f_range);
  resolve(sub, "--flatness-threshold", params, "flatness_threshold", a.flatness_threshold);
  resolve(sub, "--clamp-negative", params, "clamp_negative", a.clamp_negative);
  resolve(sub, "--resample", params, "resample", a.resample);

  Warnings load_warnings;
  const Spectrum low = io::load_spectrum(a.low, raw_load(a.clamp_negative), &load_warnings);
  Spectrum high = io::load_spectrum(a.high, raw_load(a.clamp_negative), &load_warnings);
  if (a.resample && !high.same_grid(low)) high = resample(high, low.wavelengths());

  const ZplArtifactConfig cfg{a.zpl_center, {a.zpl_window.first, a.zpl_window.second}, a.edge};
  FSearch search;
  search.f_min = a.f_range.first;
  search.f_max = a.f_range.second;
  FlatnessCheck flat;
  flat.threshold = a.flatness_threshold;
  const DecompositionResult r = decompose(low, high, cfg, search, flat);

  io::save_spectrum(r.nv0, a.out_nv0);
  io::save_spectrum(r.nvminus, a.out_nvm);

  const json effective = {{"zpl_center", a.zpl_center},   {"zpl_window", format_range(a.zpl_window)},
                          {"edge", a.edge},               {"f_range", format_range(a.f_range)},
                          {"flatness_threshold", a.flatness_threshold},
                          {"clamp_negative", a.clamp_negative}, {"resample", a.resample}};
  RunReport rep = new_report("decompose", effective);
  rep.add_input(a.low);
  rep.add_input(a.high);
  rep.add_output(a.out_nv0);
  rep.add_output(a.out_nvm);
  const json score = r.zpl575_score ? json(*r.zpl575_score) : json(nullptr);
  rep.diagnostics = {{"f", r.f}, {"zpl_metric", r.zpl_metric}, {"nv0_zpl575_score", score},
                     {"nv0_min", r.nv0.intensities().minCoeff()}};
  rep.add_warnings(load_warnings);
  rep.add_warnings(r.warnings);
  const fs::path report = a.report.empty() ? fs::path(a.out_nv0).replace_extension(".report.json") : fs::path(a.report);
  write_report(rep, report, {{"f", r.f}, {"zpl_metric", r.zpl_metric}, {"nv0_zpl575_score", score}});

  print_warnings(load_warnings);
  print_warnings(r.warnings);
  std::printf("f = %.6g\nzpl_metric = %.6g\n", r.f, r.zpl_metric);
  return 0;
}

// ---------------------------------------------------------------------------

struct FitSeriesArgs {
  std::string basis_nv0, basis_nvm, series, out_dir = ".", report, params;
  bool unconstrained = false;
  bool clamp_negative = false;
  bool refine = false;
};

void add_fit_series(CLI::App& app, FitSeriesArgs& a) {
  auto* sub = app.add_subcommand("fit-series", "Fit a field sweep against a basis pair");
  sub->add_option("--basis-nv0", a.basis_nv0, "NV0 basis spectrum (normalized on load)")->required();
  sub->add_option("--basis-nvm", a.basis_nvm, "NV- basis spectrum (normalized on load)")->required();
  sub->add_option("--series", a.series, "Manifest JSON of {b_field_gauss, path} entries")->required();
  sub->add_option("--out-dir", a.out_dir, "Directory for coefficients.csv and f_surface.csv");
  sub->add_option("--report", a.report, "Report path (default <out-dir>/fit-series.report.json)");
  sub->add_option("--params", a.params, "JSON parameter file");
  sub->add_flag("--unconstrained", a.unconstrained, "Allow negative coefficients");
  sub->add_flag("--clamp-negative", a.clamp_negative, "Clamp negative input values to zero");
  sub->add_flag("--refine", a.refine, "Parabolic refinement of the full-mixing field");
}

int run_fit_series(const CLI::App& sub, FitSeriesArgs a) {
  const json params = load_params(a.params);
  resolve(sub, "--unconstrained", params, "unconstrained", a.unconstrained);
  resolve(sub, "--clamp-negative", params, "clamp_negative", a.clamp_negative);
  resolve(sub, "--refine", params, "refine", a.refine);
  resolve(sub, "--out-dir", params, "out_dir", a.out_dir);

  Warnings warnings;
  const BasisPair basis = BasisPair::from_unnormalized(io::load_spectrum(a.basis_nv0, raw_load(a.clamp_negative), &warnings),
                                                       io::load_spectrum(a.basis_nvm, raw_load(a.clamp_negative), &warnings));
  const auto manifest = io::load_manifest(a.series);
  std::vector<FieldSpectrum> entries;
  for (const auto& e : manifest)
    entries.push_back({e.b_field_gauss, io::load_spectrum(e.path, raw_load(a.clamp_negative), &warnings)});
  const FieldSeries series = FieldSeries::resampled(std::move(entries), basis.s0().wavelengths());
  const CoefficientTable table = fit_series(series, basis, a.unconstrained ? FitMode::Unconstrained : FitMode::NonNegative);

  std::string coeffs = "b_gauss,c0,cminus,residual\n";
  for (const auto& row : table)
    coeffs += io::format_double(row.b_field) + "," + io::format_double(row.c0) + "," + io::format_double(row.cminus) +
              "," + io::format_double(row.fit_residual) + "\n";
  std::string surface = "b1,b2,f\n";
  json diagnostics = {{"rows", table.size()}};
  if (table.size() >= 2) {
    const FSurface fs_ = f_surface(table);
    for (const auto& p : fs_.points)
      surface += io::format_double(p.b1) + "," + io::format_double(p.b2) + "," + io::format_double(p.f) + "\n";
    json singular = json::array();
    for (const auto& [b1, b2] : fs_.singular) singular.push_back({b1, b2});
    diagnostics["singular_pairs"] = singular;
    warnings.insert(warnings.end(), fs_.warnings.begin(), fs_.warnings.end());
  }
  diagnostics["full_mixing_field"] = nullptr;
  if (table.size() >= 3) {
    try {
      const FullMixingField fm = find_full_mixing_field(table, {a.refine});
      diagnostics["full_mixing_field"] = fm.b_field;
      warnings.insert(warnings.end(), fm.warnings.begin(), fm.warnings.end());
    } catch (const NoMinimumError& e) {
      warnings.push_back({WarningCode::Flat, e.what()});
    }
  }

  const fs::path dir = a.out_dir;
  io::write_file(dir / "coefficients.csv", coeffs);
  io::write_file(dir / "f_surface.csv", surface);

  RunReport rep = new_report("fit-series", {{"unconstrained", a.unconstrained},
                                            {"clamp_negative", a.clamp_negative},
                                            {"refine", a.refine},
                                            {"out_dir", a.out_dir}});
  rep.add_input(a.basis_nv0);
  rep.add_input(a.basis_nvm);
  rep.add_input(a.series);
  for (const auto& e : manifest) rep.add_input(e.path);
  rep.add_output(dir / "coefficients.csv");
  rep.add_output(dir / "f_surface.csv");
  rep.diagnostics = diagnostics;
  rep.add_warnings(warnings);
  write_report(rep, a.report.empty() ? dir / "fit-series.report.json" : fs::path(a.report));
  print_warnings(warnings);
  std::printf("fitted %zu spectra\n", table.size());
  return 0;
}

// ---------------------------------------------------------------------------

struct TransmissivityArgs {
  std::string spectrum, filter_table, report, params;
  double tmax = 0.9, center = 645.0, width = 6.9;
  std::pair<double, double> window{550.0, 850.0};
};

void add_transmissivity(CLI::App& app, TransmissivityArgs& a) {
  auto* sub = app.add_subcommand("transmissivity", "Intensity-weighted filter transmissivity of a spectrum");
  sub->add_option("--spectrum", a.spectrum, "Spectrum (spec-csv)")->required();
  auto* tmax = sub->add_option("--tmax", a.tmax, "Peak transmission");
  auto* center = sub->add_option("--center", a.center, "Filter edge center, nm");
  auto* width = sub->add_option("--width", a.width, "Filter edge width, nm");
  sub->add_option_function<std::string>(
      "--window", [&a](const std::string& s) { a.window = parse_range(s); }, "Integration window lo:hi, nm");
  sub->add_option("--filter-table", a.filter_table, "Tabulated transmission (wavelength_nm,T)")
      ->excludes(tmax)
      ->excludes(center)
      ->excludes(width);
  sub->add_option("--report", a.report, "Optional report path");
  sub->add_option("--params", a.params, "JSON parameter file");
}

int run_transmissivity(const CLI::App& sub, TransmissivityArgs a) {
  const json params = load_params(a.params);
  resolve(sub, "--tmax", params, "tmax", a.tmax);
  resolve(sub, "--center", params, "center", a.center);
  resolve(sub, "--width", params, "width", a.width);
  resolve_range(sub, "--window", params, "window", a.window);
  resolve(sub, "--filter-table", params, "filter_table", a.filter_table);

  const Spectrum s = io::load_spectrum(a.spectrum, kDerivedLoad);
  const WavelengthWindow w{a.window.first, a.window.second};
  json effective = {{"window", format_range(a.window)}};
  double t = 0;
  if (!a.filter_table.empty()) {
    t = transmissivity(s, io::load_filter_table(a.filter_table), w);
    effective["filter_table"] = a.filter_table;
  } else {
    const FilterModel fm{a.tmax, a.center, a.width};
    fm.validate();
    t = transmissivity(s, fm, w);
    effective.update({{"tmax", a.tmax}, {"center", a.center}, {"width", a.width}});
  }
  std::printf("%.6g\n", t);
  if (!a.report.empty()) {
    RunReport rep = new_report("transmissivity", effective);
    rep.add_input(a.spectrum);
    if (!a.filter_table.empty()) rep.add_input(a.filter_table);
    rep.diagnostics = {{"t", t}};
    write_report(rep, a.report, {{"t", t}});
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct MapOutputs {
  fs::path stem;
  bool fractions = false;
};

void write_unmixed(RunReport& rep, const UnmixedMaps& u, const PLMap& total, const MapOutputs& out, Warnings& warnings) {
  rep.add_output(io::save_map(u.nv0, fs::path(out.stem).concat(".nv0")).sidecar);
  rep.add_output(io::map_paths(fs::path(out.stem).concat(".nv0")).data);
  rep.add_output(io::save_map(u.nvminus, fs::path(out.stem).concat(".nvm")).sidecar);
  rep.add_output(io::map_paths(fs::path(out.stem).concat(".nvm")).data);
  if (out.fractions) {
    const FractionMaps f = fraction_maps(u, total);
    for (const auto& [suffix, map] : {std::pair{".frac0", &f.frac0}, std::pair{".fracm", &f.fracminus}}) {
      const io::MapPaths p = io::save_map(*map, fs::path(out.stem).concat(suffix));
      rep.add_output(p.sidecar);
      rep.add_output(p.data);
    }
    rep.diagnostics["fraction_undefined_pixels"] = f.undefined_count;
    warnings.insert(warnings.end(), f.warnings.begin(), f.warnings.end());
  }
  rep.diagnostics["negative_pixel_count"] = u.negative_pixel_count;
  rep.diagnostics["nv0"] = map_stats(u.nv0);
  rep.diagnostics["nvminus"] = map_stats(u.nvminus);
  if (u.negative_pixel_count > 0)
    warnings.push_back({WarningCode::NegativeExcursion,
                        std::to_string(u.negative_pixel_count) + " negative pixel value(s) kept in the outputs"});
}

struct FieldMapArgs {
  std::string low, high, out, report, params;
  double f = 0;
  bool fractions = false;
  bool clamp_negative = false;
};

void add_unmix_field(CLI::App& app, FieldMapArgs& a) {
  auto* sub = app.add_subcommand("unmix-map-field", "Unmix a low/high-field PL map pair");
  sub->add_option("--low", a.low, "Low-field map (plmap)")->required();
  sub->add_option("--high", a.high, "High-field map (plmap)")->required();
  sub->add_option("--f", a.f, "Scaling factor f");
  sub->add_option("--out", a.out, "Output stem (default: stem of --low)");
  sub->add_option("--report", a.report, "Report path (default <stem>.report.json)");
  sub->add_option("--params", a.params, "JSON parameter file");
  sub->add_flag("--fractions", a.fractions, "Also write fraction maps");
  sub->add_flag("--clamp-negative", a.clamp_negative, "Clamp negative input values to zero");
}

int run_unmix_field(const CLI::App& sub, FieldMapArgs a) {
  const json params = load_params(a.params);
  resolve(sub, "--f", params, "f", a.f);
  resolve(sub, "--out", params, "out", a.out);
  resolve(sub, "--fractions", params, "fractions", a.fractions);
  resolve(sub, "--clamp-negative", params, "clamp_negative", a.clamp_negative);
  if (sub.count("--f") == 0 && !params.contains("f")) throw ValidationError("unmix-map-field: --f is required");

  Warnings warnings;
  const PLMap low = io::load_map(a.low, raw_load(a.clamp_negative), &warnings);
  const PLMap high = io::load_map(a.high, raw_load(a.clamp_negative), &warnings);
  const UnmixedMaps u = field_unmix(low, high, a.f);

  const MapOutputs out{output_stem(a.out, a.low), a.fractions};
  RunReport rep = new_report("unmix-map-field", {{"f", a.f},
                                                 {"out", out.stem.generic_string()},
                                                 {"fractions", a.fractions},
                                                 {"clamp_negative", a.clamp_negative}});
  rep.add_input(io::map_paths(a.low).sidecar);
  rep.add_input(io::map_paths(a.low).data);
  rep.add_input(io::map_paths(a.high).sidecar);
  rep.add_input(io::map_paths(a.high).data);
  write_unmixed(rep, u, low, out, warnings);
  rep.diagnostics["f"] = a.f;
  rep.diagnostics["reconstruction_residual"] = ((u.nv0.values() + u.nvminus.values()) - low.values()).abs().maxCoeff();
  rep.add_warnings(warnings);
  write_report(rep, a.report.empty() ? fs::path(out.stem).concat(".report.json") : fs::path(a.report));
  print_warnings(warnings);
  std::printf("negative_pixel_count = %lld\n", static_cast<long long>(u.negative_pixel_count));
  return 0;
}

struct FilterMapArgs {
  std::string m0, mlpf, out, report, params;
  double t0 = 0, tm = 0;
  bool fractions = false;
  bool clamp_negative = false;
};

void add_unmix_filter(CLI::App& app, FilterMapArgs& a) {
  auto* sub = app.add_subcommand("unmix-map-filter", "Unmix an unfiltered/long-pass-filtered PL map pair");
  sub->add_option("--m0", a.m0, "Unfiltered map (plmap)")->required();
  sub->add_option("--mlpf", a.mlpf, "Long-pass-filtered map (plmap)")->required();
  sub->add_option("--t0", a.t0, "NV0 transmissivity");
  sub->add_option("--tm", a.tm, "NV- transmissivity");
  sub->add_option("--out", a.out, "Output stem (default: stem of --m0)");
  sub->add_option("--report", a.report, "Report path (default <stem>.report.json)");
  sub->add_option("--params", a.params, "JSON parameter file");
  sub->add_flag("--fractions", a.fractions, "Also write fraction maps");
  sub->add_flag("--clamp-negative", a.clamp_negative, "Clamp negative input values to zero");
}

int run_unmix_filter(const CLI::App& sub, FilterMapArgs a) {
  const json params = load_params(a.params);
  resolve(sub, "--t0", params, "t0", a.t0);
  resolve(sub, "--tm", params, "tm", a.tm);
  resolve(sub, "--out", params, "out", a.out);
  resolve(sub, "--fractions", params, "fractions", a.fractions);
  resolve(sub, "--clamp-negative", params, "clamp_negative", a.clamp_negative);
  for (const char* key : {"t0", "tm"})
    if (sub.count(std::string("--") + key) == 0 && !params.contains(key))
      throw ValidationError(std::string("unmix-map-filter: --") + key + " is required");

  Warnings warnings;
  const PLMap m0 = io::load_map(a.m0, raw_load(a.clamp_negative), &warnings);
  const PLMap mlpf = io::load_map(a.mlpf, raw_load(a.clamp_negative), &warnings);
  const TransmissivityPair t{a.t0, a.tm};
  if (std::abs(t.t0 - t.tminus) < kConditioningGap)
    warnings.push_back({WarningCode::Conditioning, "t0 and tminus differ by less than 0.05"});
  const UnmixedMaps u = filter_unmix(m0, mlpf, t);

  const MapOutputs out{output_stem(a.out, a.m0), a.fractions};
  RunReport rep = new_report("unmix-map-filter", {{"t0", a.t0},
                                                  {"tm", a.tm},
                                                  {"out", out.stem.generic_string()},
                                                  {"fractions", a.fractions},
                                                  {"clamp_negative", a.clamp_negative}});
  rep.add_input(io::map_paths(a.m0).sidecar);
  rep.add_input(io::map_paths(a.m0).data);
  rep.add_input(io::map_paths(a.mlpf).sidecar);
  rep.add_input(io::map_paths(a.mlpf).data);
  write_unmixed(rep, u, m0, out, warnings);
  rep.diagnostics["t0"] = a.t0;
  rep.diagnostics["tminus"] = a.tm;
  rep.diagnostics["noise_amplification"] = 1.0 / std::abs(a.t0 - a.tm);
  rep.diagnostics["reconstruction_residual"] = {
      {"m0", ((u.nv0.values() + u.nvminus.values()) - m0.values()).abs().maxCoeff()},
      {"mlpf", ((a.t0 * u.nv0.values() + a.tm * u.nvminus.values()) - mlpf.values()).abs().maxCoeff()}};
  rep.add_warnings(warnings);
  write_report(rep, a.report.empty() ? fs::path(out.stem).concat(".report.json") : fs::path(a.report));
  print_warnings(warnings);
  std::printf("negative_pixel_count = %lld\n", static_cast<long long>(u.negative_pixel_count));
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string params, out = ".";
  std::uint64_t seed = 0;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  auto* sim = app.add_subcommand("simulate", "Generate synthetic spectra and maps");
  sim->require_subcommand(1);
  for (const char* kind : {"spectrum", "sweep", "letter-map", "field-map-pair"}) {
    auto* sub = sim->add_subcommand(kind);
    sub->add_option("--params", a.params, "JSON parameter file");
    sub->add_option("--seed", a.seed, "Random seed");
    sub->add_option("--out", a.out, "Output directory");
  }
}

json simulate_spectrum(const json& p, const fs::path& dir, std::uint64_t seed, RunReport& rep) {
  const Eigen::VectorXd grid = grid_from_json(p.value("grid", json()));
  const SpectralShapeModel model = shape_from_json(p.value("model", json()), SpectralShapeModel::nvminus_default());
  const double total = param_or(p, "total_counts", 1e6);
  const NoiseModel noise = noise_from_json(p.value("noise", json()));
  io::save_spectrum(apply_noise(make_spectrum(model, grid, total), noise, seed), dir / "spectrum.csv");
  rep.add_output(dir / "spectrum.csv");
  return {{"grid", grid_to_json(grid)}, {"model", shape_to_json(model)}, {"total_counts", total},
          {"noise", noise_to_json(noise)}};
}

json simulate_sweep(const json& p, const fs::path& dir, std::uint64_t seed, RunReport& rep) {
  const Eigen::VectorXd grid = grid_from_json(p.value("grid", json()));
  const json shapes_j = p.value("shapes", json::object());
  const ShapePair shapes{shape_from_json(shapes_j.value("nv0", json()), SpectralShapeModel::nv0_default()),
                         shape_from_json(shapes_j.value("nvminus", json()), SpectralShapeModel::nvminus_default())};
  const FieldResponseModel response = response_from_json(p.value("response", json()));
  const auto fields = param_or(p, "fields", default_sweep_fields());
  const NoiseModel noise = noise_from_json(p.value("noise", json()));
  const FieldSeries series = make_field_sweep(fields, response, shapes, grid, noise, seed);

  const BasisPair basis = make_basis(shapes, grid);
  io::save_spectrum(basis.s0(), dir / "basis_nv0.csv");
  io::save_spectrum(basis.sminus(), dir / "basis_nvm.csv");
  rep.add_output(dir / "basis_nv0.csv");
  rep.add_output(dir / "basis_nvm.csv");
  std::vector<io::ManifestEntry> manifest;
  std::string truth = "b_gauss,c0,cminus\n";
  for (const auto& e : series.entries()) {
    char name[64];
    std::snprintf(name, sizeof name, "spectra/B%06.1f.csv", e.b_field);
    io::save_spectrum(e.spectrum, dir / name);
    rep.add_output(dir / name);
    manifest.push_back({e.b_field, name});
    truth += io::format_double(e.b_field) + "," + io::format_double(response.c0_const) + "," +
             io::format_double(response.cminus(e.b_field)) + "\n";
  }
  io::save_manifest(manifest, dir / "manifest.json");
  io::write_file(dir / "truth.csv", truth);
  rep.add_output(dir / "manifest.json");
  rep.add_output(dir / "truth.csv");
  return {{"grid", grid_to_json(grid)},
          {"shapes", {{"nv0", shape_to_json(shapes.nv0)}, {"nvminus", shape_to_json(shapes.nvminus)}}},
          {"response", response_to_json(response)},
          {"fields", fields},
          {"noise", noise_to_json(noise)}};
}

struct LetterParams {
  Eigen::Index width, height;
  double pl_nv0, pl_nvm, pitch;
};

LetterParams letter_params(const json& p) {
  return {param_or<Eigen::Index>(p, "width", 256), param_or<Eigen::Index>(p, "height", 128),
          param_or(p, "pl_nv0", 1000.0), param_or(p, "pl_nvm", 1500.0), param_or(p, "pixel_pitch_um", 0.1)};
}

json letter_json(const LetterParams& lp) {
  return {{"width", lp.width}, {"height", lp.height}, {"pl_nv0", lp.pl_nv0}, {"pl_nvm", lp.pl_nvm},
          {"pixel_pitch_um", lp.pitch}};
}

void save_maps(RunReport& rep, const fs::path& dir, std::initializer_list<std::pair<const char*, const PLMap*>> maps) {
  for (const auto& [name, map] : maps) {
    const io::MapPaths p = io::save_map(*map, dir / name);
    rep.add_output(p.sidecar);
    rep.add_output(p.data);
  }
}

json simulate_letter_map(const json& p, const fs::path& dir, RunReport& rep) {
  const LetterParams lp = letter_params(p);
  const TransmissivityPair t{param_or(p, "t0", 0.3), param_or(p, "tminus", 0.8)};
  const auto [nv0, nvm] = make_letter_map(lp.width, lp.height, lp.pl_nv0, lp.pl_nvm, lp.pitch);
  const auto [m0, mlpf] = compose_filter_maps(nv0, nvm, t);
  save_maps(rep, dir, {{"nv0_truth", &nv0}, {"nvm_truth", &nvm}, {"m0", &m0}, {"mlpf", &mlpf}});
  json out = letter_json(lp);
  out["t0"] = t.t0;
  out["tminus"] = t.tminus;
  return out;
}

json simulate_field_map_pair(const json& p, const fs::path& dir, RunReport& rep) {
  const LetterParams lp = letter_params(p);
  const double suppression = param_or(p, "suppression", 1.0 / 6.2);
  const auto [nv0, nvm] = make_letter_map(lp.width, lp.height, lp.pl_nv0, lp.pl_nvm, lp.pitch);
  const auto [low, high] = make_field_map_pair(nv0, nvm, suppression);
  save_maps(rep, dir, {{"nv0_truth", &nv0}, {"nvm_truth", &nvm}, {"lowB", &low}, {"highB", &high}});
  json out = letter_json(lp);
  out["suppression"] = suppression;
  out["implied_f"] = 1.0 / suppression;
  return out;
}

int run_simulate(const CLI::App& sim, const SimulateArgs& a) {
  const CLI::App* sub = sim.get_subcommands().front();
  const std::string kind = sub->get_name();
  const json params = load_params(a.params);
  const fs::path dir = a.out;
  fs::create_directories(dir);
  RunReport rep = new_report("simulate " + kind, json::object());
  if (!a.params.empty()) rep.add_input(a.params);
  json effective;
  if (kind == "spectrum")
    effective = simulate_spectrum(params, dir, a.seed, rep);
  else if (kind == "sweep")
    effective = simulate_sweep(params, dir, a.seed, rep);
  else if (kind == "letter-map")
    effective = simulate_letter_map(params, dir, rep);
  else
    effective = simulate_field_map_pair(params, dir, rep);
  effective["seed"] = a.seed;
  rep.parameters = effective;
  write_report(rep, dir / "simulate.report.json");
  std::printf("wrote %zu file(s) to %s\n", rep.outputs.size(), dir.generic_string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct RenderArgs {
  std::string map, out, title, colormap = "gray", range, units, report;
  std::vector<std::string> spectra;
  bool clamp = false;
  bool zpl_guides = false;
  bool fraction = false;
};

void add_render(CLI::App& app, RenderArgs& a) {
  auto* sub = app.add_subcommand("render", "Render a map or spectra to SVG/PGM");
  auto* map = sub->add_option("--map", a.map, "Map to render (plmap)");
  auto* spec = sub->add_option("--spectrum", a.spectra, "Spectrum to plot (repeatable)");
  map->excludes(spec);
  sub->add_option("--out", a.out, "Output image (.svg or .pgm)")->required();
  sub->add_option("--title", a.title, "Title");
  sub->add_option("--colormap", a.colormap, "gray or viridis")->check(CLI::IsMember({"gray", "viridis"}));
  sub->add_option("--range", a.range, "Color scale lo:hi");
  sub->add_option("--units", a.units, "Value units for the legend");
  sub->add_flag("--clamp", a.clamp, "Clip values into the color range");
  sub->add_flag("--fraction", a.fraction, "Use the fraction display range -0.25:1.25");
  sub->add_flag("--zpl-guides", a.zpl_guides, "Mark the 575 nm and 637 nm ZPLs");
  sub->add_option("--report", a.report, "Optional report path");
}

int run_render(const RenderArgs& a) {
  if (a.map.empty() && a.spectra.empty()) throw ValidationError("render: give --map or --spectrum");
  const std::string ext = fs::path(a.out).extension().string();
  if (ext != ".svg" && ext != ".pgm") throw ValidationError("render: output must end in .svg or .pgm");
  RunReport rep = new_report("render", {{"title", a.title}, {"colormap", a.colormap}, {"range", a.range},
                                        {"clamp", a.clamp}, {"fraction", a.fraction}, {"zpl_guides", a.zpl_guides}});
  std::string bytes;
  if (!a.map.empty()) {
    MapStyle style;
    style.colormap = a.colormap == "viridis" ? Colormap::Viridis : Colormap::Gray;
    if (a.fraction) {
      style.range = kFractionDisplayRange;
      style.units = "fraction";
    }
    if (!a.range.empty()) style.range = parse_range(a.range);
    if (!a.units.empty()) style.units = a.units;
    style.clamp = a.clamp;
    style.title = a.title;
    const PLMap m = io::load_map(a.map, kDerivedLoad);
    bytes = ext == ".svg" ? render_map_svg(m, style) : render_map_pgm(m, style);
    rep.add_input(io::map_paths(a.map).sidecar);
    rep.add_input(io::map_paths(a.map).data);
  } else {
    if (ext != ".svg") throw ValidationError("render: spectra render to .svg only");
    std::vector<SpectrumSeries> series;
    for (const auto& path : a.spectra) {
      series.push_back({fs::path(path).stem().string(), io::load_spectrum(path, kDerivedLoad)});
      rep.add_input(path);
    }
    SpectrumStyle style;
    style.title = a.title;
    style.zpl_guides = a.zpl_guides;
    bytes = render_spectrum_svg(series, style);
  }
  io::write_file(a.out, bytes);
  rep.add_output(a.out);
  if (!a.report.empty()) write_report(rep, a.report);
  return 0;
}

int run_report(const std::string& path) {
  json doc;
  try {
    doc = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::cout << pretty_print(doc);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Charge-state decomposition of NV photoluminescence spectra and maps", "nvunmix"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nvunmix 1.0.0");

  DecomposeArgs decompose_args;
  FitSeriesArgs fit_args;
  TransmissivityArgs trans_args;
  FieldMapArgs field_args;
  FilterMapArgs filter_args;
  SimulateArgs sim_args;
  RenderArgs render_args;
  std::string report_path;
  add_decompose(app, decompose_args);
  add_fit_series(app, fit_args);
  add_transmissivity(app, trans_args);
  add_unmix_field(app, field_args);
  add_unmix_filter(app, filter_args);
  add_simulate(app, sim_args);
  add_render(app, render_args);
  app.add_subcommand("report", "Pretty-print a run report")->add_option("--run", report_path, "Report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "decompose") return run_decompose(*sub, decompose_args);
  if (name == "fit-series") return run_fit_series(*sub, fit_args);
  if (name == "transmissivity") return run_transmissivity(*sub, trans_args);
  if (name == "unmix-map-field") return run_unmix_field(*sub, field_args);
  if (name == "unmix-map-filter") return run_unmix_filter(*sub, filter_args);
  if (name == "simulate") return run_simulate(*sub, sim_args);
  if (name == "render") return run_render(render_args);
  return run_report(report_path);
}

}  // namespace
}  // namespace nvunmix::cli

int main(int argc, char** argv) {
  using namespace nvunmix;
  try {
    return cli::run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitInput;
  }
}
