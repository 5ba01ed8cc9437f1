#include <gtest/gtest.h>

#include "json.hpp"

#include <filesystem>
#include <random>

#include "nvunmix/io.hpp"
#include "nvunmix/report.hpp"
#include "oracles.hpp"

namespace nvunmix {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("nvunmix_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

int parse_error_line(auto&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

TEST(NumberFormatTest, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
    double back = 0;
    ASSERT_TRUE(io::parse_double(io::format_double(v), back));
    ASSERT_EQ(back, v);
  }
  EXPECT_EQ(io::format_double(6.2), "6.2");
  EXPECT_EQ(io::format_double(0.0), "0");
  double x = 0;
  EXPECT_FALSE(io::parse_double("1.5x", x));
  EXPECT_FALSE(io::parse_double("", x));
  EXPECT_FALSE(io::parse_double("nan", x));
  EXPECT_TRUE(io::parse_double(" 2.5 ", x));
  EXPECT_EQ(x, 2.5);
}

TEST(SpectrumIoTest, RoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Spectrum s(oracle::random_grid(rng, 500, 900, 200), oracle::random_values(rng, 200, 0, 1e5));
    io::save_spectrum(s, dir.path() / "s.csv");
    const Spectrum back = io::load_spectrum(dir.path() / "s.csv");
    ASSERT_TRUE(back.wavelengths() == s.wavelengths());
    ASSERT_TRUE(back.intensities() == s.intensities());
  }
  EXPECT_EQ(io::read_file(dir.path() / "s.csv").rfind("# spec-csv v1\n", 0), 0u);
}

TEST(SpectrumIoTest, CommentsAndWhitespace) {
  const Spectrum s = io::parse_spectrum("# spec-csv v1\n# note\n500,1\n\n501, 2\r\n502 ,3\n");
  EXPECT_EQ(s.size(), 3);
  EXPECT_EQ(s.intensities()[2], 3.0);
}

TEST(SpectrumIoTest, ParseErrorsNameTheLine) {
  EXPECT_EQ(parse_error_line([] { io::parse_spectrum("# spec-csv v1\n500,1\n502,1\n501,1\n"); }), 4);
  EXPECT_EQ(parse_error_line([] { io::parse_spectrum("500,1\n501,abc\n"); }), 2);
  EXPECT_EQ(parse_error_line([] { io::parse_spectrum("500,1\n501,2,3\n"); }), 2);
  EXPECT_EQ(parse_error_line([] { io::parse_spectrum("# spec-csv v2\n500,1\n501,2\n"); }), 1);
  EXPECT_THROW(io::parse_spectrum("500,1\n"), ParseError);
  EXPECT_THROW(io::parse_spectrum(""), ParseError);
}

TEST(SpectrumIoTest, NegativePolicy) {
  const std::string text = "500,1\n501,-2\n502,3\n";
  EXPECT_EQ(parse_error_line([&] { io::parse_spectrum(text); }), 2);
  Warnings w;
  const Spectrum clamped = io::parse_spectrum(text, {io::NegativePolicy::Clamp}, &w);
  EXPECT_EQ(clamped.intensities()[1], 0.0);
  EXPECT_TRUE(has_warning(w, WarningCode::Clamped));
  EXPECT_EQ(io::parse_spectrum(text, {io::NegativePolicy::Allow}).intensities()[1], -2.0);
}

TEST(SpectrumIoTest, MissingFileIsIoError) {
  EXPECT_THROW(io::load_spectrum("/nonexistent/dir/s.csv"), IoError);
}

TEST(MapIoTest, RoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(3);
  MapArray<double> a(7, 11);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = std::uniform_real_distribution<double>(-5, 1e4)(rng);
  const PLMap m(a, 0.125);
  const io::MapPaths p = io::save_map(m, dir.path() / "map");
  EXPECT_EQ(p.sidecar, dir.path() / "map.json");
  EXPECT_EQ(p.data, dir.path() / "map.csv");
  const auto sidecar = nlohmann::json::parse(io::read_file(p.sidecar));
  EXPECT_EQ(sidecar, (nlohmann::json{{"format", "plmap"}, {"version", 1}, {"width", 11}, {"height", 7},
                                     {"pixel_pitch_um", 0.125}}));
  for (const auto& path : {dir.path() / "map", p.sidecar, p.data}) {
    const PLMap back = io::load_map(path, {io::NegativePolicy::Allow});
    EXPECT_TRUE((back.values() == m.values()).all());
    EXPECT_EQ(back.pixel_pitch(), 0.125);
  }
}

TEST(MapIoTest, DimensionErrors) {
  const std::string side = R"({"format":"plmap","version":1,"width":3,"height":2,"pixel_pitch_um":0.1})";
  EXPECT_NO_THROW(io::parse_map(side, "1,2,3\n4,5,6\n"));
  EXPECT_EQ(parse_error_line([&] { io::parse_map(side, "1,2,3\n4,5\n"); }), 2);
  EXPECT_THROW(io::parse_map(side, "1,2,3\n"), ParseError);
  EXPECT_THROW(io::parse_map(side, "1,2,3\n4,5,6\n7,8,9\n"), ParseError);
  EXPECT_THROW(io::parse_map(R"({"format":"plmap","version":2,"width":3,"height":2,"pixel_pitch_um":0.1})",
                             "1,2,3\n4,5,6\n"),
               ParseError);
  EXPECT_THROW(io::parse_map(R"({"format":"plmap","version":1,"width":3,"height":2})", "1,2,3\n4,5,6\n"),
               ParseError);
  EXPECT_THROW(io::parse_map("{not json", "1\n"), ParseError);
  EXPECT_THROW(io::parse_map(side, "1,2,3\n4,-5,6\n"), ParseError);
}

TEST(ManifestTest, RoundTripAndRelativePaths) {
  TempDir dir;
  io::save_manifest({{170.0, "a.csv"}, {975.0, "sub/b.csv"}}, dir.path() / "manifest.json");
  const auto entries = io::load_manifest(dir.path() / "manifest.json");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].b_field_gauss, 170.0);
  EXPECT_EQ(entries[1].path, dir.path() / "sub/b.csv");
  io::write_file(dir.path() / "bare.json", R"([{"b_field_gauss": 10, "path": "/abs/x.csv"}])");
  EXPECT_EQ(io::load_manifest(dir.path() / "bare.json")[0].path, fs::path("/abs/x.csv"));
  io::write_file(dir.path() / "bad.json", R"({"entries":[{"path":"x.csv"}]})");
  EXPECT_THROW(io::load_manifest(dir.path() / "bad.json"), ParseError);
}

TEST(ContentHashTest, ReproducibleAndSensitive) {
  TempDir dir;
  io::write_file(dir.path() / "a", "hello");
  io::write_file(dir.path() / "b", "hello");
  io::write_file(dir.path() / "c", "hellp");
  EXPECT_EQ(io::content_hash(dir.path() / "a"), io::content_hash(dir.path() / "b"));
  EXPECT_NE(io::content_hash(dir.path() / "a"), io::content_hash(dir.path() / "c"));
  // FNV-1a 64 reference value for "hello".
  EXPECT_EQ(io::content_hash(dir.path() / "a"), "fnv1a64:a430d84680aabd0b");
}

TEST(RunReportTest, WriteAndReadBack) {
  TempDir dir;
  io::write_file(dir.path() / "in.csv", "500,1\n501,2\n");
  io::write_file(dir.path() / "out.csv", "x");
  RunReport r;
  r.command = "decompose";
  r.add_input(dir.path() / "in.csv");
  r.add_output(dir.path() / "out.csv");
  r.parameters = {{"zpl_center", 637.0}};
  r.diagnostics = {{"f", 6.2}};
  r.add_warnings({{WarningCode::NegativeExcursion, "nv0 < 0 at 3 bins"}});
  r.timestamp = utc_timestamp();
  write_report(r, dir.path() / "report.json", {{"f", 6.2}});
  const auto j = nlohmann::json::parse(io::read_file(dir.path() / "report.json"));
  EXPECT_EQ(j.at("f"), 6.2);
  EXPECT_EQ(j.at("command"), "decompose");
  EXPECT_EQ(j.at("inputs")[0].at("hash"), io::content_hash(dir.path() / "in.csv"));
  const RunReport back = RunReport::from_json(j);
  EXPECT_EQ(back.outputs, r.outputs);
  EXPECT_EQ(back.warnings.size(), 1u);
  EXPECT_NE(back.warnings[0].find("NegativeExcursionWarning"), std::string::npos);

  r.add_output(dir.path() / "missing.csv");
  EXPECT_THROW(write_report(r, dir.path() / "report2.json"), IoError);
}

TEST(RunReportTest, PrettyPrintRounds) {
  const std::string text = pretty_print(nlohmann::json{{"command", "x"}, {"f", 6.123456789}});
  EXPECT_NE(text.find("6.12346"), std::string::npos);
  EXPECT_EQ(text.find("6.123456789"), std::string::npos);
}

}  // namespace
}  // namespace nvunmix
