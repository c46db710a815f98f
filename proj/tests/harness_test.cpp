#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "jpegcs/harness.hpp"
#include "test_support.hpp"

namespace jpegcs {
namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::pair<double, double>>> polylines(const std::string& svg) {
  std::vector<std::vector<std::pair<double, double>>> out;
  const std::regex poly("<polyline[^>]*points=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator();
       ++it) {
    std::vector<std::pair<double, double>> pts;
    std::istringstream ss((*it)[1].str());
    std::string tok;
    while (ss >> tok) {
      const auto comma = tok.find(',');
      pts.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
    }
    out.push_back(pts);
  }
  return out;
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

std::vector<ComparisonRow> sample_rows() {
  std::vector<ComparisonRow> rows;
  for (int i = 1; i <= 9; ++i) {
    rows.push_back({10 * i, 0.03 + 0.014 * i, 25.0 + 2.0 * i, 28.0 + 3.3 * i});
  }
  return rows;
}

TEST(Csv, FormatsSixSignificantDigits) {
  std::ostringstream ss;
  write_csv(ss, {{50, 0.144, 33.86, 27.95}});
  EXPECT_EQ(ss.str(), std::string(kCsvHeader) + "\n50,0.144000,33.8600,27.9500\n");
  EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_real(124.50318), "124.503");
  EXPECT_THROW(emit_csv({}, testing::temp_dir("csv_empty") / "t.csv"), DomainError);
}

TEST(Csv, ParseInvertsEmit) {
  const auto dir = testing::temp_dir("csv_rt");
  auto rows = sample_rows();
  rows[3].psnr_cs_db = std::numeric_limits<double>::infinity();
  // Values already representable with 6 significant digits survive exactly.
  for (auto& r : rows) {
    r.nonzero_fraction = std::stod(format_real(r.nonzero_fraction));
    r.psnr_jpeg_db = std::stod(format_real(r.psnr_jpeg_db));
    r.psnr_cs_db = std::stod(format_real(r.psnr_cs_db));
  }
  emit_csv(rows, dir / "t.csv");
  EXPECT_EQ(read_csv(dir / "t.csv"), rows);
  EXPECT_THROW(read_csv(dir / "missing.csv"), IoError);
  std::istringstream bad("qf,nonzero_fraction,psnr_jpeg_db,psnr_cs_db\n10,abc,1,2\n");
  EXPECT_THROW(parse_csv(bad), FormatError);
}

TEST(Plot, NineRowsGiveTwoNinePointPolylines) {
  std::ostringstream ss;
  write_plot_svg(ss, sample_rows());
  const auto lines = polylines(ss.str());
  ASSERT_EQ(lines.size(), 2u);
  for (const auto& l : lines) EXPECT_EQ(l.size(), 9u);
  EXPECT_NE(ss.str().find(">JPEG<"), std::string::npos);
  EXPECT_NE(ss.str().find(">CS<"), std::string::npos);
}

TEST(Plot, SingleRowDrawsMarkersOnly) {
  std::ostringstream ss;
  write_plot_svg(ss, {{50, 0.1, 30.0, 30.0}});
  EXPECT_TRUE(polylines(ss.str()).empty());
  EXPECT_EQ(count_of(ss.str(), "<circle"), 2u);
  EXPECT_THROW(emit_plot({}, testing::temp_dir("plot_empty") / "p.svg"), DomainError);
}

TEST(Plot, HigherPsnrIsHigherOnChart) {
  std::ostringstream ss;
  auto rows = sample_rows();
  rows[8].psnr_cs_db = std::numeric_limits<double>::infinity();
  write_plot_svg(ss, rows);
  const auto lines = polylines(ss.str());
  ASSERT_EQ(lines.size(), 2u);
  for (const auto& l : lines) {
    for (std::size_t i = 1; i < l.size(); ++i) {
      EXPECT_GT(l[i].first, l[i - 1].first);   // x grows with fraction
      EXPECT_LT(l[i].second, l[i - 1].second); // SVG y grows downward
    }
  }
}

TEST(Harness, MidGrayImageIsDegenerate) {
  // 64 is a power of 4, so the DC basis value 1/8 is exact and the CS
  // round trip of a constant is bit-exact too.
  const auto dir = testing::temp_dir("flat");
  save_image(Image(64, 64, 255.0, 128.0), dir / "flat.pgm");
  ExperimentConfig cfg;
  cfg.source = dir / "flat.pgm";
  cfg.qf_list = {50};
  const ComparisonRun run = run_comparison_detailed(cfg);
  ASSERT_EQ(run.table.size(), 1u);
  EXPECT_EQ(run.table[0].nonzero_fraction, 0.0);
  EXPECT_EQ(run.provenance[0].measurements, 1u);
  EXPECT_TRUE(std::isinf(run.table[0].psnr_jpeg_db));
  EXPECT_TRUE(std::isinf(run.table[0].psnr_cs_db));
}

TEST(Harness, RateMatchingAndOrdering) {
  ExperimentConfig cfg;
  cfg.source = PhantomSpec::shepp_logan(64);
  cfg.qf_list = {70, 10, 40, 10};
  cfg.solver.max_iters = 200;
  const ComparisonRun run = run_comparison_detailed(cfg);
  ASSERT_EQ(run.table.size(), 3u);
  EXPECT_EQ(run.table[0].qf, 10);
  EXPECT_EQ(run.table[1].qf, 40);
  EXPECT_EQ(run.table[2].qf, 70);
  for (std::size_t i = 0; i < run.table.size(); ++i) {
    const auto& p = run.provenance[i];
    EXPECT_EQ(p.measurements,
              static_cast<std::size_t>(std::llround(run.table[i].nonzero_fraction * 64 * 64)));
    EXPECT_EQ(p.measurements, p.nonzero_coeffs);
    EXPECT_EQ(p.trials.size(), 1u);
    EXPECT_EQ(p.trials[0].seed, mask_seed(0, run.table[i].qf, 0));
  }
  EXPECT_LE(run.table[0].psnr_jpeg_db, run.table[1].psnr_jpeg_db + 0.01);
  EXPECT_LE(run.table[1].psnr_jpeg_db, run.table[2].psnr_jpeg_db + 0.01);
}

TEST(Harness, TrialsAverageDistinctMasks) {
  ExperimentConfig cfg;
  cfg.source = PhantomSpec::shepp_logan(32);
  cfg.qf_list = {30};
  cfg.trials = 3;
  cfg.solver.max_iters = 50;
  const ComparisonRun run = run_comparison_detailed(cfg);
  const auto& t = run.provenance[0].trials;
  ASSERT_EQ(t.size(), 3u);
  EXPECT_NE(t[0].seed, t[1].seed);
  EXPECT_NEAR(run.table[0].psnr_cs_db, (t[0].psnr_db + t[1].psnr_db + t[2].psnr_db) / 3, 1e-12);
}

TEST(Harness, RunExperimentIsReproducible) {
  ExperimentConfig cfg;
  cfg.source = PhantomSpec::shepp_logan(32);
  cfg.qf_list = {20, 60};
  cfg.seed = 4;
  cfg.solver.max_iters = 100;
  cfg.output_dir = testing::temp_dir("repro_a");
  const auto a = run_experiment(cfg);
  cfg.output_dir = testing::temp_dir("repro_b");
  const auto b = run_experiment(cfg);
  EXPECT_EQ(slurp(a.table), slurp(b.table));
  EXPECT_EQ(slurp(a.plot), slurp(b.plot));
  EXPECT_EQ(slurp(a.manifest), slurp(b.manifest));
  EXPECT_NE(slurp(a.manifest).find("\"iterations\""), std::string::npos);
}

TEST(Gallery, WritesTwoFilesPerQf) {
  ExperimentConfig cfg;
  cfg.source = PhantomSpec::shepp_logan(32);
  cfg.solver.max_iters = 20;
  cfg.output_dir = testing::temp_dir("gallery");
  const auto files = emit_gallery(cfg, {10, 40, 70});
  ASSERT_EQ(files.size(), 6u);
  EXPECT_EQ(files[0].filename(), "phantom32_qf10_jpeg.png");
  EXPECT_EQ(files[1].filename(), "phantom32_qf10_cs.png");
  for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(f));
  EXPECT_TRUE(emit_gallery(cfg, {}).empty());
  EXPECT_THROW(emit_gallery(cfg, {15}), DomainError);
  EXPECT_EQ(gallery_filename("lena", 5, "cs"), "lena_qf05_cs.png");
}

TEST(Config, Validation) {
  ExperimentConfig cfg;
  cfg.qf_list = {};
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg.qf_list = {100};
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg.qf_list = {50};
  cfg.trials = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
}

}  // namespace
}  // namespace jpegcs
