#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "jpegcs/cs_core.hpp"
#include "jpegcs/errors.hpp"
#include "jpegcs/image.hpp"
#include "jpegcs/imageio.hpp"
#include "jpegcs/jpeg_core.hpp"
#include "jpegcs/metrics.hpp"

namespace jpegcs {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

using ImageSource = std::variant<std::filesystem::path, PhantomSpec>;

inline std::vector<int> default_qf_list() { return {10, 20, 30, 40, 50, 60, 70, 80, 90}; }

struct ExperimentConfig {
  ImageSource source = PhantomSpec::shepp_logan(256);
  std::vector<int> qf_list = default_qf_list();
  std::uint64_t seed = 0;
  /// Masks drawn per row; PSNR is averaged over them.
  std::size_t trials = 1;
  bool include_dc = true;
  JpegOptions jpeg;
  TvSolverConfig solver;
  std::filesystem::path output_dir = ".";

  void validate() const {
    if (qf_list.empty()) throw DomainError("ExperimentConfig: qf_list is empty");
    for (int qf : qf_list) check_quality_factor(qf);
    if (trials == 0) throw DomainError("ExperimentConfig: trials must be >= 1");
    solver.validate();
  }
};

/// Seed of the mask for a given row and trial. Distinct for every (qf,
/// trial) pair under one base seed since qf < 100.
inline std::uint64_t mask_seed(std::uint64_t base, int qf, std::size_t trial) {
  return base + static_cast<std::uint64_t>(qf) + 100u * static_cast<std::uint64_t>(trial);
}

inline Image load_source(const ImageSource& source) {
  if (const auto* path = std::get_if<std::filesystem::path>(&source)) return load_image(*path);
  return generate_phantom(std::get<PhantomSpec>(source));
}

/// File-name stem for outputs derived from the source image.
inline std::string source_stem(const ImageSource& source) {
  if (const auto* path = std::get_if<std::filesystem::path>(&source)) {
    return path->stem().string();
  }
  return "phantom" + std::to_string(std::get<PhantomSpec>(source).size);
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
  int qf = 0;
  double nonzero_fraction = 0.0;
  double psnr_jpeg_db = 0.0;
  double psnr_cs_db = 0.0;
  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct TrialRecord {
  std::uint64_t seed;
  std::size_t iterations;
  bool converged;
  double psnr_db;
  double consistency_residual;
};

/// Per-row sidecar: what was measured and how the solver behaved.
struct RowProvenance {
  int qf = 0;
  std::size_t nonzero_coeffs = 0;
  std::size_t total_coeffs = 0;
  std::size_t measurements = 0;
  std::vector<TrialRecord> trials;
};

struct ComparisonRun {
  std::string stem;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<ComparisonRow> table;
  std::vector<RowProvenance> provenance;
};

/// Coefficient budget for CS at a JPEG operating point: the same share of
/// the plane as JPEG kept nonzero, and never less than the DC alone.
inline std::size_t matched_measurement_count(double nonzero_fraction, std::size_t total) {
  const auto m = static_cast<std::size_t>(
      std::llround(nonzero_fraction * static_cast<double>(total)));
  return std::clamp<std::size_t>(m, 1, total);
}

struct RowImages {
  Image jpeg;
  Image cs;
};

namespace detail {

inline RowImages run_row(const Image& img, int qf, const ExperimentConfig& cfg,
                         ComparisonRow& row, RowProvenance& prov) {
  const JpegResult jpeg = jpeg_lossy_roundtrip(img, qf, cfg.jpeg);
  row.qf = qf;
  row.nonzero_fraction = jpeg.stats.nonzero_fraction;
  row.psnr_jpeg_db = psnr(img, jpeg.image).psnr_db;

  prov.qf = qf;
  prov.nonzero_coeffs = jpeg.stats.nonzero_coeffs;
  prov.total_coeffs = jpeg.stats.total_coeffs;
  prov.measurements = matched_measurement_count(jpeg.stats.nonzero_fraction, img.size());

  RowImages images{jpeg.image, {}};
  double sum = 0.0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = mask_seed(cfg.seed, qf, t);
    const SamplingMask mask = make_mask(img.size(), prov.measurements, seed, cfg.include_dc);
    const ReconstructionReport rep =
        reconstruct_tv(measure(img, mask), img.rows(), img.cols(), cfg.solver, img.q_max());
    const double db = psnr(img, rep.result).psnr_db;
    prov.trials.push_back(
        {seed, rep.iterations_used, rep.converged, db, rep.final_consistency_residual});
    sum += db;
    if (t == 0) images.cs = rep.result;
  }
  row.psnr_cs_db = sum / static_cast<double>(cfg.trials);
  return images;
}

}  // namespace detail

/// JPEG round trip per quality factor, then TV recovery from the same
/// number of randomly chosen global DCT coefficients. Rows are sorted by QF.
inline ComparisonRun run_comparison_detailed(const ExperimentConfig& cfg) {
  cfg.validate();
  const Image img = load_source(cfg.source);
  std::vector<int> qfs = cfg.qf_list;
  std::sort(qfs.begin(), qfs.end());
  qfs.erase(std::unique(qfs.begin(), qfs.end()), qfs.end());

  ComparisonRun run;
  run.stem = source_stem(cfg.source);
  run.rows = img.rows();
  run.cols = img.cols();
  for (int qf : qfs) {
    ComparisonRow row;
    RowProvenance prov;
    detail::run_row(img, qf, cfg, row, prov);
    run.table.push_back(row);
    run.provenance.push_back(std::move(prov));
  }
  return run;
}

inline std::vector<ComparisonRow> run_comparison(const ExperimentConfig& cfg) {
  return run_comparison_detailed(cfg).table;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvHeader = "qf,nonzero_fraction,psnr_jpeg_db,psnr_cs_db";

/// Six significant digits with trailing zeros kept; infinities as "inf".
inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.6g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  if (rows.empty()) throw DomainError("emit_csv: no rows");
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.qf << ',' << format_real(r.nonzero_fraction) << ',' << format_real(r.psnr_jpeg_db)
        << ',' << format_real(r.psnr_cs_db) << '\n';
  }
}

inline void emit_csv(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw DomainError("emit_csv: no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(out, rows);
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<ComparisonRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("csv: missing header");
  std::vector<ComparisonRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string qf, frac, jpeg, cs;
    if (!std::getline(fields, qf, ',') || !std::getline(fields, frac, ',') ||
        !std::getline(fields, jpeg, ',') || !std::getline(fields, cs)) {
      throw FormatError("csv: expected 4 fields in '" + line + "'");
    }
    try {
      rows.push_back({std::stoi(qf), std::stod(frac), std::stod(jpeg), std::stod(cs)});
    } catch (const std::exception&) {
      throw FormatError("csv: bad number in '" + line + "'");
    }
  }
  return rows;
}

inline std::vector<ComparisonRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in);
}

// ---------------------------------------------------------------------------
// SVG plot
// ---------------------------------------------------------------------------

namespace detail {

struct PlotFrame {
  static constexpr double kWidth = 640, kHeight = 420;
  static constexpr double kLeft = 64, kRight = 150, kTop = 30, kBottom = 56;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double px(double percent) const { return kLeft + percent / x_max * (kWidth - kLeft - kRight); }
  /// Infinite PSNR is pinned to the top edge.
  double py(double db) const {
    if (std::isinf(db)) db = db > 0 ? y_max : y_min;
    const double t = (db - y_min) / (y_max - y_min);
    return kTop + (1.0 - t) * (kHeight - kTop - kBottom);
  }
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace detail

/// PSNR against nonzero percentage, one polyline per method.
inline void write_plot_svg(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  if (rows.empty()) throw DomainError("emit_plot: no rows");
  detail::PlotFrame f;
  double x_hi = 0.0;
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -y_lo;
  for (const auto& r : rows) {
    x_hi = std::max(x_hi, 100.0 * r.nonzero_fraction);
    for (double db : {r.psnr_jpeg_db, r.psnr_cs_db}) {
      if (std::isfinite(db)) {
        y_lo = std::min(y_lo, db);
        y_hi = std::max(y_hi, db);
      }
    }
  }
  if (!std::isfinite(y_lo)) {
    y_lo = 0.0;
    y_hi = 100.0;
  }
  if (y_hi - y_lo < 1.0) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double y_step = detail::nice_step(y_hi - y_lo);
  f.y_min = std::floor(y_lo / y_step) * y_step;
  f.y_max = std::ceil(y_hi / y_step) * y_step;
  const double x_step = detail::nice_step(std::max(x_hi, 1e-3) * 1.05);
  f.x_max = std::ceil(std::max(x_hi, 1e-3) * 1.05 / x_step) * x_step;

  using detail::num;
  using F = detail::PlotFrame;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << F::kWidth << "\" height=\""
      << F::kHeight << "\" viewBox=\"0 0 " << F::kWidth << ' ' << F::kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double x0 = F::kLeft, x1 = F::kWidth - F::kRight;
  const double y0 = F::kTop, y1 = F::kHeight - F::kBottom;
  out << "<g stroke=\"#ddd\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double v = f.y_min; v <= f.y_max + 1e-9; v += y_step) {
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(f.py(v)) << "\" x2=\"" << num(x1)
        << "\" y2=\"" << num(f.py(v)) << "\"/>";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(f.py(v) + 4)
        << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#333\">" << num(v) << "</text>\n";
  }
  for (double v = 0.0; v <= f.x_max + 1e-9; v += x_step) {
    out << "<line x1=\"" << num(f.px(v)) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(f.px(v))
        << "\" y2=\"" << num(y1) << "\"/>";
    out << "<text x=\"" << num(f.px(v)) << "\" y=\"" << num(y1 + 16)
        << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\">" << num(v) << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0)
      << "\" height=\"" << num(y1 - y0) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(F::kHeight - 14)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
         "nonzero coefficients [%]</text>\n";
  out << "<text x=\"16\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 "
      << num((y0 + y1) / 2) << ")\">PSNR [dB]</text>\n";

  struct Series {
    const char* name;
    const char* color;
    double ComparisonRow::*field;
  };
  const Series series[] = {{"JPEG", "#1f77b4", &ComparisonRow::psnr_jpeg_db},
                           {"CS", "#d62728", &ComparisonRow::psnr_cs_db}};
  double legend_y = y0 + 12;
  for (const auto& s : series) {
    out << "<g class=\"series\" data-name=\"" << s.name << "\">\n";
    if (rows.size() >= 2) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) out << ' ';
        out << num(f.px(100.0 * rows[i].nonzero_fraction)) << ','
            << num(f.py(rows[i].*s.field));
      }
      out << "\"/>\n";
    }
    for (const auto& r : rows) {
      out << "<circle cx=\"" << num(f.px(100.0 * r.nonzero_fraction)) << "\" cy=\""
          << num(f.py(r.*s.field)) << "\" r=\"3.5\" fill=\"" << s.color << "\"/>\n";
    }
    out << "</g>\n";
    out << "<line x1=\"" << num(x1 + 14) << "\" y1=\"" << num(legend_y) << "\" x2=\""
        << num(x1 + 40) << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/><text x=\"" << num(x1 + 46) << "\" y=\"" << num(legend_y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name << "</text>\n";
    legend_y += 20;
  }
  out << "</svg>\n";
}

inline void emit_plot(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw DomainError("emit_plot: no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_plot_svg(out, rows);
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Gallery and manifest
// ---------------------------------------------------------------------------

inline std::string gallery_filename(const std::string& stem, int qf, const char* method) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", qf);
  return stem + "_qf" + buf + "_" + method + ".png";
}

/// Saves the JPEG and CS reconstructions (first trial) of each listed QF.
inline std::vector<std::filesystem::path> emit_gallery(const ExperimentConfig& cfg,
                                                       const std::vector<int>& qf_subset) {
  for (int qf : qf_subset) {
    if (std::find(cfg.qf_list.begin(), cfg.qf_list.end(), qf) == cfg.qf_list.end()) {
      throw DomainError("emit_gallery: QF " + std::to_string(qf) + " is not in qf_list");
    }
  }
  std::vector<std::filesystem::path> written;
  if (qf_subset.empty()) return written;
  cfg.validate();
  const Image img = load_source(cfg.source);
  const std::string stem = source_stem(cfg.source);
  std::filesystem::create_directories(cfg.output_dir);
  for (int qf : qf_subset) {
    ComparisonRow row;
    RowProvenance prov;
    ExperimentConfig one = cfg;
    one.trials = 1;
    const RowImages images = detail::run_row(img, qf, one, row, prov);
    for (const auto& [method, image] : {std::pair{"jpeg", &images.jpeg}, {"cs", &images.cs}}) {
      const auto path = cfg.output_dir / gallery_filename(stem, qf, method);
      save_image(*image, path);
      written.push_back(path);
    }
  }
  return written;
}

namespace detail {

inline nlohmann::ordered_json real_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace detail

inline nlohmann::ordered_json manifest_json(const ExperimentConfig& cfg,
                                            const ComparisonRun& run) {
  using nlohmann::ordered_json;
  ordered_json source;
  if (const auto* path = std::get_if<std::filesystem::path>(&cfg.source)) {
    source = {{"kind", "file"}, {"path", path->generic_string()}};
  } else {
    const auto& spec = std::get<PhantomSpec>(cfg.source);
    ordered_json ellipses = ordered_json::array();
    for (const auto& e : spec.ellipses) {
      ellipses.push_back(
          {e.intensity, e.semi_a, e.semi_b, e.center_x, e.center_y, e.rotation_deg});
    }
    source = {{"kind", "phantom"}, {"size", spec.size}, {"ellipses", ellipses}};
  }
  const auto& s = cfg.solver;
  ordered_json solver = {
      {"method", s.method == TvMethod::split_bregman ? "split_bregman" : "projected_gradient"},
      {"max_iters", s.max_iters},
      {"rel_tol", s.rel_tol},
      {"smoothing_eps", s.smoothing_eps},
      {"step_init", s.step_init},
      {"backtrack_factor", s.backtrack_factor},
      {"shrink_threshold", s.shrink_threshold},
  };
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < run.table.size(); ++i) {
    const auto& r = run.table[i];
    const auto& p = run.provenance[i];
    ordered_json trials = ordered_json::array();
    for (const auto& t : p.trials) {
      trials.push_back({{"seed", t.seed},
                        {"iterations", t.iterations},
                        {"converged", t.converged},
                        {"psnr_cs_db", detail::real_json(t.psnr_db)},
                        {"consistency_residual", t.consistency_residual}});
    }
    rows.push_back({{"qf", r.qf},
                    {"nonzero_coeffs", p.nonzero_coeffs},
                    {"total_coeffs", p.total_coeffs},
                    {"nonzero_fraction", r.nonzero_fraction},
                    {"measurements", p.measurements},
                    {"psnr_jpeg_db", detail::real_json(r.psnr_jpeg_db)},
                    {"psnr_cs_db", detail::real_json(r.psnr_cs_db)},
                    {"trials", trials}});
  }
  return {{"source", source},
          {"image", {{"rows", run.rows}, {"cols", run.cols}, {"stem", run.stem}}},
          {"qf_list", cfg.qf_list},
          {"seed", cfg.seed},
          {"trials", cfg.trials},
          {"include_dc", cfg.include_dc},
          {"level_shift", cfg.jpeg.level_shift},
          {"solver", solver},
          {"rows", rows}};
}

struct ExperimentOutputs {
  std::filesystem::path table;
  std::filesystem::path plot;
  std::filesystem::path manifest;
};

/// Runs the comparison and writes table.csv, plot.svg and manifest.json
/// into cfg.output_dir.
inline ExperimentOutputs run_experiment(const ExperimentConfig& cfg, ComparisonRun* out_run = nullptr) {
  ComparisonRun run = run_comparison_detailed(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  ExperimentOutputs outputs{cfg.output_dir / "table.csv", cfg.output_dir / "plot.svg",
                            cfg.output_dir / "manifest.json"};
  emit_csv(run.table, outputs.table);
  emit_plot(run.table, outputs.plot);
  std::ofstream manifest(outputs.manifest, std::ios::binary);
  if (!manifest) throw IoError("cannot write " + outputs.manifest.string());
  manifest << manifest_json(cfg, run).dump(2) << '\n';
  if (!manifest) throw IoError("write failed: " + outputs.manifest.string());
  if (out_run) *out_run = std::move(run);
  return outputs;
}

}  // namespace jpegcs
