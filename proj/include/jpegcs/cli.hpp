#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "jpegcs/cs_core.hpp"
#include "jpegcs/errors.hpp"
#include "jpegcs/harness.hpp"
#include "jpegcs/imageio.hpp"
#include "jpegcs/jpeg_core.hpp"
#include "jpegcs/metrics.hpp"

namespace jpegcs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Accepts "5.52%" (percent) or "0.0552" (proportion); result in (0, 1].
inline double parse_fraction(const std::string& text) {
  std::string body = text;
  double scale = 1.0;
  if (!body.empty() && body.back() == '%') {
    body.pop_back();
    scale = 0.01;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(body, &used);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--fraction", "not a number: " + text);
  }
  if (used != body.size()) throw CLI::ValidationError("--fraction", "not a number: " + text);
  v *= scale;
  if (!(v > 0.0 && v <= 1.0)) {
    throw CLI::ValidationError("--fraction",
                               "must be a proportion in (0, 1] or a percentage in (0%, 100%]");
  }
  return v;
}

struct JpegArgs {
  std::string in, out;
  int qf = 50;
  bool no_level_shift = false;
};

struct CsArgs {
  std::string in, out, fraction;
  std::uint64_t seed = 0;
  std::size_t max_iters = TvSolverConfig{}.max_iters;
  bool no_dc = false;
};

struct CompareArgs {
  std::string in;
  std::size_t phantom = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<int> qf_list = default_qf_list();
  std::vector<int> gallery;
  std::size_t trials = 1;
  std::size_t max_iters = TvSolverConfig{}.max_iters;
};

struct PhantomArgs {
  std::size_t size = 256;
  std::string out;
};

struct PsnrArgs {
  std::string a, b;
};

inline int do_jpeg(const JpegArgs& args, std::ostream& out) {
  const Image img = load_image(args.in);
  const JpegResult res = jpeg_lossy_roundtrip(img, args.qf, {!args.no_level_shift});
  save_image(res.image, args.out);
  out << "nonzero_fraction " << format_real(res.stats.nonzero_fraction) << '\n';
  out << "psnr_db " << format_real(psnr(img, res.image).psnr_db) << '\n';
  return kExitOk;
}

inline int do_cs(const CsArgs& args, std::ostream& out) {
  const Image img = load_image(args.in);
  const double fraction = parse_fraction(args.fraction);
  const std::size_t m = matched_measurement_count(fraction, img.size());
  const SamplingMask mask = make_mask(img.size(), m, args.seed, !args.no_dc);
  TvSolverConfig cfg;
  cfg.max_iters = args.max_iters;
  const ReconstructionReport rep =
      reconstruct_tv(measure(img, mask), img.rows(), img.cols(), cfg, img.q_max());
  save_image(rep.result, args.out);
  out << "measurements " << m << '\n';
  out << "iterations " << rep.iterations_used << '\n';
  out << "converged " << (rep.converged ? "yes" : "no") << '\n';
  out << "psnr_db " << format_real(psnr(img, rep.result).psnr_db) << '\n';
  return kExitOk;
}

inline ExperimentConfig compare_config(const CompareArgs& args) {
  ExperimentConfig cfg;
  if (!args.in.empty()) {
    cfg.source = std::filesystem::path(args.in);
  } else {
    cfg.source = PhantomSpec::shepp_logan(args.phantom);
  }
  cfg.qf_list = args.qf_list;
  cfg.seed = args.seed;
  cfg.trials = args.trials;
  cfg.solver.max_iters = args.max_iters;
  cfg.output_dir = args.out_dir;
  return cfg;
}

inline int do_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = compare_config(args);
  ComparisonRun run;
  const ExperimentOutputs files = run_experiment(cfg, &run);
  write_csv(out, run.table);
  if (!args.gallery.empty()) emit_gallery(cfg, args.gallery);
  err << "wrote " << files.table.string() << ", " << files.plot.string() << ", "
            << files.manifest.string() << '\n';
  return kExitOk;
}

inline int do_phantom(const PhantomArgs& args) {
  save_image(generate_phantom(PhantomSpec::shepp_logan(args.size)), args.out);
  return kExitOk;
}

inline int do_psnr(const PsnrArgs& args, std::ostream& out) {
  const Image a = load_image(args.a);
  const Image b = load_image(args.b);
  out << format_real(psnr(a, b).psnr_db) << '\n';
  return kExitOk;
}

/// Entry point shared by the jpegcs binary and the tests. Returns 0 on
/// success, 1 on a usage error and 2 when the pipeline itself fails.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Block-DCT JPEG vs. TV compressive sensing at matched coefficient budgets",
               "jpegcs"};
  app.require_subcommand(1);

  JpegArgs jpeg;
  auto* jpeg_cmd = app.add_subcommand("jpeg", "Lossy JPEG round trip; prints nonzero fraction");
  jpeg_cmd->add_option("--in", jpeg.in, "Input PGM or PNG")->required()->check(CLI::ExistingFile);
  jpeg_cmd->add_option("--qf", jpeg.qf, "Quality factor")->required()->check(CLI::Range(1, 99));
  jpeg_cmd->add_option("--out", jpeg.out, "Output image (.pgm or .png)")->required();
  jpeg_cmd->add_flag("--no-level-shift", jpeg.no_level_shift,
                     "Skip the mid-gray shift around the DCT");

  CsArgs cs;
  auto* cs_cmd = app.add_subcommand("cs", "TV reconstruction from random DCT coefficients");
  cs_cmd->add_option("--in", cs.in, "Input PGM or PNG")->required()->check(CLI::ExistingFile);
  cs_cmd->add_option("--fraction", cs.fraction,
                     "Share of coefficients measured, e.g. 0.0552 or 5.52%")
      ->required();
  cs_cmd->add_option("--seed", cs.seed, "Mask seed")->capture_default_str();
  cs_cmd->add_option("--out", cs.out, "Output image (.pgm or .png)")->required();
  cs_cmd->add_option("--max-iters", cs.max_iters, "Solver iteration budget")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cs_cmd->add_flag("--no-dc", cs.no_dc, "Do not force the DC coefficient into the mask");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Full JPEG vs. CS sweep over quality factors");
  auto* cmp_in =
      cmp_cmd->add_option("--in", cmp.in, "Input PGM or PNG")->check(CLI::ExistingFile);
  auto* cmp_ph = cmp_cmd->add_option("--phantom", cmp.phantom, "Use an N x N Shepp-Logan phantom")
                     ->check(CLI::PositiveNumber);
  cmp_in->excludes(cmp_ph);
  cmp_ph->excludes(cmp_in);
  cmp_cmd->add_option("--seed", cmp.seed, "Base mask seed (row seed = base + QF + 100 * trial)")
      ->capture_default_str();
  cmp_cmd->add_option("--out-dir", cmp.out_dir, "Directory for table.csv, plot.svg, manifest.json")
      ->required();
  cmp_cmd->add_option("--qf-list", cmp.qf_list, "Quality factors, comma separated")
      ->delimiter(',')
      ->check(CLI::Range(1, 99))
      ->capture_default_str();
  cmp_cmd->add_option("--trials", cmp.trials, "Masks per row; PSNR is averaged")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--max-iters", cmp.max_iters, "Solver iteration budget")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--gallery", cmp.gallery,
                      "Quality factors whose reconstructions are saved as PNG")
      ->delimiter(',')
      ->check(CLI::Range(1, 99));

  PhantomArgs ph;
  auto* ph_cmd = app.add_subcommand("phantom", "Write a Shepp-Logan phantom");
  ph_cmd->add_option("--size", ph.size, "Side length in pixels")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ph_cmd->add_option("--out", ph.out, "Output image (.pgm or .png)")->required();

  PsnrArgs ps;
  auto* ps_cmd = app.add_subcommand("psnr", "PSNR of --b against reference --a");
  ps_cmd->add_option("--a", ps.a, "Reference image")->required()->check(CLI::ExistingFile);
  ps_cmd->add_option("--b", ps.b, "Test image")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
    if (cmp_cmd->parsed() && cmp_in->count() + cmp_ph->count() != 1) {
      throw CLI::RequiredError("compare needs exactly one of --in or --phantom");
    }
    if (cmp_cmd->parsed()) {
      for (int qf : cmp.gallery) {
        if (std::find(cmp.qf_list.begin(), cmp.qf_list.end(), qf) == cmp.qf_list.end()) {
          throw CLI::ValidationError("--gallery", "QF " + std::to_string(qf) +
                                                      " is not in --qf-list");
        }
      }
    }
    if (cs_cmd->parsed()) parse_fraction(cs.fraction);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (jpeg_cmd->parsed()) return do_jpeg(jpeg, out);
    if (cs_cmd->parsed()) return do_cs(cs, out);
    if (cmp_cmd->parsed()) return do_compare(cmp, out, err);
    if (ph_cmd->parsed()) return do_phantom(ph);
    if (ps_cmd->parsed()) return do_psnr(ps, out);
  } catch (const std::exception& e) {
    err << "jpegcs: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace jpegcs::cli
