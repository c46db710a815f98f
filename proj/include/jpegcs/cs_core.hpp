#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jpegcs/errors.hpp"
#include "jpegcs/full_dct.hpp"
#include "jpegcs/image.hpp"
#include "jpegcs/tv.hpp"

namespace jpegcs {

// ---------------------------------------------------------------------------
// Sampling masks
// ---------------------------------------------------------------------------

/// Unbiased draw from [0, bound) by rejection on a std::mt19937_64 stream.
/// std::uniform_int_distribution is avoided because its algorithm differs
/// between standard libraries; this keeps masks identical everywhere.
inline std::uint64_t bounded_draw(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t v = gen();
    if (v < limit) return v % bound;
  }
}

/// Set of observed coefficients in the full-image DCT plane. Index 0 is the
/// DC coefficient; index k1 * cols + k2 is frequency (k1, k2).
struct SamplingMask {
  std::size_t total = 0;
  std::vector<std::size_t> selected;  // sorted, distinct, < total
  std::uint64_t seed = 0;
  bool include_dc = true;

  std::size_t count() const { return selected.size(); }
  bool is_full() const { return selected.size() == total; }
  friend bool operator==(const SamplingMask&, const SamplingMask&) = default;
};

/// Draws `m` distinct indices out of `total` from std::mt19937_64(seed).
///
/// Algorithm (kept stable so masks can be regenerated elsewhere): the pool
/// is [0, total), or [1, total) when DC is forced in. A partial
/// Fisher-Yates shuffle swaps pool[k] with pool[k + bounded_draw(n - k)]
/// for k = 0, 1, ..., and the first picks are taken and sorted.
inline SamplingMask make_mask(std::size_t total, std::size_t m, std::uint64_t seed,
                              bool include_dc = true) {
  if (m < 1 || m > total) {
    throw DomainError("make_mask: need 1 <= m <= total, got m=" + std::to_string(m) +
                      " total=" + std::to_string(total));
  }
  SamplingMask mask{total, {}, seed, include_dc};
  const std::size_t first = include_dc ? 1 : 0;
  std::vector<std::size_t> pool(total - first);
  std::iota(pool.begin(), pool.end(), first);
  const std::size_t picks = include_dc ? m - 1 : m;
  std::mt19937_64 gen(seed);
  for (std::size_t k = 0; k < picks; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(bounded_draw(gen, pool.size() - k));
    std::swap(pool[k], pool[j]);
  }
  mask.selected.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(picks));
  if (include_dc) mask.selected.push_back(0);
  std::sort(mask.selected.begin(), mask.selected.end());
  return mask;
}

/// Text form: "total m seed include_dc" then the sorted indices.
inline void write_mask(std::ostream& out, const SamplingMask& mask) {
  out << mask.total << ' ' << mask.count() << ' ' << mask.seed << ' ' << (mask.include_dc ? 1 : 0)
      << '\n';
  for (std::size_t i = 0; i < mask.selected.size(); ++i) {
    if (i) out << ' ';
    out << mask.selected[i];
  }
  out << '\n';
}

inline SamplingMask read_mask(std::istream& in) {
  SamplingMask mask;
  std::size_t m = 0;
  int dc = 0;
  if (!(in >> mask.total >> m >> mask.seed >> dc) || (dc != 0 && dc != 1)) {
    throw FormatError("mask: malformed header line");
  }
  mask.include_dc = dc == 1;
  mask.selected.resize(m);
  for (auto& idx : mask.selected) {
    if (!(in >> idx)) throw FormatError("mask: expected " + std::to_string(m) + " indices");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (mask.selected[i] >= mask.total || (i && mask.selected[i] <= mask.selected[i - 1])) {
      throw FormatError("mask: indices must be sorted, distinct and < total");
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Measurements
// ---------------------------------------------------------------------------

struct Measurements {
  SamplingMask mask;
  std::vector<double> values;  // values[k] is the coefficient at mask.selected[k]
};

inline Measurements measure(const Image& img, const SamplingMask& mask) {
  if (mask.total != img.size()) {
    throw DimensionError("measure: mask covers " + std::to_string(mask.total) +
                         " coefficients, image has " + std::to_string(img.size()));
  }
  const SpectrumGrid spec = full_dct2(img);
  Measurements meas{mask, {}};
  meas.values.reserve(mask.count());
  for (std::size_t idx : mask.selected) meas.values.push_back(spec.coeffs[idx]);
  return meas;
}

// ---------------------------------------------------------------------------
// TV reconstruction
// ---------------------------------------------------------------------------

enum class TvMethod {
  /// Constrained split Bregman; the inner least-squares step is diagonal in
  /// the DCT domain because the DCT-II diagonalizes the Neumann Laplacian.
  split_bregman,
  /// Gradient step on the smoothed TV with backtracking, then projection
  /// back onto the measured coefficients.
  projected_gradient,
};

struct TvSolverConfig {
  TvMethod method = TvMethod::split_bregman;
  std::size_t max_iters = 2000;
  /// Stop when max |x_k - x_{k-1}| / q_max falls below this.
  double rel_tol = 1e-6;
  double smoothing_eps = 1e-8;
  /// Projected gradient: first trial step and line-search shrink factor.
  double step_init = 1.0;
  double backtrack_factor = 0.5;
  /// Split Bregman: shrinkage threshold as a fraction of q_max. The
  /// splitting penalty is its reciprocal in pixel units.
  double shrink_threshold = 0.04;
  /// Projected gradient only: keep per-iteration objective values.
  bool record_trace = false;

  void validate() const {
    if (max_iters == 0) throw DomainError("TvSolverConfig: max_iters must be positive");
    if (!(rel_tol > 0.0)) throw DomainError("TvSolverConfig: rel_tol must be positive");
    if (!(smoothing_eps > 0.0)) throw DomainError("TvSolverConfig: smoothing_eps must be positive");
    if (!(step_init > 0.0)) throw DomainError("TvSolverConfig: step_init must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
      throw DomainError("TvSolverConfig: backtrack_factor must lie in (0, 1)");
    }
    if (!(shrink_threshold > 0.0)) {
      throw DomainError("TvSolverConfig: shrink_threshold must be positive");
    }
  }
};

/// Objective before and after one projected-gradient step (pre-projection).
struct StepTrace {
  double tv_before;
  double tv_after_step;
  double step;
};

struct ReconstructionReport {
  Image result;  // clamped to [0, q_max]
  std::size_t iterations_used = 0;
  bool converged = false;
  double final_tv = 0.0;
  /// Max |coefficient - measurement| over the mask, before clamping.
  double final_consistency_residual = 0.0;
  std::vector<StepTrace> trace;
};

namespace detail {

inline void impose(std::span<double> spectrum, const Measurements& meas) {
  for (std::size_t k = 0; k < meas.values.size(); ++k) {
    spectrum[meas.mask.selected[k]] = meas.values[k];
  }
}

inline double max_abs_change(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Replaces the measured coefficients of x: x <- C^T P(C x).
class Projector {
 public:
  Projector(const Dct2Plan& plan, const Measurements& meas)
      : plan_(plan), meas_(meas), spectrum_(plan.size()) {}

  void operator()(std::span<const double> in, std::span<double> out) {
    plan_.forward(in, spectrum_);
    impose(spectrum_, meas_);
    plan_.inverse(spectrum_, out);
  }

  double residual(std::span<const double> x) {
    plan_.forward(x, spectrum_);
    double r = 0.0;
    for (std::size_t k = 0; k < meas_.values.size(); ++k) {
      r = std::max(r, std::abs(spectrum_[meas_.mask.selected[k]] - meas_.values[k]));
    }
    return r;
  }

 private:
  const Dct2Plan& plan_;
  const Measurements& meas_;
  std::vector<double> spectrum_;
};

struct SolverState {
  std::vector<double> x;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<StepTrace> trace;
};

inline void run_projected_gradient(SolverState& st, const Dct2Plan& plan,
                                   const Measurements& meas, const TvSolverConfig& cfg,
                                   double q_max) {
  const std::size_t rows = plan.rows();
  const std::size_t cols = plan.cols();
  const double eps = cfg.smoothing_eps;
  Projector project(plan, meas);
  std::vector<double> grad(st.x.size());
  std::vector<double> trial(st.x.size());
  std::vector<double> next(st.x.size());
  double step = cfg.step_init;
  constexpr double kArmijo = 1e-4;

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    tv_gradient(st.x, rows, cols, eps, grad);
    const double f0 = tv_value(st.x, rows, cols, eps);
    double gg = 0.0;
    for (double g : grad) gg += g * g;

    // Let the step grow back after earlier backtracking.
    step /= cfg.backtrack_factor;
    double f1 = f0;
    bool accepted = false;
    while (step > 1e-12 * cfg.step_init) {
      for (std::size_t k = 0; k < trial.size(); ++k) trial[k] = st.x[k] - step * grad[k];
      f1 = tv_value(trial, rows, cols, eps);
      if (f1 <= f0 - kArmijo * step * gg) {
        accepted = true;
        break;
      }
      step *= cfg.backtrack_factor;
    }
    if (!accepted) {
      trial = st.x;
      f1 = f0;
    }
    if (cfg.record_trace) st.trace.push_back({f0, f1, accepted ? step : 0.0});

    project(trial, next);
    const double change = max_abs_change(next, st.x) / q_max;
    st.x.swap(next);
    st.iterations = it + 1;
    if (change < cfg.rel_tol) {
      st.converged = true;
      return;
    }
  }
}

inline void run_split_bregman(SolverState& st, const Dct2Plan& plan, const Measurements& meas,
                              const TvSolverConfig& cfg, double q_max) {
  const std::size_t rows = plan.rows();
  const std::size_t cols = plan.cols();
  const std::size_t n = plan.size();
  const double threshold = cfg.shrink_threshold * q_max;
  const double lambda = 1.0 / threshold;

  // Eigenvalues of D^T D in the DCT basis.
  std::vector<double> lap_v(rows);
  std::vector<double> lap_h(cols);
  for (std::size_t k = 0; k < rows; ++k) {
    lap_v[k] = 2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(k) / rows);
  }
  for (std::size_t k = 0; k < cols; ++k) {
    lap_h[k] = 2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(k) / cols);
  }
  std::vector<char> observed(n, 0);
  for (std::size_t idx : meas.mask.selected) observed[idx] = 1;

  // Bregman-augmented data, stored densely over the observed coefficients.
  std::vector<double> data(n, 0.0);
  impose(data, meas);

  std::vector<double> spectrum(n);
  plan.forward(st.x, spectrum);
  std::vector<double> dv(n, 0.0), dh(n, 0.0), bv(n, 0.0), bh(n, 0.0);
  std::vector<double> gv(n), gh(n), work(n), work_spec(n), next(n);

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    // Least-squares step: (M + lambda D^T D) X = M data + lambda C D^T (d - b).
    for (std::size_t k = 0; k < n; ++k) {
      gv[k] = dv[k] - bv[k];
      gh[k] = dh[k] - bh[k];
    }
    difference_adjoint(gv, gh, rows, cols, work);
    plan.forward(work, work_spec);
    for (std::size_t k1 = 0; k1 < rows; ++k1) {
      for (std::size_t k2 = 0; k2 < cols; ++k2) {
        const std::size_t k = k1 * cols + k2;
        const double m = observed[k] ? 1.0 : 0.0;
        const double denom = m + lambda * (lap_v[k1] + lap_h[k2]);
        // Unobserved DC has a zero denominator; its value stays as is.
        if (denom > 0.0) spectrum[k] = (m * data[k] + lambda * work_spec[k]) / denom;
      }
    }
    plan.inverse(spectrum, next);

    // Isotropic shrinkage of D x + b.
    forward_differences(next, rows, cols, gv, gh);
    for (std::size_t k = 0; k < n; ++k) {
      const double sv = gv[k] + bv[k];
      const double sh = gh[k] + bh[k];
      const double mag = std::sqrt(sv * sv + sh * sh);
      const double s = mag > threshold ? (mag - threshold) / mag : 0.0;
      dv[k] = s * sv;
      dh[k] = s * sh;
      bv[k] = sv - dv[k];
      bh[k] = sh - dh[k];
    }

    // Add back the data residual.
    for (std::size_t k = 0; k < meas.values.size(); ++k) {
      const std::size_t idx = meas.mask.selected[k];
      data[idx] += meas.values[k] - spectrum[idx];
    }

    const double change = max_abs_change(next, st.x) / q_max;
    st.x.swap(next);
    st.iterations = it + 1;
    if (change < cfg.rel_tol) {
      st.converged = true;
      return;
    }
  }
}

}  // namespace detail

/// Recovers an image from partial DCT measurements by minimizing total
/// variation subject to matching every measured coefficient.
///
/// Starts from the zero-filled inverse DCT. The returned image is projected
/// onto the measurements once more and then clamped to [0, q_max]; the
/// consistency residual is taken before clamping. Hitting max_iters is not
/// an error: `converged` is false and iterations_used == max_iters.
inline ReconstructionReport reconstruct_tv(const Measurements& meas, std::size_t rows,
                                           std::size_t cols, const TvSolverConfig& cfg = {},
                                           double q_max = 255.0) {
  cfg.validate();
  if (rows == 0 || cols == 0) throw DimensionError("reconstruct_tv: empty shape");
  if (meas.mask.total != rows * cols) {
    throw DimensionError("reconstruct_tv: mask covers " + std::to_string(meas.mask.total) +
                         " coefficients, shape has " + std::to_string(rows * cols));
  }
  if (meas.mask.count() < 1 || meas.values.size() != meas.mask.count()) {
    throw DomainError("reconstruct_tv: need one value per selected coefficient");
  }
  for (double v : meas.values) {
    if (!std::isfinite(v)) throw DomainError("reconstruct_tv: non-finite measurement");
  }

  const Dct2Plan plan(rows, cols);
  detail::SolverState st;
  st.x.assign(rows * cols, 0.0);
  {
    std::vector<double> spectrum(rows * cols, 0.0);
    detail::impose(spectrum, meas);
    plan.inverse(spectrum, st.x);
  }

  if (meas.mask.is_full() || tv_value(st.x, rows, cols, 0.0) == 0.0) {
    // Fully determined, or the feasible start already attains TV = 0.
    st.converged = true;
  } else if (cfg.method == TvMethod::projected_gradient) {
    detail::run_projected_gradient(st, plan, meas, cfg, q_max);
  } else {
    detail::run_split_bregman(st, plan, meas, cfg, q_max);
  }

  detail::Projector project(plan, meas);
  // The zero-filled start is feasible by construction; reprojecting it would
  // only add transform round-off.
  std::vector<double> feasible = st.x;
  if (st.iterations > 0) project(st.x, feasible);

  ReconstructionReport report;
  report.iterations_used = st.iterations;
  report.converged = st.converged;
  report.final_consistency_residual = project.residual(feasible);
  report.trace = std::move(st.trace);
  report.result = Image(rows, cols, std::move(feasible), q_max).clamped();
  report.final_tv = tv_value(report.result, cfg.smoothing_eps);
  return report;
}

}  // namespace jpegcs
