#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisecal/image.hpp"
#include "noisecal/metrics.hpp"
#include "noisecal/noise.hpp"
#include "noisecal/random.hpp"

namespace noisecal {

/// Corpus MSSIM as a function of noise magnitude for one noise kind.
using MssimObjective = std::function<double(double magnitude)>;

MssimObjective make_corpus_objective(std::span<const ImageBuffer> corpus, NoiseKind kind,
                                     Seed master, const SsimParams& params, std::size_t jobs = 1);

struct SweepSample {
  double magnitude = 0.0;
  double mssim = 0.0;
};

struct SweepResult {
  NoiseKind kind = NoiseKind::kGaussian;
  std::vector<SweepSample> samples;
  std::size_t corpus_size = 0;
  Seed master_seed{};
  SsimParams ssim_params{};
};

/// One corpus_mssim evaluation per magnitude, all with the same per-image
/// seeds. Magnitudes must be strictly increasing and valid for `kind`.
SweepResult sweep(std::span<const ImageBuffer> corpus, NoiseKind kind,
                  std::span<const double> magnitudes, Seed master, const SsimParams& params = {},
                  std::size_t jobs = 1);

enum class CurveFamily {
  kLogLinear,  // S(m) = a + b ln(m)
  kQuadratic,  // S(s) = a + b s + c s^2
};

std::string_view to_string(CurveFamily family) noexcept;
/// Quadratic for occlusion, log-linear for everything else.
CurveFamily default_family(NoiseKind kind) noexcept;

struct FittedCurve {
  NoiseKind kind = NoiseKind::kGaussian;
  CurveFamily family = CurveFamily::kLogLinear;
  std::vector<double> coefficients;  // lowest order first
  double fit_rmse = 0.0;
  double range_lo = 0.0;
  double range_hi = 0.0;

  double evaluate(double magnitude) const;
};

/// Ordinary least squares of MSSIM on the transformed magnitude. Rejects
/// fits that are not decreasing over the swept range.
FittedCurve fit_curve(const SweepResult& sweep, CurveFamily family);

struct Inversion {
  double magnitude = 0.0;
  bool extrapolated = false;  // target lay just outside the covered range
};

/// Magnitude at which the curve reaches `target`. Targets outside the MSSIM
/// range covered by the curve's valid range are an error unless within
/// `margin`, in which case the result is clamped and flagged.
Inversion invert_curve(const FittedCurve& curve, double target, double margin = 0.02);

struct MagnitudeLimits {
  double initial = 1e-3;
  double min = 1e-10;
  double max = 1e3;
};

MagnitudeLimits default_limits(NoiseKind kind) noexcept;

struct SolveOptions {
  double tol = 0.01;
  int max_iterations = 60;
};

struct SolveResult {
  double magnitude = 0.0;
  double mssim = 0.0;
  int evaluations = 0;
  bool converged = false;  // |mssim - target| <= tol
};

/// Geometric bracket expansion from limits.initial followed by bisection on
/// the geometric midpoint. Throws Error(kBracketNotFound) when the limits
/// cannot bracket the target; otherwise returns the best point seen, with
/// `converged` telling whether it satisfies the tolerance.
SolveResult solve_magnitude(const MssimObjective& objective, double target,
                            const MagnitudeLimits& limits, const SolveOptions& options = {});

SolveResult solve_magnitude(std::span<const ImageBuffer> corpus, NoiseKind kind, double target,
                            double tol, Seed master, const SsimParams& params = {},
                            std::size_t jobs = 1);

struct GridOptions {
  std::size_t count = 12;
  double high_mssim = 0.97;  // mssim at the smallest magnitude
  double low_mssim = 0.15;   // mssim at the largest magnitude
  double endpoint_tol = 0.02;
};

/// Geometrically spaced magnitudes whose end points land near the requested
/// MSSIM levels.
std::vector<double> auto_grid(const MssimObjective& objective, const MagnitudeLimits& limits,
                              const GridOptions& options = {});

enum class CalibrationMethod { kFit, kBisect };

std::string_view to_string(CalibrationMethod method) noexcept;

struct LookupTable {
  std::vector<double> targets;
  std::vector<NoiseKind> kinds;
  /// entries[kind][i] is the magnitude for targets[i], absent if unreachable.
  std::map<NoiseKind, std::vector<std::optional<double>>> entries;
  /// Corpus MSSIM re-evaluated at each produced magnitude.
  std::map<NoiseKind, std::vector<std::optional<double>>> achieved;
  /// reasons[kind][i] explains each absent cell.
  std::map<NoiseKind, std::map<std::size_t, std::string>> reasons;
  CalibrationMethod method = CalibrationMethod::kBisect;
  std::string corpus_id;
  std::size_t corpus_size = 0;
  Seed seed{};
  SsimParams ssim_params{};
  double tol = 0.01;

  std::optional<double> magnitude(NoiseKind kind, double target) const;
};

struct LookupOptions {
  CalibrationMethod method = CalibrationMethod::kBisect;
  double tol = 0.01;
  double margin = 0.02;
  /// Fit path: each target is inverted on a fit over this many consecutive
  /// sweep samples around its crossing. 0 fits the whole sweep once.
  std::size_t fit_window = 4;
  std::size_t jobs = 1;
  std::string corpus_id;
};

inline constexpr std::array<double, 5> kDefaultTargets = {0.25, 0.5, 0.7, 0.8, 0.9};

/// Per-kind calibration. Failures are recorded per cell; only invalid
/// arguments (targets, empty corpus) throw.
LookupTable build_lookup(std::span<const ImageBuffer> corpus, std::span<const NoiseKind> kinds,
                         std::span<const double> targets, Seed master,
                         const SsimParams& params = {}, const LookupOptions& options = {});

}  // namespace noisecal
