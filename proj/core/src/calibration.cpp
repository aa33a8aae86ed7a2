#include "noisecal/calibration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "noisecal/error.hpp"

namespace noisecal {
namespace {

std::string describe(double value) {
  std::ostringstream out;
  out.precision(6);
  out << value;
  return out.str();
}

void require_increasing(std::span<const double> values, std::string_view what) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be strictly increasing");
    }
  }
}

}  // namespace

MssimObjective make_corpus_objective(std::span<const ImageBuffer> corpus, NoiseKind kind,
                                     Seed master, const SsimParams& params, std::size_t jobs) {
  return [corpus, kind, master, params, jobs](double magnitude) {
    return corpus_mssim(corpus, NoiseSpec{kind, magnitude}, master, params, jobs).mssim;
  };
}

SweepResult sweep(std::span<const ImageBuffer> corpus, NoiseKind kind,
                  std::span<const double> magnitudes, Seed master, const SsimParams& params,
                  std::size_t jobs) {
  validate(params);
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "corpus is empty");
  if (magnitudes.empty()) throw Error(ErrorCode::kInvalidArgument, "no magnitudes to sweep");
  require_increasing(magnitudes, "sweep magnitudes");
  for (double m : magnitudes) validate_magnitude(kind, m);

  SweepResult result;
  result.kind = kind;
  result.corpus_size = corpus.size();
  result.master_seed = master;
  result.ssim_params = params;
  result.samples.reserve(magnitudes.size());
  for (double m : magnitudes) {
    result.samples.push_back({m, corpus_mssim(corpus, {kind, m}, master, params, jobs).mssim});
  }
  return result;
}

std::string_view to_string(CurveFamily family) noexcept {
  return family == CurveFamily::kLogLinear ? "log_linear" : "quadratic";
}

CurveFamily default_family(NoiseKind kind) noexcept {
  return kind == NoiseKind::kOcclusion ? CurveFamily::kQuadratic : CurveFamily::kLogLinear;
}

double FittedCurve::evaluate(double magnitude) const {
  if (family == CurveFamily::kLogLinear) {
    return coefficients[0] + coefficients[1] * std::log(magnitude);
  }
  return coefficients[0] + magnitude * (coefficients[1] + magnitude * coefficients[2]);
}

FittedCurve fit_curve(const SweepResult& sweep, CurveFamily family) {
  const auto& samples = sweep.samples;
  if (samples.size() < 3) {
    throw Error(ErrorCode::kFitFailure, "curve fit needs at least 3 sweep samples");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].magnitude > samples[i - 1].magnitude)) {
      throw Error(ErrorCode::kInvalidArgument, "sweep magnitudes must be strictly increasing");
    }
  }
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index p = family == CurveFamily::kLogLinear ? 2 : 3;
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd response(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = samples[static_cast<std::size_t>(i)].magnitude;
    response(i) = samples[static_cast<std::size_t>(i)].mssim;
    design(i, 0) = 1.0;
    if (family == CurveFamily::kLogLinear) {
      if (!(m > 0.0)) {
        throw Error(ErrorCode::kFitFailure, "log-linear fit needs strictly positive magnitudes");
      }
      design(i, 1) = std::log(m);
    } else {
      design(i, 1) = m;
      design(i, 2) = m * m;
    }
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) throw Error(ErrorCode::kFitFailure, "degenerate design matrix");
  const Eigen::VectorXd beta = qr.solve(response);

  FittedCurve curve;
  curve.kind = sweep.kind;
  curve.family = family;
  curve.coefficients.assign(beta.data(), beta.data() + beta.size());
  curve.range_lo = samples.front().magnitude;
  curve.range_hi = samples.back().magnitude;
  curve.fit_rmse = std::sqrt((design * beta - response).squaredNorm() / static_cast<double>(n));

  if (family == CurveFamily::kLogLinear) {
    if (!(curve.coefficients[1] < 0.0)) {
      throw Error(ErrorCode::kFitFailure,
                  "log-linear slope " + describe(curve.coefficients[1]) + " is not negative");
    }
  } else {
    const double b = curve.coefficients[1];
    const double c = curve.coefficients[2];
    const double slack = 1e-9 * std::max(1.0, std::abs(b) + std::abs(c));
    // The derivative is linear, so checking both ends covers the range.
    if (b + 2.0 * c * curve.range_lo > slack || b + 2.0 * c * curve.range_hi > slack) {
      throw Error(ErrorCode::kFitFailure, "quadratic fit is not non-increasing on [" +
                                              describe(curve.range_lo) + ", " +
                                              describe(curve.range_hi) + "]");
    }
  }
  return curve;
}

Inversion invert_curve(const FittedCurve& curve, double target, double margin) {
  const double top = curve.evaluate(curve.range_lo);
  const double bottom = curve.evaluate(curve.range_hi);
  if (target > top + margin || target < bottom - margin) {
    throw Error(ErrorCode::kOutOfRange, "target " + describe(target) + " outside fitted range [" +
                                            describe(bottom) + ", " + describe(top) + "]");
  }

  double root = 0.0;
  if (curve.family == CurveFamily::kLogLinear) {
    root = std::exp((target - curve.coefficients[0]) / curve.coefficients[1]);
  } else {
    const double a = curve.coefficients[0] - target;
    const double b = curve.coefficients[1];
    const double c = curve.coefficients[2];
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
    if (std::abs(c) <= 1e-14 * scale) {
      if (b == 0.0) throw Error(ErrorCode::kFitFailure, "flat curve cannot be inverted");
      root = -a / b;
    } else {
      const double disc = b * b - 4.0 * a * c;
      if (disc < 0.0) {
        // Only reachable inside the extrapolation margin; fall back to the
        // nearer end of the range.
        root = target > top ? curve.range_lo : curve.range_hi;
      } else {
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b == 0.0 ? 1.0 : b));
        const double r1 = q / c;
        const double r2 = q != 0.0 ? a / q : r1;
        auto distance = [&](double r) {
          if (r < curve.range_lo) return curve.range_lo - r;
          if (r > curve.range_hi) return r - curve.range_hi;
          return 0.0;
        };
        root = distance(r1) <= distance(r2) ? r1 : r2;
      }
    }
  }

  Inversion result;
  result.magnitude = std::clamp(root, curve.range_lo, curve.range_hi);
  result.extrapolated = result.magnitude != root;
  if (result.extrapolated) {
    // Beyond the swept range only a margin-sized MSSIM deviation is tolerated.
    const double edge = curve.evaluate(result.magnitude);
    if (std::abs(edge - target) > margin) {
      throw Error(ErrorCode::kOutOfRange,
                  "no in-range solution for target " + describe(target));
    }
  }
  return result;
}

MagnitudeLimits default_limits(NoiseKind kind) noexcept {
  // Starting points sit near the 0.8 MSSIM level on natural images.
  switch (kind) {
    case NoiseKind::kGaussian: return {0.0016, 1e-10, 1e3};
    case NoiseKind::kSpeckle: return {0.0054, 1e-10, 1e4};
    case NoiseKind::kSaltPepper: return {0.0134, 1e-10, 1.0};
    case NoiseKind::kPoisson: return {0.0035, 1e-10, 1e3};
    case NoiseKind::kOcclusion: return {0.4753, 1e-4, 4.0};
  }
  return {};
}

SolveResult solve_magnitude(const MssimObjective& objective, double target,
                            const MagnitudeLimits& limits, const SolveOptions& options) {
  if (!(target > 0.0 && target < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target MSSIM must lie in (0, 1)");
  }
  if (!(options.tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be > 0");
  if (!(limits.min > 0.0 && limits.min <= limits.initial && limits.initial <= limits.max)) {
    throw Error(ErrorCode::kInvalidArgument, "magnitude limits must satisfy 0 < min <= initial <= max");
  }

  SolveResult best;
  double best_error = std::numeric_limits<double>::infinity();
  auto evaluate = [&](double m) {
    const double s = objective(m);
    ++best.evaluations;
    if (std::abs(s - target) < best_error) {
      best_error = std::abs(s - target);
      best.magnitude = m;
      best.mssim = s;
      best.converged = best_error <= options.tol;
    }
    return s;
  };

  double lo = 0.0;
  double hi = 0.0;
  double m = limits.initial;
  double s = evaluate(m);
  if (best.converged) return best;
  if (s > target) {
    lo = m;
    while (s > target) {
      if (m >= limits.max) {
        throw Error(ErrorCode::kBracketNotFound,
                    "MSSIM stays above " + describe(target) + " up to magnitude " +
                        describe(limits.max) + " (reached " + describe(s) + ")");
      }
      lo = m;
      m = std::min(2.0 * m, limits.max);
      s = evaluate(m);
      if (best.converged) return best;
    }
    hi = m;
  } else {
    hi = m;
    while (s < target) {
      if (m <= limits.min) {
        throw Error(ErrorCode::kBracketNotFound,
                    "MSSIM stays below " + describe(target) + " down to magnitude " +
                        describe(limits.min) + " (reached " + describe(s) + ")");
      }
      hi = m;
      m = std::max(0.5 * m, limits.min);
      s = evaluate(m);
      if (best.converged) return best;
    }
    lo = m;
  }

  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;  // interval exhausted in floating point
    s = evaluate(mid);
    if (best.converged) return best;
    (s > target ? lo : hi) = mid;
  }
  return best;
}

SolveResult solve_magnitude(std::span<const ImageBuffer> corpus, NoiseKind kind, double target,
                            double tol, Seed master, const SsimParams& params, std::size_t jobs) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "corpus is empty");
  return solve_magnitude(make_corpus_objective(corpus, kind, master, params, jobs), target,
                         default_limits(kind), SolveOptions{tol, 60});
}

std::vector<double> auto_grid(const MssimObjective& objective, const MagnitudeLimits& limits,
                              const GridOptions& options) {
  if (options.count < 2) throw Error(ErrorCode::kInvalidArgument, "grid needs at least 2 points");
  auto endpoint = [&](double level, double fallback) {
    try {
      return solve_magnitude(objective, level, limits, {options.endpoint_tol, 20}).magnitude;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBracketNotFound) throw;
      return fallback;
    }
  };
  const double lo = endpoint(options.high_mssim, limits.min);
  const double hi = endpoint(options.low_mssim, limits.max);
  if (!(hi > lo)) {
    throw Error(ErrorCode::kFitFailure, "could not find a magnitude range spanning the MSSIM levels");
  }
  std::vector<double> grid(options.count);
  const double ratio = std::log(hi / lo) / static_cast<double>(options.count - 1);
  for (std::size_t i = 0; i < options.count; ++i) {
    grid[i] = lo * std::exp(ratio * static_cast<double>(i));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

namespace {

// `count` consecutive samples centred on where the sweep crosses `target`.
SweepResult window_around(const SweepResult& full, double target, std::size_t count) {
  const auto& samples = full.samples;
  if (count >= samples.size()) return full;
  std::size_t crossing = 0;
  while (crossing < samples.size() && samples[crossing].mssim > target) ++crossing;
  const std::size_t half = count / 2;
  std::size_t first = crossing > half ? crossing - half : 0;
  first = std::min(first, samples.size() - count);
  SweepResult local = full;
  local.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(first),
                       samples.begin() + static_cast<std::ptrdiff_t>(first + count));
  return local;
}

}  // namespace

std::string_view to_string(CalibrationMethod method) noexcept {
  return method == CalibrationMethod::kFit ? "fit" : "bisect";
}

std::optional<double> LookupTable::magnitude(NoiseKind kind, double target) const {
  const auto it = entries.find(kind);
  if (it == entries.end()) return std::nullopt;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (std::abs(targets[i] - target) < 1e-9) return it->second[i];
  }
  return std::nullopt;
}

LookupTable build_lookup(std::span<const ImageBuffer> corpus, std::span<const NoiseKind> kinds,
                         std::span<const double> targets, Seed master, const SsimParams& params,
                         const LookupOptions& options) {
  validate(params);
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "corpus is empty");
  if (kinds.empty()) throw Error(ErrorCode::kInvalidArgument, "no noise kinds requested");
  if (std::set<NoiseKind>(kinds.begin(), kinds.end()).size() != kinds.size()) {
    throw Error(ErrorCode::kInvalidArgument, "noise kinds must not repeat");
  }
  if (targets.empty()) throw Error(ErrorCode::kInvalidArgument, "no target levels requested");
  for (double t : targets) {
    if (!(t > 0.0 && t < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "target levels must lie in (0, 1)");
    }
  }
  require_increasing(targets, "target levels");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be > 0");
  if (options.fit_window != 0 && options.fit_window < 3) {
    throw Error(ErrorCode::kInvalidArgument, "fit window must be 0 or at least 3 samples");
  }

  LookupTable table;
  table.targets.assign(targets.begin(), targets.end());
  table.kinds.assign(kinds.begin(), kinds.end());
  table.method = options.method;
  table.corpus_id = options.corpus_id;
  table.corpus_size = corpus.size();
  table.seed = master;
  table.ssim_params = params;
  table.tol = options.tol;

  for (NoiseKind kind : kinds) {
    auto& row = table.entries[kind];
    auto& achieved = table.achieved[kind];
    auto& reasons = table.reasons[kind];
    row.assign(targets.size(), std::nullopt);
    achieved.assign(targets.size(), std::nullopt);
    const auto objective = make_corpus_objective(corpus, kind, master, params, options.jobs);
    const auto limits = default_limits(kind);

    if (options.method == CalibrationMethod::kBisect) {
      for (std::size_t i = 0; i < targets.size(); ++i) {
        try {
          const auto solved = solve_magnitude(objective, targets[i], limits, {options.tol, 60});
          if (solved.converged) {
            row[i] = solved.magnitude;
            achieved[i] = solved.mssim;
          } else {
            reasons[i] = "did not converge: closest magnitude " + describe(solved.magnitude) +
                         " gives MSSIM " + describe(solved.mssim);
          }
        } catch (const Error& e) {
          reasons[i] = e.what();
        }
      }
      continue;
    }

    SweepResult swept;
    std::optional<FittedCurve> global;
    try {
      swept = sweep(corpus, kind, auto_grid(objective, limits), master, params, options.jobs);
      if (options.fit_window == 0) global = fit_curve(swept, default_family(kind));
    } catch (const Error& e) {
      for (std::size_t i = 0; i < targets.size(); ++i) reasons[i] = e.what();
      continue;
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
      try {
        const auto curve = global ? *global
                                  : fit_curve(window_around(swept, targets[i], options.fit_window),
                                              default_family(kind));
        const auto inv = invert_curve(curve, targets[i], options.margin);
        row[i] = inv.magnitude;
        achieved[i] = objective(inv.magnitude);
      } catch (const Error& e) {
        reasons[i] = e.what();
      }
    }
  }
  return table;
}

}  // namespace noisecal
