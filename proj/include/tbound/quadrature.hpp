#pragma once

// Adaptive Gauss-Kronrod (G10/K21) integration on finite, semi-infinite and
// whole-line ranges, with log-space helpers for sharply peaked integrands.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace tbound::quad {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// exp() of a log value, flushed to zero below the double underflow limit.
inline double exp_or_zero(double log_value) {
  return log_value < -745.0 ? 0.0 : std::exp(log_value);
}

/// Integration domain as exposed by `integrate`.
struct Domain {
  enum class Kind { finite, semi_infinite };

  static Domain finite(double lo, double hi);
  static Domain semi_infinite(double lo);

  Kind kind = Kind::finite;
  double lo = 0.0;
  double hi = 1.0;  // +inf for semi-infinite
};

/// Open interval (lo, hi); either end may be infinite. Used for supports.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double x) const { return x > lo && x < hi; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

struct QuadResult {
  double value = 0.0;
  double err_est = 0.0;
  std::size_t evals = 0;
};

struct VectorQuadResult {
  std::vector<double> value;
  std::vector<double> err_est;
  std::size_t evals = 0;
};

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_evals = std::size_t{1} << 20;
  // Map panels touching a finite end of the range through x = end +- w u^2,
  // which removes (1-x)^(-1/2)-type endpoint singularities.
  bool smooth_endpoints = false;
  // Measure the relative tolerance against the integral of |f| instead of
  // |integral f|. Needed for components that cancel to (near) zero.
  bool rel_to_l1 = false;
};

using Integrand = std::function<double(double)>;
using LogIntegrand = std::function<double(double)>;
/// Writes n component values at x into out.
using VectorIntegrand = std::function<void(double x, std::span<double> out)>;

/// Integrates f over `domain`. Semi-infinite domains use
/// t = lo + u/(1-u), u in (0, 1 - 1e-14]; with breakpoints the tail beyond the
/// last one is stretched by the width of the preceding panel.
/// Throws NonConvergent when the budget is exhausted and NonFiniteIntegrand
/// when f returns NaN or +-inf at a node.
QuadResult integrate(const Integrand& f, const Domain& domain, double rel_tol = 1e-10,
                     double abs_tol = 0.0);

/// Integrates f over `range` split at `breakpoints` (sorted or not; points
/// outside the range are ignored).
QuadResult integrate(const Integrand& f, const Interval& range,
                     std::span<const double> breakpoints, const Options& opt = {});

/// Integrates n components at once under a shared panel refinement. Each
/// component must satisfy err_i <= max(rel_tol |I_i|, abs_tol).
VectorQuadResult integrate_vector(const VectorIntegrand& f, std::size_t n, const Interval& range,
                                  std::span<const double> breakpoints, const Options& opt = {});

/// Location and width of the dominant mode of a log-integrand.
struct Peak {
  double center = 0.0;
  double scale = 1.0;
  double log_peak = 0.0;
};

/// Grid scan (in a coordinate that resolves both ends of the range) for the
/// maximum of logf, with a width estimate from where logf falls by 2.
Peak locate_peak(const LogIntegrand& logf, const Interval& range);

/// center +- scale * 2^k, k = -1..10, restricted to the open range.
std::vector<double> peak_breakpoints(const Interval& range, double center, double scale);

struct LogQuadResult {
  double log_value = 0.0;
  double rel_err = 0.0;
  std::size_t evals = 0;
};

/// log of the integral of exp(logf) over range, rescaled by the peak value
/// so that neither the integrand nor the result over/underflows.
LogQuadResult integrate_log(const LogIntegrand& logf, const Interval& range,
                            std::optional<Peak> hint = std::nullopt, const Options& opt = {});

/// log w_{a,N}(t) = log[Gamma(2a) / (Gamma(a) Gamma(N/2))] + ((2a+N-2)/4) log t - t/2.
double log_t_weight(double a, int N, double t);

/// Panel boundaries for t-integrals of the variance/Beta model: the
/// t-marginal lives mostly in (0, N/2) with a tail of relative width
/// O(1/sqrt(N)) above it.
std::vector<double> t_breakpoints(int N);

/// Integral over t in (0, inf) of f(t) w_{a,N}(t); the weight is evaluated in
/// log space and f must stay finite where the weight is non-negligible.
QuadResult integrate_weighted_t(const Integrand& f, double a, int N, double rel_tol = 1e-10);

/// Same integral with a strictly positive integrand supplied as log f(t).
/// Needed when f and w individually overflow (large N).
LogQuadResult integrate_weighted_t_log(const LogIntegrand& log_f, double a, int N,
                                       double rel_tol = 1e-10);

}  // namespace tbound::quad
