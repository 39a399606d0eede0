#pragma once

// Gaussian variance estimation with a Beta prior:
//   x | theta ~ N(0, theta I_N),  theta ~ Beta(a, a),
// with sufficient statistic t = x^T x / 2 and gamma = x^T x / N = 2t / N.
//
// Posterior quantities have Whittaker-W closed forms with indices
//   xi = (N - 6a + 2) / 4,  m = (2a - N) / 4.

#include <optional>

#include "tbound/bounds.hpp"
#include "tbound/model.hpp"

namespace tbound::variance_beta {

struct CaseParams {
  double a = 3.0;
  int N = 8;

  CaseParams() = default;
  CaseParams(double a_, int N_);

  double prior_mean() const { return 0.5; }
  double prior_variance() const { return 1.0 / (4.0 * (2.0 * a + 1.0)); }
  double xi() const { return (N - 6.0 * a + 2.0) / 4.0; }
  double m() const { return (2.0 * a - N) / 4.0; }
  /// Throws UnsupportedRegime unless a > 2 (needed by every bound).
  void require_bound_regime() const;
};

struct SuffStat {
  double t = 0.0;
  double gamma = 0.0;

  static SuffStat from_t(double t, int N);
  static SuffStat from_gamma(double gamma, int N);
};

struct MapCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

MapCoefficients map_coefficients(const CaseParams& p, double gamma);

double log_likelihood(const CaseParams& p, double theta, double t);
double log_prior(const CaseParams& p, double theta);
/// log p(x, theta) with x^T x = 2t. -inf at theta = 0 or 1; DomainError
/// outside [0, 1] or for t < 0.
double log_joint(const CaseParams& p, double theta, double t);
/// log density of (t, theta): log_joint plus the log volume of the shell
/// {x : x^T x = 2t}.
double log_joint_t(const CaseParams& p, double theta, double t);

/// d/dtheta log p(x, theta) = (a-1-N/2)/theta + t/theta^2 - (a-1)/(1-theta).
double score(const CaseParams& p, double theta, double t);
/// The same score written as (N/2)(alpha theta^2 - beta theta + gamma) / (theta^2 (1-theta)).
double score_factored(const CaseParams& p, double theta, double t);
/// d^2/dtheta^2 log p(x, theta).
double score_derivative(const CaseParams& p, double theta, double t);

/// log p(x) for any x with x^T x = 2t.
double log_marginal_x(const CaseParams& p, double t);
/// log density of t.
double log_marginal_t(const CaseParams& p, double t);
double marginal_t_density(const CaseParams& p, double t);

double log_posterior(const CaseParams& p, double theta, double t);
double posterior_pdf(const CaseParams& p, double theta, double t);

double map_estimate(const CaseParams& p, double gamma);
double ml_estimate(double gamma);
/// Posterior mean from the Whittaker ratio.
double mmse_estimate(const CaseParams& p, double t);
/// Posterior mean by theta-quadrature of the joint density.
double mmse_estimate_quadrature(const CaseParams& p, double t);
/// Whittaker ratio cross-checked against quadrature; the quadrature value is
/// returned when they differ by more than rel 1e-4 or the ratio fails.
double mmse_estimate_checked(const CaseParams& p, double t, bool* used_fallback = nullptr);

enum class Moment { theta, theta2, inv_theta2, inv_theta3, inv_one_minus_theta2 };

/// E[f(theta) | t] from Whittaker ratios. inv_one_minus_theta2 needs a > 2.
double posterior_moment(const CaseParams& p, double t, Moment kind);
double posterior_moment_quadrature(const CaseParams& p, double t, Moment kind);

double bfim(const CaseParams& p);
/// E_{t,theta}[score^2] by nested (t, theta) quadrature through the engine.
double bfim_quadrature(const CaseParams& p);
double bcrb(const CaseParams& p);
double ecrb(const CaseParams& p);

/// Posterior Fisher information from the moment closed form.
double posterior_fisher(const CaseParams& p, double t);
/// E[score^2 | t] by theta-quadrature.
double posterior_fisher_quadrature(const CaseParams& p, double t);

enum class TbcrbMethod { closed_form, engine };
/// E_t[1 / F_x].
double tbcrb(const CaseParams& p, TbcrbMethod method = TbcrbMethod::engine);

enum class MmseMethod { closed_form, quadrature };
/// E_t[Var(theta | t)].
double mmse_value(const CaseParams& p, MmseMethod method = MmseMethod::quadrature);
/// The quadrature route with its error estimate.
quad::QuadResult mmse_quadrature(const CaseParams& p);

enum class AsymptoticForm {
  likelihood_shape,  // normalized exp[(N/2)(ln(gamma/theta) - gamma/theta)] on (0, 1)
  gaussian           // N(gamma, (2/N) gamma^2) truncated to (0, 1)
};

double asymptotic_posterior(const CaseParams& p, double theta, double t, AsymptoticForm form);

struct ApproxDistance {
  double sup_abs = 0.0;           // max |p_exact - p_gauss| on the window
  double sup_standardized = 0.0;  // sup_abs * sqrt(v)
  double sup_relative = 0.0;      // sup_abs / max p_gauss
};

/// Distance between the exact posterior and the Gaussian form on
/// gamma +- 3 sqrt(v) intersected with (0, 1), v = (2/N) gamma^2.
ApproxDistance gaussian_form_distance(const CaseParams& p, double t, int grid_points = 2001);

/// Posterior mode and width at t (for quadrature panel placement).
std::optional<quad::Peak> posterior_peak(const CaseParams& p, double t);

/// JointModel over x = (t) with g(theta) = theta and phi = score.
JointModel joint_model(const CaseParams& p);

/// Ancestral sampler of x = (t).
XSampler t_sampler(const CaseParams& p);

/// E_t grid for the engine.
std::vector<double> engine_t_breakpoints(const CaseParams& p);
/// Range (truncated where the t-marginal is below e^-60) plus breakpoints.
engine::GridX engine_t_grid(const CaseParams& p);
/// Engine TBCRB with its quadrature error estimate.
engine::BoundReport tbcrb_report(const CaseParams& p, double tol = 1e-9);

}  // namespace tbound::variance_beta
