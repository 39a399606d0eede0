#pragma once

// Exponential-family likelihoods with conjugate priors, and tests for
// efficient estimators (estimators whose MSE attains the tighter bound).

#include <array>
#include <functional>
#include <vector>

#include "tbound/model.hpp"

namespace tbound::expfam {

/// p(x | theta) = h(x) exp[eta(theta)^T t(x) - A(theta)] for scalar theta.
struct ExpFamSpec {
  std::size_t dim_J = 1;
  std::function<double(const Vec& x)> log_h;
  std::function<Vec(double theta)> eta;
  std::function<Vec(const Vec& x)> t_stat;
  std::function<double(double theta)> A;
  /// Interior points used to probe eta for affinity.
  std::array<double, 3> probe{-1.0, 0.0, 1.0};
  /// Typical magnitude of theta; sets the finite-difference step.
  double theta_scale = 1.0;
};

/// Prior p(theta; lambda, mu) proportional to exp[eta(theta)^T mu - lambda A(theta)].
struct ConjugateHyper {
  double lambda = 0.0;
  Vec mu;
};

/// Posterior hyperparameters (lambda + 1, mu + t(x)).
ConjugateHyper conjugate_update(const ConjugateHyper& hyper, const Vec& t_of_x);

struct EfficiencyReport {
  bool is_efficient = false;
  double deviation = 0.0;
  double fitted_ghat = 0.0;
  double fitted_v = 0.0;
};

/// Least-squares fit of score(theta) = (ghat - g(theta)) / v over the grid.
/// deviation is the residual sum of squares over the score's sum of squares
/// (0 for an exactly affine score); efficient iff
/// deviation < tol and v > 0. Throws DegenerateFit when g is constant on the
/// grid.
EfficiencyReport scalar_efficiency_test(const std::function<double(double)>& score,
                                        const std::function<double(double)>& g,
                                        const std::vector<double>& theta_grid, double tol = 1e-6);

struct NaturalPair {
  std::function<double(double theta)> g;
  std::function<double(const Vec& x)> ghat;
};

/// For eta(theta) = eta0 + c theta: g(theta) = (lambda+1) A'(theta) - c^T mu and
/// ghat(x) = c^T t(x), which satisfy ghat - g = d/dtheta log p(theta | x).
/// A' uses 5-point central differences. Throws NotNaturalParameter when eta
/// is not affine along c on the probe points.
NaturalPair natural_efficient_pair(const ExpFamSpec& spec, const ConjugateHyper& hyper,
                                   const Vec& c);

struct GaussianFit {
  double mean = 0.0;
  double variance = 0.0;
  double sup_deviation = 0.0;
};

/// Quadratic least-squares fit of a log-density on the grid; sup_deviation is
/// the largest absolute residual. Throws DegenerateFit for a non-concave fit.
GaussianFit gaussian_posterior_fit(const std::function<double(double)>& posterior_logpdf,
                                   const std::vector<double>& theta_grid);

/// n points at posterior probabilities (i + 1/2) / n, from a tabulated CDF of
/// exp(logpdf) over the support.
std::vector<double> posterior_quantile_grid(const std::function<double(double)>& logpdf,
                                            const quad::Interval& support, std::size_t n = 64);

}  // namespace tbound::expfam
