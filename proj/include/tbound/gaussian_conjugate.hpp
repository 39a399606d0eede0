#pragma once

// Linear-Gaussian model: theta ~ N(m0, s0^2), x_i | theta ~ N(theta, sigma^2),
// i = 1..N. The engine works on the sufficient statistic xbar.

#include "tbound/bounds.hpp"
#include "tbound/expfam.hpp"

namespace tbound::gaussian_conjugate {

struct Params {
  double prior_mean = 0.0;
  double prior_var = 1.0;
  double noise_var = 1.0;
  int N = 4;
};

double posterior_variance(const Params& p);
double posterior_mean(const Params& p, double xbar);
/// Variance of xbar under p(x).
double marginal_variance(const Params& p);

/// log p(xbar, theta).
double log_joint(const Params& p, double theta, double xbar);

/// JointModel over x = (xbar) with g(theta) = theta and phi = score.
JointModel joint_model(const Params& p);
XSampler xbar_sampler(const Params& p);
/// Quadrature grid for E over xbar (prior mean +- 40 standard deviations).
engine::GridX xbar_grid(const Params& p);

/// The likelihood of the raw sample x (length N) in exponential-family form:
/// eta(theta) = theta, t(x) = sum(x) / sigma^2, A(theta) = N theta^2 / (2 sigma^2).
expfam::ExpFamSpec expfam_spec(const Params& p);
/// Conjugate hyperparameters reproducing the N(m0, s0^2) prior.
expfam::ConjugateHyper prior_hyper(const Params& p);

}  // namespace tbound::gaussian_conjugate
