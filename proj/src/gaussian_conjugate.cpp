#include "tbound/gaussian_conjugate.hpp"

#include <cmath>
#include <numbers>

#include "tbound/errors.hpp"

namespace tbound::gaussian_conjugate {

namespace {

double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

void check(const Params& p) {
  if (!(p.prior_var > 0.0) || !(p.noise_var > 0.0) || p.N < 1) {
    throw DomainError("Gaussian model needs positive variances and N >= 1");
  }
}

}  // namespace

double posterior_variance(const Params& p) {
  check(p);
  return 1.0 / (1.0 / p.prior_var + p.N / p.noise_var);
}

double posterior_mean(const Params& p, double xbar) {
  return posterior_variance(p) * (p.prior_mean / p.prior_var + p.N * xbar / p.noise_var);
}

double marginal_variance(const Params& p) {
  check(p);
  return p.prior_var + p.noise_var / p.N;
}

double log_joint(const Params& p, double theta, double xbar) {
  return log_normal(theta, p.prior_mean, p.prior_var) + log_normal(xbar, theta, p.noise_var / p.N);
}

JointModel joint_model(const Params& p) {
  check(p);
  JointModel m;
  m.log_joint = [p](const Vec& x, const Vec& th) { return log_joint(p, th[0], x[0]); };
  m.theta_support = [](const Vec&) { return quad::Interval{-quad::kInf, quad::kInf}; };
  m.g = [](const Vec& th) { return th; };
  const double v = posterior_variance(p);
  m.score = [p, v](const Vec& x, const Vec& th) {
    return scalar_vec((posterior_mean(p, x[0]) - th[0]) / v);
  };
  m.phi = m.score;
  m.locate = [p, v](const Vec& x) {
    return std::optional<quad::Peak>(quad::Peak{posterior_mean(p, x[0]), std::sqrt(v), 0.0});
  };
  return m;
}

XSampler xbar_sampler(const Params& p) {
  check(p);
  return [p](Rng& rng) {
    const double theta = p.prior_mean + std::sqrt(p.prior_var) * rng.normal();
    return scalar_vec(theta + std::sqrt(p.noise_var / p.N) * rng.normal());
  };
}

engine::GridX xbar_grid(const Params& p) {
  const double sd = std::sqrt(marginal_variance(p));
  // Beyond 40 standard deviations p(xbar) < e^-800 underflows anyway.
  engine::GridX grid{quad::Interval{p.prior_mean - 40.0 * sd, p.prior_mean + 40.0 * sd}, {}};
  grid.breakpoints.push_back(p.prior_mean);
  for (double k : {0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 20.0}) {
    grid.breakpoints.push_back(p.prior_mean - k * sd);
    grid.breakpoints.push_back(p.prior_mean + k * sd);
  }
  return grid;
}

expfam::ExpFamSpec expfam_spec(const Params& p) {
  check(p);
  expfam::ExpFamSpec s;
  s.dim_J = 1;
  const double s2 = p.noise_var;
  const int n = p.N;
  s.log_h = [s2, n](const Vec& x) {
    return -0.5 * x.squaredNorm() / s2 - 0.5 * n * std::log(2.0 * std::numbers::pi * s2);
  };
  s.eta = [](double th) { return scalar_vec(th); };
  s.t_stat = [s2](const Vec& x) { return scalar_vec(x.sum() / s2); };
  s.A = [s2, n](double th) { return n * th * th / (2.0 * s2); };
  s.probe = {-1.0, 0.0, 1.0};
  s.theta_scale = std::sqrt(p.prior_var);
  return s;
}

expfam::ConjugateHyper prior_hyper(const Params& p) {
  check(p);
  return expfam::ConjugateHyper{p.noise_var / (p.N * p.prior_var),
                                scalar_vec(p.prior_mean / p.prior_var)};
}

}  // namespace tbound::gaussian_conjugate
