#include "tbound/variance_beta.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tbound/bounds.hpp"
#include "tbound/errors.hpp"
#include "tbound/special_functions.hpp"

namespace tbound::variance_beta {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_t_positive(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be > 0, got " + std::to_string(t));
}

double log_w(const CaseParams& p, double dk, double dm, double t) {
  return sf::whittaker_w_log(p.xi() + dk, p.m() + dm, t);
}

// log E[theta^k | t] = (k/2) log t + log W_{xi-k/2, m+k/2}(t) - log W_{xi,m}(t)
double log_power_moment(const CaseParams& p, double k, double t, double lw0) {
  return 0.5 * k * std::log(t) + log_w(p, -0.5 * k, 0.5 * k, t) - lw0;
}

double moment_fn(Moment kind, double th) {
  switch (kind) {
    case Moment::theta: return th;
    case Moment::theta2: return th * th;
    case Moment::inv_theta2: return 1.0 / (th * th);
    case Moment::inv_theta3: return 1.0 / (th * th * th);
    case Moment::inv_one_minus_theta2: return 1.0 / ((1.0 - th) * (1.0 - th));
  }
  return 0.0;
}

double fisher_from_logs(const CaseParams& p, double t, double lw0) {
  const double a = p.a;
  const double e_m2 = std::exp(log_power_moment(p, -2.0, t, lw0));
  const double e_m3 = std::exp(log_power_moment(p, -3.0, t, lw0));
  const double e_om2 =
      std::exp(std::lgamma(a - 2.0) - std::lgamma(a) + log_w(p, 2.0, 0.0, t) - lw0);
  return (a - 1.0 - 0.5 * p.N) * e_m2 + 2.0 * t * e_m3 + (a - 1.0) * e_om2;
}

// t <= Gamma(N/2), so the marginal above k + 30 sqrt(k) + 60 carries less
// than e^-60 of the mass; conditional moments out there are pure roundoff.
quad::Interval engine_t_range(const CaseParams& p) {
  const double k = 0.5 * p.N;
  return quad::Interval{0.0, k + 30.0 * std::sqrt(k) + 60.0};
}

// Outer t-integral of a non-negative function through the engine's own
// theta pass at every t.
quad::QuadResult integrate_over_t(const CaseParams& p, const std::function<double(double)>& f,
                                  double rel_tol) {
  quad::Options opt;
  opt.rel_tol = rel_tol;
  const auto pts = engine_t_breakpoints(p);
  return quad::integrate(f, engine_t_range(p), pts, opt);
}

}  // namespace

CaseParams::CaseParams(double a_, int N_) : a(a_), N(N_) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("Beta shape a must be > 0");
  if (N < 1) throw DomainError("sample count N must be >= 1");
}

void CaseParams::require_bound_regime() const {
  if (!(a > 2.0)) {
    throw UnsupportedRegime("bounds need a > 2 (Gamma(a-2) and E[(1-theta)^-2] diverge), got a=" +
                            std::to_string(a));
  }
}

SuffStat SuffStat::from_t(double t, int N) {
  if (!(t >= 0.0)) throw DomainError("t must be >= 0");
  return SuffStat{t, 2.0 * t / N};
}

SuffStat SuffStat::from_gamma(double gamma, int N) {
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  return SuffStat{0.5 * gamma * N, gamma};
}

MapCoefficients map_coefficients(const CaseParams& p, double gamma) {
  const double n = p.N;
  return MapCoefficients{1.0 - 4.0 * (p.a - 1.0) / n, 1.0 - 2.0 * (p.a - 1.0) / n + gamma, gamma};
}

double log_likelihood(const CaseParams& p, double theta, double t) {
  if (!(t >= 0.0)) throw DomainError("t must be >= 0");
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
  if (theta == 0.0) return -quad::kInf;
  return -0.5 * p.N * (kLog2Pi + std::log(theta)) - t / theta;
}

double log_prior(const CaseParams& p, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
  if (p.a == 1.0) return 0.0;
  if (theta == 0.0 || theta == 1.0) return p.a > 1.0 ? -quad::kInf : quad::kInf;
  return (p.a - 1.0) * (std::log(theta) + std::log1p(-theta)) - sf::log_beta(p.a, p.a);
}

double log_joint(const CaseParams& p, double theta, double t) {
  if (!(t >= 0.0)) throw DomainError("t must be >= 0");
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
  if (theta == 0.0 || theta == 1.0) return -quad::kInf;
  return log_likelihood(p, theta, t) + log_prior(p, theta);
}

double log_joint_t(const CaseParams& p, double theta, double t) {
  require_t_positive(t);
  const double shell = 0.5 * p.N * kLog2Pi + (0.5 * p.N - 1.0) * std::log(t) - std::lgamma(0.5 * p.N);
  return log_joint(p, theta, t) + shell;
}

double score(const CaseParams& p, double theta, double t) {
  return (p.a - 1.0 - 0.5 * p.N) / theta + t / (theta * theta) - (p.a - 1.0) / (1.0 - theta);
}

double score_factored(const CaseParams& p, double theta, double t) {
  const auto c = map_coefficients(p, 2.0 * t / p.N);
  return 0.5 * p.N * (c.alpha * theta * theta - c.beta * theta + c.gamma) /
         (theta * theta * (1.0 - theta));
}

double score_derivative(const CaseParams& p, double theta, double t) {
  const double om = 1.0 - theta;
  return -(p.a - 1.0 - 0.5 * p.N) / (theta * theta) - 2.0 * t / (theta * theta * theta) -
         (p.a - 1.0) / (om * om);
}

double log_marginal_x(const CaseParams& p, double t) {
  require_t_positive(t);
  return -0.5 * p.N * kLog2Pi - sf::log_beta(p.a, p.a) + sf::log_gamma(p.a) +
         0.25 * (2.0 * p.a - p.N - 2.0) * std::log(t) - 0.5 * t +
         sf::whittaker_w_log(p.xi(), p.m(), t);
}

double log_marginal_t(const CaseParams& p, double t) {
  require_t_positive(t);
  return sf::log_gamma(2.0 * p.a) - sf::log_gamma(p.a) - sf::log_gamma(0.5 * p.N) +
         0.25 * (2.0 * p.a + p.N - 6.0) * std::log(t) - 0.5 * t +
         sf::whittaker_w_log(p.xi(), p.m(), t);
}

double marginal_t_density(const CaseParams& p, double t) { return std::exp(log_marginal_t(p, t)); }

double log_posterior(const CaseParams& p, double theta, double t) {
  return log_joint(p, theta, t) - log_marginal_x(p, t);
}

double posterior_pdf(const CaseParams& p, double theta, double t) {
  return quad::exp_or_zero(log_posterior(p, theta, t));
}

double map_estimate(const CaseParams& p, double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  if (gamma == 0.0) return 0.0;
  const auto c = map_coefficients(p, gamma);
  const double four_am1 = 4.0 * (p.a - 1.0);
  double theta;
  if (four_am1 == std::nearbyint(four_am1) && static_cast<double>(p.N) == four_am1) {
    theta = gamma / (0.5 + gamma);
  } else {
    const double disc = std::max(0.0, c.beta * c.beta - 4.0 * c.alpha * c.gamma);
    theta = 2.0 * c.gamma / (c.beta + std::sqrt(disc));
  }
  return std::clamp(theta, 0.0, 1.0);
}

double ml_estimate(double gamma) { return gamma; }

double mmse_estimate(const CaseParams& p, double t) {
  require_t_positive(t);
  const double lw0 = sf::whittaker_w_log(p.xi(), p.m(), t);
  return std::exp(log_power_moment(p, 1.0, t, lw0));
}

double mmse_estimate_quadrature(const CaseParams& p, double t) {
  return posterior_moment_quadrature(p, t, Moment::theta);
}

double mmse_estimate_checked(const CaseParams& p, double t, bool* used_fallback) {
  const double q = mmse_estimate_quadrature(p, t);
  double w = std::numeric_limits<double>::quiet_NaN();
  try {
    w = mmse_estimate(p, t);
  } catch (const Error&) {
  }
  const bool fallback = !(std::abs(w - q) <= 1e-4 * std::abs(q));
  if (used_fallback) *used_fallback = fallback;
  return fallback ? q : w;
}

double posterior_moment(const CaseParams& p, double t, Moment kind) {
  require_t_positive(t);
  const double lw0 = sf::whittaker_w_log(p.xi(), p.m(), t);
  switch (kind) {
    case Moment::theta: return std::exp(log_power_moment(p, 1.0, t, lw0));
    case Moment::theta2: return std::exp(log_power_moment(p, 2.0, t, lw0));
    case Moment::inv_theta2: return std::exp(log_power_moment(p, -2.0, t, lw0));
    case Moment::inv_theta3: return std::exp(log_power_moment(p, -3.0, t, lw0));
    case Moment::inv_one_minus_theta2:
      p.require_bound_regime();
      return std::exp(std::lgamma(p.a - 2.0) - std::lgamma(p.a) + log_w(p, 2.0, 0.0, t) - lw0);
  }
  return 0.0;
}

double posterior_moment_quadrature(const CaseParams& p, double t, Moment kind) {
  require_t_positive(t);
  if (kind == Moment::inv_one_minus_theta2) p.require_bound_regime();
  const auto model = joint_model(p);
  const Vec x = scalar_vec(t);
  return engine::posterior_average(
      model, x, 1, [&](const Vec& th, std::span<double> out) { out[0] = moment_fn(kind, th[0]); },
      1e-12)[0];
}

double bfim(const CaseParams& p) {
  p.require_bound_regime();
  const double a = p.a;
  return (p.N + 4.0 * (a - 1.0)) * (2.0 * a - 1.0) / (a - 2.0);
}

double bfim_quadrature(const CaseParams& p) {
  p.require_bound_regime();
  const auto rep = tbcrb_report(p);
  return rep.Q(0, 0) / rep.x_mass;
}

double bcrb(const CaseParams& p) { return 1.0 / bfim(p); }

double ecrb(const CaseParams& p) { return (p.a + 1.0) / (p.N * (2.0 * p.a + 1.0)); }

double posterior_fisher(const CaseParams& p, double t) {
  require_t_positive(t);
  p.require_bound_regime();
  return fisher_from_logs(p, t, sf::whittaker_w_log(p.xi(), p.m(), t));
}

double posterior_fisher_quadrature(const CaseParams& p, double t) {
  require_t_positive(t);
  p.require_bound_regime();
  const auto model = joint_model(p);
  const Vec x = scalar_vec(t);
  return engine::posterior_average(
      model, x, 1,
      [&](const Vec& th, std::span<double> out) {
        const double s = score(p, th[0], t);
        out[0] = s * s;
      },
      1e-12)[0];
}

double tbcrb(const CaseParams& p, TbcrbMethod method) {
  p.require_bound_regime();
  if (method == TbcrbMethod::closed_form) {
    // p_t / F_x = w(t) W_{xi,m}(t) / (t F_x)
    const auto r = quad::integrate_weighted_t_log(
        [&](double t) {
          const double lw0 = sf::whittaker_w_log(p.xi(), p.m(), t);
          return lw0 - std::log(t) - std::log(fisher_from_logs(p, t, lw0));
        },
        p.a, p.N, 1e-10);
    return std::exp(r.log_value);
  }
  return tbcrb_report(p).bound(0, 0);
}

double mmse_value(const CaseParams& p, MmseMethod method) {
  p.require_bound_regime();
  if (method == MmseMethod::closed_form) {
    // E[theta^2] - E_t[E[theta|t]^2], with p_t E[theta|t]^2 = w(t) W_{xi-1/2,m+1/2}^2 / W_{xi,m}
    const auto r = quad::integrate_weighted_t_log(
        [&](double t) {
          return 2.0 * log_w(p, -0.5, 0.5, t) - sf::whittaker_w_log(p.xi(), p.m(), t);
        },
        p.a, p.N, 1e-12);
    const double prior_second = (p.a + 1.0) / (2.0 * (2.0 * p.a + 1.0));
    return prior_second - std::exp(r.log_value);
  }
  return mmse_quadrature(p).value;
}

quad::QuadResult mmse_quadrature(const CaseParams& p) {
  p.require_bound_regime();
  const auto model = joint_model(p);
  return integrate_over_t(
      p,
      [&](double t) {
        const Vec x = scalar_vec(t);
        const auto pk = posterior_peak(p, t);
        const double c = pk ? pk->center : 0.5;
        double log_pt = 0.0;
        const Vec mom = engine::posterior_average(
            model, x, 2,
            [&](const Vec& th, std::span<double> out) {
              const double d = th[0] - c;
              out[0] = d;
              out[1] = d * d;
            },
            1e-12, &log_pt);
        const double var = std::max(0.0, mom[1] - mom[0] * mom[0]);
        return quad::exp_or_zero(log_pt) * var;
      },
      1e-10);
}

double asymptotic_posterior(const CaseParams& p, double theta, double t, AsymptoticForm form) {
  require_t_positive(t);
  if (!(theta > 0.0 && theta < 1.0)) return 0.0;
  const double gamma = 2.0 * t / p.N;
  if (form == AsymptoticForm::gaussian) {
    const double sd = std::sqrt(2.0 / p.N) * gamma;
    const double z = (theta - gamma) / sd;
    const double mass = 0.5 * (std::erf((1.0 - gamma) / (sd * std::numbers::sqrt2)) -
                               std::erf(-gamma / (sd * std::numbers::sqrt2)));
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi) * mass);
  }
  const double half_n = 0.5 * p.N;
  const auto logq = [&](double th) {
    return half_n * (std::log(gamma / th) - gamma / th);
  };
  // Mode at theta = gamma (clamped into the support) with curvature -N/(2 gamma^2).
  const double center = std::clamp(gamma, 1e-12, 1.0 - 1e-12);
  const double scale = gamma / std::sqrt(half_n);
  const auto r = quad::integrate_log(logq, quad::Interval{0.0, 1.0},
                                     quad::Peak{center, scale, logq(center)});
  return std::exp(logq(theta) - r.log_value);
}

ApproxDistance gaussian_form_distance(const CaseParams& p, double t, int grid_points) {
  require_t_positive(t);
  const double gamma = 2.0 * t / p.N;
  const double sd = std::sqrt(2.0 / p.N) * gamma;
  const double lo = std::max(gamma - 3.0 * sd, 1e-12);
  const double hi = std::min(gamma + 3.0 * sd, 1.0 - 1e-12);
  const double lmx = log_marginal_x(p, t);
  ApproxDistance d;
  double peak = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double th = lo + (hi - lo) * i / (grid_points - 1);
    const double exact = std::exp(log_joint(p, th, t) - lmx);
    const double approx = asymptotic_posterior(p, th, t, AsymptoticForm::gaussian);
    d.sup_abs = std::max(d.sup_abs, std::abs(exact - approx));
    peak = std::max(peak, approx);
  }
  d.sup_standardized = d.sup_abs * sd;
  d.sup_relative = peak > 0.0 ? d.sup_abs / peak : 0.0;
  return d;
}

std::optional<quad::Peak> posterior_peak(const CaseParams& p, double t) {
  if (!(t > 0.0)) return std::nullopt;
  const double mode = map_estimate(p, 2.0 * t / p.N);
  if (!(mode > 0.0 && mode < 1.0)) return std::nullopt;
  const double curv = score_derivative(p, mode, t);
  if (!(curv < 0.0) || !std::isfinite(curv)) return std::nullopt;
  double scale = 1.0 / std::sqrt(-curv);
  scale = std::min(scale, 0.25);
  return quad::Peak{mode, scale, 0.0};
}

JointModel joint_model(const CaseParams& p) {
  JointModel m;
  m.dim_K = 1;
  m.dim_L = 1;
  m.dim_M = 1;
  m.log_joint = [p](const Vec& x, const Vec& th) {
    if (!(th[0] > 0.0 && th[0] < 1.0) || !(x[0] > 0.0)) return -quad::kInf;
    return log_joint_t(p, th[0], x[0]);
  };
  m.theta_support = [](const Vec&) { return quad::Interval{0.0, 1.0}; };
  m.g = [](const Vec& th) { return th; };
  m.score = [p](const Vec& x, const Vec& th) { return scalar_vec(score(p, th[0], x[0])); };
  m.phi = [p](const Vec& x, const Vec& th) {
    if (!(th[0] > 0.0 && th[0] < 1.0)) return scalar_vec(0.0);
    return scalar_vec(score(p, th[0], x[0]));
  };
  m.locate = [p](const Vec& x) { return posterior_peak(p, x[0]); };
  return m;
}

XSampler t_sampler(const CaseParams& p) {
  return [p](Rng& rng) {
    const double theta = rng.beta(p.a, p.a);
    return scalar_vec(theta * rng.gamma(0.5 * p.N));
  };
}

std::vector<double> engine_t_breakpoints(const CaseParams& p) { return quad::t_breakpoints(p.N); }

engine::GridX engine_t_grid(const CaseParams& p) {
  return engine::GridX{engine_t_range(p), engine_t_breakpoints(p)};
}

engine::BoundReport tbcrb_report(const CaseParams& p, double tol) {
  p.require_bound_regime();
  return engine::tbcrb(joint_model(p), engine_t_grid(p), tol);
}

}  // namespace tbound::variance_beta
