#include "tbound/special_functions.hpp"

#include <cmath>
#include <string>

#include "tbound/errors.hpp"
#include "tbound/quadrature.hpp"

namespace tbound::sf {

namespace {

constexpr double kRelTol = 1e-12;

bool is_nonpositive_integer(double a) {
  return a <= 0.0 && a == std::nearbyint(a) && a > -64.0;
}

// U(-n, b, z) = sum_k C(n,k) (-1)^(n-k) (b+k)_(n-k) z^k
double hyperu_polynomial(int n, double b, double z) {
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    double term = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
    for (int j = 0; j < n - k; ++j) term *= (b + k + j);
    term *= std::pow(z, k);
    sum += ((n - k) % 2 == 0) ? term : -term;
  }
  return sum;
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma needs x > 0, got " + std::to_string(x));
  }
  return std::lgamma(x);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("log_beta needs a, b > 0");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double hyperu_log(double a, double b, double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("hyperu needs z > 0");
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("hyperu needs finite a, b");
  if (is_nonpositive_integer(a)) {
    const double u = hyperu_polynomial(static_cast<int>(-a), b, z);
    if (!(u > 0.0)) throw UnsupportedRegime("U(a,b,z) <= 0 at a non-positive integer a");
    return std::log(u);
  }
  if (!(a > 0.0)) {
    throw UnsupportedRegime("U integral representation needs a > 0, got a=" + std::to_string(a));
  }
  const double c = b - a - 1.0;
  quad::Options opt;
  opt.rel_tol = kRelTol;
  const quad::Interval half_line{0.0, quad::kInf};

  if (a < 1.0) {
    // s = w^(1/a) removes the s^(a-1) singularity: integrand (1/a) e^{-zs} (1+s)^c.
    const double inv_a = 1.0 / a;
    const auto logf = [&](double w) {
      const double s = std::pow(w, inv_a);
      return -z * s + c * std::log1p(s);
    };
    const auto r = quad::integrate_log(logf, half_line, std::nullopt, opt);
    return r.log_value - std::log(a) - log_gamma(a);
  }

  const auto logf = [&](double s) {
    return -z * s + (a - 1.0) * std::log(s) + c * std::log1p(s);
  };
  // Unique interior mode: positive root of z s^2 + (z - b + 2) s - (a - 1) = 0.
  const double p = z - b + 2.0;
  const double q = a - 1.0;
  double mode = 0.0;
  if (q > 0.0) {
    // Stable positive root of z s^2 + p s - q.
    mode = p >= 0.0 ? 2.0 * q / (p + std::sqrt(p * p + 4.0 * z * q))
                    : (-p + std::sqrt(p * p + 4.0 * z * q)) / (2.0 * z);
  } else if (p < 0.0) {
    mode = -p / z;
  }
  std::optional<quad::Peak> hint;
  if (mode > 0.0) {
    const double curv = -q / (mode * mode) - c / ((1.0 + mode) * (1.0 + mode));
    if (curv < 0.0 && std::isfinite(curv)) {
      hint = quad::Peak{mode, 1.0 / std::sqrt(-curv), logf(mode)};
    }
  }
  const auto r = quad::integrate_log(logf, half_line, hint, opt);
  return r.log_value - log_gamma(a);
}

double whittaker_w_log(const WhittakerArgs& args) {
  const double kappa = args.kappa;
  const double z = args.z;
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("Whittaker W needs z > 0");
  if (!std::isfinite(kappa) || !std::isfinite(args.mu)) {
    throw DomainError("Whittaker W needs finite indices");
  }
  // W is even in mu; pick the sign whose U parameter keeps the integral finite.
  const double mu_pos = std::abs(args.mu);
  const double mu_neg = -mu_pos;
  double mu = 0.0;
  const double a_pos = mu_pos - kappa + 0.5;
  const double a_neg = mu_neg - kappa + 0.5;
  if (a_pos > 0.0) {
    mu = mu_pos;
  } else if (a_neg > 0.0) {
    mu = mu_neg;
  } else if (is_nonpositive_integer(a_pos)) {
    mu = mu_pos;
  } else if (is_nonpositive_integer(a_neg)) {
    mu = mu_neg;
  } else {
    throw UnsupportedRegime("Whittaker W_{" + std::to_string(kappa) + "," +
                            std::to_string(args.mu) +
                            "}: no sign of mu gives a convergent U representation");
  }
  const double a = mu - kappa + 0.5;
  const double b = 1.0 + 2.0 * mu;
  return -0.5 * z + (mu + 0.5) * std::log(z) + hyperu_log(a, b, z);
}

}  // namespace tbound::sf
