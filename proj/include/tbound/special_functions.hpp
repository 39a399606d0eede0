#pragma once

// Log-domain special functions: log-gamma, log-beta, confluent
// hypergeometric U and Whittaker W.

namespace tbound::sf {

/// log Gamma(x) for x > 0. Throws DomainError otherwise.
double log_gamma(double x);

/// log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b).
double log_beta(double a, double b);

/// log U(a, b, z) from
///   U(a, b, z) = 1/Gamma(a) int_0^inf e^{-zs} s^{a-1} (1+s)^{b-a-1} ds,
/// valid for a > 0, z > 0. For a = 0, -1, -2, ... U reduces to a polynomial
/// and is summed directly. Throws UnsupportedRegime elsewhere or when U <= 0.
double hyperu_log(double a, double b, double z);

struct WhittakerArgs {
  double kappa = 0.0;
  double mu = 0.0;
  double z = 1.0;
};

/// log W_{kappa,mu}(z) via W = e^{-z/2} z^{mu+1/2} U(mu-kappa+1/2, 1+2mu, z),
/// using whichever of +-mu gives a convergent U integral (W is even in mu).
/// Throws DomainError for z <= 0 and UnsupportedRegime when neither sign
/// works.
double whittaker_w_log(const WhittakerArgs& args);

inline double whittaker_w_log(double kappa, double mu, double z) {
  return whittaker_w_log(WhittakerArgs{kappa, mu, z});
}

}  // namespace tbound::sf
