#pragma once

// Classical and tighter Bayesian lower bounds from the covariance
// inequality, Cramer-Rao and Bobrovsky-Zakai generating families, and the
// classical-vs-tighter equality diagnostic.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tbound/model.hpp"

namespace tbound::engine {

/// Posterior-normalized moments at one x: R = E[g phi^T | x],
/// Q = E[phi phi^T | x], plus log p(x) from the same theta pass.
struct ConditionalMoments {
  Mat R;
  Mat Q;
  double log_px = 0.0;
  double rel_err = 0.0;  // largest relative quadrature error estimate
  std::size_t evals = 0;

  /// Joint-only integrals: int g phi^T p(x, theta) dtheta and
  /// int phi phi^T p(x, theta) dtheta.
  Mat R_tilde() const { return R * std::exp(log_px); }
  Mat Q_tilde() const { return Q * std::exp(log_px); }
};

enum class BoundKind { classical, tighter, bcrb, tbcrb };

std::string to_string(BoundKind kind);

struct BoundReport {
  Mat bound;
  BoundKind kind = BoundKind::tighter;
  /// Classical bound R Q^-1 R^T from the global moments of the same pass.
  Mat classical;
  Mat R;  // E[g phi^T]
  Mat Q;  // E[phi phi^T]
  double max_condition = 0.0;
  double quad_err = 0.0;  // relative error estimate of the outer expectation
  double x_mass = 1.0;    // integral of p(x) over the grid (grid method only)
  std::size_t draws_used = 0;
  std::size_t draws_singular = 0;
};

/// R Q^-1 R^T, symmetrized. Throws SingularQ when cond(Q) > 1e12.
Mat blb_classical(const Mat& R, const Mat& Q);

/// Q^-1 for symmetric Q with the same guard; `condition` receives cond(Q).
Mat inverse_guarded(const Mat& Q, double* condition = nullptr);

/// Theta-quadrature of g phi^T and phi phi^T against p(x, theta).
ConditionalMoments conditional_moments(const JointModel& m, const Vec& x, double tol = 1e-10);

/// Posterior average of an n-component function at x.
Vec posterior_average(const JointModel& m, const Vec& x, std::size_t n,
                      const std::function<void(const Vec& theta, std::span<double> out)>& f,
                      double tol = 1e-10, double* log_px = nullptr);

/// E_x by Monte Carlo: draw i uses Rng::substream(seed, 0, i), so the result
/// does not depend on `workers`.
struct MonteCarloX {
  XSampler sampler;
  std::size_t draws = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// E_x by adaptive quadrature over a scalar x summary, with p(x) taken from
/// the model's own theta-marginal.
struct GridX {
  quad::Interval range;
  std::vector<double> breakpoints;
};

using XExpectation = std::variant<MonteCarloX, GridX>;

/// E_x[R_{|x} Q_{|x}^-1 R_{|x}^T]. Monte-Carlo draws with singular Q are
/// dropped; more than 0.1% singular draws throws SingularQ.
BoundReport tblb(const JointModel& m, const XExpectation& expectation, double tol = 1e-8);

/// Hand-built mixture: x takes value i with probability weights[i] and has
/// conditional moments (R_list[i], Q_list[i]).
BoundReport tblb_from_moments(const std::vector<double>& weights, const std::vector<Mat>& R_list,
                              const std::vector<Mat>& Q_list);

/// Model whose phi is the score d/dtheta log p(x, theta), zero off-support.
JointModel phi_cr(const JointModel& m);

/// tblb with the score family; kind tbcrb, classical member is the BCRB.
BoundReport tbcrb(const JointModel& m, const XExpectation& expectation, double tol = 1e-8);

/// [p(theta+h|x) 1{theta+h in S} - p(theta|x) 1{theta-h in S}] / p(theta|x);
/// zero when theta is outside S. Throws DomainError when p(x, theta) = 0 at
/// a point of the declared support.
double phi_bz(const JointModel& m, const Vec& h, const Vec& x, const Vec& theta);

/// Model whose phi is the single Bobrovsky-Zakai function with offset h.
JointModel phi_bz_family(const JointModel& m, const Vec& h);

struct EqualityReport {
  bool equal = false;
  double max_deviation = 0.0;
  std::vector<Mat> gains;  // R_{|x} Q_{|x}^-1 per probe
};

/// Checks whether R_{|x} Q_{|x}^-1 depends on x (max-norm pairwise
/// deviation over the probes).
EqualityReport equality_check(const JointModel& m, const std::vector<Vec>& x_probes, double tol);

struct MembershipReport {
  bool pass = false;
  double max_abs_mean = 0.0;
  std::vector<Vec> means;  // E[phi | x] per probe
};

/// Checks E[phi | x] = 0 at every probe.
MembershipReport wwf_membership(const JointModel& m, const std::vector<Vec>& x_probes, double tol);

}  // namespace tbound::engine
