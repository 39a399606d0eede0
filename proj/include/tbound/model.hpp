#pragma once

// The estimation-problem interface consumed by the bounds engine.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tbound/quadrature.hpp"
#include "tbound/rng.hpp"

namespace tbound {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Joint density p(x, theta) of an estimation problem, with the quantity to
/// estimate g(theta) and a generating family phi(x, theta).
///
/// x is a summary (sufficient statistic, or raw data); theta has dimension
/// dim_K. The engine integrates over theta and currently requires dim_K == 1.
struct JointModel {
  std::size_t dim_K = 1;
  std::size_t dim_L = 1;
  std::size_t dim_M = 1;

  /// log p(x, theta); -inf outside the support.
  std::function<double(const Vec& x, const Vec& theta)> log_joint;
  /// S_{Theta|x} for scalar theta.
  std::function<quad::Interval(const Vec& x)> theta_support;
  std::function<Vec(const Vec& theta)> g;
  std::function<Vec(const Vec& x, const Vec& theta)> phi;

  /// Optional analytic d/dtheta log p(x, theta); central differences otherwise.
  std::function<Vec(const Vec& x, const Vec& theta)> score;
  /// Optional posterior mode and width at x, used to place quadrature panels.
  std::function<std::optional<quad::Peak>(const Vec& x)> locate;

  bool in_support(const Vec& x, const Vec& theta) const;
  /// Analytic score if present, else 5-point central differences.
  Vec score_at(const Vec& x, const Vec& theta) const;
};

/// Draws an x summary distributed as p(x).
using XSampler = std::function<Vec(Rng&)>;

/// Generic (R, Q) pair: R = E[g phi^T] (L x M), Q = E[phi phi^T] (M x M).
struct BoundMatrices {
  Mat R;
  Mat Q;
};

struct ModelCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ModelReport {
  std::vector<ModelCheck> checks;
  bool all_passed() const;
  const ModelCheck* find(const std::string& name) const;
};

struct ProbePoint {
  Vec x;
  Vec theta;
};

/// Checks finiteness of log_joint, g and phi at the probes, normalizability
/// over theta at each distinct probe x, and linear independence of the phi
/// components (Gram matrix rank over the probes).
ModelReport validate_model(const JointModel& m, const std::vector<ProbePoint>& probes);

inline Vec scalar_vec(double v) {
  Vec out(1);
  out[0] = v;
  return out;
}

}  // namespace tbound
