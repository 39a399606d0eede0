#include "tbound/model.hpp"

#include <cmath>
#include <sstream>

#include "tbound/errors.hpp"

namespace tbound {

bool JointModel::in_support(const Vec& x, const Vec& theta) const {
  const double lj = log_joint(x, theta);
  return std::isfinite(lj);
}

Vec JointModel::score_at(const Vec& x, const Vec& theta) const {
  if (score) return score(x, theta);
  Vec out(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    double h = 1e-4 * std::max(1.0, std::abs(theta[k]));
    if (dim_K == 1 && theta_support) {
      const auto s = theta_support(x);
      const double room = std::min(theta[0] - s.lo, s.hi - theta[0]);
      h = std::min(h, 0.25 * room);
    }
    auto at = [&](double d) {
      Vec th = theta;
      th[k] += d;
      return log_joint(x, th);
    };
    out[k] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  }
  return out;
}

bool ModelReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const ModelCheck* ModelReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ModelReport validate_model(const JointModel& m, const std::vector<ProbePoint>& probes) {
  ModelReport report;

  {
    ModelCheck c{"log_joint_finite", true, ""};
    for (const auto& p : probes) {
      const double v = m.log_joint(p.x, p.theta);
      if (!std::isfinite(v)) {
        c.passed = false;
        std::ostringstream os;
        os << "log_joint = " << v << " at theta=" << p.theta.transpose();
        c.detail = os.str();
        break;
      }
    }
    report.checks.push_back(c);
  }

  {
    ModelCheck c{"g_phi_finite", true, ""};
    for (const auto& p : probes) {
      const Vec g = m.g(p.theta);
      const Vec ph = m.phi(p.x, p.theta);
      if (static_cast<std::size_t>(g.size()) != m.dim_L ||
          static_cast<std::size_t>(ph.size()) != m.dim_M) {
        c.passed = false;
        c.detail = "g or phi has the wrong length";
        break;
      }
      if (!g.allFinite() || !ph.allFinite()) {
        c.passed = false;
        c.detail = "non-finite g or phi at a probe";
        break;
      }
    }
    report.checks.push_back(c);
  }

  {
    ModelCheck c{"normalizable", true, ""};
    if (m.dim_K != 1 || !m.theta_support) {
      c.passed = false;
      c.detail = "theta quadrature needs a scalar theta with a declared support";
    } else {
      std::vector<Vec> seen;
      for (const auto& p : probes) {
        bool dup = false;
        for (const auto& s : seen) dup = dup || (s.size() == p.x.size() && s == p.x);
        if (dup) continue;
        seen.push_back(p.x);
        try {
          const auto support = m.theta_support(p.x);
          const auto r = quad::integrate_log(
              [&](double th) { return m.log_joint(p.x, scalar_vec(th)); }, support, std::nullopt,
              quad::Options{1e-8, 0.0, std::size_t{1} << 20, false, false});
          if (!std::isfinite(r.log_value)) {
            c.passed = false;
            c.detail = "zero or infinite mass over theta";
          }
        } catch (const Error& e) {
          c.passed = false;
          c.detail = e.what();
        }
        if (!c.passed) break;
      }
    }
    report.checks.push_back(c);
  }

  {
    ModelCheck c{"phi_independent", true, ""};
    Mat gram = Mat::Zero(m.dim_M, m.dim_M);
    bool ok = true;
    for (const auto& p : probes) {
      const Vec ph = m.phi(p.x, p.theta);
      if (!ph.allFinite() || static_cast<std::size_t>(ph.size()) != m.dim_M) {
        ok = false;
        break;
      }
      gram += ph * ph.transpose();
    }
    if (!ok) {
      c.passed = false;
      c.detail = "phi not evaluable on probes";
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> es(gram);
      const auto& ev = es.eigenvalues();
      const double top = ev.cwiseAbs().maxCoeff();
      Eigen::Index rank = 0;
      for (Eigen::Index i = 0; i < ev.size(); ++i) rank += ev[i] > 1e-10 * top ? 1 : 0;
      if (top == 0.0) rank = 0;
      if (static_cast<std::size_t>(rank) < m.dim_M) {
        c.passed = false;
        std::ostringstream os;
        os << "Gram rank " << rank << " < M=" << m.dim_M;
        c.detail = os.str();
      }
    }
    report.checks.push_back(c);
  }
  return report;
}

}  // namespace tbound
