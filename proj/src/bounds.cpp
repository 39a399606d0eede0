#include "tbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <thread>

#include "tbound/errors.hpp"

namespace tbound::engine {

namespace {

constexpr double kMaxCondition = 1e12;

Mat symmetrize(const Mat& B) { return 0.5 * (B + B.transpose()); }

void require_scalar_theta(const JointModel& m) {
  if (m.dim_K != 1 || !m.theta_support) {
    throw DomainError("theta quadrature needs dim_K == 1 and a declared support");
  }
}

quad::Peak theta_peak(const JointModel& m, const Vec& x, const quad::Interval& support) {
  auto lj = [&](double th) { return m.log_joint(x, scalar_vec(th)); };
  if (m.locate) {
    if (auto hint = m.locate(x)) {
      hint->log_peak = lj(hint->center);
      if (std::isfinite(hint->log_peak)) return *hint;
    }
  }
  return quad::locate_peak(lj, support);
}

struct DrawResult {
  bool singular = false;
  Mat tighter;
  Mat R;
  Mat Q;
  double condition = 0.0;
};

}  // namespace

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::classical: return "classical";
    case BoundKind::tighter: return "tighter";
    case BoundKind::bcrb: return "bcrb";
    case BoundKind::tbcrb: return "tbcrb";
  }
  return "unknown";
}

Mat inverse_guarded(const Mat& Q, double* condition) {
  if (Q.rows() != Q.cols() || Q.rows() == 0) throw DomainError("Q must be square and non-empty");
  if (!Q.allFinite()) throw SingularQ("Q has non-finite entries", quad::kInf);
  const Mat S = symmetrize(Q);
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  const auto& ev = es.eigenvalues();
  const double hi = ev.cwiseAbs().maxCoeff();
  const double lo = ev.minCoeff();
  const double cond = lo > 0.0 ? hi / lo : quad::kInf;
  if (condition) *condition = cond;
  if (!(cond < kMaxCondition)) {
    std::ostringstream os;
    os << "Q is singular or ill-conditioned (condition " << cond << ")";
    throw SingularQ(os.str(), cond);
  }
  const Mat& V = es.eigenvectors();
  return symmetrize(V * ev.cwiseInverse().asDiagonal() * V.transpose());
}

Mat blb_classical(const Mat& R, const Mat& Q) {
  if (R.cols() != Q.rows()) throw DomainError("R and Q dimensions disagree");
  const Mat Qi = inverse_guarded(Q);
  return symmetrize(R * Qi * R.transpose());
}

Vec posterior_average(const JointModel& m, const Vec& x, std::size_t n,
                      const std::function<void(const Vec& theta, std::span<double> out)>& f,
                      double tol, double* log_px) {
  require_scalar_theta(m);
  const auto support = m.theta_support(x);
  const auto pk = theta_peak(m, x, support);
  const auto pts = quad::peak_breakpoints(support, pk.center, pk.scale);
  quad::Options opt;
  opt.rel_tol = tol;
  opt.rel_to_l1 = true;
  opt.smooth_endpoints = true;
  Vec th(1);
  const auto r = quad::integrate_vector(
      [&](double t, std::span<double> out) {
        th[0] = t;
        const double w = quad::exp_or_zero(m.log_joint(x, th) - pk.log_peak);
        if (w == 0.0) {
          std::fill(out.begin(), out.end(), 0.0);
          return;
        }
        out[0] = w;
        f(th, out.subspan(1));
        for (std::size_t i = 1; i < out.size(); ++i) out[i] *= w;
      },
      n + 1, support, pts, opt);
  if (!(r.value[0] > 0.0)) throw DomainError("p(x) = 0 at the requested x");
  if (log_px) *log_px = std::log(r.value[0]) + pk.log_peak;
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = r.value[i + 1] / r.value[0];
  return out;
}

ConditionalMoments conditional_moments(const JointModel& m, const Vec& x, double tol) {
  require_scalar_theta(m);
  const std::size_t L = m.dim_L;
  const std::size_t M = m.dim_M;
  const auto support = m.theta_support(x);
  const auto pk = theta_peak(m, x, support);
  const auto pts = quad::peak_breakpoints(support, pk.center, pk.scale);
  quad::Options opt;
  opt.rel_tol = tol;
  opt.rel_to_l1 = true;
  opt.smooth_endpoints = true;
  Vec th(1);
  const std::size_t n = 1 + L * M + M * M;
  const auto r = quad::integrate_vector(
      [&](double t, std::span<double> out) {
        th[0] = t;
        const double w = quad::exp_or_zero(m.log_joint(x, th) - pk.log_peak);
        if (w == 0.0) {
          std::fill(out.begin(), out.end(), 0.0);
          return;
        }
        const Vec g = m.g(th);
        const Vec ph = m.phi(x, th);
        out[0] = w;
        std::size_t k = 1;
        for (std::size_t l = 0; l < L; ++l)
          for (std::size_t j = 0; j < M; ++j) out[k++] = w * g[l] * ph[j];
        for (std::size_t i = 0; i < M; ++i)
          for (std::size_t j = 0; j < M; ++j) out[k++] = w * ph[i] * ph[j];
      },
      n, support, pts, opt);
  const double mass = r.value[0];
  if (!(mass > 0.0)) throw DomainError("p(x) = 0 at the requested x");
  ConditionalMoments cm;
  cm.R.resize(L, M);
  cm.Q.resize(M, M);
  std::size_t k = 1;
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t j = 0; j < M; ++j) cm.R(l, j) = r.value[k++] / mass;
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < M; ++j) cm.Q(i, j) = r.value[k++] / mass;
  cm.Q = symmetrize(cm.Q);
  cm.log_px = std::log(mass) + pk.log_peak;
  double rel = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (r.value[i] != 0.0) rel = std::max(rel, r.err_est[i] / std::abs(r.value[i]));
  }
  cm.rel_err = rel;
  cm.evals = r.evals;
  return cm;
}

BoundReport tblb(const JointModel& m, const XExpectation& expectation, double tol) {
  const std::size_t L = m.dim_L;
  const std::size_t M = m.dim_M;
  BoundReport rep;
  rep.kind = BoundKind::tighter;

  if (const auto* grid = std::get_if<GridX>(&expectation)) {
    const double inner_tol = std::max(1e-13, 1e-3 * tol);
    const std::size_t n = 1 + L * L + L * M + M * M;
    double max_cond = 0.0;
    quad::Options opt;
    opt.rel_tol = tol;
    opt.rel_to_l1 = true;
    const auto r = quad::integrate_vector(
        [&](double xv, std::span<double> out) {
          const Vec x = scalar_vec(xv);
          const auto cm = conditional_moments(m, x, inner_tol);
          const double px = std::exp(cm.log_px);
          if (px == 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
          }
          double cond = 0.0;
          const Mat Qi = inverse_guarded(cm.Q, &cond);
          max_cond = std::max(max_cond, cond);
          const Mat T = cm.R * Qi * cm.R.transpose();
          out[0] = px;
          std::size_t k = 1;
          for (std::size_t i = 0; i < L; ++i)
            for (std::size_t j = 0; j < L; ++j) out[k++] = px * T(i, j);
          for (std::size_t i = 0; i < L; ++i)
            for (std::size_t j = 0; j < M; ++j) out[k++] = px * cm.R(i, j);
          for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j < M; ++j) out[k++] = px * cm.Q(i, j);
        },
        n, grid->range, grid->breakpoints, opt);
    rep.x_mass = r.value[0];
    rep.bound.resize(L, L);
    rep.R.resize(L, M);
    rep.Q.resize(M, M);
    std::size_t k = 1;
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j) rep.bound(i, j) = r.value[k++];
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < M; ++j) rep.R(i, j) = r.value[k++];
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < M; ++j) rep.Q(i, j) = r.value[k++];
    double rel = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (r.value[i] != 0.0) rel = std::max(rel, r.err_est[i] / std::abs(r.value[i]));
    }
    rep.quad_err = rel;
    rep.max_condition = max_cond;
  } else {
    const auto& mc = std::get<MonteCarloX>(expectation);
    if (mc.draws == 0) throw DomainError("Monte-Carlo expectation needs draws > 0");
    const double inner_tol = std::max(1e-12, 1e-2 * tol);
    std::vector<DrawResult> results(mc.draws);
    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        Rng rng = Rng::substream(mc.seed, 0, i);
        const Vec x = mc.sampler(rng);
        DrawResult d;
        const auto cm = conditional_moments(m, x, inner_tol);
        try {
          const Mat Qi = inverse_guarded(cm.Q, &d.condition);
          d.tighter = cm.R * Qi * cm.R.transpose();
        } catch (const SingularQ&) {
          d.singular = true;
        }
        d.R = cm.R;
        d.Q = cm.Q;
        results[i] = std::move(d);
      }
    };
    const unsigned workers = std::max(1u, mc.workers);
    if (workers == 1) {
      work(0, mc.draws);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(workers);
      const std::size_t chunk = (mc.draws + workers - 1) / workers;
      for (unsigned w = 0; w < workers; ++w) {
        const std::size_t b = std::min(mc.draws, w * chunk);
        const std::size_t e = std::min(mc.draws, b + chunk);
        pool.emplace_back([&, w, b, e] {
          try {
            work(b, e);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    // Fixed-order reduction.
    rep.bound = Mat::Zero(L, L);
    rep.R = Mat::Zero(L, M);
    rep.Q = Mat::Zero(M, M);
    std::size_t used = 0;
    std::size_t singular = 0;
    for (const auto& d : results) {
      if (d.singular) {
        ++singular;
        continue;
      }
      ++used;
      rep.bound += d.tighter;
      rep.R += d.R;
      rep.Q += d.Q;
      rep.max_condition = std::max(rep.max_condition, d.condition);
    }
    if (static_cast<double>(singular) > 1e-3 * static_cast<double>(mc.draws)) {
      std::ostringstream os;
      os << singular << " of " << mc.draws << " draws had a singular Q";
      throw SingularQ(os.str(), quad::kInf);
    }
    rep.bound /= static_cast<double>(used);
    rep.R /= static_cast<double>(used);
    rep.Q /= static_cast<double>(used);
    rep.draws_used = used;
    rep.draws_singular = singular;
  }
  rep.bound = symmetrize(rep.bound);
  rep.classical = blb_classical(rep.R, rep.Q);
  return rep;
}

BoundReport tblb_from_moments(const std::vector<double>& weights, const std::vector<Mat>& R_list,
                              const std::vector<Mat>& Q_list) {
  if (weights.empty() || weights.size() != R_list.size() || weights.size() != Q_list.size()) {
    throw DomainError("mixture needs matching, non-empty weight and moment lists");
  }
  BoundReport rep;
  rep.kind = BoundKind::tighter;
  const auto L = R_list[0].rows();
  const auto M = R_list[0].cols();
  rep.bound = Mat::Zero(L, L);
  rep.R = Mat::Zero(L, M);
  rep.Q = Mat::Zero(M, M);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double cond = 0.0;
    const Mat Qi = inverse_guarded(Q_list[i], &cond);
    rep.max_condition = std::max(rep.max_condition, cond);
    rep.bound += weights[i] * R_list[i] * Qi * R_list[i].transpose();
    rep.R += weights[i] * R_list[i];
    rep.Q += weights[i] * Q_list[i];
  }
  rep.bound = symmetrize(rep.bound);
  rep.classical = blb_classical(rep.R, rep.Q);
  return rep;
}

JointModel phi_cr(const JointModel& m) {
  JointModel out = m;
  out.dim_M = m.dim_K;
  out.phi = [m](const Vec& x, const Vec& theta) -> Vec {
    const double lj = m.log_joint(x, theta);
    if (!std::isfinite(lj)) return Vec::Zero(m.dim_K);
    return m.score_at(x, theta);
  };
  return out;
}

BoundReport tbcrb(const JointModel& m, const XExpectation& expectation, double tol) {
  auto rep = tblb(phi_cr(m), expectation, tol);
  rep.kind = BoundKind::tbcrb;
  return rep;
}

double phi_bz(const JointModel& m, const Vec& h, const Vec& x, const Vec& theta) {
  if (h.size() != theta.size()) throw DomainError("h and theta dimensions disagree");
  if (h.isZero(0.0)) throw DomainError("Bobrovsky-Zakai offset h must be non-zero");
  auto declared = [&](const Vec& th) {
    if (m.dim_K == 1 && m.theta_support) return m.theta_support(x).contains(th[0]);
    return m.in_support(x, th);
  };
  if (!declared(theta)) return 0.0;
  const double lj0 = m.log_joint(x, theta);
  if (!std::isfinite(lj0)) throw DomainError("p(x, theta) = 0 inside the declared support");
  const Vec up = theta + h;
  const Vec down = theta - h;
  double first = 0.0;
  if (declared(up)) first = quad::exp_or_zero(m.log_joint(x, up) - lj0);
  const double second = declared(down) ? 1.0 : 0.0;
  return first - second;
}

JointModel phi_bz_family(const JointModel& m, const Vec& h) {
  JointModel out = m;
  out.dim_M = 1;
  out.phi = [m, h](const Vec& x, const Vec& theta) { return scalar_vec(phi_bz(m, h, x, theta)); };
  return out;
}

EqualityReport equality_check(const JointModel& m, const std::vector<Vec>& x_probes, double tol) {
  if (x_probes.size() < 2) throw DomainError("equality_check needs at least two probes");
  EqualityReport rep;
  for (const auto& x : x_probes) {
    const auto cm = conditional_moments(m, x, 1e-11);
    rep.gains.push_back(cm.R * inverse_guarded(cm.Q));
  }
  for (std::size_t i = 0; i < rep.gains.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.gains.size(); ++j) {
      rep.max_deviation =
          std::max(rep.max_deviation, (rep.gains[i] - rep.gains[j]).cwiseAbs().maxCoeff());
    }
  }
  rep.equal = rep.max_deviation < tol;
  return rep;
}

MembershipReport wwf_membership(const JointModel& m, const std::vector<Vec>& x_probes, double tol) {
  MembershipReport rep;
  for (const auto& x : x_probes) {
    const Vec mean = posterior_average(
        m, x, m.dim_M,
        [&](const Vec& th, std::span<double> out) {
          const Vec ph = m.phi(x, th);
          for (std::size_t i = 0; i < m.dim_M; ++i) out[i] = ph[i];
        },
        1e-11);
    rep.max_abs_mean = std::max(rep.max_abs_mean, mean.cwiseAbs().maxCoeff());
    rep.means.push_back(mean);
  }
  rep.pass = rep.max_abs_mean < tol;
  return rep;
}

}  // namespace tbound::engine
