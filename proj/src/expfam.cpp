#include "tbound/expfam.hpp"

#include <algorithm>
#include <cmath>

#include "tbound/errors.hpp"

namespace tbound::expfam {

ConjugateHyper conjugate_update(const ConjugateHyper& hyper, const Vec& t_of_x) {
  if (hyper.mu.size() != t_of_x.size()) throw DomainError("mu and t(x) lengths differ");
  return ConjugateHyper{hyper.lambda + 1.0, hyper.mu + t_of_x};
}

EfficiencyReport scalar_efficiency_test(const std::function<double(double)>& score,
                                        const std::function<double(double)>& g,
                                        const std::vector<double>& theta_grid, double tol) {
  const auto n = static_cast<Eigen::Index>(theta_grid.size());
  if (n < 10) throw DomainError("efficiency test needs at least 10 grid points");
  // score = u1 - u2 g with u1 = ghat / v, u2 = 1 / v
  Mat X(n, 2);
  Vec y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double th = theta_grid[i];
    X(i, 0) = 1.0;
    X(i, 1) = -g(th);
    y[i] = score(th);
    if (!std::isfinite(y[i]) || !std::isfinite(X(i, 1))) {
      throw DomainError("score or g not finite on the grid");
    }
  }
  const double gmean = X.col(1).mean();
  const double gspread = (X.col(1).array() - gmean).abs().maxCoeff();
  if (!(gspread > 1e-12 * std::max(1.0, std::abs(gmean)))) {
    throw DegenerateFit("g is constant on the grid");
  }
  const Vec u = X.colPivHouseholderQr().solve(y);
  const Vec resid = y - X * u;
  // Fraction of the score's sum of squares the affine fit leaves unexplained.
  const double ss_score = y.squaredNorm();
  EfficiencyReport rep;
  rep.deviation = ss_score > 0.0 ? resid.squaredNorm() / ss_score : 0.0;
  rep.fitted_v = 1.0 / u[1];
  rep.fitted_ghat = u[0] / u[1];
  rep.is_efficient = rep.deviation < tol && rep.fitted_v > 0.0;
  return rep;
}

NaturalPair natural_efficient_pair(const ExpFamSpec& spec, const ConjugateHyper& hyper,
                                   const Vec& c) {
  if (static_cast<std::size_t>(c.size()) != spec.dim_J ||
      static_cast<std::size_t>(hyper.mu.size()) != spec.dim_J) {
    throw DomainError("c and mu must have length J");
  }
  const auto& pr = spec.probe;
  const Vec e0 = spec.eta(pr[0]);
  for (int i = 1; i < 3; ++i) {
    const Vec d = spec.eta(pr[i]) - e0 - c * (pr[i] - pr[0]);
    const double scale = std::max(1.0, spec.eta(pr[i]).cwiseAbs().maxCoeff());
    if (!(d.cwiseAbs().maxCoeff() <= 1e-9 * scale)) {
      throw NotNaturalParameter("eta(theta) is not affine with direction c");
    }
  }
  const double lam1 = hyper.lambda + 1.0;
  const double offset = c.dot(hyper.mu);
  const auto A = spec.A;
  const double h = 1e-4 * spec.theta_scale;
  NaturalPair pair;
  pair.g = [A, lam1, offset, h](double th) {
    const double dA = (-A(th + 2 * h) + 8 * A(th + h) - 8 * A(th - h) + A(th - 2 * h)) / (12 * h);
    return lam1 * dA - offset;
  };
  const auto t_stat = spec.t_stat;
  pair.ghat = [t_stat, c](const Vec& x) { return c.dot(t_stat(x)); };
  return pair;
}

GaussianFit gaussian_posterior_fit(const std::function<double(double)>& posterior_logpdf,
                                   const std::vector<double>& theta_grid) {
  const auto n = static_cast<Eigen::Index>(theta_grid.size());
  if (n < 3) throw DomainError("quadratic fit needs at least 3 grid points");
  // Centre and scale the abscissa for conditioning.
  double c = 0.0;
  for (double th : theta_grid) c += th;
  c /= n;
  double s = 0.0;
  for (double th : theta_grid) s = std::max(s, std::abs(th - c));
  if (!(s > 0.0)) throw DegenerateFit("grid has a single distinct point");
  Mat X(n, 3);
  Vec y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (theta_grid[i] - c) / s;
    X(i, 0) = 1.0;
    X(i, 1) = u;
    X(i, 2) = u * u;
    y[i] = posterior_logpdf(theta_grid[i]);
    if (!std::isfinite(y[i])) throw DomainError("log-density not finite on the grid");
  }
  const Vec b = X.colPivHouseholderQr().solve(y);
  if (!(b[2] < 0.0)) throw DegenerateFit("fitted log-density is not concave");
  GaussianFit fit;
  fit.variance = -s * s / (2.0 * b[2]);
  fit.mean = c - s * b[1] / (2.0 * b[2]);
  fit.sup_deviation = (y - X * b).cwiseAbs().maxCoeff();
  return fit;
}

std::vector<double> posterior_quantile_grid(const std::function<double(double)>& logpdf,
                                            const quad::Interval& support, std::size_t n) {
  if (n == 0) throw DomainError("quantile grid needs n > 0");
  const auto pk = quad::locate_peak(logpdf, support);
  auto walk = [&](double dir) {
    const double step = 0.25 * pk.scale;
    double x = pk.center;
    for (int i = 0; i < 8000; ++i) {
      const double next = x + dir * step;
      if (!support.contains(next)) {
        return dir < 0 ? (std::isfinite(support.lo) ? support.lo : next)
                       : (std::isfinite(support.hi) ? support.hi : next);
      }
      x = next;
      if (logpdf(x) < pk.log_peak - 40.0) return x;
    }
    return x;
  };
  const double lo = walk(-1.0);
  const double hi = walk(1.0);
  constexpr int kFine = 8001;
  std::vector<double> xs(kFine), cdf(kFine, 0.0);
  std::vector<double> dens(kFine);
  for (int i = 0; i < kFine; ++i) {
    xs[i] = lo + (hi - lo) * i / (kFine - 1);
    const double l = support.contains(xs[i]) ? logpdf(xs[i]) : -quad::kInf;
    dens[i] = std::isfinite(l) ? std::exp(l - pk.log_peak) : 0.0;
  }
  for (int i = 1; i < kFine; ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (xs[i] - xs[i - 1]);
  }
  const double total = cdf.back();
  if (!(total > 0.0)) throw DomainError("density has no mass on the quantile window");
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double target = total * (k + 0.5) / static_cast<double>(n);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    const auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cdf.begin()));
    const double f = (target - cdf[j - 1]) / std::max(cdf[j] - cdf[j - 1], 1e-300);
    out.push_back(xs[j - 1] + f * (xs[j] - xs[j - 1]));
  }
  return out;
}

}  // namespace tbound::expfam
