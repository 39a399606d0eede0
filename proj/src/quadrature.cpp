#include "tbound/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

#include "tbound/errors.hpp"

namespace tbound::quad {

namespace {

// QUADPACK qk21 abscissae and weights.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478024, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTailEps = 1e-14;
constexpr int kRoundoffSplits = 4;
// Largest roundoff-limited error accepted, relative to the L1 mass.
constexpr double kRoundoffCap = 1e-9;

// Coordinate maps from u in [0, 1] to x, with Jacobian.
enum class Map { linear, smooth_lo, smooth_hi, tail_up, tail_down };

struct Segment {
  Map map;
  double a;  // tail_up: finite end a, length scale b
  double b;  // tail_down: finite end b, length scale a

  double x(double u) const {
    switch (map) {
      case Map::linear: return a + (b - a) * u;
      case Map::smooth_lo: return a + (b - a) * u * u;
      case Map::smooth_hi: {
        const double v = 1.0 - u;
        return b - (b - a) * v * v;
      }
      case Map::tail_up: return a + b * u / (1.0 - u);
      case Map::tail_down: return b - a * (1.0 - u) / u;
    }
    return 0.0;
  }
  double jac(double u) const {
    switch (map) {
      case Map::linear: return b - a;
      // The smoothing maps take the Jacobian from the rounded node x, so that
      // f(x) jac stays smooth when x sits a few ulps from a nonzero end.
      case Map::smooth_lo: return 2.0 * std::sqrt((b - a) * (x(u) - a));
      case Map::smooth_hi: return 2.0 * std::sqrt((b - a) * (b - x(u)));
      case Map::tail_up: return b / ((1.0 - u) * (1.0 - u));
      case Map::tail_down: return a / (u * u);
    }
    return 0.0;
  }
  double u_lo() const { return map == Map::tail_down ? kTailEps : 0.0; }
  double u_hi() const { return map == Map::tail_up ? 1.0 - kTailEps : 1.0; }
};

struct Panel {
  std::size_t seg;
  double u0;
  double u1;
  std::vector<double> value;
  std::vector<double> err;
  std::vector<double> l1;
  double priority;
  int roundoff = 0;  // consecutive splits that did not reduce the error
};

struct PanelOrder {
  bool operator()(const Panel* l, const Panel* r) const { return l->priority < r->priority; }
};

class Engine {
 public:
  Engine(const VectorIntegrand& f, std::size_t n, const Options& opt)
      : f_(f), n_(n), opt_(opt), fx_(n), fv1_(n * 10), fv2_(n * 10) {}

  VectorQuadResult run(const std::vector<Segment>& segs) {
    segs_ = segs;
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      panels_.push_back(make_panel(s, segs_[s].u_lo(), segs_[s].u_hi()));
    }
    VectorQuadResult out;
    out.value.assign(n_, 0.0);
    out.err_est.assign(n_, 0.0);
    refresh_norms();
    std::priority_queue<Panel*, std::vector<Panel*>, PanelOrder> heap;
    auto rebuild = [&] {
      heap = {};
      for (auto& p : panels_) {
        if (!p.value.empty()) {
          p.priority = priority(p);
          if (!frozen(p)) heap.push(&p);
        }
      }
    };
    rebuild();
    std::size_t next_refresh = 2 * panels_.size() + 8;

    while (true) {
      totals(out);
      if (converged(out)) break;
      if (heap.empty()) {
        std::ostringstream msg;
        const std::size_t i = worst_component(out);
        msg << "integration stalled at roundoff level: estimate " << out.value[i] << " +- "
            << out.err_est[i];
        if (n_ > 1) msg << " (component " << i << ")";
        throw NonConvergent(msg.str());
      }
      if (evals_ + 2 * 21 > opt_.max_evals) {
        std::ostringstream msg;
        const std::size_t i = worst_component(out);
        msg << "integration budget of " << opt_.max_evals << " evaluations exhausted: estimate "
            << out.value[i] << " +- " << out.err_est[i];
        if (n_ > 1) msg << " (component " << i << ")";
        throw NonConvergent(msg.str());
      }
      Panel* worst = heap.top();
      heap.pop();
      const double mid = 0.5 * (worst->u0 + worst->u1);
      const std::size_t seg = worst->seg;
      const double u0 = worst->u0;
      const double u1 = worst->u1;
      Panel left = make_panel(seg, u0, mid);
      Panel right = make_panel(seg, mid, u1);
      // Bisection that leaves the value and the error unchanged means the
      // error estimate is roundoff; stop refining that lineage after a few.
      {
        std::size_t i = dominant(*worst);
        const double v12 = left.value[i] + right.value[i];
        const double e12 = left.err[i] + right.err[i];
        // Truncation error can grow for a few bisections next to a
        // near-singularity, so only count splits whose error is already small.
        const bool stale = std::abs(v12 - worst->value[i]) <= 1e-5 * std::abs(v12) &&
                           e12 >= 0.99 * worst->err[i] && worst->err[i] <= 1e-7 * worst->l1[i];
        left.roundoff = right.roundoff = stale ? worst->roundoff + 1 : 0;
      }
      *worst = std::move(left);
      panels_.push_back(std::move(right));
      if (panels_.size() >= next_refresh) {
        refresh_norms();
        rebuild();
        next_refresh = 2 * panels_.size();
      } else {
        worst->priority = priority(*worst);
        if (!frozen(*worst)) heap.push(worst);
        Panel& r = panels_.back();
        r.priority = priority(r);
        if (!frozen(r)) heap.push(&r);
      }
    }
    out.evals = evals_;
    return out;
  }

 private:
  Panel make_panel(std::size_t s, double u0, double u1) {
    const Segment& seg = segs_[s];
    const double centr = 0.5 * (u0 + u1);
    const double hlgth = 0.5 * (u1 - u0);
    std::vector<double> resk(n_, 0.0), resg(n_, 0.0), resabs(n_, 0.0), resasc(n_, 0.0);
    eval(seg, centr, fx_);
    std::vector<double> fc(fx_.begin(), fx_.end());
    for (std::size_t i = 0; i < n_; ++i) {
      resk[i] = kWgk[10] * fc[i];
      resabs[i] = std::abs(resk[i]);
    }
    for (std::size_t j = 0; j < 10; ++j) {
      const double dx = hlgth * kXgk[j];
      eval(seg, centr - dx, std::span<double>(fv1_.data() + j * n_, n_));
      eval(seg, centr + dx, std::span<double>(fv2_.data() + j * n_, n_));
    }
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < 10; ++j) {
        const double f1 = fv1_[j * n_ + i];
        const double f2 = fv2_[j * n_ + i];
        resk[i] += kWgk[j] * (f1 + f2);
        resabs[i] += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg[i] += kWg[j / 2] * (f1 + f2);
      }
      const double reskh = resk[i] * 0.5;
      double asc = kWgk[10] * std::abs(fc[i] - reskh);
      for (std::size_t j = 0; j < 10; ++j) {
        asc += kWgk[j] * (std::abs(fv1_[j * n_ + i] - reskh) + std::abs(fv2_[j * n_ + i] - reskh));
      }
      resasc[i] = asc;
    }
    Panel p{s, u0, u1, std::vector<double>(n_), std::vector<double>(n_), std::vector<double>(n_),
            0.0};
    for (std::size_t i = 0; i < n_; ++i) {
      const double result = resk[i] * hlgth;
      const double absres = resabs[i] * std::abs(hlgth);
      const double ascres = resasc[i] * std::abs(hlgth);
      double err = std::abs((resk[i] - resg[i]) * hlgth);
      if (ascres != 0.0 && err != 0.0) {
        err = ascres * std::min(1.0, std::pow(200.0 * err / ascres, 1.5));
      }
      if (absres > std::numeric_limits<double>::min() / (50.0 * kEps)) {
        err = std::max(50.0 * kEps * absres, err);
      }
      p.value[i] = result;
      p.err[i] = err;
      p.l1[i] = absres;
    }
    return p;
  }

  void eval(const Segment& seg, double u, std::span<double> out) {
    const double x = seg.x(u);
    const double j = seg.jac(u);
    f_(x, out);
    ++evals_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!std::isfinite(out[i])) {
        throw NonFiniteIntegrand("integrand returned a non-finite value", x);
      }
      // Jacobian may overflow next to an excluded tail end where f is 0.
      out[i] = out[i] == 0.0 ? 0.0 : out[i] * j;
    }
  }

  bool frozen(const Panel& p) const {
    if (p.roundoff >= kRoundoffSplits) return true;
    const double w = p.u1 - p.u0;
    return w <= 8.0 * kEps * std::max(std::abs(p.u0), std::abs(p.u1));
  }

  std::size_t dominant(const Panel& p) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n_; ++i) {
      if (p.err[i] / norm_[i] > p.err[best] / norm_[best]) best = i;
    }
    return best;
  }

  double priority(const Panel& p) const {
    double pr = 0.0;
    for (std::size_t i = 0; i < n_; ++i) pr = std::max(pr, p.err[i] / norm_[i]);
    return pr;
  }

  void refresh_norms() {
    norm_.assign(n_, 0.0);
    for (const auto& p : panels_) {
      for (std::size_t i = 0; i < n_; ++i) norm_[i] += p.l1[i];
    }
    for (std::size_t i = 0; i < n_; ++i) {
      norm_[i] = std::max({norm_[i] * opt_.rel_tol, opt_.abs_tol,
                           std::numeric_limits<double>::min()});
    }
  }

  void totals(VectorQuadResult& out) {
    std::fill(out.value.begin(), out.value.end(), 0.0);
    std::fill(out.err_est.begin(), out.err_est.end(), 0.0);
    l1_.assign(n_, 0.0);
    for (const auto& p : panels_) {
      for (std::size_t i = 0; i < n_; ++i) {
        out.value[i] += p.value[i];
        out.err_est[i] += p.err[i];
        l1_[i] += p.l1[i];
      }
    }
  }

  double component_tol(const VectorQuadResult& out, std::size_t i) const {
    const double ref = opt_.rel_to_l1 ? l1_[i] : std::abs(out.value[i]);
    // Below ~100 eps of the L1 mass the estimate is roundoff, not truncation.
    return std::max({opt_.rel_tol * ref, opt_.abs_tol, 100.0 * kEps * l1_[i],
                     std::numeric_limits<double>::min()});
  }

  // Component furthest from its tolerance, for error messages.
  std::size_t worst_component(const VectorQuadResult& out) const {
    std::size_t best = 0;
    double ratio = -1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double r = out.err_est[i] / component_tol(out, i);
      if (r > ratio) {
        ratio = r;
        best = i;
      }
    }
    return best;
  }

  bool converged(const VectorQuadResult& out) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const double tol = component_tol(out, i);
      if (out.err_est[i] > tol) {
        // Error dominated by panels that can no longer be split is accepted
        // once it is at the roundoff floor of the total.
        double open = 0.0;
        for (const auto& p : panels_) {
          if (!frozen(p)) open += p.err[i];
        }
        if (open > tol || out.err_est[i] > kRoundoffCap * l1_[i] + tol) {
          return false;
        }
      }
    }
    return true;
  }

  const VectorIntegrand& f_;
  std::size_t n_;
  Options opt_;
  std::vector<Segment> segs_;
  std::deque<Panel> panels_;  // stable addresses for the heap
  std::vector<double> norm_;
  std::vector<double> l1_;
  std::vector<double> fx_;
  std::vector<double> fv1_;
  std::vector<double> fv2_;
  std::size_t evals_ = 0;
};

std::vector<Segment> build_segments(const Interval& range, std::span<const double> breakpoints,
                                    bool smooth) {
  if (!(range.lo < range.hi) || std::isnan(range.lo) || std::isnan(range.hi)) {
    throw DomainError("integration range must satisfy lo < hi");
  }
  std::vector<double> pts;
  for (double b : breakpoints) {
    if (range.contains(b) && std::isfinite(b)) pts.push_back(b);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  // An infinite end needs a finite anchor for its tail map.
  if (!std::isfinite(range.lo) && !std::isfinite(range.hi) && pts.empty()) pts.push_back(0.0);

  std::vector<double> nodes;
  nodes.push_back(range.lo);
  nodes.insert(nodes.end(), pts.begin(), pts.end());
  nodes.push_back(range.hi);

  std::vector<Segment> segs;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double a = nodes[k];
    const double b = nodes[k + 1];
    // Tails scale with the width of the neighbouring panel.
    if (!std::isfinite(a)) {
      const double len = k + 2 < nodes.size() && std::isfinite(nodes[k + 2]) ? nodes[k + 2] - b : 1.0;
      segs.push_back({Map::tail_down, std::max(len, 1.0), b});
    } else if (!std::isfinite(b)) {
      const double len = k >= 1 && std::isfinite(nodes[k - 1]) ? a - nodes[k - 1] : 1.0;
      segs.push_back({Map::tail_up, a, std::max(len, 1.0)});
    } else if (smooth && k == 0 && k + 2 == nodes.size()) {
      // Single finite panel: split so that both ends get the smoothing map.
      const double m = 0.5 * (a + b);
      segs.push_back({Map::smooth_lo, a, m});
      segs.push_back({Map::smooth_hi, m, b});
    } else if (smooth && k == 0) {
      segs.push_back({Map::smooth_lo, a, b});
    } else if (smooth && k + 2 == nodes.size()) {
      segs.push_back({Map::smooth_hi, a, b});
    } else {
      segs.push_back({Map::linear, a, b});
    }
  }
  return segs;
}

}  // namespace

Domain Domain::finite(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw DomainError("finite domain needs finite lo < hi");
  }
  return Domain{Kind::finite, lo, hi};
}

Domain Domain::semi_infinite(double lo) {
  if (!std::isfinite(lo)) throw DomainError("semi-infinite domain needs a finite lower end");
  return Domain{Kind::semi_infinite, lo, kInf};
}

QuadResult integrate(const Integrand& f, const Domain& domain, double rel_tol, double abs_tol) {
  Options opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = abs_tol;
  const Interval range{domain.lo, domain.kind == Domain::Kind::finite ? domain.hi : kInf};
  return integrate(f, range, {}, opt);
}

QuadResult integrate(const Integrand& f, const Interval& range,
                     std::span<const double> breakpoints, const Options& opt) {
  const VectorIntegrand vf = [&f](double x, std::span<double> out) { out[0] = f(x); };
  const auto r = integrate_vector(vf, 1, range, breakpoints, opt);
  return QuadResult{r.value[0], r.err_est[0], r.evals};
}

VectorQuadResult integrate_vector(const VectorIntegrand& f, std::size_t n, const Interval& range,
                                  std::span<const double> breakpoints, const Options& opt) {
  if (n == 0) throw DomainError("integrate_vector needs at least one component");
  if (!(opt.rel_tol >= 0.0) || !(opt.abs_tol >= 0.0) || (opt.rel_tol == 0 && opt.abs_tol == 0)) {
    throw DomainError("tolerances must be non-negative and not both zero");
  }
  Engine engine(f, n, opt);
  return engine.run(build_segments(range, breakpoints, opt.smooth_endpoints));
}

Peak locate_peak(const LogIntegrand& logf, const Interval& range) {
  // Scan in a coordinate s that spreads both ends of the range.
  constexpr int kGrid = 1024;
  const bool lo_fin = std::isfinite(range.lo);
  const bool hi_fin = std::isfinite(range.hi);
  auto to_x = [&](double s) {
    if (lo_fin && hi_fin) {
      const double w = 1.0 / (1.0 + std::exp(-s));
      return range.lo + (range.hi - range.lo) * w;
    }
    if (lo_fin) return range.lo + std::exp(s);
    if (hi_fin) return range.hi - std::exp(-s);
    return std::sinh(s);
  };
  const double s_lo = -36.0;
  const double s_hi = 36.0;
  std::vector<double> xs(kGrid), ls(kGrid);
  int best = -1;
  for (int i = 0; i < kGrid; ++i) {
    const double s = s_lo + (s_hi - s_lo) * (i + 0.5) / kGrid;
    xs[i] = to_x(s);
    ls[i] = range.contains(xs[i]) ? logf(xs[i]) : -kInf;
    if (std::isnan(ls[i])) ls[i] = -kInf;
    if (ls[i] == kInf) throw NonFiniteIntegrand("log-integrand is +inf", xs[i]);
    if (best < 0 || ls[i] > ls[best]) best = i;
  }
  if (!std::isfinite(ls[best])) {
    throw NonFiniteIntegrand("log-integrand is -inf on the whole scan grid", xs[kGrid / 2]);
  }
  // Golden-section refinement of the mode within neighbouring grid points.
  double a = xs[std::max(best - 1, 0)];
  double b = xs[std::min(best + 1, kGrid - 1)];
  double center = xs[best];
  double peak = ls[best];
  if (a < b) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    auto safe = [&](double x) {
      if (!range.contains(x)) return -kInf;
      const double v = logf(x);
      return std::isnan(v) ? -kInf : v;
    };
    double fc = safe(c);
    double fd = safe(d);
    for (int it = 0; it < 60 && (b - a) > 1e-13 * (std::abs(a) + std::abs(b)); ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = safe(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = safe(d);
      }
    }
    const double xm = 0.5 * (a + b);
    const double fm = safe(xm);
    if (fm > peak) {
      center = xm;
      peak = fm;
    }
  }
  // Width: where logf has dropped by 2 on either side.
  int lo_i = best;
  while (lo_i > 0 && ls[lo_i] > peak - 2.0) --lo_i;
  int hi_i = best;
  while (hi_i < kGrid - 1 && ls[hi_i] > peak - 2.0) ++hi_i;
  double scale = 0.25 * (xs[hi_i] - xs[lo_i]);
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = std::max(1e-300, std::abs(center) * 1e-8);
  return Peak{center, scale, peak};
}

std::vector<double> peak_breakpoints(const Interval& range, double center, double scale) {
  std::vector<double> pts;
  if (range.contains(center)) pts.push_back(center);
  double step = 0.5 * scale;
  for (int k = -1; k <= 10; ++k) {
    for (double p : {center - step, center + step}) {
      if (range.contains(p)) pts.push_back(p);
    }
    step *= 2.0;
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

LogQuadResult integrate_log(const LogIntegrand& logf, const Interval& range,
                            std::optional<Peak> hint, const Options& opt) {
  const Peak pk = hint ? *hint : locate_peak(logf, range);
  const auto pts = peak_breakpoints(range, pk.center, pk.scale);
  Options o = opt;
  o.abs_tol = 0.0;
  const auto r = integrate([&](double x) { return exp_or_zero(logf(x) - pk.log_peak); }, range,
                           pts, o);
  if (!(r.value > 0.0)) {
    return LogQuadResult{-kInf, 0.0, r.evals};
  }
  return LogQuadResult{std::log(r.value) + pk.log_peak, r.err_est / r.value, r.evals};
}

double log_t_weight(double a, int N, double t) {
  const double n2 = 0.5 * N;
  return std::lgamma(2.0 * a) - std::lgamma(a) - std::lgamma(n2) +
         0.25 * (2.0 * a + N - 2.0) * std::log(t) - 0.5 * t;
}

std::vector<double> t_breakpoints(int N) {
  const double h = 0.5 * N;
  const double rel = 1.0 / std::sqrt(std::max(1.0, h));
  std::vector<double> pts;
  for (double f : {1e-4, 1e-3, 1e-2, 0.03, 0.06, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8,
                   0.9}) {
    pts.push_back(f * h);
  }
  // Upper edge of the bulk at N/2 and the falloff above it.
  for (double k : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double p = h * (1.0 + k * rel);
    if (p > 0.95 * h || k == 0.0) pts.push_back(std::max(p, 0.95 * h));
  }
  pts.push_back(std::max(4.0 * h, 20.0));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

QuadResult integrate_weighted_t(const Integrand& f, double a, int N, double rel_tol) {
  if (!(a > 0.0) || N < 1) throw DomainError("weighted t-integral needs a > 0 and N >= 1");
  const auto pts = t_breakpoints(N);
  Options opt;
  opt.rel_tol = rel_tol;
  return integrate(
      [&](double t) {
        const double w = exp_or_zero(log_t_weight(a, N, t));
        if (w == 0.0) return 0.0;
        return f(t) * w;
      },
      Interval{0.0, kInf}, pts, opt);
}

LogQuadResult integrate_weighted_t_log(const LogIntegrand& log_f, double a, int N,
                                       double rel_tol) {
  if (!(a > 0.0) || N < 1) throw DomainError("weighted t-integral needs a > 0 and N >= 1");
  const auto pts = t_breakpoints(N);
  double peak = -kInf;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double lo = i == 0 ? 0.0 : pts[i - 1];
    for (double t : {pts[i], 0.5 * (lo + pts[i])}) {
      const double v = log_f(t) + log_t_weight(a, N, t);
      if (std::isfinite(v)) peak = std::max(peak, v);
    }
  }
  if (!std::isfinite(peak)) throw NonFiniteIntegrand("weighted log-integrand has no finite value", pts[0]);
  Options opt;
  opt.rel_tol = rel_tol;
  // Peak sampled on a coarse grid: allow headroom before exp overflows.
  const auto r = integrate(
      [&](double t) {
        const double v = log_f(t) + log_t_weight(a, N, t) - peak;
        return exp_or_zero(v);
      },
      Interval{0.0, kInf}, pts, opt);
  if (!(r.value > 0.0)) return LogQuadResult{-kInf, 0.0, r.evals};
  return LogQuadResult{std::log(r.value) + peak, r.err_est / r.value, r.evals};
}

}  // namespace tbound::quad
