#include "tbound/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "tbound/cli/manifest.hpp"
#include "tbound/errors.hpp"
#include "tbound/expfam.hpp"
#include "tbound/gaussian_conjugate.hpp"
#include "tbound/mc_harness.hpp"
#include "tbound/selftest.hpp"
#include "tbound/variance_beta.hpp"

namespace tbound::cli {

namespace vb = variance_beta;
namespace gc = gaussian_conjugate;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const NonConvergent*>(&e) || dynamic_cast<const NonFiniteIntegrand*>(&e) ||
      dynamic_cast<const SingularQ*>(&e)) {
    return kNumerical;
  }
  return kDomain;
}

std::string fmt_csv(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_human(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cmd_bounds(const BoundsArgs& args, std::ostream& out) {
  const vb::CaseParams p(args.a, args.N);
  p.require_bound_regime();
  const bool all = args.which == "all";
  if (!all && args.which != "bcrb" && args.which != "tbcrb" && args.which != "ecrb") {
    throw DomainError("--which must be bcrb, tbcrb, ecrb or all");
  }
  struct Row {
    std::string name;
    double value;
    double rel_err;
  };
  std::vector<Row> rows;
  if (all || args.which == "bcrb") rows.push_back({"bcrb", vb::bcrb(p), 0.0});
  if (all || args.which == "tbcrb") {
    const auto rep = vb::tbcrb_report(p);
    rows.push_back({"tbcrb", rep.bound(0, 0), rep.quad_err});
  }
  if (all || args.which == "ecrb") rows.push_back({"ecrb", vb::ecrb(p), 0.0});

  if (args.csv) {
    out << "bound,value,sqrt_value,rel_err\n";
    for (const auto& r : rows) {
      out << r.name << "," << fmt_csv(r.value) << "," << fmt_csv(std::sqrt(r.value)) << ","
          << fmt_csv(r.rel_err) << "\n";
    }
  } else {
    for (const auto& r : rows) {
      out << r.name << " = " << fmt_human(r.value) << "  sqrt = " << fmt_human(std::sqrt(r.value))
          << "  rel_err = " << fmt_human(r.rel_err) << "\n";
    }
  }
  return kOk;
}

int cmd_estimate(const EstimateArgs& args, std::ostream& out) {
  const vb::CaseParams p(args.a, args.N);
  if (!(args.t >= 0.0) || !std::isfinite(args.t)) throw DomainError("t must be >= 0");
  const double gamma = 2.0 * args.t / args.N;
  double est = 0.0;
  if (args.estimator == "map") {
    est = vb::map_estimate(p, gamma);
  } else if (args.estimator == "ml") {
    est = vb::ml_estimate(gamma);
  } else if (args.estimator == "mmse") {
    est = vb::mmse_estimate(p, args.t);
  } else {
    throw DomainError("--estimator must be map, ml or mmse");
  }
  if (args.csv) {
    out << "estimator,a,N,t,estimate\n"
        << args.estimator << "," << fmt_csv(args.a) << "," << args.N << "," << fmt_csv(args.t)
        << "," << fmt_csv(est) << "\n";
  } else {
    out << fmt_human(est) << "\n";
  }
  return kOk;
}

int cmd_fig1(const Fig1Args& args, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = mc::reproduce_fig1(args.a, args.trials, args.seed, args.workers);
  const std::string csv = mc::to_csv(rows);
  write_file(args.out_path, csv);

  RunManifest m;
  m.command = "fig1";
  m.params = {{"a", fmt_csv(args.a)},
              {"trials", std::to_string(args.trials)},
              {"out", args.out_path}};
  m.seed = args.seed;
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.checksum = hex64(fnv1a64(csv));
  write_file(manifest_path(args.out_path), m.to_text());

  out << "wrote " << args.out_path << " (" << rows.size() << " rows, checksum " << m.checksum
      << ", " << fmt_human(m.wall_seconds) << " s)\n";
  return kOk;
}

namespace {

std::vector<double> theta_grid(const std::function<double(double)>& logpdf,
                               const quad::Interval& support) {
  return expfam::posterior_quantile_grid(logpdf, support, 64);
}

EfficiencySummary case_study_efficiency(const EfficiencyArgs& args) {
  const vb::CaseParams p(args.a, args.N);
  p.require_bound_regime();
  const std::vector<double> gammas =
      args.probes.empty() ? std::vector<double>{0.3, 0.5, 0.7} : args.probes;
  EfficiencySummary s;
  std::vector<Vec> xs;
  for (double g : gammas) {
    if (!(g > 0.0)) throw DomainError("case-study probes are gamma values > 0");
    const double t = 0.5 * p.N * g;
    s.probe_x.push_back(t);
    xs.push_back(scalar_vec(t));
    const auto grid = theta_grid([&](double th) { return vb::log_posterior(p, th, t); },
                                 quad::Interval{0.0, 1.0});
    const auto rep = expfam::scalar_efficiency_test(
        [&](double th) { return vb::score(p, th, t); }, [](double th) { return th; }, grid);
    s.deviations.push_back(rep.deviation);
  }
  // The gain check needs two distinct x; pad a single probe with its double.
  if (xs.size() == 1) xs.push_back(scalar_vec(2.0 * xs[0][0]));
  const auto eq = engine::equality_check(vb::joint_model(p), xs, 1e-6);
  s.gain_constant = eq.equal;
  s.gain_deviation = eq.max_deviation;
  s.tbcrb = vb::tbcrb(p);
  s.bcrb = vb::bcrb(p);
  s.mmse = vb::mmse_value(p);
  return s;
}

EfficiencySummary gaussian_efficiency(const EfficiencyArgs& args) {
  gc::Params p;
  p.prior_mean = args.prior_mean;
  p.prior_var = args.prior_var;
  p.noise_var = args.noise_var;
  p.N = args.N;
  const std::vector<double> ks =
      args.probes.empty() ? std::vector<double>{-1.0, 0.0, 1.0} : args.probes;
  const double sd = std::sqrt(gc::marginal_variance(p));
  const double v = gc::posterior_variance(p);
  EfficiencySummary s;
  std::vector<Vec> xs;
  for (double k : ks) {
    const double xbar = p.prior_mean + k * sd;
    s.probe_x.push_back(xbar);
    xs.push_back(scalar_vec(xbar));
    const double mean = gc::posterior_mean(p, xbar);
    const auto grid = theta_grid(
        [&](double th) { return -0.5 * (th - mean) * (th - mean) / v; },
        quad::Interval{-quad::kInf, quad::kInf});
    const auto rep = expfam::scalar_efficiency_test(
        [&](double th) { return (mean - th) / v; }, [](double th) { return th; }, grid);
    s.deviations.push_back(rep.deviation);
  }
  const auto model = gc::joint_model(p);
  if (xs.size() == 1) xs.push_back(scalar_vec(xs[0][0] + sd));
  const auto eq = engine::equality_check(model, xs, 1e-8);
  s.gain_constant = eq.equal;
  s.gain_deviation = eq.max_deviation;
  const auto rep = engine::tbcrb(model, gc::xbar_grid(p), 1e-10);
  s.tbcrb = rep.bound(0, 0);
  s.bcrb = rep.classical(0, 0);
  s.mmse = v;
  return s;
}

}  // namespace

EfficiencySummary check_efficiency(const EfficiencyArgs& args) {
  EfficiencySummary s;
  const bool gaussian = args.model == "gaussian-conjugate";
  if (gaussian) {
    s = gaussian_efficiency(args);
  } else if (args.model == "case-study") {
    s = case_study_efficiency(args);
  } else {
    throw DomainError("--model must be case-study or gaussian-conjugate");
  }
  bool per_probe = true;
  for (double d : s.deviations) per_probe = per_probe && d < 1e-6;
  const bool same = std::abs(s.tbcrb - s.bcrb) <= 1e-8 * s.bcrb;
  s.efficient = s.gain_constant && per_probe && same;
  if (s.efficient) {
    const bool mmse_too = std::abs(s.mmse - s.tbcrb) <= 1e-8 * s.tbcrb;
    s.verdict = mmse_too ? "efficient; TBCRB=BCRB=MMSE" : "efficient; TBCRB=BCRB";
  } else {
    s.verdict = s.tbcrb > s.bcrb ? "not efficient; TBCRB>BCRB" : "not efficient";
  }
  return s;
}

int cmd_check_efficiency(const EfficiencyArgs& args, std::ostream& out) {
  const auto s = check_efficiency(args);
  out << s.verdict << "\n";
  out << "gain R Q^-1 constant in x: " << (s.gain_constant ? "yes" : "no")
      << " (max deviation " << fmt_human(s.gain_deviation) << ")\n";
  for (std::size_t i = 0; i < s.probe_x.size(); ++i) {
    out << "probe x=" << fmt_human(s.probe_x[i]) << "  efficiency deviation "
        << fmt_human(s.deviations[i]) << "\n";
  }
  out << "tbcrb = " << fmt_human(s.tbcrb) << "  bcrb = " << fmt_human(s.bcrb)
      << "  gap = " << fmt_human(s.tbcrb - s.bcrb) << "  mmse = " << fmt_human(s.mmse) << "\n";
  return kOk;
}

int cmd_selftest(const SelftestArgs& args, std::ostream& out) {
  if (!args.inject_fault.empty()) {
    bool known = false;
    for (const auto& n : selftest::fault_names()) known = known || n == args.inject_fault;
    if (!known) throw DomainError("unknown check '" + args.inject_fault + "' for --inject-fault");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = selftest::run(selftest::Options{args.inject_fault});
  std::size_t failed = 0;
  for (const auto& c : rep.checks) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", c.seconds);
    out << (c.passed ? "PASS " : "FAIL ") << c.suite << "/" << c.name << " (" << secs << " s)";
    if (!c.passed) {
      out << ": " << c.detail;
      ++failed;
    }
    out << "\n";
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", total);
  out << (failed == 0 ? "selftest passed" : "selftest FAILED") << ": " << rep.checks.size() - failed
      << "/" << rep.checks.size() << " checks in " << secs << " s\n";
  return failed == 0 ? kOk : kSelftestFailed;
}

}  // namespace tbound::cli
