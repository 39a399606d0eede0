#include "tbound/selftest.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "tbound/bounds.hpp"
#include "tbound/errors.hpp"
#include "tbound/expfam.hpp"
#include "tbound/gaussian_conjugate.hpp"
#include "tbound/mc_harness.hpp"
#include "tbound/quadrature.hpp"
#include "tbound/special_functions.hpp"
#include "tbound/variance_beta.hpp"

namespace tbound::selftest {

namespace vb = variance_beta;
namespace gc = gaussian_conjugate;

namespace {

double rel_diff(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

std::string describe(double got, double want, double rel) {
  std::ostringstream os;
  os.precision(17);
  os << "got " << got << ", want " << want << " (rel " << rel << ")";
  return os.str();
}

// A check returns an empty string on success and a reason otherwise.
struct Check {
  const char* suite;
  const char* name;
  std::function<std::string(double fault)> body;
  // Structural checks have no reference constant to perturb.
  bool has_reference = true;
};

std::string close(double got, double want, double tol) {
  const double r = rel_diff(got, want);
  return r <= tol ? std::string() : describe(got, want, r);
}

std::vector<Check> checks() {
  std::vector<Check> c;

  c.push_back({"quadrature", "gaussian_line", [](double f) {
                 const auto r = quad::integrate([](double x) { return std::exp(-x * x); },
                                                quad::Interval{-quad::kInf, quad::kInf}, {}, {});
                 return close(r.value, f * std::sqrt(std::numbers::pi), 1e-12);
               }});
  c.push_back({"quadrature", "beta_integral", [](double f) {
                 const auto r = quad::integrate(
                     [](double x) { return x * x * (1 - x) * (1 - x); }, quad::Domain::finite(0.0, 1.0));
                 return close(r.value, f / 30.0, 1e-12);
               }});
  c.push_back({"quadrature", "log_space_gamma", [](double f) {
                 const auto r = quad::integrate_log(
                     [](double x) { return 199.0 * std::log(x) - x; },
                     quad::Interval{0.0, quad::kInf}, std::nullopt, {});
                 return close(r.log_value, std::lgamma(200.0) + std::log(f), 1e-12);
               }});

  c.push_back({"special-fn", "whittaker", [](double f) {
                 // log W at frozen multiprecision reference points
                 struct Ref {
                   double k, m, z, lw;
                 };
                 const Ref refs[] = {{1.0, 0.5, 2.0, -0.30685281944005469058},
                                     {-0.5, 0.5, 1.0, -0.88430958712097223635},
                                     {-2.0, -0.5, 2.0, -3.9061560936215263507},
                                     {0.25, 1.25, 0.3, 1.3407662681465710298},
                                     {-1.5, 0.75, 7.0, -6.7973909585342702854}};
                 for (const auto& r : refs) {
                   const double w = std::exp(sf::whittaker_w_log(r.k, r.m, r.z));
                   auto msg = close(w, f * std::exp(r.lw), 1e-10);
                   if (!msg.empty()) return msg;
                 }
                 return std::string();
               }});
  c.push_back({"special-fn", "integral_identity", [](double f) {
                 // int_0^1 th^(nu-1) (1-th)^(mu-1) e^(-l/th) = l^((nu-1)/2) e^(-l/2) G(mu) W
                 const double a = 3.0, N = 8.0, t = 2.0;
                 const double nu = a - N / 2, mu = a;
                 const auto r = quad::integrate(
                     [&](double th) {
                       return std::pow(th, nu - 1) * std::pow(1 - th, mu - 1) * std::exp(-t / th);
                     },
                     quad::Domain::finite(0.0, 1.0), 1e-13);
                 const double rhs =
                     std::exp(0.5 * (nu - 1) * std::log(t) - 0.5 * t + std::lgamma(mu) +
                              sf::whittaker_w_log(0.5 * (1 - 2 * mu - nu), 0.5 * nu, t));
                 return close(r.value, f * rhs, 1e-10);
               }});

  c.push_back({"model-core", "case_study_model", [](double) {
                 const vb::CaseParams p(3.0, 8);
                 std::vector<ProbePoint> probes;
                 for (double t : {0.5, 2.0, 8.0}) {
                   for (double th : {0.2, 0.5, 0.8}) {
                     probes.push_back({scalar_vec(t), scalar_vec(th)});
                   }
                 }
                 const auto rep = validate_model(vb::joint_model(p), probes);
                 if (rep.all_passed()) return std::string();
                 for (const auto& ch : rep.checks) {
                   if (!ch.passed) return ch.name + ": " + ch.detail;
                 }
                 return std::string("model validation failed");
               },
               false});

  c.push_back({"bounds-engine", "gaussian_bounds", [](double f) {
                 const gc::Params p;
                 const auto rep = engine::tbcrb(gc::joint_model(p), gc::xbar_grid(p), 1e-10);
                 auto msg = close(rep.bound(0, 0), f * 0.2, 1e-8);
                 if (msg.empty()) msg = close(rep.classical(0, 0), f * 0.2, 1e-8);
                 return msg;
               }});
  c.push_back({"bounds-engine", "score_membership", [](double) {
                 const vb::CaseParams p(3.0, 8);
                 const std::vector<Vec> xs{scalar_vec(0.5), scalar_vec(2.0), scalar_vec(9.0)};
                 const auto rep = engine::wwf_membership(vb::joint_model(p), xs, 1e-8);
                 return rep.pass ? std::string()
                                 : "E[phi|x] = " + std::to_string(rep.max_abs_mean);
               },
               false});

  c.push_back({"case-study", "bfim", [](double f) {
                 const vb::CaseParams p(3.0, 8);
                 return close(f * vb::bfim(p), vb::bfim_quadrature(p), 1e-6);
               }});
  c.push_back({"case-study", "posterior_fisher", [](double f) {
                 const vb::CaseParams p(3.0, 8);
                 return close(vb::posterior_fisher(p, 2.0), f * 54.859116584473549047, 1e-10);
               }});
  c.push_back({"case-study", "tbcrb", [](double f) {
                 const vb::CaseParams p(3.0, 8);
                 auto msg = close(vb::tbcrb(p, vb::TbcrbMethod::closed_form),
                                  f * 0.0150728811527656, 1e-9);
                 if (msg.empty()) {
                   msg = close(vb::tbcrb(p, vb::TbcrbMethod::engine), f * 0.0150728811527656, 1e-7);
                 }
                 return msg;
               }});
  c.push_back({"case-study", "mmse_value", [](double f) {
                 const vb::CaseParams p(3.0, 8);
                 return close(vb::mmse_value(p, vb::MmseMethod::quadrature),
                              f * 0.0216733558251566, 1e-8);
               }});
  c.push_back({"case-study", "map", [](double f) {
                 return close(vb::map_estimate(vb::CaseParams(3.0, 16), 0.5), f * 0.5, 1e-14);
               }});
  c.push_back({"case-study", "mmse_estimate", [](double f) {
                 const vb::CaseParams p(3.0, 8);
                 return close(vb::mmse_estimate(p, 2.0), f * 0.53579652435306454362, 1e-10);
               }});

  c.push_back({"expfam-efficiency", "gaussian_efficient", [](double f) {
                 const gc::Params p;
                 const double xbar = 0.3;
                 const double v = gc::posterior_variance(p);
                 std::vector<double> grid;
                 for (int i = 0; i <= 40; ++i) grid.push_back(-2.0 + 0.1 * i);
                 const auto rep = expfam::scalar_efficiency_test(
                     [&](double th) { return (gc::posterior_mean(p, xbar) - th) / v; },
                     [](double th) { return th; }, grid);
                 if (!rep.is_efficient) return "deviation " + std::to_string(rep.deviation);
                 return close(rep.fitted_v, f * 0.2, 1e-10);
               }});
  c.push_back({"expfam-efficiency", "case_study_not_efficient", [](double) {
                 const vb::CaseParams p(3.0, 8);
                 const std::vector<Vec> xs{scalar_vec(0.5), scalar_vec(2.0), scalar_vec(9.0)};
                 const auto rep = engine::equality_check(vb::joint_model(p), xs, 1e-6);
                 return rep.equal ? std::string("gain reported constant in x") : std::string();
               },
               false});

  c.push_back({"mc-harness", "workers_invariant", [](double) {
                 mc::ExperimentConfig cfg;
                 cfg.N_list = {8, 64};
                 cfg.trials = 400;
                 cfg.seed = 7;
                 cfg.bound_columns = false;
                 const auto one = mc::to_csv(mc::run_experiment(cfg));
                 cfg.workers = 3;
                 const auto three = mc::to_csv(mc::run_experiment(cfg));
                 return one == three ? std::string() : std::string("CSV differs across workers");
               },
               false});
  c.push_back({"mc-harness", "ml_matches_ecrb", [](double f) {
                 mc::ExperimentConfig cfg;
                 cfg.N_list = {128};
                 cfg.trials = 2000000;
                 cfg.seed = 11;
                 cfg.estimators = {mc::Estimator::ml};
                 cfg.bound_columns = false;
                 const auto row = mc::run_experiment(cfg).front();
                 const double ecrb = f * vb::ecrb(vb::CaseParams(3.0, 128));
                 const double z = (row.ml.mse - ecrb) / row.ml.se_mse;
                 if (std::abs(z) <= 4.0) return std::string();
                 return "ML MSE " + std::to_string(row.ml.mse) + " is " + std::to_string(z) +
                        " standard errors from ECRB " + std::to_string(ecrb);
               }});
  return c;
}

}  // namespace

bool Report::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::vector<std::string> fault_names() {
  std::vector<std::string> out;
  for (const auto& c : checks()) {
    if (c.has_reference) out.push_back(c.name);
  }
  return out;
}

Report run(const Options& opt) {
  Report rep;
  for (const auto& c : checks()) {
    CheckResult r;
    r.suite = c.suite;
    r.name = c.name;
    const double fault = opt.inject_fault == c.name ? 1.01 : 1.0;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.detail = c.body(fault);
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("threw: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.checks.push_back(std::move(r));
  }
  return rep;
}

}  // namespace tbound::selftest
