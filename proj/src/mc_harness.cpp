#include "tbound/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "tbound/errors.hpp"

namespace tbound::mc {

namespace vb = variance_beta;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

EstimatorStats summarize(const std::vector<TrialRecord>& trials, std::size_t column) {
  EstimatorStats s;
  s.present = true;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& tr : trials) {
    const double e = tr.sq_errors[column];
    if (std::isnan(e)) {
      ++s.failures;
      continue;
    }
    sum += e;
    ++n;
  }
  if (n < 2) throw NonConvergent("fewer than two successful trials");
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& tr : trials) {
    const double e = tr.sq_errors[column];
    if (!std::isnan(e)) ss += (e - mean) * (e - mean);
  }
  s.mse = mean;
  s.se_mse = std::sqrt(ss / (n - 1) / n);
  s.rmse = std::sqrt(mean);
  s.se = s.rmse > 0.0 ? s.se_mse / (2.0 * s.rmse) : 0.0;
  return s;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::map: return "map";
    case Estimator::ml: return "ml";
    case Estimator::mmse: return "mmse";
    case Estimator::mmse_quadrature_fallback: return "mmse_quadrature_fallback";
  }
  return "unknown";
}

Estimator parse_estimator(const std::string& name) {
  for (auto e : {Estimator::map, Estimator::ml, Estimator::mmse,
                 Estimator::mmse_quadrature_fallback}) {
    if (to_string(e) == name) return e;
  }
  throw DomainError("unknown estimator '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (!(a > 0.0)) throw DomainError("a must be > 0");
  if (trials < 100) throw DomainError("trials must be >= 100");
  if (N_list.empty()) throw DomainError("N_list must not be empty");
  if (!std::is_sorted(N_list.begin(), N_list.end())) throw DomainError("N_list must be ascending");
  if (N_list.front() < 1) throw DomainError("N must be >= 1");
  if (estimators.empty()) throw DomainError("no estimators configured");
}

double sample_prior(double a, Rng& rng) {
  if (!(a > 0.0)) throw DomainError("a must be > 0");
  double th;
  // Beta draws can round to 0 or 1 for tiny shapes; redraw.
  do {
    th = rng.beta(a, a);
  } while (!(th > 0.0 && th < 1.0));
  return th;
}

double sample_suffstat(double theta, int N, Rng& rng) {
  if (!(theta > 0.0 && theta < 1.0) || N < 1) throw DomainError("need theta in (0,1) and N >= 1");
  return theta * rng.gamma(0.5 * N);
}

TrialRecord run_trial(const vb::CaseParams& p, const std::vector<Estimator>& estimators,
                      std::uint64_t seed, std::size_t index) {
  Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(p.N), index);
  TrialRecord tr;
  tr.theta_true = sample_prior(p.a, rng);
  tr.t = sample_suffstat(tr.theta_true, p.N, rng);
  const double gamma = 2.0 * tr.t / p.N;
  for (auto e : estimators) {
    double est = kNaN;
    try {
      switch (e) {
        case Estimator::map: est = vb::map_estimate(p, gamma); break;
        case Estimator::ml: est = vb::ml_estimate(gamma); break;
        case Estimator::mmse: est = vb::mmse_estimate(p, tr.t); break;
        case Estimator::mmse_quadrature_fallback: {
          bool fb = false;
          est = vb::mmse_estimate_checked(p, tr.t, &fb);
          tr.mmse_fallback = fb;
          break;
        }
      }
    } catch (const Error&) {
      est = kNaN;
    }
    tr.estimates.push_back(est);
    const double d = est - tr.theta_true;
    tr.sq_errors.push_back(d * d);
  }
  return tr;
}

std::vector<RmseRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RmseRow> rows;
  for (int N : cfg.N_list) {
    const vb::CaseParams p(cfg.a, N);
    std::vector<TrialRecord> trials(cfg.trials);
    auto work = [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) trials[i] = run_trial(p, cfg.estimators, cfg.seed, i);
    };
    const unsigned workers = std::max(1u, cfg.workers);
    if (workers == 1) {
      work(0, cfg.trials);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(workers);
      const std::size_t chunk = (cfg.trials + workers - 1) / workers;
      for (unsigned w = 0; w < workers; ++w) {
        const std::size_t b = std::min(cfg.trials, w * chunk);
        const std::size_t e = std::min(cfg.trials, b + chunk);
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

    RmseRow row;
    row.N = N;
    int map_col = -1;
    int ml_col = -1;
    for (std::size_t c = 0; c < cfg.estimators.size(); ++c) {
      const auto e = cfg.estimators[c];
      auto stats = summarize(trials, c);
      if (static_cast<double>(stats.failures) > 1e-3 * static_cast<double>(cfg.trials)) {
        std::ostringstream os;
        os << to_string(e) << " failed on " << stats.failures << " of " << cfg.trials
           << " trials at N=" << N;
        throw NonConvergent(os.str());
      }
      switch (e) {
        case Estimator::map:
          row.map = stats;
          map_col = static_cast<int>(c);
          break;
        case Estimator::ml:
          row.ml = stats;
          ml_col = static_cast<int>(c);
          break;
        case Estimator::mmse:
          if (!row.mmse.present) row.mmse = stats;
          break;
        case Estimator::mmse_quadrature_fallback: row.mmse = stats; break;
      }
    }
    for (const auto& tr : trials) row.mmse_fallbacks += tr.mmse_fallback ? 1 : 0;
    if (map_col >= 0 && ml_col >= 0) {
      std::vector<double> rel;
      rel.reserve(trials.size());
      for (const auto& tr : trials) {
        const double ml = tr.estimates[ml_col];
        const double mp = tr.estimates[map_col];
        if (ml > 0.0 && std::isfinite(mp)) rel.push_back(std::abs(mp - ml) / ml);
      }
      if (!rel.empty()) {
        const auto mid = rel.begin() + static_cast<std::ptrdiff_t>(rel.size() / 2);
        std::nth_element(rel.begin(), mid, rel.end());
        row.median_map_ml_rel = *mid;
        if (rel.size() % 2 == 0) {
          const double lower = *std::max_element(rel.begin(), mid);
          row.median_map_ml_rel = 0.5 * (lower + *mid);
        }
      }
    } else {
      row.median_map_ml_rel = kNaN;
    }
    if (cfg.bound_columns && cfg.a > 2.0) {
      row.sqrt_bcrb = std::sqrt(vb::bcrb(p));
      row.sqrt_tbcrb = std::sqrt(vb::tbcrb(p, vb::TbcrbMethod::engine));
      row.sqrt_ecrb = std::sqrt(vb::ecrb(p));
      row.sqrt_mmse_theory = std::sqrt(vb::mmse_value(p, vb::MmseMethod::quadrature));
    } else {
      row.sqrt_bcrb = row.sqrt_tbcrb = row.sqrt_mmse_theory = kNaN;
      row.sqrt_ecrb = std::sqrt(vb::ecrb(p));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<int> fig1_N_list() {
  std::vector<int> out;
  for (int n = 1; n <= 13; ++n) out.push_back(1 << n);
  return out;
}

std::vector<RmseRow> reproduce_fig1(double a, std::size_t trials, std::uint64_t seed,
                                    unsigned workers) {
  ExperimentConfig cfg;
  cfg.a = a;
  cfg.N_list = fig1_N_list();
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.workers = workers;
  cfg.estimators = {Estimator::map, Estimator::mmse_quadrature_fallback, Estimator::ml};
  if (!(a > 2.0)) throw UnsupportedRegime("figure reproduction needs a > 2 for its bound columns");
  return run_experiment(cfg);
}

std::string csv_header() {
  return "N,rmse_map,se_map,rmse_mmse,se_mmse,rmse_ml,se_ml,sqrt_bcrb,sqrt_tbcrb,sqrt_ecrb,"
         "sqrt_mmse_theory";
}

std::string to_csv(const std::vector<RmseRow>& rows) {
  std::string out = csv_header() + "\n";
  auto col = [](const EstimatorStats& s, bool se) {
    return s.present ? fmt17(se ? s.se : s.rmse) : std::string("nan");
  };
  for (const auto& r : rows) {
    out += std::to_string(r.N) + "," + col(r.map, false) + "," + col(r.map, true) + "," +
           col(r.mmse, false) + "," + col(r.mmse, true) + "," + col(r.ml, false) + "," +
           col(r.ml, true) + "," + fmt17(r.sqrt_bcrb) + "," + fmt17(r.sqrt_tbcrb) + "," +
           fmt17(r.sqrt_ecrb) + "," + fmt17(r.sqrt_mmse_theory) + "\n";
  }
  return out;
}

}  // namespace tbound::mc
