#include <cmath>

#include "doctest.h"
#include "tbound/errors.hpp"
#include "tbound/mc_harness.hpp"
#include "tbound/rng.hpp"

using namespace tbound;
using doctest::Approx;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <class F>
Moments sample_moments(std::size_t n, F draw) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = draw();
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  return {mean, s2 / n - mean * mean};
}

}  // namespace

TEST_CASE("substreams are deterministic and distinct") {
  auto a = Rng::substream(1, 8, 0), b = Rng::substream(1, 8, 0), c = Rng::substream(1, 8, 1);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u > 0.0 && u < 1.0));
  }
}

TEST_CASE("uniform prior moments") {
  Rng rng(3);
  const std::size_t n = 100000;
  const auto m = sample_moments(n, [&] { return mc::sample_prior(1.0, rng); });
  CHECK(std::abs(m.mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n) + 1e-12);
  CHECK(m.var == Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("Beta(3,3) prior variance") {
  Rng rng(4);
  const std::size_t n = 100000;
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  bool inside = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double th = mc::sample_prior(3.0, rng);
    inside = inside && th > 0.0 && th < 1.0;
    s += th;
    s2 += (th - 0.5) * (th - 0.5);
    s4 += std::pow(th - 0.5, 4);
  }
  CHECK(inside);
  const double var = s2 / n;
  const double se = std::sqrt((s4 / n - var * var) / n);
  CHECK(std::abs(var - 1.0 / 28.0) < 3.0 * se);
  CHECK(std::abs(s / n - 0.5) < 3.0 * std::sqrt(1.0 / 28.0 / n));
}

TEST_CASE("sufficient statistic moments") {
  Rng rng(5);
  const std::size_t n = 100000;
  const double th = 0.5;
  const int N = 8;
  const auto m = sample_moments(n, [&] { return mc::sample_suffstat(th, N, rng); });
  // t = theta chi2_N / 2: mean N theta / 2, variance theta^2 N / 2
  CHECK(std::abs(m.mean - N * th / 2) < 3.0 * std::sqrt(th * th * N / 2 / n));
  CHECK(4.0 * m.var / (th * th) == Approx(2.0 * N).epsilon(0.03));
  Rng r2(6);
  CHECK(mc::sample_suffstat(1e-12, N, r2) < 1e-9);
}

TEST_CASE("experiment config validation") {
  mc::ExperimentConfig cfg;
  cfg.N_list = {8};
  cfg.trials = 99;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.trials = 100;
  cfg.N_list = {16, 8};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.N_list = {};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.N_list = {8};
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(mc::parse_estimator("median"), DomainError);
  CHECK(mc::parse_estimator("map") == mc::Estimator::map);
}

TEST_CASE("experiment is reproducible and independent of the worker count") {
  mc::ExperimentConfig cfg;
  cfg.N_list = {2, 8, 64};
  cfg.trials = 100;
  cfg.seed = 9;
  const auto a = mc::to_csv(mc::run_experiment(cfg));
  const auto b = mc::to_csv(mc::run_experiment(cfg));
  cfg.workers = 4;
  const auto c = mc::to_csv(mc::run_experiment(cfg));
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a.rfind(mc::csv_header() + "\n", 0) == 0);
  cfg.seed = 10;
  CHECK(mc::to_csv(mc::run_experiment(cfg)) != a);
}

TEST_CASE("trial randomness depends only on its index") {
  const variance_beta::CaseParams p(3.0, 16);
  const std::vector<mc::Estimator> est{mc::Estimator::ml};
  const auto r1 = mc::run_trial(p, est, 5, 17);
  const auto r2 = mc::run_trial(p, est, 5, 17);
  CHECK(r1.theta_true == r2.theta_true);
  CHECK(r1.t == r2.t);
  CHECK(r1.estimates[0] == Approx(2.0 * r1.t / 16));
}

TEST_CASE("RMSE rows at N=8") {
  mc::ExperimentConfig cfg;
  cfg.N_list = {8};
  cfg.trials = 20000;
  cfg.seed = 2;
  cfg.workers = 4;
  const auto row = mc::run_experiment(cfg).front();
  const double sigma_pi = std::sqrt(1.0 / 28.0);
  for (const auto* s : {&row.map, &row.mmse}) {
    CHECK(s->rmse > row.sqrt_tbcrb);
    CHECK(s->rmse < sigma_pi);
  }
  CHECK(std::abs(row.ml.mse - row.sqrt_ecrb * row.sqrt_ecrb) < 3.0 * row.ml.se_mse);
  CHECK(row.sqrt_bcrb <= row.sqrt_tbcrb);
  CHECK(row.sqrt_tbcrb <= row.sqrt_mmse_theory);
  CHECK(row.mmse.rmse >= row.sqrt_tbcrb - 3.0 * row.mmse.se);
}

TEST_CASE("figure grid") {
  const auto Ns = mc::fig1_N_list();
  REQUIRE(Ns.size() == 13);
  CHECK(Ns.front() == 2);
  CHECK(Ns.back() == 8192);
  CHECK_THROWS_AS(mc::reproduce_fig1(2.0, 100, 1), UnsupportedRegime);
}

TEST_CASE("MAP and ML agree more closely as N grows") {
  mc::ExperimentConfig cfg;
  cfg.N_list = {64, 256, 1024, 4096};
  cfg.trials = 1000;
  cfg.seed = 31;
  cfg.estimators = {mc::Estimator::map, mc::Estimator::ml};
  cfg.bound_columns = false;
  const auto rows = mc::run_experiment(cfg);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].median_map_ml_rel < rows[i - 1].median_map_ml_rel);
  }
  CHECK(rows.back().median_map_ml_rel < 0.01);
}

TEST_CASE("Monte-Carlo MSE of the posterior mean reproduces the MMSE value") {
  // 10^5 trials keeps the unit suite fast; the figure run covers 20000 per N.
  mc::ExperimentConfig cfg;
  cfg.N_list = {8};
  cfg.trials = 100000;
  cfg.seed = 41;
  cfg.estimators = {mc::Estimator::mmse};
  cfg.bound_columns = false;
  const auto row = mc::run_experiment(cfg).front();
  const double mmse = variance_beta::mmse_value(variance_beta::CaseParams(3.0, 8));
  CHECK(std::abs(row.mmse.mse - mmse) < 3.0 * row.mmse.se_mse);
}
