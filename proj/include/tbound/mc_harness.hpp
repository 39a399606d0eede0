#pragma once

// Seeded Monte-Carlo RMSE experiments for the variance/Beta model.

#include <cstdint>
#include <string>
#include <vector>

#include "tbound/rng.hpp"
#include "tbound/variance_beta.hpp"

namespace tbound::mc {

enum class Estimator { map, ml, mmse, mmse_quadrature_fallback };

std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& name);

struct ExperimentConfig {
  double a = 3.0;
  std::vector<int> N_list;
  std::size_t trials = 20000;
  std::uint64_t seed = 1;
  std::vector<Estimator> estimators{Estimator::map, Estimator::mmse_quadrature_fallback,
                                    Estimator::ml};
  unsigned workers = 1;
  /// Attach sqrt_bcrb, sqrt_tbcrb, sqrt_ecrb and sqrt_mmse_theory (needs a > 2).
  bool bound_columns = true;

  /// Throws DomainError on trials < 100, unsorted or empty N_list, a <= 0.
  void validate() const;
};

struct TrialRecord {
  double theta_true = 0.0;
  double t = 0.0;
  std::vector<double> estimates;  // per configured estimator; NaN on failure
  std::vector<double> sq_errors;
  bool mmse_fallback = false;
};

struct EstimatorStats {
  bool present = false;
  double mse = 0.0;
  double se_mse = 0.0;
  double rmse = 0.0;
  double se = 0.0;  // standard error of rmse (delta method)
  std::size_t failures = 0;
};

struct RmseRow {
  int N = 0;
  EstimatorStats map;
  EstimatorStats mmse;
  EstimatorStats ml;
  double sqrt_bcrb = 0.0;
  double sqrt_tbcrb = 0.0;
  double sqrt_ecrb = 0.0;
  double sqrt_mmse_theory = 0.0;
  /// Median over trials of |MAP - ML| / ML (NaN unless both are configured).
  double median_map_ml_rel = 0.0;
  std::size_t mmse_fallbacks = 0;
};

/// theta ~ Beta(a, a) from two Gamma draws.
double sample_prior(double a, Rng& rng);
/// t = x^T x / 2 with x ~ N(0, theta I_N), drawn as theta * Gamma(N/2).
double sample_suffstat(double theta, int N, Rng& rng);

/// One trial; its randomness comes only from Rng::substream(seed, N, index).
TrialRecord run_trial(const variance_beta::CaseParams& p, const std::vector<Estimator>& estimators,
                      std::uint64_t seed, std::size_t index);

std::vector<RmseRow> run_experiment(const ExperimentConfig& cfg);

/// N = 2, 4, ..., 8192 with MAP, MMSE (quadrature-checked) and ML.
std::vector<RmseRow> reproduce_fig1(double a, std::size_t trials, std::uint64_t seed,
                                    unsigned workers = 1);

std::vector<int> fig1_N_list();

std::string csv_header();
/// Header plus one line per row, numbers with 17 significant digits.
std::string to_csv(const std::vector<RmseRow>& rows);

}  // namespace tbound::mc
