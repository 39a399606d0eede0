#pragma once

// Subcommands of the `tbound` executable. Each writes to the given streams
// and returns a process exit code; library errors propagate as exceptions
// and are mapped by exit_code_for().

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace tbound::cli {

enum ExitCode : int {
  kOk = 0,
  kSelftestFailed = 1,
  kDomain = 2,
  kNumerical = 3,
  kIo = 4,
};

/// 2 for domain and regime errors, 3 for numerical failures, 4 for I/O.
int exit_code_for(const std::exception& e);

/// printf-style %.17g and %.6g.
std::string fmt_csv(double v);
std::string fmt_human(double v);

struct BoundsArgs {
  double a = 3.0;
  int N = 8;
  std::string which = "all";  // bcrb | tbcrb | ecrb | all
  bool csv = false;
};
int cmd_bounds(const BoundsArgs& args, std::ostream& out);

struct EstimateArgs {
  double a = 3.0;
  int N = 8;
  double t = 1.0;
  std::string estimator = "mmse";  // map | ml | mmse
  bool csv = false;
};
int cmd_estimate(const EstimateArgs& args, std::ostream& out);

struct Fig1Args {
  double a = 3.0;
  std::size_t trials = 20000;
  std::uint64_t seed = 1;
  std::string out_path = "fig1.csv";
  unsigned workers = 1;
};
/// Writes the CSV to out_path and its manifest next to it.
int cmd_fig1(const Fig1Args& args, std::ostream& out);

struct EfficiencyArgs {
  std::string model = "case-study";  // case-study | gaussian-conjugate
  double a = 3.0;
  int N = 8;
  double prior_mean = 0.0;
  double prior_var = 1.0;
  double noise_var = 1.0;
  /// Probe positions in units of the statistic: gamma = 2t/N for the case
  /// study, standard deviations of xbar around the prior mean for the
  /// Gaussian model.
  std::vector<double> probes;
};

struct EfficiencySummary {
  bool efficient = false;
  bool gain_constant = false;
  double gain_deviation = 0.0;
  std::vector<double> probe_x;
  std::vector<double> deviations;  // per-probe efficiency-test deviation
  double tbcrb = 0.0;
  double bcrb = 0.0;
  double mmse = 0.0;
  std::string verdict;
};
EfficiencySummary check_efficiency(const EfficiencyArgs& args);
int cmd_check_efficiency(const EfficiencyArgs& args, std::ostream& out);

struct SelftestArgs {
  std::string inject_fault;
};
int cmd_selftest(const SelftestArgs& args, std::ostream& out);

}  // namespace tbound::cli
