#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tbound/cli/commands.hpp"
#include "tbound/cli/manifest.hpp"
#include "tbound/errors.hpp"

namespace cli = tbound::cli;

namespace {

// Consumed by expand_config before parsing; registered for --help only.
std::string config_path;

void add_config(CLI::App* sub) {
  sub->add_option("--config", config_path, "key=value file mirroring the long flags (flags win)");
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Replaces `--config FILE` by the flags it lists. Keys that are not flags of
// the subcommand (manifest bookkeeping such as checksum) are skipped, and
// flags given on the command line win. Manifests are valid config files.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  const CLI::App* sub = nullptr;
  for (const auto& a : args) {
    if (!a.empty() && a[0] != '-') {
      sub = app.get_subcommand_no_throw(a);
      if (sub) break;
    }
  }
  if (!sub) return args;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t width = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      width = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      width = 1;
    } else {
      continue;
    }
    std::string text;
    try {
      text = cli::read_file(path);
    } catch (const tbound::IoError&) {
      throw CLI::FileError::Missing(path);
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + width));
    std::vector<std::string> extra;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      const std::string line = text.substr(pos, end - pos);
      pos = end + 1;
      const auto eq = line.find('=');
      if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
      const std::string flag = "--" + line.substr(0, eq);
      if (flag == "--config" || !sub->get_option_no_throw(flag) || given(args, flag)) continue;
      extra.push_back(flag);
      extra.push_back(line.substr(eq + 1));
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(i), extra.begin(), extra.end());
    break;
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian and tighter Bayesian lower bounds for a variance/Beta model"};
  app.require_subcommand(1);

  cli::BoundsArgs bounds;
  auto* sb = app.add_subcommand("bounds", "BCRB, TBCRB and ECRB for the variance/Beta model");
  sb->add_option("--a", bounds.a, "Beta prior shape (a > 2)")->capture_default_str();
  sb->add_option("--N", bounds.N, "number of observations")->capture_default_str();
  sb->add_option("--which", bounds.which, "bcrb | tbcrb | ecrb | all")->capture_default_str();
  sb->add_flag("--csv", bounds.csv, "CSV output with 17 significant digits");
  add_config(sb);

  cli::EstimateArgs est;
  auto* se = app.add_subcommand("estimate", "MAP, ML or MMSE estimate from t = x^T x / 2");
  se->add_option("--a", est.a, "Beta prior shape")->capture_default_str();
  se->add_option("--N", est.N, "number of observations")->capture_default_str();
  se->add_option("--t", est.t, "sufficient statistic t >= 0")->required();
  se->add_option("--estimator", est.estimator, "map | ml | mmse")->capture_default_str();
  se->add_flag("--csv", est.csv, "CSV output with 17 significant digits");
  add_config(se);

  cli::Fig1Args fig;
  auto* sf = app.add_subcommand("fig1", "Monte-Carlo RMSE curves for N = 2..8192 as CSV");
  sf->add_option("--a", fig.a, "Beta prior shape (a > 2)")->capture_default_str();
  sf->add_option("--trials", fig.trials, "trials per N (>= 100)")->capture_default_str();
  sf->add_option("--seed", fig.seed, "master seed")->capture_default_str();
  sf->add_option("--out", fig.out_path, "output CSV path")->capture_default_str();
  sf->add_option("--workers", fig.workers, "worker threads (output does not depend on it)")
      ->envname("TBOUND_WORKERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_config(sf);

  cli::EfficiencyArgs eff;
  auto* sc = app.add_subcommand("check-efficiency", "test whether the tighter bound is attained");
  sc->add_option("--model", eff.model, "case-study | gaussian-conjugate")->capture_default_str();
  sc->add_option("--a", eff.a, "case study: Beta prior shape")->capture_default_str();
  sc->add_option("--N", eff.N, "number of observations")->capture_default_str();
  sc->add_option("--prior-mean", eff.prior_mean, "Gaussian model: prior mean")
      ->capture_default_str();
  sc->add_option("--prior-var", eff.prior_var, "Gaussian model: prior variance")
      ->capture_default_str();
  sc->add_option("--noise-var", eff.noise_var, "Gaussian model: noise variance")
      ->capture_default_str();
  sc->add_option("--probes", eff.probes,
                 "probe positions: gamma values (case study) or prior-predictive standard "
                 "deviations (Gaussian)");
  add_config(sc);

  cli::SelftestArgs st;
  auto* ss = app.add_subcommand("selftest", "run the built-in oracle checks");
  ss->add_option("--inject-fault", st.inject_fault,
                 "perturb the reference of the named check by 1% (must then fail)");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kIo;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kDomain;
  }

  try {
    if (*sb) return cli::cmd_bounds(bounds, std::cout);
    if (*se) return cli::cmd_estimate(est, std::cout);
    if (*sf) return cli::cmd_fig1(fig, std::cout);
    if (*sc) return cli::cmd_check_efficiency(eff, std::cout);
    if (*ss) return cli::cmd_selftest(st, std::cout);
  } catch (const tbound::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
  return cli::kOk;
}
