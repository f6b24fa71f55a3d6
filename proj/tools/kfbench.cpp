// kfbench: run filter experiments, check the linear-system identities, and
// regenerate the worked examples as CSV.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "kalman/harness.hpp"
#include "kalman/parallel.hpp"
#include "kalman/propositions.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitVerifyFailed = 3;

int report_divergence(const kalman::ExperimentResult& result) {
  if (result.divergence.empty()) return 0;
  for (const auto& msg : result.divergence) std::cerr << "diverged: " << msg << '\n';
  return kExitDiverged;
}

void print_nonlinear_summary(const kalman::ExperimentResult& result) {
  using kalman::FilterKind;
  if (!result.column_of(FilterKind::kEnkf)) return;
  const std::size_t window = std::min<std::size_t>(1000, result.records.size());
  std::cout << "mean relative trace error vs enkf over the last " << window << " steps:\n";
  for (auto kind : result.filters) {
    if (kind == FilterKind::kEnkf) continue;
    std::printf("  %-6s %.4f\n", std::string(kalman::filter_name(kind)).c_str(),
                result.mean_relerr(kind, window));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman / unscented filter experiments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run one experiment and write a CSV");
  std::string config_path;
  std::string out_path;
  std::map<std::string, std::string> flags;
  run->add_option("--config", config_path, "key = value config file; flags override it")
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "output CSV path")->required();
  const std::pair<const char*, const char*> run_flags[] = {
      {"model", "linear-ex1 | linear-ex2 | vdp | lorenz | custom"},
      {"steps", "number of filter steps"},
      {"seed", "random seed"},
      {"alpha", "sigma-point spread (default 1.5)"},
      {"ensemble", "EnKF ensemble size"},
      {"filters", "comma list of kf,ekf,ukf,eukfa,eukfc,enkf"},
      {"ts", "step size for vdp/lorenz"},
      {"mu", "Van der Pol damping"},
      {"q", "process noise level (Q = q I)"},
      {"r", "measurement noise level (R = r I)"},
      {"x0", "initial state, comma separated"},
      {"p0", "initial covariance level (P0 = p0 I)"},
      {"threads", "worker threads for the EnKF"},
  };
  for (const auto& [name, help] : run_flags) {
    run->add_option(std::string("--") + name, flags[name], help);
  }

  // verify
  auto* verify = app.add_subcommand("verify", "check the linear-system identities on random systems");
  int trials = 100;
  std::uint64_t verify_seed = 1;
  int verify_steps = 50;
  verify->add_option("--trials", trials, "number of random systems")->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_seed, "random seed");
  verify->add_option("--steps", verify_steps, "filter steps per system")->check(CLI::PositiveNumber);

  // reproduce
  auto* reproduce = app.add_subcommand("reproduce", "regenerate a worked example");
  int example = 0;
  std::string out_dir;
  std::uint64_t repro_seed = 1;
  long long repro_ensemble = 0;
  int repro_threads = kalman::default_thread_count();
  int repro_steps = 0;
  reproduce->add_option("--example", example, "example number")
      ->required()
      ->check(CLI::Range(1, 4));
  reproduce->add_option("--out", out_dir, "output directory")->required();
  reproduce->add_option("--seed", repro_seed, "random seed");
  reproduce->add_option("--ensemble", repro_ensemble, "override the EnKF ensemble size");
  reproduce->add_option("--threads", repro_threads, "worker threads for the EnKF");
  reproduce->add_option("--steps", repro_steps, "override the horizon");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      kalman::ExperimentConfig cfg;
      cfg.threads = kalman::default_thread_count();
      if (!config_path.empty()) kalman::load_config_file(cfg, config_path);
      for (const auto& [name, help] : run_flags) {
        if (run->count(std::string("--") + name) > 0) {
          kalman::apply_config_value(cfg, name, flags[name]);
        }
      }
      const auto result = kalman::run_experiment(cfg);
      kalman::export_csv(result, out_path);
      std::cout << "wrote " << result.records.size() << " rows to " << out_path << '\n';
      print_nonlinear_summary(result);
      return report_divergence(result);
    }

    if (*verify) {
      const auto report = kalman::verify_propositions(verify_seed, trials, verify_steps);
      std::cout << report.summary();
      return report.all_passed() ? 0 : kExitVerifyFailed;
    }

    if (*reproduce) {
      kalman::ExperimentConfig cfg = kalman::example_config(example);
      cfg.seed = repro_seed;
      cfg.threads = repro_threads;
      if (repro_ensemble > 0) cfg.ensemble_size = repro_ensemble;
      if (repro_steps > 0) cfg.horizon = repro_steps;
      std::filesystem::create_directories(out_dir);
      const auto csv = std::filesystem::path(out_dir) / ("example" + std::to_string(example) + ".csv");
      const auto result = kalman::run_experiment(cfg);
      kalman::export_csv(result, csv);
      std::cout << "wrote " << csv.string() << '\n';
      if (example == 1) {
        const auto s = kalman::example1_summary();
        char text[256];
        std::snprintf(text, sizeof(text),
                      "trace_kf_posterior = %.6f\ntrace_ukf_posterior = %.6f\n"
                      "trace_true_cov_at_ukf_gain = %.6f\n",
                      s.kf_trace, s.ukf_trace, s.ukf_true_trace);
        std::cout << text;
        std::ofstream(std::filesystem::path(out_dir) / "example1_summary.txt", std::ios::binary)
            << text;
      }
      print_nonlinear_summary(result);
      return report_divergence(result);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
