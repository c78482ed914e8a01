#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diesel/errors.hpp"
#include "diesel/experiment.hpp"
#include "diesel/oracle.hpp"

namespace {

// Exit categories: 2 config, 3 numerical, 4 I/O.
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

diesel::ExperimentConfig load_with_overrides(const std::string& config_path, int trials,
                                             const std::string& output_dir,
                                             const std::vector<std::string>& methods,
                                             long long base_seed, int workers) {
  diesel::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = diesel::load_config_file(config_path);
  if (trials > 0) cfg.trials = trials;
  if (!methods.empty()) cfg.methods = methods;
  if (base_seed >= 0) cfg.base_seed = static_cast<uint64_t>(base_seed);
  if (workers > 0) cfg.workers = workers;
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (const char* env = std::getenv("DIESEL_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DIeSEL distributed self-localization benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::vector<std::string> methods;
  int trials = -1;
  long long base_seed = -1;
  int workers = -1;
  bool print_config = false;

  CLI::App* run = app.add_subcommand("run", "run a Monte Carlo experiment");
  run->add_option("--config", config_path, "JSON experiment config");
  run->add_option("--trials", trials, "override trial count");
  run->add_option("--output-dir", output_dir, "override output directory");
  run->add_option("--methods", methods, "override method list (diesel ekf static)");
  run->add_option("--base-seed", base_seed, "override base seed");
  run->add_option("--workers", workers, "override worker count");
  run->add_flag("--print-config", print_config, "print the resolved config and exit");

  std::string tune_config;
  std::string tune_output;
  std::vector<double> q_grid{1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<double> r_grid{0.05, 0.1, 0.25, 0.5, 1.0};
  int tune_trials = 20;
  CLI::App* tune = app.add_subcommand("tune-ekf", "grid-search EKF (q, r) by mean error");
  tune->add_option("--config", tune_config, "JSON experiment config");
  tune->add_option("--q", q_grid, "process noise grid");
  tune->add_option("--r", r_grid, "range noise grid");
  tune->add_option("--trials", tune_trials, "trials per grid point");
  tune->add_option("--output", tune_output, "tuning CSV path (default <output_dir>/ekf_tuning.csv)");

  int oracle_instances = 20;
  long long oracle_seed = 1;
  double oracle_tol = 1e-12;
  CLI::App* oracle = app.add_subcommand(
      "oracle-tests", "distributed rounds vs dense-matrix reference on random instances");
  oracle->add_option("--instances", oracle_instances, "number of random instances");
  oracle->add_option("--seed", oracle_seed, "instance seed");
  oracle->add_option("--tol", oracle_tol, "max abs difference tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      diesel::ExperimentConfig cfg =
          load_with_overrides(config_path, trials, output_dir, methods, base_seed, workers);
      cfg.validate();
      if (print_config) {
        std::cout << diesel::config_to_json(cfg).dump(2) << std::endl;
        return 0;
      }
      const diesel::ExperimentResult result = diesel::run_experiment(cfg);
      diesel::emit_reports(result.series, cfg.output_dir, diesel::config_to_json(cfg));
      for (const std::string& m : cfg.methods) {
        const auto& mean = result.series.mean_error.at(m);
        if (mean.empty() || result.series.trials_used.at(m) == 0) {
          std::cout << m << ": no completed trials" << std::endl;
          continue;
        }
        const double steady = diesel::steady_state_mean(mean);
        std::cout << m << ": steady-state mean error " << steady << " m, settling tick "
                  << diesel::settling_tick(mean, steady) << ", divergences "
                  << result.series.divergence_count.at(m) << std::endl;
      }
      std::cout << "reports written to " << cfg.output_dir << std::endl;
      return 0;
    }

    if (tune->parsed()) {
      diesel::ExperimentConfig cfg = load_with_overrides(tune_config, -1, "", {}, -1, -1);
      cfg.validate();
      const diesel::EkfTuningResult tuning = diesel::tune_ekf(cfg, q_grid, r_grid, tune_trials);
      const std::string path =
          tune_output.empty() ? cfg.output_dir + "/ekf_tuning.csv" : tune_output;
      std::error_code ec;
      std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
      diesel::write_tuning_csv(tuning, path);
      std::cout << "best q=" << tuning.best.process_noise << " r=" << tuning.best.range_noise
                << "; grid written to " << path << std::endl;
      return 0;
    }

    // oracle-tests
    const diesel::oracle::EquivalenceReport report = diesel::oracle::run_equivalence_suite(
        oracle_instances, static_cast<uint64_t>(oracle_seed), oracle_tol);
    for (const std::string& line : report.lines) std::cout << line << std::endl;
    std::cout << (report.pass ? "PASS" : "FAIL") << ": max abs difference "
              << report.max_abs_diff << " over " << report.instances << " instances (tol "
              << oracle_tol << ")" << std::endl;
    return report.pass ? 0 : kExitNumerical;
  } catch (const diesel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const diesel::IoError& e) {
    std::cerr << "I/O error: " << e.what() << std::endl;
    return kExitIo;
  } catch (const diesel::NumericalFault& e) {
    std::cerr << "numerical fault: " << e.what() << std::endl;
    return kExitNumerical;
  } catch (const diesel::FilterDivergence& e) {
    std::cerr << "numerical fault: " << e.what() << std::endl;
    return kExitNumerical;
  }
}
