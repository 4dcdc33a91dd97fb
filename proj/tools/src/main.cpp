#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include <spdlog/spdlog.h>

#include "noisecal/app/commands.hpp"
#include "noisecal/app/config.hpp"
#include "noisecal/app/logging.hpp"
#include "noisecal/csv.hpp"
#include "noisecal/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

namespace app = noisecal::app;

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"noisecal: label-noise synthesis, robust calibration and verification"};
  cli.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string data;
  std::string test;
  std::string val;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;

  auto* generate = cli.add_subcommand("generate", "write train/val/test CSVs and metadata.json");
  generate->add_option("--config", config_path, "experiment config JSON")->required();
  generate->add_option("--seed", seed, "data seed (default: train.seed)");
  generate->add_option("--out", out, "output directory (default: output_dir)");

  double c = 1.0;
  bool no_damping = false;
  auto* estimate = cli.add_subcommand("estimate", "robust, empirical and median estimates of a points CSV");
  estimate->add_option("--data", data, "points CSV (f0,...,f{d-1})")->required();
  estimate->add_option("--c", c, "damping constant C in s^2 = C trace(cov)")->check(CLI::PositiveNumber);
  estimate->add_flag("--no-damping", no_damping, "force every damping weight to 1");
  estimate->add_option("--out", out, "also write the JSON here");

  auto* calibrate = cli.add_subcommand("calibrate", "fit per-class models and sample calibrated data");
  calibrate->add_option("--config", config_path)->required();
  calibrate->add_option("--data", data, "dataset CSV")->required();
  calibrate->add_option("--out", out, "output directory")->required();
  calibrate->add_option("--seed", seed, "sampling seed (default: train.seed)");

  auto* train = cli.add_subcommand("train", "run the correction + calibration loop");
  train->add_option("--config", config_path)->required();
  train->add_option("--data", data, "training dataset CSV (noisy column is used)")->required();
  train->add_option("--test", test, "clean test dataset CSV")->required();
  train->add_option("--val", val, "noisy validation dataset CSV");
  train->add_option("--out", out, "report JSON path")->required();
  train->add_option("--seed", seed, "override train.seed");

  auto* sweep = cli.add_subcommand("sweep", "run method x alpha x lambda x noise x seed");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--out", out, "report directory (default: output_dir)");
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  bool mutate = false;
  auto* verify = cli.add_subcommand("verify", "run the oracle check suite");
  verify->add_option("--seed", seed, "suite seed (default 0)");
  verify->add_flag("--mutate-damping", mutate, "force damping weights to 1 (the suite should then fail)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    app::configure_logging();

    if (*generate) {
      const app::ExperimentConfig config = app::load_config(config_path);
      app::run_generate(config, seed.value_or(config.train.seed), out.empty() ? config.output_dir : out);
    } else if (*estimate) {
      noisecal::robustmean::Options options;
      options.c = c;
      options.damping = !no_damping;
      const std::string text = app::to_json(app::estimate(noisecal::io::read_points_csv(data), options)).dump(2) + "\n";
      std::cout << text;
      if (!out.empty()) noisecal::io::write_text(out, text);
    } else if (*calibrate) {
      const app::ExperimentConfig config = app::load_config(config_path);
      app::run_calibrate(config, data, out, seed.value_or(config.train.seed));
    } else if (*train) {
      app::ExperimentConfig config = app::load_config(config_path);
      if (seed) config.train.seed = *seed;
      const std::optional<app::fs::path> val_path = val.empty() ? std::nullopt : std::optional<app::fs::path>(val);
      if (!app::run_train(config, data, test, val_path, out)) return kExitCheckFailed;
    } else if (*sweep) {
      const app::ExperimentConfig config = app::load_config(config_path);
      const app::SweepSummary s = app::run_sweep(config, out.empty() ? config.output_dir : out, jobs);
      if (s.failures > 0) return kExitCheckFailed;
    } else if (*verify) {
      app::VerifyOptions options;
      options.seed = seed.value_or(0);
      options.disable_damping = mutate;
      const auto checks = app::verify_suite(options);
      app::print_check_table(std::cout, checks);
      for (const auto& check : checks)
        if (!check.passed) return kExitCheckFailed;
    }
  } catch (const noisecal::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const noisecal::IoError& e) {
    spdlog::error("io error: {}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitCheckFailed;
  }
  return kExitOk;
}
