#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "noisecal/app/commands.hpp"
#include "noisecal/csv.hpp"
#include "noisecal/error.hpp"
#include "noisecal/trainer.hpp"

namespace noisecal::app {

namespace {

double mismatch_rate(std::span<const int> a, std::span<const int> b) {
  if (a.empty()) return 0.0;
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i] ? 1 : 0;
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

/// Shortest text that parses back to the same double.
std::string round_trip(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_report(const fs::path& out_json, const verify::RunReport& report) {
  if (out_json.has_parent_path()) ensure_dir(out_json.parent_path());
  io::write_text(out_json, verify::serialize(report));
  const verify::EpochRecord& last = report.epochs.empty() ? report.warmup : report.epochs.back();
  std::ostringstream purity;
  verify::write_purity_csv(purity, last.purity_curve);
  io::write_text(out_json.parent_path() / (out_json.stem().string() + "_purity.csv"), purity.str());
}

/// Calls fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  if (jobs == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

bool run_train(const ExperimentConfig& config, const fs::path& data_csv, const fs::path& test_csv,
               const std::optional<fs::path>& val_csv, const fs::path& out_json) {
  const io::DatasetTable train_table = io::read_dataset_csv(data_csv);
  const io::DatasetTable test_table = io::read_dataset_csv(test_csv);
  const noisegen::MixtureOracle oracle = build_oracle(config.scenario);
  if (train_table.features.cols() != oracle.dim() || test_table.features.cols() != oracle.dim())
    throw ConfigError("data dimension does not match scenario.d");

  const LabeledSet train{train_table.features, train_table.noisy};
  const LabeledSet test{test_table.features, test_table.clean};
  std::optional<LabeledSet> validation;
  if (val_csv) {
    io::DatasetTable v = io::read_dataset_csv(*val_csv);
    validation = LabeledSet{std::move(v.features), std::move(v.noisy)};
  }

  trainer::EvaluationInputs eval;
  eval.oracle = &oracle;
  eval.validation = validation ? &*validation : nullptr;
  eval.generated_noise_rate = mismatch_rate(train_table.clean, train_table.noisy);

  try {
    const trainer::RunResult result = trainer::run_experiment(config.train, train, test, config.scenario.k, eval);
    write_report(out_json, result.report);
    spdlog::info("final Bayes agreement {:.4f}, test accuracy {:.4f}", result.report.summary.final_agreement,
                 result.report.summary.final_accuracy);
    return true;
  } catch (const trainer::ExperimentFailed& e) {
    write_report(out_json, e.partial_report());
    spdlog::error("run failed: {}", e.what());
    return false;
  }
}

std::string SweepCell::id() const {
  std::string n = noise;
  std::replace(n.begin(), n.end(), '@', '-');
  std::replace(n.begin(), n.end(), '+', '_');
  return method + "_a" + short_number(alpha) + "_l" + short_number(lambda) + "_" + n + "_s" + std::to_string(seed);
}

std::vector<SweepCell> sweep_cells(const ExperimentConfig& config) {
  std::vector<NoiseConfig> grid = config.sweep.noise_grid;
  if (grid.empty()) grid.push_back(config.noise);
  std::vector<SweepCell> cells;
  for (const auto& method : config.sweep.methods)
    for (double alpha : config.sweep.alpha_grid)
      for (double lambda : config.sweep.lambda_grid)
        for (std::size_t ni = 0; ni < grid.size(); ++ni)
          for (std::uint64_t seed : config.sweep.seeds)
            cells.push_back({method, alpha, lambda, ni, noise_label(grid[ni]), seed});
  return cells;
}

SweepSummary run_sweep(const ExperimentConfig& config, const fs::path& out_dir, unsigned jobs) {
  std::vector<NoiseConfig> grid = config.sweep.noise_grid;
  if (grid.empty()) grid.push_back(config.noise);
  const std::vector<SweepCell> cells = sweep_cells(config);
  const noisegen::MixtureOracle oracle = build_oracle(config.scenario);
  ensure_dir(out_dir / "cells");

  // One dataset per (noise, seed), shared read-only by every method cell.
  std::vector<std::pair<std::size_t, std::uint64_t>> keys;
  for (std::size_t ni = 0; ni < grid.size(); ++ni)
    for (std::uint64_t seed : config.sweep.seeds) keys.emplace_back(ni, seed);
  std::vector<std::optional<GeneratedData>> datasets(keys.size());
  std::vector<std::string> data_errors(keys.size());
  parallel_for(keys.size(), jobs, [&](std::size_t i) {
    try {
      datasets[i] = generate_data(config, oracle, grid[keys[i].first], keys[i].second);
    } catch (const Error& e) {
      data_errors[i] = e.what();
    }
  });
  auto dataset_index = [&](const SweepCell& c) {
    return static_cast<std::size_t>(std::find(keys.begin(), keys.end(), std::make_pair(c.noise_index, c.seed)) -
                                    keys.begin());
  };

  struct Outcome {
    std::optional<verify::Summary> summary;
    std::string error;
  };
  std::vector<Outcome> outcomes(cells.size());
  std::mutex log_mutex;
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    const SweepCell& cell = cells[i];
    const std::size_t di = dataset_index(cell);
    const fs::path report_path = out_dir / "cells" / (cell.id() + ".json");
    if (!datasets[di]) {
      outcomes[i].error = "data generation failed: " + data_errors[di];
      return;
    }
    const GeneratedData& data = *datasets[di];
    try {
      const trainer::TrainConfig tc = cell_train_config(config.train, cell.method, cell.alpha, cell.lambda, cell.seed);
      const LabeledSet train = data.training_view();
      const LabeledSet validation = data.validation_view();
      trainer::EvaluationInputs eval;
      eval.oracle = &oracle;
      eval.validation = validation.size() > 0 ? &validation : nullptr;
      eval.generated_noise_rate = data.achieved_noise_rate;
      const trainer::RunResult result =
          trainer::run_experiment(tc, train, data.test_set(), config.scenario.k, eval);
      write_report(report_path, result.report);
      outcomes[i].summary = result.report.summary;
    } catch (const trainer::ExperimentFailed& e) {
      outcomes[i].error = e.what();
      write_report(report_path, e.partial_report());
    } catch (const Error& e) {
      outcomes[i].error = e.what();
    }
    const std::lock_guard<std::mutex> lock(log_mutex);
    spdlog::debug("cell {} {}", cell.id(), outcomes[i].error.empty() ? "done" : "failed: " + outcomes[i].error);
  });

  std::ostringstream aggregate;
  std::ostringstream validation;
  std::ostringstream failures;
  aggregate << "method,alpha,lambda,noise,seed,final_agreement,final_accuracy\n";
  validation << "method,alpha,lambda,noise,seed,final_validation_accuracy\n";
  failures << "method,alpha,lambda,noise,seed,error\n";
  SweepSummary summary{cells.size(), 0};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& c = cells[i];
    const std::string key = c.method + "," + round_trip(c.alpha) + "," + round_trip(c.lambda) + "," +
                            c.noise + "," + std::to_string(c.seed);
    if (const auto& s = outcomes[i].summary) {
      aggregate << key << "," << round_trip(s->final_agreement) << "," << round_trip(s->final_accuracy)
                << "\n";
      validation << key << ","
                 << (s->final_validation_accuracy ? round_trip(*s->final_validation_accuracy) : "") << "\n";
    } else {
      ++summary.failures;
      std::string msg = outcomes[i].error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      failures << key << "," << msg << "\n";
    }
  }
  io::write_text(out_dir / "aggregate.csv", aggregate.str());
  io::write_text(out_dir / "aggregate_validation.csv", validation.str());
  io::write_text(out_dir / "failures.csv", failures.str());
  spdlog::info("sweep finished: {} cells, {} failed", summary.cells, summary.failures);
  return summary;
}

}  // namespace noisecal::app
