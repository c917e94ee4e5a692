// Copyright 2026 The tmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command line front end: collect, train, run, report, all, print-config.
//
// Exit codes: 0 success, 1 usage or input error, 2 crash event,
// 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tmpc/config.hpp"
#include "tmpc/errors.hpp"
#include "tmpc/experiments.hpp"
#include "tmpc/residual_net.hpp"
#include "tmpc/scenario.hpp"
#include "tmpc/trajectory_log.hpp"
#include "tmpc/training.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCrash = 2;
constexpr int kExitNumerical = 3;

namespace fs = std::filesystem;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

tmpc::ExperimentConfig load(const Globals& g) {
  tmpc::ExperimentConfig cfg = g.config_path.empty()
                                   ? tmpc::default_config()
                                   : tmpc::load_config(g.config_path);
  if (g.seed) cfg.apply_seed(*g.seed);
  cfg.validate();
  return cfg;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

int report_crash(const tmpc::RunResult& r) {
  if (!r.crashed) return kExitOk;
  std::cerr << "crash at t=" << r.crash_time << " s: " << r.crash_reason << "\n";
  return kExitCrash;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residual-dynamics NMPC experiments for a tiltable quadrotor"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Experiment config file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for plant noise, collection and training");

  double minutes = 2.0;
  std::string collect_out;
  auto* collect = app.add_subcommand("collect", "Fly the excitation program");
  collect->add_option("--minutes", minutes, "Simulated minutes")->check(CLI::PositiveNumber);
  collect->add_option("--out", collect_out, "Output log CSV")->required();

  std::vector<std::string> train_data;
  double lambda_e = tmpc::kDefaultLambdaE;
  bool lambda_e_set = false;
  std::string train_out, curve_out;
  auto* train = app.add_subcommand("train", "Train a residual network on logs");
  train->add_option("--data", train_data, "Log CSV(s)")->required()->check(CLI::ExistingFile);
  auto* lambda_opt = train->add_option("--lambda-e", lambda_e, "Energy loss weight")
                         ->check(CLI::NonNegativeNumber);
  train->add_option("--out", train_out, "Output checkpoint")->required();
  train->add_option("--curve", curve_out, "Training curve CSV");

  std::string scenario_name, controller_name = "analytical", ckpt, run_out;
  auto* run = app.add_subcommand("run", "Fly one evaluation scenario");
  run->add_option("--scenario", scenario_name, "takeoff-hover | circle | setpoint")
      ->required();
  run->add_option("--controller", controller_name, "analytical | l2 | energy");
  run->add_option("--ckpt", ckpt, "Checkpoint for neural controllers")
      ->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Output log CSV")->required();

  std::vector<std::string> report_logs;
  std::string report_out;
  auto* report = app.add_subcommand(
      "report", "Evaluate logs named <scenario>.<controller>.csv");
  report->add_option("--logs", report_logs, "Log CSVs")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Report CSV")->required();

  std::string out_dir = "results";
  auto* all = app.add_subcommand("all", "Collect, train, run and report");
  all->add_option("--out-dir", out_dir, "Output directory");

  std::string config_out;
  auto* print_config =
      app.add_subcommand("print-config", "Write the effective configuration");
  print_config->add_option("--out", config_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  lambda_e_set = lambda_opt->count() > 0;

  try {
    const tmpc::ExperimentConfig cfg = load(g);

    if (*collect) {
      const tmpc::RunResult r = tmpc::collect_data(
          minutes, cfg.params, cfg.disturbance, cfg.ocp, cfg.scenarios.collection);
      ensure_parent(collect_out);
      tmpc::write_log_csv(fs::path(collect_out), r.log);
      std::cout << "wrote " << r.log.size() << " rows to " << collect_out << "\n";
      return report_crash(r);
    }

    if (*train) {
      tmpc::Dataset data;
      for (const std::string& path : train_data) {
        const tmpc::Dataset d = tmpc::make_labels(tmpc::read_log_csv(fs::path(path)),
                                                  cfg.params, cfg.ocp.t_step);
        data.samples.insert(data.samples.end(), d.samples.begin(), d.samples.end());
        data.provenance.push_back(path);
      }
      auto [train_set, val_set] = tmpc::split_train_validation(
          data, cfg.train.val_fraction, cfg.train.seed);
      train_set.stats = tmpc::compute_stats(train_set.samples);
      tmpc::TrainConfig tc = cfg.train;
      if (lambda_e_set) tc.lambda_E = lambda_e;
      const tmpc::TrainResult tr = tmpc::train(train_set, tc, cfg.params);
      ensure_parent(train_out);
      tmpc::save_checkpoint(train_out, tr.params);
      if (!curve_out.empty()) {
        ensure_parent(curve_out);
        std::ofstream f(curve_out);
        tmpc::write_training_curve_csv(f, tr.curve);
      }
      const tmpc::LossBreakdown fin = tr.curve.back().mean;
      std::cout << "trained on " << train_set.size() << " samples, final mean l2 "
                << fin.l2 << ", energy " << fin.energy << "\n";
      if (!val_set.empty()) {
        std::cout << "validation mean |a_tilde| "
                  << tmpc::mean_prediction_norm(tr.params, val_set) << "\n";
      }
      return kExitOk;
    }

    if (*run) {
      const tmpc::ControllerKind kind = tmpc::parse_controller(controller_name);
      std::optional<tmpc::MlpParams> net;
      if (!ckpt.empty()) net = tmpc::load_checkpoint(ckpt);
      const tmpc::Scenario s =
          tmpc::scenario_by_name(scenario_name, cfg.params, cfg.scenarios);
      const tmpc::RunResult r =
          tmpc::run_scenario(s, tmpc::controller_model(kind, cfg.params, net),
                             cfg.params, cfg.disturbance, cfg.ocp);
      ensure_parent(run_out);
      tmpc::write_log_csv(fs::path(run_out), r.log);
      const tmpc::LogMetrics m = tmpc::compute_metrics(r.log);
      std::cout << s.name << " / " << controller_name << ": MAE " << m.mae << " m over "
                << m.rows << " rows\n";
      return report_crash(r);
    }

    if (*report) {
      std::vector<tmpc::LabeledLog> logs;
      for (const std::string& path : report_logs) {
        const std::string stem = fs::path(path).stem().string();
        const auto dot = stem.rfind('.');
        if (dot == std::string::npos) {
          std::cerr << "log name must be <scenario>.<controller>.csv: " << path << "\n";
          return kExitUsage;
        }
        logs.push_back({stem.substr(0, dot), stem.substr(dot + 1),
                        tmpc::read_log_csv(fs::path(path)), false});
      }
      const tmpc::EvalReport rep = tmpc::evaluate(logs, cfg.params);
      ensure_parent(report_out);
      std::ofstream f(report_out);
      tmpc::write_report_csv(f, rep);
      std::cout << tmpc::format_report_table(rep);
      return kExitOk;
    }

    if (*print_config) {
      if (config_out.empty()) {
        tmpc::write_config(std::cout, cfg);
      } else {
        ensure_parent(config_out);
        std::ofstream f(config_out);
        tmpc::write_config(f, cfg);
      }
      return kExitOk;
    }

    if (*all) {
      const tmpc::PipelineResult r = tmpc::run_pipeline(cfg, out_dir, &std::cout);
      std::cout << "\n" << tmpc::format_report_table(r.report) << "\n";
      std::cout << "improvement l2:     " << tmpc::improvement_ratio(r.report, "l2") << "\n";
      std::cout << "improvement energy: " << tmpc::improvement_ratio(r.report, "energy")
                << "\n";
      return r.any_crash ? kExitCrash : kExitOk;
    }
  } catch (const tmpc::CrashError& e) {
    std::cerr << "crash: " << e.what() << "\n";
    return kExitCrash;
  } catch (const tmpc::GroundContactError& e) {
    std::cerr << "crash: " << e.what() << "\n";
    return kExitCrash;
  } catch (const tmpc::NonFiniteError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
