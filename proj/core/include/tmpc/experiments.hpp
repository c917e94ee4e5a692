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

// Closed-loop simulation runs, data collection, evaluation and the full
// collect/train/evaluate pipeline.

#ifndef TMPC_EXPERIMENTS_HPP_
#define TMPC_EXPERIMENTS_HPP_

#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tmpc/config.hpp"
#include "tmpc/nmpc.hpp"
#include "tmpc/plant.hpp"
#include "tmpc/scenario.hpp"
#include "tmpc/trajectory_log.hpp"
#include "tmpc/training.hpp"

namespace tmpc {

enum class ControllerKind { kAnalytical, kL2, kEnergy };

const char* to_string(ControllerKind k);
ControllerKind parse_controller(const std::string& s);

inline constexpr double kCrashMinHeight = 0.02;     // m
inline constexpr double kCrashTrackingError = 2.0;  // m
inline constexpr double kCrashAttitudeError = std::numbers::pi / 2.0;

struct RunResult {
  TrajectoryLog log;
  bool crashed = false;
  std::string crash_reason;
  double crash_time = 0.0;
  int constraint_violations = 0;
  int qp_failures = 0;
  int solves = 0;
};

// Closed loop at t_samp: measure, solve_rti, hold the input on the plant for
// t_samp. Rows are logged every t_step. The plant noise stream is seeded from
// dist.rng_seed.
RunResult run_scenario(const Scenario& scenario, const DynamicsModel& model,
                       const PhysicalParams& plant_params,
                       const DisturbanceConfig& dist, const OcpConfig& ocp);

// Scripted excitation program under the analytical controller.
RunResult collect_data(double minutes, const PhysicalParams& params,
                       const DisturbanceConfig& dist, const OcpConfig& ocp,
                       const CollectionGeometry& geometry = {});

struct LogMetrics {
  double mae = 0.0;
  Vec3 mae_axis = Vec3::Zero();
  double accel_variance = 0.0;  // sum of per-axis variances of a_model
  std::size_t rows = 0;
};

LogMetrics compute_metrics(const TrajectoryLog& log);

// Rows whose input lies outside the thrust or servo bounds.
int count_constraint_violations(const TrajectoryLog& log,
                                const PhysicalParams& params);

struct EvalRow {
  std::string scenario;
  std::string controller;
  LogMetrics metrics;
  int constraint_violations = 0;
  bool crashed = false;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  const EvalRow* find(const std::string& scenario,
                      const std::string& controller) const;
};

struct LabeledLog {
  std::string scenario;
  std::string controller;
  TrajectoryLog log;
  bool crashed = false;
};

// Throws LengthMismatchError when logs of one scenario differ in length.
EvalReport evaluate(const std::vector<LabeledLog>& logs,
                    const PhysicalParams& params);

void write_report_csv(std::ostream& os, const EvalReport& report);
std::string format_report_table(const EvalReport& report);

// Mean over scenarios of (MAE_analytical - MAE_controller) / MAE_analytical.
double improvement_ratio(const EvalReport& report, const std::string& controller);

DynamicsModel controller_model(ControllerKind kind, const PhysicalParams& params,
                               const std::optional<MlpParams>& network);

struct PipelineResult {
  EvalReport report;
  MlpParams net_l2;
  MlpParams net_energy;
  double val_norm_l2 = 0.0;
  double val_norm_energy = 0.0;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  bool any_crash = false;
  std::vector<std::string> written;  // output files, in write order
};

// collect -> label -> split -> train (lambda_E = 0 and cfg.train.lambda_E) ->
// three scenarios x three controllers -> report. Outputs go to out_dir.
PipelineResult run_pipeline(const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir,
                            std::ostream* progress = nullptr);

}  // namespace tmpc

#endif  // TMPC_EXPERIMENTS_HPP_
