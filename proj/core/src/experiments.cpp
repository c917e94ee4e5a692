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

#include "tmpc/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "tmpc/errors.hpp"
#include "tmpc/so3.hpp"

namespace tmpc {
namespace {

std::string fmt(double v) {
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::string fixed(double v, int prec) {
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.*f", prec, v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

bool within_bounds(const ControlInput& u, const PhysicalParams& p) {
  for (int r = 0; r < kNumRotors; ++r) {
    if (!(u.f[r] >= p.f_min && u.f[r] <= p.f_max)) return false;
    if (!(std::abs(u.alpha_c[r]) <= p.servo_limit_rad)) return false;
  }
  return true;
}

int ratio_steps(double a, double b, const char* what) {
  const double r = a / b;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9) {
    throw InvalidArgument(std::string(what) + " must be an integer multiple");
  }
  return static_cast<int>(n);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace

const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::kAnalytical:
      return "analytical";
    case ControllerKind::kL2:
      return "l2";
    case ControllerKind::kEnergy:
      return "energy";
  }
  return "analytical";
}

ControllerKind parse_controller(const std::string& s) {
  if (s == "analytical") return ControllerKind::kAnalytical;
  if (s == "l2") return ControllerKind::kL2;
  if (s == "energy") return ControllerKind::kEnergy;
  throw InvalidArgument("unknown controller: " + s);
}

RunResult run_scenario(const Scenario& scenario, const DynamicsModel& model,
                       const PhysicalParams& plant_params,
                       const DisturbanceConfig& dist, const OcpConfig& ocp) {
  ocp.validate();
  model.validate();
  dist.validate();
  plant_params.validate();
  if (!(scenario.duration > 0.0)) throw InvalidArgument("scenario duration must be > 0");
  const int log_every = ratio_steps(ocp.t_step, ocp.t_samp, "t_step / t_samp");
  const long steps = std::lround(scenario.duration / ocp.t_samp);

  RunResult out;
  out.log.source = scenario.name;
  PlantState ps = make_plant_state(scenario.initial_state, dist);
  SolverMemory mem = SolverMemory::cold_start(
      scenario.initial_state, scenario.reference_fn(0.0).u_ref, ocp.horizon_N);

  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * ocp.t_samp;
    const State x_hat = measure(ps, dist);
    const auto refs = horizon_references(scenario, t, ocp.horizon_N, ocp.t_step);
    const RtiResult res = solve_rti(mem, x_hat, refs, ocp, model);
    ++out.solves;
    if (res.status == SolveStatus::kQpFailed) ++out.qp_failures;
    if (!within_bounds(res.u_star_0, plant_params)) ++out.constraint_violations;

    if (k % log_every == 0) {
      TrajectoryRow row;
      row.t = t;
      row.x = x_hat;
      row.u = res.u_star_0;
      row.a_model = model.predicted_acceleration(x_hat, res.u_star_0);
      row.p_ref = refs[0].x_ref.p;
      out.log.rows.push_back(row);
    }

    const State& xt = ps.true_state;
    const double track = (refs[0].x_ref.p - xt.p).norm();
    const double att = so3::log(refs[0].x_ref.q * xt.q.conjugate()).norm();
    std::string reason;
    if (t >= scenario.takeoff_complete_time && xt.p.z() < kCrashMinHeight) {
      reason = "below minimum height";
    } else if (track > kCrashTrackingError) {
      reason = "tracking error above limit";
    } else if (att > kCrashAttitudeError) {
      reason = "attitude error above limit";
    }
    if (reason.empty()) {
      try {
        ps = plant_step(std::move(ps), res.u_star_0, ocp.t_samp, dist, plant_params);
      } catch (const GroundContactError& e) {
        reason = e.what();
      }
    }
    if (!reason.empty()) {
      out.crashed = true;
      out.crash_reason = reason;
      out.crash_time = t;
      break;
    }
  }
  return out;
}

RunResult collect_data(double minutes, const PhysicalParams& params,
                       const DisturbanceConfig& dist, const OcpConfig& ocp,
                       const CollectionGeometry& geometry) {
  if (!(minutes > 0.0)) throw InvalidArgument("collect_data: minutes must be > 0");
  const Scenario s = data_collection_scenario(params, minutes * 60.0, geometry);
  return run_scenario(s, DynamicsModel::analytical(params), params, dist, ocp);
}

LogMetrics compute_metrics(const TrajectoryLog& log) {
  LogMetrics m;
  m.rows = log.size();
  if (log.empty()) return m;
  const double n = static_cast<double>(log.size());
  Vec3 a_mean = Vec3::Zero();
  for (const TrajectoryRow& r : log.rows) {
    const Vec3 e = r.p_ref - r.x.p;
    m.mae += e.norm();
    m.mae_axis += e.cwiseAbs();
    a_mean += r.a_model;
  }
  m.mae /= n;
  m.mae_axis /= n;
  a_mean /= n;
  for (const TrajectoryRow& r : log.rows) {
    m.accel_variance += (r.a_model - a_mean).squaredNorm();
  }
  m.accel_variance /= n;
  return m;
}

int count_constraint_violations(const TrajectoryLog& log,
                                const PhysicalParams& params) {
  int n = 0;
  for (const TrajectoryRow& r : log.rows) n += within_bounds(r.u, params) ? 0 : 1;
  return n;
}

const EvalRow* EvalReport::find(const std::string& scenario,
                                const std::string& controller) const {
  for (const EvalRow& r : rows) {
    if (r.scenario == scenario && r.controller == controller) return &r;
  }
  return nullptr;
}

EvalReport evaluate(const std::vector<LabeledLog>& logs,
                    const PhysicalParams& params) {
  std::map<std::string, std::size_t> lengths;
  for (const LabeledLog& l : logs) {
    if (l.crashed) continue;
    auto [it, inserted] = lengths.emplace(l.scenario, l.log.size());
    if (!inserted && it->second != l.log.size()) {
      throw LengthMismatchError("evaluate: logs of scenario " + l.scenario +
                                " differ in length");
    }
  }
  EvalReport report;
  for (const LabeledLog& l : logs) {
    EvalRow row;
    row.scenario = l.scenario;
    row.controller = l.controller;
    row.metrics = compute_metrics(l.log);
    row.constraint_violations = count_constraint_violations(l.log, params);
    row.crashed = l.crashed;
    report.rows.push_back(row);
  }
  return report;
}

void write_report_csv(std::ostream& os, const EvalReport& report) {
  os << "scenario,controller,mae,mae_x,mae_y,mae_z,accel_variance,"
        "constraint_violations,crashed,rows\n";
  for (const EvalRow& r : report.rows) {
    os << r.scenario << ',' << r.controller << ',' << fmt(r.metrics.mae) << ','
       << fmt(r.metrics.mae_axis.x()) << ',' << fmt(r.metrics.mae_axis.y()) << ','
       << fmt(r.metrics.mae_axis.z()) << ',' << fmt(r.metrics.accel_variance)
       << ',' << r.constraint_violations << ',' << (r.crashed ? 1 : 0) << ','
       << r.metrics.rows << '\n';
  }
}

std::string format_report_table(const EvalReport& report) {
  const std::array<std::string, 9> head{"scenario", "controller", "MAE [m]",
                                        "MAE x",    "MAE y",      "MAE z",
                                        "acc var",  "violations", "crashed"};
  std::vector<std::array<std::string, 9>> cells;
  cells.push_back(head);
  for (const EvalRow& r : report.rows) {
    cells.push_back({r.scenario, r.controller, fixed(r.metrics.mae, 4),
                     fixed(r.metrics.mae_axis.x(), 4),
                     fixed(r.metrics.mae_axis.y(), 4),
                     fixed(r.metrics.mae_axis.z(), 4),
                     fixed(r.metrics.accel_variance, 4),
                     std::to_string(r.constraint_violations),
                     r.crashed ? "yes" : "no"});
  }
  std::array<std::size_t, 9> width{};
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream os;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    for (std::size_t i = 0; i < cells[k].size(); ++i) {
      const std::string& c = cells[k][i];
      const std::string pad(width[i] - c.size(), ' ');
      os << (i ? "  " : "") << (i < 2 ? c + pad : pad + c);
    }
    os << '\n';
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return os.str();
}

double improvement_ratio(const EvalReport& report, const std::string& controller) {
  double sum = 0.0;
  int n = 0;
  for (const EvalRow& r : report.rows) {
    if (r.controller != "analytical") continue;
    const EvalRow* other = report.find(r.scenario, controller);
    if (other == nullptr || !(r.metrics.mae > 0.0)) continue;
    sum += (r.metrics.mae - other->metrics.mae) / r.metrics.mae;
    ++n;
  }
  if (n == 0) throw EmptyDataError("improvement_ratio: no comparable scenarios");
  return sum / n;
}

DynamicsModel controller_model(ControllerKind kind, const PhysicalParams& params,
                               const std::optional<MlpParams>& network) {
  if (kind == ControllerKind::kAnalytical) return DynamicsModel::analytical(params);
  if (!network) {
    throw InvalidArgument(std::string("controller ") + to_string(kind) +
                          " needs a checkpoint");
  }
  return DynamicsModel::neural(params, *network);
}

PipelineResult run_pipeline(const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir,
                            std::ostream* progress) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  PipelineResult result;
  auto note = [&](const std::string& msg) {
    if (progress != nullptr) *progress << msg << std::endl;
  };
  auto emit = [&](const std::string& name, const std::string& text) {
    write_file(out_dir / name, text);
    result.written.push_back(name);
  };

  note("collecting " + fixed(cfg.collect_minutes, 2) + " min of flight data");
  const RunResult collected =
      collect_data(cfg.collect_minutes, cfg.params, cfg.disturbance, cfg.ocp,
                   cfg.scenarios.collection);
  if (collected.crashed) {
    throw CrashError("data collection crashed at t=" + fixed(collected.crash_time, 3) +
                     " s: " + collected.crash_reason);
  }
  {
    std::ostringstream os;
    write_log_csv(os, collected.log);
    emit("collection.csv", os.str());
  }

  const Dataset all = make_labels(collected.log, cfg.params, cfg.ocp.t_step);
  auto [train_set, val_set] = split_train_validation(
      all, cfg.train.val_fraction, cfg.train.seed);
  train_set.stats = compute_stats(train_set.samples);
  val_set.stats = train_set.stats;
  result.train_samples = train_set.size();
  result.val_samples = val_set.size();

  TrainConfig cfg_l2 = cfg.train;
  cfg_l2.lambda_E = 0.0;
  note("training lambda_E = 0 on " + std::to_string(train_set.size()) + " samples");
  const TrainResult tr_l2 = train(train_set, cfg_l2, cfg.params);
  note("training lambda_E = " + fmt(cfg.train.lambda_E));
  const TrainResult tr_en = train(train_set, cfg.train, cfg.params);
  result.net_l2 = tr_l2.params;
  result.net_energy = tr_en.params;
  save_checkpoint(out_dir / "net_l2.bin", tr_l2.params);
  result.written.push_back("net_l2.bin");
  save_checkpoint(out_dir / "net_energy.bin", tr_en.params);
  result.written.push_back("net_energy.bin");
  {
    std::ostringstream a, b;
    write_training_curve_csv(a, tr_l2.curve);
    write_training_curve_csv(b, tr_en.curve);
    emit("curve_l2.csv", a.str());
    emit("curve_energy.csv", b.str());
  }
  const Dataset& val_eval = val_set.empty() ? train_set : val_set;
  result.val_norm_l2 = mean_prediction_norm(tr_l2.params, val_eval);
  result.val_norm_energy = mean_prediction_norm(tr_en.params, val_eval);

  std::vector<LabeledLog> logs;
  const std::array<ControllerKind, 3> kinds{
      ControllerKind::kAnalytical, ControllerKind::kL2, ControllerKind::kEnergy};
  for (const Scenario& s : evaluation_scenarios(cfg.params, cfg.scenarios)) {
    for (ControllerKind kind : kinds) {
      const std::optional<MlpParams> net =
          kind == ControllerKind::kL2       ? std::optional<MlpParams>(tr_l2.params)
          : kind == ControllerKind::kEnergy ? std::optional<MlpParams>(tr_en.params)
                                            : std::nullopt;
      note("running " + s.name + " with " + to_string(kind));
      const RunResult run = run_scenario(s, controller_model(kind, cfg.params, net),
                                         cfg.params, cfg.disturbance, cfg.ocp);
      if (run.crashed) {
        result.any_crash = true;
        note("  crashed at t=" + fixed(run.crash_time, 3) + " s: " + run.crash_reason);
      }
      std::ostringstream os;
      write_log_csv(os, run.log);
      emit(s.name + "." + to_string(kind) + ".csv", os.str());
      logs.push_back({s.name, to_string(kind), run.log, run.crashed});
    }
  }

  result.report = evaluate(logs, cfg.params);
  {
    std::ostringstream os;
    write_report_csv(os, result.report);
    emit("report.csv", os.str());
  }
  emit("report.txt", format_report_table(result.report));
  {
    std::ostringstream os;
    os << "metric,value\n";
    os << "train_samples," << result.train_samples << '\n';
    os << "val_samples," << result.val_samples << '\n';
    os << "val_mean_norm_l2," << fmt(result.val_norm_l2) << '\n';
    os << "val_mean_norm_energy," << fmt(result.val_norm_energy) << '\n';
    os << "improvement_l2," << fmt(improvement_ratio(result.report, "l2")) << '\n';
    os << "improvement_energy," << fmt(improvement_ratio(result.report, "energy"))
       << '\n';
    emit("summary.csv", os.str());
  }
  return result;
}

}  // namespace tmpc
