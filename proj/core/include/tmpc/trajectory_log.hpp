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

#ifndef TMPC_TRAJECTORY_LOG_HPP_
#define TMPC_TRAJECTORY_LOG_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tmpc/dynamics.hpp"

namespace tmpc {

struct TrajectoryRow {
  double t = 0.0;
  State x;             // measured state
  ControlInput u;      // applied input
  Vec3 a_model = Vec3::Zero();  // acceleration predicted by the controller's model
  Vec3 p_ref = Vec3::Zero();
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;
  std::string source;

  bool empty() const { return rows.empty(); }
  std::size_t size() const { return rows.size(); }
};

// Column order of the CSV schema.
const std::vector<std::string>& trajectory_log_columns();

void write_log_csv(std::ostream& os, const TrajectoryLog& log);
void write_log_csv(const std::filesystem::path& path, const TrajectoryLog& log);
TrajectoryLog read_log_csv(std::istream& is, std::string source = {});
TrajectoryLog read_log_csv(const std::filesystem::path& path);

// Appends b to a, shifting b's timestamps so they continue a's sampling.
TrajectoryLog concatenate(const TrajectoryLog& a, const TrajectoryLog& b,
                          double t_step);

}  // namespace tmpc

#endif  // TMPC_TRAJECTORY_LOG_HPP_
