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

#include "tmpc/trajectory_log.hpp"

#include <array>
#include <algorithm>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tmpc/errors.hpp"

namespace tmpc {
namespace {

constexpr std::size_t kNumColumns = 32;

std::string format_double(double v) {
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::array<double, kNumColumns> to_fields(const TrajectoryRow& r) {
  return {r.t,
          r.x.p.x(), r.x.p.y(), r.x.p.z(),
          r.x.v.x(), r.x.v.y(), r.x.v.z(),
          r.x.q.w(), r.x.q.x(), r.x.q.y(), r.x.q.z(),
          r.x.omega_b.x(), r.x.omega_b.y(), r.x.omega_b.z(),
          r.x.alpha_s[0], r.x.alpha_s[1], r.x.alpha_s[2], r.x.alpha_s[3],
          r.u.f[0], r.u.f[1], r.u.f[2], r.u.f[3],
          r.u.alpha_c[0], r.u.alpha_c[1], r.u.alpha_c[2], r.u.alpha_c[3],
          r.a_model.x(), r.a_model.y(), r.a_model.z(),
          r.p_ref.x(), r.p_ref.y(), r.p_ref.z()};
}

}  // namespace

const std::vector<std::string>& trajectory_log_columns() {
  static const std::vector<std::string> cols{
      "t",   "px",  "py",  "pz",  "vx",  "vy",  "vz",  "qw",  "qx",
      "qy",  "qz",  "wx",  "wy",  "wz",  "a1",  "a2",  "a3",  "a4",
      "f1",  "f2",  "f3",  "f4",  "ac1", "ac2", "ac3", "ac4", "am_x",
      "am_y", "am_z", "rx", "ry",  "rz"};
  return cols;
}

void write_log_csv(std::ostream& os, const TrajectoryLog& log) {
  const auto& cols = trajectory_log_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    os << (i ? "," : "") << cols[i];
  }
  os << '\n';
  for (const TrajectoryRow& r : log.rows) {
    const auto fields = to_fields(r);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      os << (i ? "," : "") << format_double(fields[i]);
    }
    os << '\n';
  }
}

void write_log_csv(const std::filesystem::path& path, const TrajectoryLog& log) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot open log for writing: " + path.string());
  write_log_csv(f, log);
  if (!f) throw Error("failed writing log: " + path.string());
}

TrajectoryLog read_log_csv(std::istream& is, std::string source) {
  const auto& cols = trajectory_log_columns();
  TrajectoryLog log;
  log.source = std::move(source);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("log is empty (missing header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::vector<std::string> header;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
    if (header != cols) throw FormatError("unexpected log header: " + line);
  }
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != kNumColumns) {
      throw FormatError("wrong column count on line " + std::to_string(line_no));
    }
    std::array<double, kNumColumns> v{};
    for (std::size_t i = 0; i < kNumColumns; ++i) {
      char* parse_end = nullptr;
      v[i] = std::strtod(fields[i].c_str(), &parse_end);
      if (fields[i].empty() || parse_end != fields[i].c_str() + fields[i].size()) {
        throw FormatError("bad number on line " + std::to_string(line_no));
      }
    }
    TrajectoryRow r;
    r.t = v[0];
    r.x.p = {v[1], v[2], v[3]};
    r.x.v = {v[4], v[5], v[6]};
    r.x.q = Eigen::Quaterniond(v[7], v[8], v[9], v[10]);
    r.x.omega_b = {v[11], v[12], v[13]};
    r.x.alpha_s = {v[14], v[15], v[16], v[17]};
    r.u.f = {v[18], v[19], v[20], v[21]};
    r.u.alpha_c = {v[22], v[23], v[24], v[25]};
    r.a_model = {v[26], v[27], v[28]};
    r.p_ref = {v[29], v[30], v[31]};
    log.rows.push_back(r);
  }
  return log;
}

TrajectoryLog read_log_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open log: " + path.string());
  return read_log_csv(f, path.string());
}

TrajectoryLog concatenate(const TrajectoryLog& a, const TrajectoryLog& b,
                          double t_step) {
  TrajectoryLog out = a;
  if (b.empty()) return out;
  const double offset =
      a.empty() ? 0.0 : a.rows.back().t + t_step - b.rows.front().t;
  for (TrajectoryRow r : b.rows) {
    r.t += offset;
    out.rows.push_back(r);
  }
  if (!b.source.empty()) {
    out.source = out.source.empty() ? b.source : out.source + "+" + b.source;
  }
  return out;
}

}  // namespace tmpc
