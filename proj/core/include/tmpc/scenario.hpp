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

#ifndef TMPC_SCENARIO_HPP_
#define TMPC_SCENARIO_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tmpc/dynamics.hpp"
#include "tmpc/nmpc.hpp"

namespace tmpc {

// Kinematic reference sample: world-frame position derivatives, attitude and
// world-frame angular velocity.
struct PoseSample {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Vec3 omega_w = Vec3::Zero();
};

using PoseFn = std::function<PoseSample(double)>;

// Thrusts and servo angles producing zero torque and the body force that
// yields world acceleration accel_w at attitude q. Damped least squares from
// the hover input; the result is clamped to the input bounds.
ControlInput trim_input(const PhysicalParams& params,
                        const Eigen::Quaterniond& q, const Vec3& accel_w);

// Reference state and feed-forward input for a pose sample.
ReferencePoint make_reference(const PhysicalParams& params,
                              const PoseSample& pose);

struct Scenario {
  std::string name;
  double duration = 0.0;
  std::function<ReferencePoint(double)> reference_fn;
  State initial_state;
  // Ground-proximity crash checks apply from this time on.
  double takeoff_complete_time = 0.0;
};

struct TakeoffGeometry {
  double z_start = 0.1;
  double z_hover = 1.0;
  double climb_time = 3.0;
  double hold_time = 7.0;
};

struct CircleGeometry {
  double radius = 0.8;
  double frequency_hz = 0.1;
  double height = 1.0;
  double duration = 30.0;
  double ramp_time = 2.5;
};

struct SetpointGeometry {
  Vec3 position{0.3, 0.2, 1.2};
  double roll_deg = 45.0;
  double segment_time = 10.0;
  double transition_time = 1.5;
};

struct CollectionGeometry {
  double low_height = 0.15;
  double cruise_height = 1.0;
  double circle_radius = 0.6;
  double tilt_deg = 45.0;
  std::uint64_t seed = 11;
};

struct ScenarioGeometry {
  TakeoffGeometry takeoff;
  CircleGeometry circle;
  SetpointGeometry setpoint;
  CollectionGeometry collection;
};

// Quintic minimum-jerk blend s(x) on [0, 1] and its first two derivatives.
struct Blend {
  double s = 0.0;
  double ds = 0.0;
  double dds = 0.0;
};
Blend min_jerk(double x);

Scenario takeoff_hover_scenario(const PhysicalParams& params,
                                const TakeoffGeometry& g = {});
Scenario circle_scenario(const PhysicalParams& params,
                         const CircleGeometry& g = {});
Scenario setpoint_scenario(const PhysicalParams& params,
                           const SetpointGeometry& g = {});
// Stationary hover at position for the given duration.
Scenario hover_scenario(const PhysicalParams& params, const Vec3& position,
                        double duration);
// Scripted excitation program: low hovers in ground effect, climbs, planar
// circles and roll tilts, repeated with seeded variations until the
// duration is filled.
Scenario data_collection_scenario(const PhysicalParams& params,
                                  double duration,
                                  const CollectionGeometry& g = {});

// The three evaluation scenarios, in report order.
std::vector<Scenario> evaluation_scenarios(const PhysicalParams& params,
                                           const ScenarioGeometry& g = {});

Scenario scenario_by_name(const std::string& name,
                          const PhysicalParams& params,
                          const ScenarioGeometry& g = {});

// refs at t, t + t_step, ..., t + N * t_step.
std::vector<ReferencePoint> horizon_references(const Scenario& s, double t,
                                               int horizon_N, double t_step);

}  // namespace tmpc

#endif  // TMPC_SCENARIO_HPP_
