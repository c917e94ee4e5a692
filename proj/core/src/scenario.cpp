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

#include "tmpc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "tmpc/errors.hpp"

namespace tmpc {
namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat68 = Eigen::Matrix<double, 6, 8>;

constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }

Vec6 trim_residual(const PhysicalParams& params, const Vec8& u,
                   const Vec3& force_target) {
  const Wrench w = rotor_wrench(u.tail<4>(), u.head<4>(), params);
  Vec6 r;
  r << w.force_b - force_target, w.torque_b;
  return r;
}

// Smoothstep 3x^2 - 2x^3, its derivative and its integral from 0.
double smoothstep(double x) { return x * x * (3.0 - 2.0 * x); }
double smoothstep_rate(double x) { return 6.0 * x * (1.0 - x); }
double smoothstep_integral(double x) { return x * x * x - 0.5 * x * x * x * x; }

struct Segment {
  double t0 = 0.0;
  double duration = 0.0;
  PoseFn fn;
};

// Piecewise pose trajectory in global time; clamps outside its span.
class Piecewise {
 public:
  void append(double duration, PoseFn fn) {
    segments_.push_back({end_, duration, std::move(fn)});
    end_ += duration;
  }
  double end() const { return end_; }
  PoseSample operator()(double t) const {
    t = std::clamp(t, 0.0, end_);
    auto it = std::upper_bound(
        segments_.begin(), segments_.end(), t,
        [](double tt, const Segment& s) { return tt < s.t0; });
    const Segment& s = it == segments_.begin() ? segments_.front() : *(it - 1);
    return s.fn(std::min(t - s.t0, s.duration));
  }

 private:
  std::vector<Segment> segments_;
  double end_ = 0.0;
};

// Min-jerk move between positions with a roll angle blend about world x.
PoseFn move(const Vec3& p0, const Vec3& p1, double roll0, double roll1,
            double duration) {
  return [=](double tau) {
    const Blend b = min_jerk(tau / duration);
    PoseSample ps;
    ps.p = p0 + (p1 - p0) * b.s;
    ps.v = (p1 - p0) * b.ds / duration;
    ps.a = (p1 - p0) * b.dds / (duration * duration);
    const double roll = roll0 + (roll1 - roll0) * b.s;
    ps.q = Eigen::Quaterniond(Eigen::AngleAxisd(roll, Vec3::UnitX()));
    ps.omega_w = Vec3::UnitX() * (roll1 - roll0) * b.ds / duration;
    return ps;
  };
}

PoseFn hold(const Vec3& p, double roll, double duration) {
  return move(p, p, roll, roll, duration);
}

// One full revolution starting and ending at start, centred at
// start - radius * e_x, with smoothstep ramps of the angular rate.
PoseFn circle_loop(const Vec3& start, double radius, double freq, double ramp,
                   double* duration_out) {
  const double w = 2.0 * kPi * freq;
  const double cruise = (2.0 * kPi - w * ramp) / w;
  if (!(cruise >= 0.0)) throw InvalidArgument("circle_loop: ramp too long");
  *duration_out = 2.0 * ramp + cruise;
  const Vec3 centre = start - radius * Vec3::UnitX();
  return [=](double tau) {
    double th = 0.0, dth = 0.0, ddth = 0.0;
    if (tau < ramp) {
      const double x = tau / ramp;
      th = w * ramp * smoothstep_integral(x);
      dth = w * smoothstep(x);
      ddth = w * smoothstep_rate(x) / ramp;
    } else if (tau < ramp + cruise) {
      th = 0.5 * w * ramp + w * (tau - ramp);
      dth = w;
    } else {
      const double x = std::min((tau - ramp - cruise) / ramp, 1.0);
      th = 0.5 * w * ramp + w * cruise + w * ramp * (x - smoothstep_integral(x));
      dth = w * (1.0 - smoothstep(x));
      ddth = -w * smoothstep_rate(x) / ramp;
    }
    const double c = std::cos(th), s = std::sin(th);
    PoseSample ps;
    ps.p = centre + radius * Vec3(c, s, 0.0);
    ps.v = radius * dth * Vec3(-s, c, 0.0);
    ps.a = radius * (Vec3(-c, -s, 0.0) * dth * dth + Vec3(-s, c, 0.0) * ddth);
    return ps;
  };
}

Scenario from_pose(std::string name, double duration, PoseFn pose,
                   const PhysicalParams& params, double takeoff_complete) {
  Scenario s;
  s.name = std::move(name);
  s.duration = duration;
  const PoseSample p0 = pose(0.0);
  s.initial_state = make_reference(params, p0).x_ref;
  s.initial_state.v.setZero();
  s.initial_state.omega_b.setZero();
  s.reference_fn = [params, pose = std::move(pose)](double t) {
    return make_reference(params, pose(t));
  };
  s.takeoff_complete_time = takeoff_complete;
  return s;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Blend min_jerk(double x) {
  x = std::clamp(x, 0.0, 1.0);
  const double x2 = x * x, x3 = x2 * x;
  Blend b;
  b.s = x3 * (10.0 - 15.0 * x + 6.0 * x2);
  b.ds = 30.0 * x2 * (1.0 - 2.0 * x + x2);
  b.dds = 60.0 * x * (1.0 - 3.0 * x + 2.0 * x2);
  return b;
}

ControlInput trim_input(const PhysicalParams& params,
                        const Eigen::Quaterniond& q, const Vec3& accel_w) {
  const Vec3 force_target = q.normalized().toRotationMatrix().transpose() *
                            (params.mass_kg * (accel_w + params.g * Vec3::UnitZ()));
  Vec8 u;
  u.head<4>().setConstant(params.mass_kg * params.g / kNumRotors);
  u.tail<4>().setZero();
  constexpr double kStep = 1e-6;
  for (int it = 0; it < 50; ++it) {
    const Vec6 r = trim_residual(params, u, force_target);
    if (r.lpNorm<Eigen::Infinity>() < 1e-11) break;
    Mat68 J;
    for (int j = 0; j < 8; ++j) {
      Vec8 up = u, um = u;
      up[j] += kStep;
      um[j] -= kStep;
      J.col(j) = (trim_residual(params, up, force_target) -
                  trim_residual(params, um, force_target)) /
                 (2.0 * kStep);
    }
    const Eigen::Matrix<double, 6, 6> JJt =
        J * J.transpose() + 1e-10 * Eigen::Matrix<double, 6, 6>::Identity();
    u -= J.transpose() * JJt.ldlt().solve(r);
  }
  ControlInput out;
  for (int r = 0; r < kNumRotors; ++r) {
    out.f[r] = std::clamp(u[r], params.f_min, params.f_max);
    out.alpha_c[r] =
        std::clamp(u[4 + r], -params.servo_limit_rad, params.servo_limit_rad);
  }
  return out;
}

ReferencePoint make_reference(const PhysicalParams& params,
                              const PoseSample& pose) {
  ReferencePoint ref;
  ref.u_ref = trim_input(params, pose.q, pose.a);
  ref.x_ref.p = pose.p;
  ref.x_ref.v = pose.v;
  ref.x_ref.q = pose.q.normalized();
  ref.x_ref.omega_b = ref.x_ref.q.toRotationMatrix().transpose() * pose.omega_w;
  ref.x_ref.alpha_s = ref.u_ref.alpha_c;
  return ref;
}

Scenario takeoff_hover_scenario(const PhysicalParams& params,
                                const TakeoffGeometry& g) {
  if (!(g.climb_time > 0.0 && g.hold_time >= 0.0 && g.z_start > 0.0)) {
    throw InvalidArgument("takeoff geometry");
  }
  Piecewise pw;
  pw.append(g.climb_time, move(Vec3(0, 0, g.z_start), Vec3(0, 0, g.z_hover),
                               0.0, 0.0, g.climb_time));
  if (g.hold_time > 0.0) {
    pw.append(g.hold_time, hold(Vec3(0, 0, g.z_hover), 0.0, g.hold_time));
  }
  return from_pose("takeoff-hover", pw.end(), pw, params, g.climb_time);
}

Scenario circle_scenario(const PhysicalParams& params, const CircleGeometry& g) {
  if (!(g.radius > 0.0 && g.frequency_hz > 0.0 && g.duration > 0.0 &&
        g.ramp_time > 0.0 && g.ramp_time < g.duration)) {
    throw InvalidArgument("circle geometry");
  }
  const double w = 2.0 * kPi * g.frequency_hz;
  const double T = g.ramp_time;
  const Vec3 centre(0.0, 0.0, g.height);
  const double r = g.radius;
  PoseFn pose = [=](double t) {
    double th, dth, ddth;
    if (t < T) {
      const double x = std::max(t, 0.0) / T;
      th = w * T * smoothstep_integral(x);
      dth = w * smoothstep(x);
      ddth = w * smoothstep_rate(x) / T;
    } else {
      th = 0.5 * w * T + w * (t - T);
      dth = w;
      ddth = 0.0;
    }
    const double c = std::cos(th), s = std::sin(th);
    PoseSample ps;
    ps.p = centre + r * Vec3(c, s, 0.0);
    ps.v = r * dth * Vec3(-s, c, 0.0);
    ps.a = r * (Vec3(-c, -s, 0.0) * dth * dth + Vec3(-s, c, 0.0) * ddth);
    return ps;
  };
  return from_pose("circle", g.duration, std::move(pose), params, 0.0);
}

Scenario setpoint_scenario(const PhysicalParams& params,
                           const SetpointGeometry& g) {
  if (!(g.segment_time > g.transition_time && g.transition_time > 0.0)) {
    throw InvalidArgument("setpoint geometry");
  }
  const Vec3 start(0.0, 0.0, 1.0);
  const double roll = deg2rad(g.roll_deg);
  const double rest = g.segment_time - g.transition_time;
  Piecewise pw;
  pw.append(g.transition_time, move(start, g.position, 0.0, 0.0, g.transition_time));
  pw.append(rest, hold(g.position, 0.0, rest));
  pw.append(g.transition_time,
            move(g.position, g.position, 0.0, roll, g.transition_time));
  pw.append(rest, hold(g.position, roll, rest));
  return from_pose("setpoint", pw.end(), pw, params, 0.0);
}

Scenario hover_scenario(const PhysicalParams& params, const Vec3& position,
                        double duration) {
  if (!(duration > 0.0)) throw InvalidArgument("hover duration must be > 0");
  return from_pose("hover", duration, hold(position, 0.0, duration), params, 0.0);
}

Scenario data_collection_scenario(const PhysicalParams& params, double duration,
                                  const CollectionGeometry& g) {
  if (!(duration > 0.0)) throw InvalidArgument("collection duration must be > 0");
  std::mt19937_64 rng(g.seed);
  const double tilt = deg2rad(g.tilt_deg);
  const Vec3 low(0.0, 0.0, g.low_height);
  Piecewise pw;
  while (pw.end() < duration) {
    const double jx = 0.4 * (uniform01(rng) - 0.5);
    const double jy = 0.4 * (uniform01(rng) - 0.5);
    const Vec3 low_here = low + Vec3(jx, jy, 0.05 * uniform01(rng));
    pw.append(2.5, move(low, low_here, 0.0, 0.0, 2.5));
    pw.append(4.0, hold(low_here, 0.0, 4.0));

    const Vec3 cruise(0.3 * (uniform01(rng) - 0.5), 0.3 * (uniform01(rng) - 0.5),
                      g.cruise_height + 0.3 * (uniform01(rng) - 0.5));
    pw.append(3.0, move(low_here, cruise, 0.0, 0.0, 3.0));
    pw.append(1.5, hold(cruise, 0.0, 1.5));

    double loop_time = 0.0;
    const double radius = g.circle_radius * (0.8 + 0.4 * uniform01(rng));
    const double freq = 0.12 + 0.08 * uniform01(rng);
    PoseFn loop = circle_loop(cruise, radius, freq, 2.0, &loop_time);
    pw.append(loop_time, std::move(loop));

    const Vec3 tilt_pos = cruise + Vec3(0.2 * (uniform01(rng) - 0.5),
                                        0.2 * (uniform01(rng) - 0.5), 0.2);
    const double a = tilt * (0.7 + 0.3 * uniform01(rng));
    pw.append(2.0, move(cruise, tilt_pos, 0.0, 0.0, 2.0));
    pw.append(2.0, move(tilt_pos, tilt_pos, 0.0, a, 2.0));
    pw.append(2.5, hold(tilt_pos, a, 2.5));
    pw.append(3.0, move(tilt_pos, tilt_pos, a, -a, 3.0));
    pw.append(2.5, hold(tilt_pos, -a, 2.5));
    pw.append(2.0, move(tilt_pos, tilt_pos, -a, 0.0, 2.0));
    pw.append(4.0, move(tilt_pos, low, 0.0, 0.0, 4.0));
  }
  return from_pose("data-collection", duration, pw, params, 0.0);
}

std::vector<Scenario> evaluation_scenarios(const PhysicalParams& params,
                                           const ScenarioGeometry& g) {
  return {takeoff_hover_scenario(params, g.takeoff),
          circle_scenario(params, g.circle),
          setpoint_scenario(params, g.setpoint)};
}

Scenario scenario_by_name(const std::string& name, const PhysicalParams& params,
                          const ScenarioGeometry& g) {
  if (name == "takeoff-hover") return takeoff_hover_scenario(params, g.takeoff);
  if (name == "circle") return circle_scenario(params, g.circle);
  if (name == "setpoint") return setpoint_scenario(params, g.setpoint);
  throw InvalidArgument("unknown scenario: " + name);
}

std::vector<ReferencePoint> horizon_references(const Scenario& s, double t,
                                               int horizon_N, double t_step) {
  std::vector<ReferencePoint> refs;
  refs.reserve(static_cast<std::size_t>(horizon_N) + 1);
  for (int k = 0; k <= horizon_N; ++k) refs.push_back(s.reference_fn(t + k * t_step));
  return refs;
}

}  // namespace tmpc
