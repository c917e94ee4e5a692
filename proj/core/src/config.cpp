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

#include "tmpc/config.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tmpc/errors.hpp"

namespace tmpc {
namespace {

struct Field {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

struct Section {
  std::string name;
  std::vector<Field> fields;
};

std::string fmt(double v) {
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text) {
  std::string s = text;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) {
      throw ConfigError("bad number '" + tok + "' for " + key);
    }
    out.push_back(v);
  }
  return out;
}

double parse_scalar(const std::string& key, const std::string& text) {
  const auto v = parse_numbers(key, text);
  if (v.size() != 1) throw ConfigError(key + " expects one number");
  return v[0];
}

std::vector<double> parse_fixed(const std::string& key, const std::string& text,
                                std::size_t n) {
  auto v = parse_numbers(key, text);
  if (v.size() != n) {
    throw ConfigError(key + " expects " + std::to_string(n) + " numbers, got " +
                      std::to_string(v.size()));
  }
  return v;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  long long v = 0;
  std::string rest;
  if (!(is >> v) || (is >> rest)) throw ConfigError("bad integer for " + key);
  if constexpr (std::is_unsigned_v<T>) {
    if (v < 0) throw ConfigError(key + " must be >= 0");
  }
  return static_cast<T>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("bad boolean for " + key);
}

template <typename Derived>
std::string join(const Eigen::DenseBase<Derived>& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += (i ? " " : "") + fmt(v.derived().data()[i]);
  }
  return out;
}

Field scalar(std::string key, double& ref) {
  return {key, [&ref, key](const std::string& s) { ref = parse_scalar(key, s); },
          [&ref] { return fmt(ref); }};
}

template <typename T>
Field integer(std::string key, T& ref) {
  return {key, [&ref, key](const std::string& s) { ref = parse_integer<T>(key, s); },
          [&ref] { return std::to_string(ref); }};
}

template <typename V>
Field vector(std::string key, V& ref) {
  return {key,
          [&ref, key](const std::string& s) {
            const auto v = parse_fixed(key, s, static_cast<std::size_t>(ref.size()));
            for (Eigen::Index i = 0; i < ref.size(); ++i) ref[i] = v[static_cast<std::size_t>(i)];
          },
          [&ref] { return join(ref); }};
}

std::vector<Section> sections(ExperimentConfig& c) {
  PhysicalParams& p = c.params;
  DisturbanceConfig& d = c.disturbance;
  OcpConfig& o = c.ocp;
  TrainConfig& t = c.train;
  ScenarioGeometry& g = c.scenarios;

  Section params{"params", {}};
  params.fields = {
      scalar("mass_kg", p.mass_kg),
      vector("inertia_diag", p.inertia_diag),
      scalar("k_t", p.k_t),
      scalar("k_q", p.k_q),
      {"rotor_pos_body",
       [&p](const std::string& s) {
         const auto v = parse_fixed("rotor_pos_body", s, 12);
         for (int r = 0; r < kNumRotors; ++r) {
           p.rotor_pos_body[r] = Vec3(v[3 * r], v[3 * r + 1], v[3 * r + 2]);
         }
       },
       [&p] {
         std::string out;
         for (int r = 0; r < kNumRotors; ++r) out += (r ? " " : "") + join(p.rotor_pos_body[r]);
         return out;
       }},
      {"rotor_dir",
       [&p](const std::string& s) {
         const auto v = parse_fixed("rotor_dir", s, 4);
         for (int r = 0; r < kNumRotors; ++r) p.rotor_dir[r] = v[r];
       },
       [&p] {
         std::string out;
         for (int r = 0; r < kNumRotors; ++r) out += (r ? " " : "") + fmt(p.rotor_dir[r]);
         return out;
       }},
      // Four row-major 3x3 matrices.
      {"arm_rot_body",
       [&p](const std::string& s) {
         const auto v = parse_fixed("arm_rot_body", s, 36);
         for (int r = 0; r < kNumRotors; ++r) {
           for (int i = 0; i < 3; ++i) {
             for (int j = 0; j < 3; ++j) p.arm_rot_body[r](i, j) = v[9 * r + 3 * i + j];
           }
         }
       },
       [&p] {
         std::string out;
         for (int r = 0; r < kNumRotors; ++r) {
           for (int i = 0; i < 3; ++i) {
             for (int j = 0; j < 3; ++j) {
               out += (out.empty() ? "" : " ") + fmt(p.arm_rot_body[r](i, j));
             }
           }
         }
         return out;
       }},
      scalar("f_min", p.f_min),
      scalar("f_max", p.f_max),
      scalar("servo_limit_rad", p.servo_limit_rad),
      scalar("T_servo", p.T_servo),
      scalar("g", p.g),
  };

  Section dist{"disturbance", {}};
  dist.fields = {
      {"ground_effect_enabled",
       [&d](const std::string& s) { d.ground_effect_enabled = parse_bool("ground_effect_enabled", s); },
       [&d] { return std::string(d.ground_effect_enabled ? "true" : "false"); }},
      scalar("ground_effect_rotor_radius", d.ground_effect_rotor_radius),
      scalar("ground_effect_cutoff_height", d.ground_effect_cutoff_height),
      vector("drag_coeff", d.drag_coeff),
      {"drag_model",
       [&d](const std::string& s) {
         if (s == "linear") {
           d.drag_model = DragModel::kLinear;
         } else if (s == "quadratic") {
           d.drag_model = DragModel::kQuadratic;
         } else {
           throw ConfigError("drag_model must be linear or quadratic");
         }
       },
       [&d] {
         return std::string(d.drag_model == DragModel::kLinear ? "linear" : "quadratic");
       }},
      scalar("thrust_gain_error", d.thrust_gain_error),
      scalar("thrust_bias", d.thrust_bias),
      scalar("noise_std_pos", d.noise_std_pos),
      scalar("noise_std_vel", d.noise_std_vel),
      integer("rng_seed", d.rng_seed),
  };

  Section ocp{"ocp", {}};
  ocp.fields = {
      integer("horizon_N", o.horizon_N),
      scalar("t_step", o.t_step),
      scalar("t_samp", o.t_samp),
      vector("Q", o.Q),
      vector("R", o.R),
      vector("Q_N", o.Q_N),
      integer("max_sqp_iters", o.max_sqp_iters),
      scalar("kkt_tol", o.kkt_tol),
  };

  Section train{"train", {}};
  train.fields = {
      scalar("lambda_E", t.lambda_E),
      {"energy_variant",
       [&t](const std::string& s) {
         try {
           t.energy_variant = parse_energy_variant(s);
         } catch (const InvalidArgument& e) {
           throw ConfigError(e.what());
         }
       },
       [&t] { return std::string(to_string(t.energy_variant)); }},
      integer("epochs", t.epochs),
      integer("batch_size", t.batch_size),
      scalar("weight_decay", t.weight_decay),
      scalar("val_fraction", t.val_fraction),
      integer("seed", t.seed),
      scalar("collect_minutes", c.collect_minutes),
  };

  Section takeoff{"scenario.takeoff-hover", {}};
  takeoff.fields = {
      scalar("z_start", g.takeoff.z_start),
      scalar("z_hover", g.takeoff.z_hover),
      scalar("climb_time", g.takeoff.climb_time),
      scalar("hold_time", g.takeoff.hold_time),
  };
  Section circle{"scenario.circle", {}};
  circle.fields = {
      scalar("radius", g.circle.radius),
      scalar("frequency_hz", g.circle.frequency_hz),
      scalar("height", g.circle.height),
      scalar("duration", g.circle.duration),
      scalar("ramp_time", g.circle.ramp_time),
  };
  Section setpoint{"scenario.setpoint", {}};
  setpoint.fields = {
      vector("position", g.setpoint.position),
      scalar("roll_deg", g.setpoint.roll_deg),
      scalar("segment_time", g.setpoint.segment_time),
      scalar("transition_time", g.setpoint.transition_time),
  };
  Section collection{"scenario.data-collection", {}};
  collection.fields = {
      scalar("low_height", g.collection.low_height),
      scalar("cruise_height", g.collection.cruise_height),
      scalar("circle_radius", g.collection.circle_radius),
      scalar("tilt_deg", g.collection.tilt_deg),
      integer("seed", g.collection.seed),
  };
  return {params, dist, ocp, train, takeoff, circle, setpoint, collection};
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    params.validate();
    disturbance.validate();
    ocp.validate();
    train.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(collect_minutes > 0.0)) throw ConfigError("collect_minutes must be > 0");
}

void ExperimentConfig::apply_seed(std::uint64_t seed) {
  disturbance.rng_seed = seed;
  train.seed = seed + 1;
  scenarios.collection.seed = seed + 2;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.params = default_params();
  c.train.energy_variant = EnergyVariant::kHinge;
  return c;
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig base) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  auto secs = sections(base);
  for (const auto& [name, body] : tree) {
    if (body.empty()) throw ConfigError("key outside a section: " + name);
    auto sec = std::find_if(secs.begin(), secs.end(),
                            [&](const Section& s) { return s.name == name; });
    if (sec == secs.end()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, value] : body) {
      auto f = std::find_if(sec->fields.begin(), sec->fields.end(),
                            [&](const Field& fl) { return fl.key == key; });
      if (f == sec->fields.end()) {
        throw ConfigError("unknown key '" + key + "' in [" + name + "]");
      }
      f->set(value.get_value<std::string>());
    }
  }
  base.validate();
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path.string());
  return parse_config(f);
}

void write_config(std::ostream& os, const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  const auto secs = sections(copy);
  for (std::size_t i = 0; i < secs.size(); ++i) {
    os << (i ? "\n" : "") << '[' << secs[i].name << "]\n";
    for (const Field& f : secs[i].fields) os << f.key << " = " << f.get() << '\n';
  }
}

}  // namespace tmpc
