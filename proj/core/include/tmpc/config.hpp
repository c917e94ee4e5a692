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

// Experiment configuration and its INI-style file format.
//
//   [params]            PhysicalParams fields
//   [disturbance]       DisturbanceConfig fields
//   [ocp]               OcpConfig fields
//   [train]             TrainConfig fields plus collect_minutes
//   [scenario.<name>]   geometry of takeoff-hover, circle, setpoint and
//                       data-collection
//
// Vectors are whitespace or comma separated. Unknown sections and keys are
// rejected.

#ifndef TMPC_CONFIG_HPP_
#define TMPC_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "tmpc/dynamics.hpp"
#include "tmpc/nmpc.hpp"
#include "tmpc/plant.hpp"
#include "tmpc/scenario.hpp"
#include "tmpc/training.hpp"

namespace tmpc {

struct ExperimentConfig {
  PhysicalParams params;
  DisturbanceConfig disturbance;
  OcpConfig ocp;
  TrainConfig train;
  ScenarioGeometry scenarios;
  double collect_minutes = 2.0;

  void validate() const;
  // Reseeds the plant noise, collection program, split and training.
  void apply_seed(std::uint64_t seed);
};

// Training uses the hinge energy variant; the library default is signed.
ExperimentConfig default_config();

// Overrides fields of base with the contents of the stream.
ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = default_config());
ExperimentConfig load_config(const std::filesystem::path& path);

// Every field, in a form parse_config reads back to the same values.
void write_config(std::ostream& os, const ExperimentConfig& cfg);

}  // namespace tmpc

#endif  // TMPC_CONFIG_HPP_
