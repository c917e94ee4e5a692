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

#ifndef TMPC_ERRORS_HPP_
#define TMPC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tmpc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or parameter set (bad config values, violated invariants).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced by an integrator stage, a Jacobian or the QP.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class InfeasibleHoverError : public Error {
 public:
  using Error::Error;
};

// The simulated vehicle touched the ground plane (z <= 0).
class GroundContactError : public Error {
 public:
  GroundContactError(double time, double z)
      : Error("ground contact at t=" + std::to_string(time) +
              " s (z=" + std::to_string(z) + " m)"),
        time_(time),
        z_(z) {}
  double time() const { return time_; }
  double z() const { return z_; }

 private:
  double time_;
  double z_;
};

// A closed-loop run left its safety envelope.
class CrashError : public Error {
 public:
  using Error::Error;
};

// Trajectory log does not satisfy the sampling contract.
class LogGapError : public Error {
 public:
  using Error::Error;
};

class EmptyDataError : public Error {
 public:
  using Error::Error;
};

class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmpc

#endif  // TMPC_ERRORS_HPP_
