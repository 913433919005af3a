// Copyright 2026 The skillboot Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skillboot {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownFrame : public Error {
 public:
  using Error::Error;
};

/// IK residual stayed above tolerance after the iteration budget.
class NonConvergent : public Error {
 public:
  NonConvergent(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class InvalidAction : public Error {
 public:
  using Error::Error;
};

class PlanNotFound : public Error {
 public:
  using Error::Error;
};

class MissingGraspLink : public Error {
 public:
  using Error::Error;
};

/// Robot IK could not follow the end-effector path past `waypoint()`.
class TrackingFailed : public Error {
 public:
  TrackingFailed(const std::string& what, std::size_t waypoint)
      : Error(what), waypoint_(waypoint) {}
  std::size_t waypoint() const { return waypoint_; }

 private:
  std::size_t waypoint_;
};

class DegenerateDemo : public Error {
 public:
  using Error::Error;
};

class AllRolloutsFailed : public Error {
 public:
  using Error::Error;
};

class EmptyDemoSet : public Error {
 public:
  using Error::Error;
};

class NonFiniteGradient : public Error {
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

}  // namespace skillboot
