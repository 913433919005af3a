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

// Demonstrations from kinematic planning: plan the object in its own
// configuration space, push that plan through a fixed grasp to get an
// end-effector path, and track the path with robot IK.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "skillboot/episode.hpp"
#include "skillboot/kinematics.hpp"
#include "skillboot/world.hpp"

namespace skillboot {

/// Uniformly timed configuration sequence of one chain.
struct Trajectory {
  double dt = 0.0;
  std::vector<Configuration> waypoints;
  std::string chain;

  std::size_t size() const { return waypoints.size(); }
};

struct PoseWaypoint {
  Pose2 pose;
  bool orientation_free = true;
};

using PosePath = std::vector<PoseWaypoint>;

/// Grasp location: a named object part plus a fixed offset in its frame.
struct GraspFrame {
  std::string part;
  Pose2 offset;
};

using ValidityFn = std::function<bool(const Configuration&)>;

struct RrtOptions {
  double goal_bias = 0.1;
  /// Extension step as a fraction of the C-space diameter.
  double step_fraction = 0.05;
  int max_samples = 50000;
  /// Edge collision-check resolution as a fraction of the diameter.
  double check_resolution = 1e-3;
};

/// Goal-biased RRT with a straight-line local planner, returned at constant
/// C-space speed `speed` (units/s) sampled every `dt`. Without a validity
/// predicate only joint limits are enforced. Throws PlanNotFound.
Trajectory plan_object_path(const KinematicChain& object, const Configuration& q0,
                            const Configuration& q_goal, std::uint64_t seed, double speed, double dt,
                            const ValidityFn& valid = {}, const RrtOptions& options = {});

/// True when every point of the polyline, sampled at `resolution`, is valid.
bool path_is_valid(const std::vector<Configuration>& path, const ValidityFn& valid, double resolution);

/// Semantic grasp choice: the task's named part with zero offset.
GraspFrame estimate_grasp(const KinematicChain& object, const TaskSpec& task);

PosePath grasp_path(const Trajectory& object_path, const KinematicChain& object, const GraspFrame& grasp);

struct TrackingOptions {
  double max_joint_jump = 0.3;
  int retries = 10;
  double retry_noise = 0.3;
  std::uint64_t seed = 0;
  IkOptions ik;
  std::string ee_frame = "tip";
};

/// Result of following an end-effector path as far as IK allows.
struct TrackingResult {
  std::vector<Configuration> waypoints;
  std::optional<std::size_t> failed_at;
};

TrackingResult track_path(const KinematicChain& robot, const PosePath& eepath, const Configuration& q_start,
                          const std::vector<Segment>& scene, const TrackingOptions& options = {});

/// Full tracking or TrackingFailed with the first unreachable waypoint.
Trajectory plan_robot_path(const KinematicChain& robot, const PosePath& eepath, const Configuration& q_start,
                           double dt, const std::vector<Segment>& scene = {},
                           const TrackingOptions& options = {});

bool robot_collision_free(const KinematicChain& robot, const Configuration& q, const std::vector<Segment>& scene);

struct DemoOptions {
  /// Std of the start-state and plan perturbation, per joint (rad).
  double perturbation = 0.01;
  double approach_speed = 0.5;
  /// Pause at the grasp pose before the object path starts (s).
  double grasp_dwell = 0.2;
  /// Fraction of the velocity limit used when retiming.
  double speed_margin = 0.95;
};

/// One robot demonstration: approach to the first grasp pose, then the
/// tracked grasp path, truncated where the path leaves the workspace.
Trajectory initial_mp_demos(const TaskSpec& task, const KinematicChain& robot, const KinematicChain& object,
                            const Configuration& q_goal, std::uint64_t seed, const DemoOptions& options = {});

/// Finite-difference velocity commands that reproduce the trajectory.
Eigen::MatrixXd trajectory_actions(const Trajectory& trajectory);

/// Executes a robot trajectory open-loop in the world.
Episode demo_episode(const TaskSpec& task, const Trajectory& robot_path, std::uint64_t seed);

}  // namespace skillboot
