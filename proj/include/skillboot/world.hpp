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

// Deterministic planar simulator: a velocity-controlled arm, one 1-DoF
// articulated object (or a struck ball), contact, and the task reward.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "skillboot/episode.hpp"
#include "skillboot/kinematics.hpp"
#include "skillboot/random.hpp"

namespace skillboot {

enum class TaskId { kDrawerOpen, kDoorClose, kTeeBall };
enum class ManipulationMode { kAttach, kPush, kStrike };

std::string to_string(TaskId id);
TaskId parse_task_id(const std::string& text);

struct DetentSpring {
  double stiffness = 0.0;
  double rest = 0.0;
};

/// Latent object dynamics. Never visible to the planner or the policy.
/// Units are generalized: kg*m^2 / N*m for revolute, kg / N for prismatic.
struct ObjectDynamics {
  double inertia = 1.0;
  double damping = 0.0;
  double friction = 0.0;
  std::optional<DetentSpring> detent;
};

/// r = -c |goal - q_object|^2 - a^T R a.
struct RewardSpec {
  Configuration goal;
  double c = 60.0;
  Eigen::MatrixXd action_penalty;
  double gamma = 1.0;
};

double reward(const RewardSpec& spec, const Configuration& q_object, const Eigen::VectorXd& action);

/// Free body used by the strike task. z is height above the ground.
struct Ball {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  bool struck = false;
};

struct WorldState {
  Configuration q_robot;
  Eigen::VectorXd qd_robot;
  Configuration q_object;
  Eigen::VectorXd qd_object;
  std::optional<Ball> ball;
  bool attached = false;
  std::int64_t step = 0;

  double time(double dt) const { return static_cast<double>(step) * dt; }
};

struct ContactParams {
  double attach_radius = 0.03;
  double attach_max_force = 20.0;
  double push_stiffness = 2000.0;
  double push_damping = 20.0;
  double push_depth = 0.05;
  double restitution = 0.8;
  double gravity = 9.81;
  int substeps = 10;
};

struct TaskSpec {
  TaskId id = TaskId::kDrawerOpen;
  KinematicChain robot;
  KinematicChain object;
  ObjectDynamics dynamics;
  std::string grasp_part;
  std::string ee_frame = "tip";
  WorldState initial;
  RewardSpec reward;
  int horizon = 150;
  double dt = 0.02;
  ManipulationMode mode = ManipulationMode::kAttach;
  double velocity_limit = 2.5;
  ContactParams contact;
  /// Static scene geometry the robot links must not cross.
  std::vector<Segment> scene;
  /// Object configuration-space speed used to time planner demos.
  double plan_speed = 0.2;
  double tee_height = 0.0;
  double ball_radius = 0.0;
};

/// The three benchmark tasks at desk scale.
TaskSpec make_task(TaskId id);

/// Validates the structural invariants of a task; throws ConfigError.
void validate(const TaskSpec& spec);

struct StepResult {
  WorldState state;
  double reward = 0.0;
};

/// Advances the world by one control period. Throws InvalidAction on NaN.
StepResult step(const WorldState& state, const TaskSpec& spec, const Eigen::VectorXd& action);

/// [q_robot, q_object]; for the strike task q_object is the ball's y displacement.
Eigen::VectorXd observe(const WorldState& state, const TaskSpec& spec);

/// Initial world state with the robot and object configurations replaced.
WorldState state_from_observation(const TaskSpec& spec, const Eigen::VectorXd& obs);

std::size_t observation_dim(const TaskSpec& spec);
std::size_t action_dim(const TaskSpec& spec);

/// Per-rollout controller. Implementations hold their own integration
/// state and are reset at the start of every episode.
class Actor {
 public:
  virtual ~Actor() = default;
  virtual void reset(const Eigen::VectorXd& obs) = 0;
  virtual Eigen::VectorXd act(const Eigen::VectorXd& obs, Rng& rng) = 0;
};

/// Replays a fixed action sequence, then emits zeros.
class ReplayActor : public Actor {
 public:
  explicit ReplayActor(Eigen::MatrixXd actions) : actions_(std::move(actions)) {}
  void reset(const Eigen::VectorXd&) override { t_ = 0; }
  Eigen::VectorXd act(const Eigen::VectorXd& obs, Rng& rng) override;

 private:
  Eigen::MatrixXd actions_;
  Eigen::Index t_ = 0;
};

/// Runs exactly `spec.horizon` steps from `spec.initial`.
Episode rollout(const TaskSpec& spec, Actor& actor, std::uint64_t seed,
                EpisodeSource source = EpisodeSource::kPolicy);
Episode rollout(const TaskSpec& spec, const WorldState& initial, Actor& actor, std::uint64_t seed,
                EpisodeSource source = EpisodeSource::kPolicy);

/// Re-executes the episode's actions from the state encoded in its first
/// observation.
Episode replay(const TaskSpec& spec, const Episode& episode);

}  // namespace skillboot
