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

#include "skillboot/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "skillboot/error.hpp"
#include "skillboot/random.hpp"

namespace skillboot {

bool path_is_valid(const std::vector<Configuration>& path, const ValidityFn& valid, double resolution) {
  if (!valid) return true;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!valid(path[i])) return false;
    if (i + 1 == path.size()) break;
    const double len = (path[i + 1] - path[i]).norm();
    const int n = static_cast<int>(std::ceil(len / resolution));
    for (int k = 1; k < n; ++k) {
      if (!valid(path[i] + (path[i + 1] - path[i]) * (static_cast<double>(k) / n))) return false;
    }
  }
  return true;
}

namespace {

struct Node {
  Configuration q;
  int parent;
};

std::vector<Configuration> resample(const std::vector<Configuration>& path, double spacing) {
  std::vector<Configuration> out{path.front()};
  double carry = 0.0;  // distance already travelled past the last output sample
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Configuration d = path[i + 1] - path[i];
    const double len = d.norm();
    double s = spacing - carry;
    while (s <= len + 1e-12) {
      out.push_back(path[i] + d * (s / len));
      s += spacing;
    }
    carry = len - (s - spacing);
  }
  if ((out.back() - path.back()).norm() > 1e-12) out.push_back(path.back());
  return out;
}

}  // namespace

Trajectory plan_object_path(const KinematicChain& object, const Configuration& q0, const Configuration& q_goal,
                            std::uint64_t seed, double speed, double dt, const ValidityFn& valid,
                            const RrtOptions& options) {
  object.check_dimension(q0);
  object.check_dimension(q_goal);
  if (!(speed > 0.0) || !(dt > 0.0)) throw Error("plan_object_path: speed and dt must be positive");
  if (!object.within_limits(q0) || !object.within_limits(q_goal))
    throw PlanNotFound("start or goal outside joint limits");
  const ValidityFn check = [&](const Configuration& q) {
    return object.within_limits(q, 1e-12) && (!valid || valid(q));
  };
  if (!check(q0) || !check(q_goal)) throw PlanNotFound("start or goal in collision");

  Trajectory out;
  out.dt = dt;
  out.chain = object.name();
  if ((q_goal - q0).norm() == 0.0) {
    out.waypoints = {q0, q0};
    return out;
  }

  const Eigen::VectorXd lo = object.lower_limits(), hi = object.upper_limits();
  const double diameter = (hi - lo).norm();
  const double step = options.step_fraction * diameter;
  const double res = options.check_resolution * diameter;
  const auto edge_ok = [&](const Configuration& a, const Configuration& b) {
    return path_is_valid({a, b}, check, res);
  };

  std::vector<Node> tree{{q0, -1}};
  std::vector<Configuration> path;
  const auto extract = [&](int leaf) {
    std::vector<Configuration> p{q_goal};
    for (int i = leaf; i >= 0; i = tree[static_cast<std::size_t>(i)].parent) p.push_back(tree[static_cast<std::size_t>(i)].q);
    std::reverse(p.begin(), p.end());
    return p;
  };

  if (edge_ok(q0, q_goal)) {
    path = {q0, q_goal};
  } else {
    Rng rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int sample = 0; sample < options.max_samples && path.empty(); ++sample) {
      Configuration target(q0.size());
      if (coin(rng) < options.goal_bias) {
        target = q_goal;
      } else {
        for (Eigen::Index i = 0; i < q0.size(); ++i) target[i] = lo[i] + coin(rng) * (hi[i] - lo[i]);
      }
      std::size_t nearest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < tree.size(); ++i) {
        const double d = (tree[i].q - target).squaredNorm();
        if (d < best) {
          best = d;
          nearest = i;
        }
      }
      const Configuration& from = tree[nearest].q;
      const double dist = std::sqrt(best);
      if (dist == 0.0) continue;
      const Configuration q_new = dist <= step ? target : Configuration(from + (target - from) * (step / dist));
      if (!edge_ok(from, q_new)) continue;
      tree.push_back({q_new, static_cast<int>(nearest)});
      if (edge_ok(q_new, q_goal)) path = extract(static_cast<int>(tree.size()) - 1);
    }
    if (path.empty()) throw PlanNotFound("no object path within the sample budget");
    // Greedy shortcutting keeps the constant-speed retiming short.
    std::vector<Configuration> shortcut{path.front()};
    std::size_t i = 0;
    while (i + 1 < path.size()) {
      std::size_t j = path.size() - 1;
      while (j > i + 1 && !edge_ok(path[i], path[j])) --j;
      shortcut.push_back(path[j]);
      i = j;
    }
    path = std::move(shortcut);
  }
  out.waypoints = resample(path, speed * dt);
  if (out.waypoints.size() < 2) out.waypoints.push_back(q_goal);
  return out;
}

GraspFrame estimate_grasp(const KinematicChain& object, const TaskSpec& task) {
  if (task.grasp_part.empty() || !object.find_frame(task.grasp_part))
    throw MissingGraspLink("object '" + object.name() + "' has no part '" + task.grasp_part + "'");
  return {task.grasp_part, Pose2{}};
}

PosePath grasp_path(const Trajectory& object_path, const KinematicChain& object, const GraspFrame& grasp) {
  const auto ref = object.find_frame(grasp.part);
  if (!ref) throw MissingGraspLink("object '" + object.name() + "' has no part '" + grasp.part + "'");
  PosePath out;
  out.reserve(object_path.size());
  for (const auto& q : object_path.waypoints) {
    object.check_dimension(q);
    out.push_back({fk(object, q, *ref) * grasp.offset, true});
  }
  return out;
}

bool robot_collision_free(const KinematicChain& robot, const Configuration& q, const std::vector<Segment>& scene) {
  if (scene.empty()) return true;
  for (const auto& link : robot.world_segments(q)) {
    for (const auto& s : scene) {
      if (segment_segment_distance(link, s) < 1e-3) return false;
    }
  }
  return true;
}

TrackingResult track_path(const KinematicChain& robot, const PosePath& eepath, const Configuration& q_start,
                          const std::vector<Segment>& scene, const TrackingOptions& options) {
  robot.check_dimension(q_start);
  TrackingResult result;
  Rng rng(options.seed);
  Configuration prev = q_start;
  for (std::size_t k = 0; k < eepath.size(); ++k) {
    IkOptions ik_opt = options.ik;
    if (eepath[k].orientation_free) ik_opt.orientation_weight = 0.0;
    std::optional<Configuration> found;
    for (int attempt = 0; attempt <= options.retries && !found; ++attempt) {
      const Configuration seed =
          attempt == 0 ? prev : robot.clamp(prev + sample_normal(rng, prev.size(), options.retry_noise));
      try {
        Configuration q = ik(robot, eepath[k].pose, seed, options.ee_frame, ik_opt);
        const bool small_jump = (q - prev).cwiseAbs().maxCoeff() <= options.max_joint_jump;
        if (small_jump && robot_collision_free(robot, q, scene)) found = std::move(q);
      } catch (const NonConvergent&) {
      }
    }
    if (!found) {
      result.failed_at = k;
      return result;
    }
    prev = *found;
    result.waypoints.push_back(std::move(*found));
  }
  return result;
}

Trajectory plan_robot_path(const KinematicChain& robot, const PosePath& eepath, const Configuration& q_start,
                           double dt, const std::vector<Segment>& scene, const TrackingOptions& options) {
  if (!robot.within_limits(q_start)) throw Error("plan_robot_path: start outside joint limits");
  TrackingResult tracked = track_path(robot, eepath, q_start, scene, options);
  if (tracked.failed_at) {
    throw TrackingFailed("end-effector path leaves the workspace at waypoint " + std::to_string(*tracked.failed_at),
                         *tracked.failed_at);
  }
  Trajectory out;
  out.dt = dt;
  out.chain = robot.name();
  out.waypoints = std::move(tracked.waypoints);
  if (out.waypoints.size() == 1) out.waypoints.insert(out.waypoints.begin(), q_start);
  return out;
}

namespace {

/// Subdivides segments whose joint step would exceed `max_step`.
std::vector<Configuration> retime(const std::vector<Configuration>& path, double max_step) {
  std::vector<Configuration> out{path.front()};
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Configuration d = path[i + 1] - path[i];
    const int n = std::max(1, static_cast<int>(std::ceil(d.cwiseAbs().maxCoeff() / max_step)));
    for (int k = 1; k <= n; ++k) out.push_back(path[i] + d * (static_cast<double>(k) / n));
  }
  return out;
}

}  // namespace

Trajectory initial_mp_demos(const TaskSpec& task, const KinematicChain& robot, const KinematicChain& object,
                            const Configuration& q_goal, std::uint64_t seed, const DemoOptions& options) {
  Rng rng(derive_seed(seed, 0));
  const auto n = static_cast<Eigen::Index>(robot.dof());
  const Configuration q_start =
      robot.clamp(task.initial.q_robot + sample_normal(rng, n, options.perturbation));
  const Eigen::VectorXd plan_offset = sample_normal(rng, n, options.perturbation);

  const Trajectory object_path =
      plan_object_path(object, task.initial.q_object, q_goal, derive_seed(seed, 1), task.plan_speed, task.dt);
  const GraspFrame grasp = estimate_grasp(object, task);
  const PosePath eepath = grasp_path(object_path, object, grasp);

  TrackingOptions track;
  track.seed = derive_seed(seed, 2);
  track.ee_frame = task.ee_frame;
  // A single IK solve for the pre-grasp pose, with free seeds allowed.
  track.max_joint_jump = 2.0 * std::numbers::pi;
  TrackingResult first = track_path(robot, {eepath.front()}, q_start, task.scene, track);
  if (first.failed_at) throw TrackingFailed("first grasp pose is unreachable", 0);
  const Configuration q_grasp = first.waypoints.front();

  std::vector<Configuration> path;
  const double approach_len = (q_grasp - q_start).cwiseAbs().maxCoeff();
  const int n_approach = std::max(1, static_cast<int>(std::ceil(approach_len / (options.approach_speed * task.dt))));
  // Cubic ease-in/out so the arm comes to rest at the grasp before the object path begins.
  for (int k = 0; k <= n_approach; ++k) {
    const double s = static_cast<double>(k) / n_approach;
    path.push_back(q_start + (q_grasp - q_start) * (s * s * (3.0 - 2.0 * s)));
  }
  const int dwell = static_cast<int>(std::lround(options.grasp_dwell / task.dt));
  for (int k = 0; k < dwell; ++k) path.push_back(q_grasp);

  track.max_joint_jump = TrackingOptions{}.max_joint_jump;
  const TrackingResult tracked = track_path(robot, eepath, q_grasp, task.scene, track);
  // An unreachable tail truncates the demo instead of failing it.
  for (std::size_t k = 1; k < tracked.waypoints.size(); ++k) path.push_back(tracked.waypoints[k]);

  const auto count = static_cast<double>(path.size() - 1);
  for (std::size_t k = 1; k < path.size(); ++k)
    path[k] = robot.clamp(path[k] + plan_offset * (static_cast<double>(k) / count));

  Trajectory out;
  out.dt = task.dt;
  out.chain = robot.name();
  out.waypoints = retime(path, options.speed_margin * task.velocity_limit * task.dt);
  return out;
}

Eigen::MatrixXd trajectory_actions(const Trajectory& trajectory) {
  if (trajectory.size() < 2) throw Error("trajectory needs at least two waypoints");
  const auto n = static_cast<Eigen::Index>(trajectory.size() - 1);
  Eigen::MatrixXd actions(n, trajectory.waypoints.front().size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    actions.row(k) = ((trajectory.waypoints[i + 1] - trajectory.waypoints[i]) / trajectory.dt).transpose();
  }
  return actions;
}

Episode demo_episode(const TaskSpec& task, const Trajectory& robot_path, std::uint64_t seed) {
  ReplayActor actor(trajectory_actions(robot_path));
  WorldState init = task.initial;
  init.q_robot = robot_path.waypoints.front();
  return rollout(task, init, actor, seed, EpisodeSource::kPlanner);
}

}  // namespace skillboot
