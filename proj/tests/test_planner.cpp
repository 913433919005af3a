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

#include <cmath>
#include <numbers>
#include <set>

#include <doctest.h>

#include "skillboot/error.hpp"
#include "skillboot/planner.hpp"
#include "skillboot/world.hpp"
#include "support.hpp"

using namespace skillboot;

namespace {

/// Two prismatic joints in series: a point moving in the plane.
KinematicChain planar_point() {
  Joint jx{JointKind::kPrismatic, Pose2{}, -1.0, 1.0};
  Joint jy{JointKind::kPrismatic, Pose2{0.0, 0.0, std::numbers::pi / 2}, -1.0, 1.0};
  Link a, b;
  a.name = "carriage";
  b.name = "point";
  b.frames.push_back({"tip", Pose2{}});
  return KinematicChain("point", Pose2{}, {jx, jy}, {a, b});
}

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("1-DoF drawer plan is a linear ramp") {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  const Trajectory t = plan_object_path(spec.object, Configuration::Zero(1), Configuration::Constant(1, 0.3), 0,
                                        spec.plan_speed, spec.dt);
  REQUIRE(t.size() >= 2);
  CHECK(t.waypoints.front()[0] == 0.0);
  CHECK(t.waypoints.back()[0] == doctest::Approx(0.3));
  const double first_step = t.waypoints[1][0] - t.waypoints[0][0];
  for (std::size_t k = 1; k + 1 < t.size(); ++k)
    CHECK(t.waypoints[k + 1][0] - t.waypoints[k][0] == doctest::Approx(first_step));
  CHECK(first_step <= spec.plan_speed * spec.dt + 1e-12);
}

TEST_CASE("identity plan has two waypoints") {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  const Trajectory t = plan_object_path(spec.object, Configuration::Constant(1, 0.1),
                                        Configuration::Constant(1, 0.1), 0, 0.2, 0.02);
  REQUIRE(t.size() == 2);
  CHECK(t.waypoints[0] == t.waypoints[1]);
}

TEST_CASE("RRT avoids a forbidden region") {
  const auto obj = planar_point();
  // Wall across the straight line between start and goal, with gaps at both ends of joint 1.
  const ValidityFn valid = [](const Configuration& q) { return !(std::abs(q[0]) < 0.2 && q[1] > -0.7 && q[1] < 0.9); };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Trajectory t = plan_object_path(obj, Eigen::Vector2d(-0.8, 0.0), Eigen::Vector2d(0.8, 0.0), seed, 0.5,
                                          0.02, valid);
    const double diameter = (obj.upper_limits() - obj.lower_limits()).norm();
    CHECK(path_is_valid(t.waypoints, valid, 1e-3 * diameter));
    for (const auto& q : t.waypoints) CHECK(obj.within_limits(q));
    CHECK((t.waypoints.back() - Eigen::Vector2d(0.8, 0.0)).norm() < 1e-12);
  }
}

TEST_CASE("RRT rejects invalid endpoints") {
  const auto obj = planar_point();
  CHECK_THROWS_AS(plan_object_path(obj, Eigen::Vector2d(-2.0, 0.0), Eigen::Vector2d(0.5, 0.0), 0, 0.5, 0.02),
                  PlanNotFound);
  const ValidityFn never = [](const Configuration&) { return false; };
  CHECK_THROWS_AS(plan_object_path(obj, Eigen::Vector2d(-0.5, 0.0), Eigen::Vector2d(0.5, 0.0), 0, 0.5, 0.02, never),
                  PlanNotFound);
}

TEST_CASE("semantic grasp frames") {
  const TaskSpec drawer = make_task(TaskId::kDrawerOpen);
  const GraspFrame g = estimate_grasp(drawer.object, drawer);
  CHECK(g.part == "handle");
  CHECK(g.offset.x == 0.0);
  CHECK(g.offset.y == 0.0);
  CHECK(g.offset.theta == 0.0);

  const TaskSpec tee = make_task(TaskId::kTeeBall);
  const GraspFrame b = estimate_grasp(tee.object, tee);
  const Pose2 center = fk(tee.object, tee.initial.q_object, b.part);
  CHECK(center.x == doctest::Approx(tee.initial.ball->position.x()));
  CHECK(center.y == doctest::Approx(tee.initial.ball->position.y()));

  TaskSpec bad = drawer;
  bad.grasp_part = "knob";
  CHECK_THROWS_AS(estimate_grasp(bad.object, bad), MissingGraspLink);
}

TEST_CASE("door grasp poses lie on a circle about the hinge") {
  const TaskSpec door = make_task(TaskId::kDoorClose);
  Trajectory t;
  t.dt = 0.02;
  for (double a : {0.0, std::numbers::pi / 4, std::numbers::pi / 2}) t.waypoints.push_back(Configuration::Constant(1, a));
  const PosePath path = grasp_path(t, door.object, estimate_grasp(door.object, door));
  const Eigen::Vector2d hinge = door.object.base().position();
  const double radius = door.object.link(0).frames.front().offset.x;
  for (const auto& wp : path) CHECK((wp.pose.position() - hinge).norm() == doctest::Approx(radius).epsilon(1e-12));
}

TEST_CASE("drawer grasp poses are collinear and evenly spaced") {
  const TaskSpec drawer = make_task(TaskId::kDrawerOpen);
  const Trajectory t = plan_object_path(drawer.object, Configuration::Zero(1), Configuration::Constant(1, 0.3), 0,
                                        drawer.plan_speed, drawer.dt);
  const PosePath path = grasp_path(t, drawer.object, estimate_grasp(drawer.object, drawer));
  REQUIRE(path.size() > 3);
  const Eigen::Vector2d dir = (path.back().pose.position() - path.front().pose.position()).normalized();
  const double spacing = (path[1].pose.position() - path[0].pose.position()).norm();
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Eigen::Vector2d d = path[k].pose.position() - path[0].pose.position();
    CHECK(std::abs(d.x() * dir.y() - d.y() * dir.x()) < 1e-12);
    if (k + 1 < path.size())
      CHECK((path[k].pose.position() - path[k - 1].pose.position()).norm() == doctest::Approx(spacing));
  }
}

TEST_CASE("grasp path matches direct fk with an offset") {
  const TaskSpec door = make_task(TaskId::kDoorClose);
  Rng rng(3);
  Trajectory t;
  t.dt = 0.02;
  for (int k = 0; k < 50; ++k) t.waypoints.push_back(sample_uniform(rng, 1, 0.0, 1.7));
  const GraspFrame grasp{"handle", Pose2{0.01, -0.02, 0.3}};
  const PosePath path = grasp_path(t, door.object, grasp);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double a = t.waypoints[k][0];
    // Door frame: hinge at the base, rotated by the door angle.
    const Eigen::Matrix3d m = skillboot::testing::homogeneous(door.object.base().x, door.object.base().y,
                                                              door.object.base().theta + a) *
                              skillboot::testing::homogeneous(0.45, 0.0, 0.0) *
                              skillboot::testing::homogeneous(0.01, -0.02, 0.3);
    CHECK(std::abs(path[k].pose.x - m(0, 2)) < 1e-12);
    CHECK(std::abs(path[k].pose.y - m(1, 2)) < 1e-12);
    CHECK(std::abs(angle_diff(path[k].pose.theta, std::atan2(m(1, 0), m(0, 0)))) < 1e-12);
  }
}

TEST_CASE("tracking a reachable path is exact") {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  const auto& arm = spec.robot;
  const Configuration q0(Eigen::Vector3d(0.2, 1.0, 0.5));
  const Eigen::Vector2d c = fk(arm, q0, "tip").position();
  PosePath path;
  for (int k = 0; k <= 60; ++k) {
    const double a = 2 * std::numbers::pi * k / 60.0;
    path.push_back({Pose2{c.x() + 0.1 * (std::cos(a) - 1.0), c.y() + 0.1 * std::sin(a), 0.0}, true});
  }
  const Trajectory t = plan_robot_path(arm, path, q0, 0.02);
  REQUIRE(t.size() == path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    CHECK((fk(arm, t.waypoints[k], "tip").position() - path[k].pose.position()).norm() < 1e-3);
    CHECK(arm.within_limits(t.waypoints[k]));
  }
}

TEST_CASE("single-pose path at the start") {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  const Configuration q0 = spec.initial.q_robot;
  const Trajectory t = plan_robot_path(spec.robot, {{fk(spec.robot, q0, "tip"), true}}, q0, 0.02);
  REQUIRE(t.size() == 2);
  CHECK(t.waypoints[0] == q0);
  CHECK(t.waypoints[1] == q0);
}

TEST_CASE("unreachable door tail truncates tracking") {
  const TaskSpec door = make_task(TaskId::kDoorClose);
  const Trajectory obj = plan_object_path(door.object, door.initial.q_object, door.reward.goal, 0, door.plan_speed,
                                          door.dt);
  const PosePath path = grasp_path(obj, door.object, estimate_grasp(door.object, door));
  TrackingOptions opt;
  opt.max_joint_jump = 2 * std::numbers::pi;
  const TrackingResult first = track_path(door.robot, {path.front()}, door.initial.q_robot, door.scene, opt);
  REQUIRE_FALSE(first.failed_at);
  const TrackingResult r = track_path(door.robot, path, first.waypoints.front(), door.scene);
  REQUIRE(r.failed_at.has_value());
  CHECK(*r.failed_at > 0);
  CHECK(r.waypoints.size() == *r.failed_at);
  CHECK_THROWS_AS(plan_robot_path(door.robot, path, first.waypoints.front(), door.dt, door.scene), TrackingFailed);
}

TEST_CASE("drawer demo opens the drawer open-loop") {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Trajectory path = initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, seed);
    for (const auto& q : path.waypoints) CHECK(spec.robot.within_limits(q));
    const Episode ep = demo_episode(spec, path, seed);
    CHECK(ep.final_observation[3] >= 0.8 * spec.reward.goal[0]);
    CHECK(ep.source == EpisodeSource::kPlanner);
  }
}

TEST_CASE("door demo moves the door but cannot close it") {
  const TaskSpec spec = make_task(TaskId::kDoorClose);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Episode ep = demo_episode(spec, initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, seed), seed);
    const double final_angle = ep.final_observation[3];
    CHECK(final_angle < spec.initial.q_object[0] - 0.2);
    CHECK(std::abs(final_angle - spec.reward.goal[0]) > 0.1);
  }
}

TEST_CASE("demos differ across seeds and repeat per seed") {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  std::vector<Trajectory> demos;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    demos.push_back(initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, seed));
  for (std::size_t i = 0; i < demos.size(); ++i) {
    for (std::size_t j = i + 1; j < demos.size(); ++j) {
      double diff = 0.0;
      const std::size_t n = std::min(demos[i].size(), demos[j].size());
      for (std::size_t k = 0; k < n; ++k)
        diff = std::max(diff, (demos[i].waypoints[k] - demos[j].waypoints[k]).cwiseAbs().maxCoeff());
      CHECK(diff > 0.0);
    }
  }
  const Trajectory again = initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, 4);
  REQUIRE(again.size() == demos[4].size());
  for (std::size_t k = 0; k < again.size(); ++k) CHECK(again.waypoints[k] == demos[4].waypoints[k]);
}

TEST_CASE("demo actions respect the velocity limit") {
  for (TaskId id : {TaskId::kDrawerOpen, TaskId::kDoorClose, TaskId::kTeeBall}) {
    const TaskSpec spec = make_task(id);
    const Eigen::MatrixXd a =
        trajectory_actions(initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, 2));
    CHECK(a.cwiseAbs().maxCoeff() <= spec.velocity_limit + 1e-9);
  }
}

}  // TEST_SUITE
