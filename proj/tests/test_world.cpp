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
#include <limits>

#include <doctest.h>

#include "skillboot/error.hpp"
#include "skillboot/planner.hpp"
#include "skillboot/world.hpp"

using namespace skillboot;

namespace {

Episode zero_rollout(const TaskSpec& spec) {
  ReplayActor idle(Eigen::MatrixXd::Zero(0, static_cast<Eigen::Index>(action_dim(spec))));
  return rollout(spec, idle, 0);
}

RewardSpec unit_reward() {
  RewardSpec r;
  r.goal = Configuration::Constant(1, 0.3);
  r.c = 60.0;
  r.action_penalty = 0.001 * Eigen::MatrixXd::Identity(3, 3);
  return r;
}

}  // namespace

TEST_SUITE("world") {

TEST_CASE("reward examples") {
  const RewardSpec spec = unit_reward();
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  CHECK(std::abs(reward(spec, Configuration::Constant(1, 0.3), zero) - 0.0) <= 1e-12);
  CHECK(std::abs(reward(spec, Configuration::Constant(1, 0.2), zero) - (-0.6)) <= 1e-12);
  CHECK(std::abs(reward(spec, Configuration::Constant(1, 0.3), Eigen::Vector3d(1.0, 0.0, 0.0)) - (-0.001)) <= 1e-12);
  CHECK(std::abs(reward(spec, Configuration::Constant(1, 0.3), Eigen::Vector3d(0.6, 0.0, 0.8)) - (-0.001)) <= 1e-12);
}

TEST_CASE("step rejects NaN actions") {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  const Eigen::Vector3d bad(0.0, std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(step(spec.initial, spec, bad), InvalidAction);
}

TEST_CASE("observations concatenate robot and object state") {
  TaskSpec drawer = make_task(TaskId::kDrawerOpen);
  WorldState s = drawer.initial;
  s.q_robot = Eigen::Vector3d::Zero();
  s.q_object = Configuration::Constant(1, 0.2);
  const Eigen::VectorXd obs = observe(s, drawer);
  REQUIRE(obs.size() == 4);
  CHECK(obs == Eigen::Vector4d(0, 0, 0, 0.2));

  const TaskSpec tee = make_task(TaskId::kTeeBall);
  CHECK(observe(tee.initial, tee)[3] == 0.0);

  const TaskSpec door = make_task(TaskId::kDoorClose);
  WorldState d = door.initial;
  d.q_object = Configuration::Constant(1, 1.3);
  CHECK(observe(d, door)[3] == 1.3);
}

TEST_CASE("zero policy in a static world") {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  const Episode ep = zero_rollout(spec);
  CHECK(ep.length() == spec.horizon);
  const double gap = (spec.reward.goal - spec.initial.q_object).squaredNorm();
  CHECK(ep.ret == doctest::Approx(-spec.reward.c * gap * spec.horizon).epsilon(1e-12));

  TaskSpec at_goal = spec;
  at_goal.initial.q_object = spec.reward.goal;
  CHECK(zero_rollout(at_goal).ret == 0.0);
}

TEST_CASE("rewards are never positive") {
  for (TaskId id : {TaskId::kDrawerOpen, TaskId::kDoorClose, TaskId::kTeeBall}) {
    const TaskSpec spec = make_task(id);
    const Episode demo = demo_episode(spec, initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, 3), 3);
    CHECK(demo.rewards.maxCoeff() <= 0.0);
  }
}

TEST_CASE("rollouts are deterministic and replay reproduces them") {
  for (TaskId id : {TaskId::kDrawerOpen, TaskId::kDoorClose, TaskId::kTeeBall}) {
    const TaskSpec spec = make_task(id);
    const Trajectory path = initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, 7);
    const Episode a = demo_episode(spec, path, 7);
    const Episode b = demo_episode(spec, path, 7);
    CHECK(a.observations == b.observations);
    CHECK(a.actions == b.actions);
    CHECK(a.rewards == b.rewards);
    const Episode again = replay(spec, a);
    CHECK((again.final_observation - a.final_observation).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(again.ret == a.ret);
  }
}

TEST_CASE("an object at rest without contact stays at rest") {
  const TaskSpec spec = make_task(TaskId::kDoorClose);
  const Episode ep = zero_rollout(spec);
  CHECK(ep.final_observation[3] == spec.initial.q_object[0]);
}

TEST_CASE("free object kinetic energy never increases") {
  for (TaskId id : {TaskId::kDrawerOpen, TaskId::kDoorClose}) {
    const TaskSpec spec = make_task(id);
    WorldState s = spec.initial;
    s.q_object = Configuration::Constant(1, 0.5 * (spec.object.joint(0).lo + spec.object.joint(0).hi));
    s.qd_object = Eigen::VectorXd::Constant(1, id == TaskId::kDoorClose ? -1.0 : 0.4);
    double energy = 0.5 * spec.dynamics.inertia * s.qd_object.squaredNorm();
    for (int t = 0; t < spec.horizon; ++t) {
      s = step(s, spec, Eigen::Vector3d::Zero()).state;
      const double next = 0.5 * spec.dynamics.inertia * s.qd_object.squaredNorm();
      CHECK(next <= energy + 1e-12);
      energy = next;
    }
  }
}

TEST_CASE("attached grasp follows the end effector") {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  const Trajectory path = initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, 1);
  const Eigen::MatrixXd actions = trajectory_actions(path);
  const auto grasp = *spec.object.find_frame(spec.grasp_part);
  WorldState s = spec.initial;
  int attached_steps = 0;
  for (Eigen::Index t = 0; t < actions.rows(); ++t) {
    s = step(s, spec, actions.row(t).transpose()).state;
    if (!s.attached) continue;
    ++attached_steps;
    const Eigen::Vector2d ee = fk(spec.robot, s.q_robot, spec.ee_frame).position();
    const Eigen::Vector2d g = fk(spec.object, s.q_object, grasp).position();
    CHECK((ee - g).norm() <= spec.contact.attach_radius);
  }
  CHECK(attached_steps > 10);
}

TEST_CASE("task specs are valid") {
  for (TaskId id : {TaskId::kDrawerOpen, TaskId::kDoorClose, TaskId::kTeeBall}) {
    const TaskSpec spec = make_task(id);
    CHECK_NOTHROW(validate(spec));
    CHECK(parse_task_id(to_string(id)) == id);
    CHECK(spec.dt == 0.02);
    CHECK(spec.horizon == 150);
  }
  TaskSpec broken = make_task(TaskId::kDrawerOpen);
  broken.grasp_part = "knob";
  CHECK_THROWS_AS(validate(broken), ConfigError);
  CHECK_THROWS(parse_task_id("microwave"));
}

}  // TEST_SUITE
