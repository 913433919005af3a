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

#include "skillboot/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skillboot/error.hpp"

namespace skillboot {

std::string to_string(TaskId id) {
  switch (id) {
    case TaskId::kDrawerOpen: return "drawer-open";
    case TaskId::kDoorClose: return "door-close";
    case TaskId::kTeeBall: return "tee-ball";
  }
  return "unknown";
}

TaskId parse_task_id(const std::string& text) {
  if (text == "drawer-open") return TaskId::kDrawerOpen;
  if (text == "door-close") return TaskId::kDoorClose;
  if (text == "tee-ball") return TaskId::kTeeBall;
  throw ConfigError("unknown task '" + text + "'");
}

std::string to_string(EpisodeSource source) {
  switch (source) {
    case EpisodeSource::kPlanner: return "planner";
    case EpisodeSource::kPolicy: return "policy";
    case EpisodeSource::kReplay: return "replay";
  }
  return "unknown";
}

EpisodeSource parse_episode_source(const std::string& text) {
  if (text == "planner") return EpisodeSource::kPlanner;
  if (text == "policy") return EpisodeSource::kPolicy;
  if (text == "replay") return EpisodeSource::kReplay;
  throw FormatError("unknown episode source '" + text + "'");
}

double reward(const RewardSpec& spec, const Configuration& q_object, const Eigen::VectorXd& action) {
  if (q_object.size() != spec.goal.size())
    throw DimensionMismatch("reward: object state and goal differ in size");
  if (action.size() != spec.action_penalty.rows())
    throw DimensionMismatch("reward: action and penalty matrix differ in size");
  const double err = (spec.goal - q_object).squaredNorm();
  return -spec.c * err - action.dot(spec.action_penalty * action);
}

namespace {

KinematicChain make_arm() {
  const std::vector<double> lengths = {0.40, 0.35, 0.25};
  std::vector<Joint> joints;
  std::vector<Link> links;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    Joint j;
    j.kind = JointKind::kRevolute;
    j.origin = i == 0 ? Pose2{} : Pose2{lengths[i - 1], 0.0, 0.0};
    j.lo = i == 0 ? -std::numbers::pi : -2.8;
    j.hi = i == 0 ? std::numbers::pi : 2.8;
    joints.push_back(j);
    Link l;
    l.name = "link" + std::to_string(i + 1);
    l.segments.push_back({Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(lengths[i], 0.0)});
    links.push_back(std::move(l));
  }
  links.back().frames.push_back({"tip", Pose2{lengths.back(), 0.0, 0.0}});
  return KinematicChain("arm", Pose2{}, std::move(joints), std::move(links));
}

KinematicChain make_drawer() {
  Joint j{JointKind::kPrismatic, Pose2{}, 0.0, 0.4};
  Link l;
  l.name = "drawer";
  l.segments = {{Eigen::Vector2d(0.0, -0.1), Eigen::Vector2d(0.0, 0.1)},
                {Eigen::Vector2d(0.0, -0.1), Eigen::Vector2d(-0.3, -0.1)},
                {Eigen::Vector2d(0.0, 0.1), Eigen::Vector2d(-0.3, 0.1)}};
  l.frames.push_back({"handle", Pose2{0.04, 0.0, 0.0}});
  return KinematicChain("drawer", Pose2{0.85, 0.25, std::numbers::pi}, {j}, {l});
}

KinematicChain make_door() {
  Joint j{JointKind::kRevolute, Pose2{}, 0.0, 1.7};
  Link l;
  l.name = "door";
  l.segments = {{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.5, 0.0)}};
  l.frames.push_back({"handle", Pose2{0.45, 0.0, 0.0}});
  return KinematicChain("door", Pose2{0.6, -0.7, 0.0}, {j}, {l});
}

constexpr double kBallRadius = 0.04;

KinematicChain make_ball_slide() {
  // The planner's static-scene model of the ball: a slide along world +y.
  Joint j{JointKind::kPrismatic, Pose2{}, -0.5, 2.0};
  Link l;
  l.name = "ball";
  l.circles.push_back({Eigen::Vector2d::Zero(), kBallRadius});
  return KinematicChain("ball", Pose2{0.55, -0.25, std::numbers::pi / 2.0}, {j}, {l});
}

Configuration robot_start(const KinematicChain& arm, const Eigen::Vector2d& tip,
                          const Configuration& seed) {
  IkOptions opt;
  opt.orientation_weight = 0.0;
  opt.tol = 1e-9;
  opt.max_iters = 2000;
  return ik(arm, Pose2{tip.x(), tip.y(), 0.0}, seed, "tip", opt);
}

WorldState make_state(const Configuration& q_robot, const Configuration& q_object) {
  WorldState s;
  s.q_robot = q_robot;
  s.qd_robot = Eigen::VectorXd::Zero(q_robot.size());
  s.q_object = q_object;
  s.qd_object = Eigen::VectorXd::Zero(q_object.size());
  return s;
}

}  // namespace

TaskSpec make_task(TaskId id) {
  KinematicChain arm = make_arm();
  RewardSpec reward;
  reward.c = 60.0;
  reward.action_penalty = 0.001 * Eigen::MatrixXd::Identity(3, 3);
  reward.gamma = 1.0;

  switch (id) {
    case TaskId::kDrawerOpen: {
      reward.goal = Configuration::Constant(1, 0.3);
      Configuration q0 = robot_start(arm, {0.44, 0.60}, Eigen::Vector3d(0.0, 1.5, 0.0));
      TaskSpec spec{.id = id,
                    .robot = arm,
                    .object = make_drawer(),
                    .dynamics = {.inertia = 1.0, .damping = 4.0, .friction = 2.0},
                    .grasp_part = "handle",
                    .initial = make_state(q0, Configuration::Zero(1)),
                    .reward = reward,
                    .mode = ManipulationMode::kAttach,
                    .plan_speed = 0.2};
      spec.scene = {{Eigen::Vector2d(0.86, 0.36), Eigen::Vector2d(0.86, 0.6)},
                    {Eigen::Vector2d(0.86, -0.1), Eigen::Vector2d(0.86, 0.14)}};
      return spec;
    }
    case TaskId::kDoorClose: {
      reward.goal = Configuration::Zero(1);
      Configuration q0 = robot_start(arm, {0.3, -0.3}, Eigen::Vector3d(-1.0, 1.2, 1.0));
      TaskSpec spec{.id = id,
                    .robot = arm,
                    .object = make_door(),
                    .dynamics = {.inertia = 0.08, .damping = 0.05, .friction = 0.15},
                    .grasp_part = "handle",
                    .initial = make_state(q0, Configuration::Constant(1, 1.6)),
                    .reward = reward,
                    .mode = ManipulationMode::kPush,
                    .plan_speed = 1.0};
      spec.scene = {{Eigen::Vector2d(0.6, -0.75), Eigen::Vector2d(1.15, -0.75)}};
      return spec;
    }
    case TaskId::kTeeBall: {
      reward.goal = Configuration::Constant(1, 1.0);
      Configuration q0 = robot_start(arm, {0.55, -0.45}, Eigen::Vector3d(-1.0, 1.2, 1.0));
      KinematicChain slide = make_ball_slide();
      WorldState init = make_state(q0, Configuration::Zero(1));
      const Pose2 c = fk(slide, init.q_object, "ball");
      Ball ball;
      ball.position = Eigen::Vector3d(c.x, c.y, 0.2);
      init.ball = ball;
      TaskSpec spec{.id = id,
                    .robot = arm,
                    .object = slide,
                    .dynamics = {.inertia = 0.05, .damping = 0.0, .friction = 0.2},
                    .grasp_part = "ball",
                    .initial = init,
                    .reward = reward,
                    .mode = ManipulationMode::kStrike,
                    .plan_speed = 0.5,
                    .tee_height = 0.2,
                    .ball_radius = kBallRadius};
      return spec;
    }
  }
  throw ConfigError("unknown task id");
}

void validate(const TaskSpec& spec) {
  if (spec.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (!(spec.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!spec.object.find_frame(spec.grasp_part))
    throw ConfigError("grasp part '" + spec.grasp_part + "' not on object chain");
  if (!(spec.reward.c > 0.0)) throw ConfigError("reward c must be positive");
  if (!(spec.reward.gamma > 0.0 && spec.reward.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(spec.dynamics.inertia > 0.0) || spec.dynamics.damping < 0.0 || spec.dynamics.friction < 0.0)
    throw ConfigError("invalid object dynamics");
  if (spec.contact.substeps < 1) throw ConfigError("substeps must be positive");
}

std::size_t observation_dim(const TaskSpec& spec) { return spec.robot.dof() + spec.object.dof(); }
std::size_t action_dim(const TaskSpec& spec) { return spec.robot.dof(); }

namespace {

/// One semi-implicit Euler substep of a 1-DoF joint under viscous damping,
/// Coulomb friction, an optional detent spring and an external force.
void integrate_joint(double& q, double& v, double external, const ObjectDynamics& dyn, double lo,
                     double hi, double h) {
  double force = external - dyn.damping * v;
  if (dyn.detent) force -= dyn.detent->stiffness * (q - dyn.detent->rest);
  const double fc = dyn.friction;
  if (v != 0.0) {
    const double sgn = v > 0.0 ? 1.0 : -1.0;
    double v_new = v + h * (force - fc * sgn) / dyn.inertia;
    // Kinetic friction stops the joint; it never reverses it.
    if (v_new * sgn < 0.0) v_new = 0.0;
    v = v_new;
  } else if (std::abs(force) > fc) {
    v = h * (force - fc * (force > 0.0 ? 1.0 : -1.0)) / dyn.inertia;
  }
  q += h * v;
  if (q < lo) {
    q = lo;
    v = std::max(v, 0.0);
  } else if (q > hi) {
    q = hi;
    v = std::min(v, 0.0);
  }
}

Eigen::Vector2d grasp_position(const TaskSpec& spec, const Configuration& q_object, const FrameRef& grasp) {
  return fk(spec.object, q_object, grasp).position();
}

/// d(grasp position)/dq_O for the single object joint.
Eigen::Vector2d object_point_jacobian(const TaskSpec& spec, const Configuration& q_object,
                                      const Eigen::Vector2d& point) {
  const auto jp = spec.object.joint_poses(q_object);
  if (spec.object.joint(0).kind == JointKind::kRevolute)
    return {-(point.y() - jp[0].y), point.x() - jp[0].x};
  return {std::cos(jp[0].theta), std::sin(jp[0].theta)};
}

void step_attach(WorldState& next, const WorldState& prev, const TaskSpec& spec,
                 const Eigen::Vector2d& ee_old, const Eigen::Vector2d& ee_new) {
  const auto grasp = *spec.object.find_frame(spec.grasp_part);
  const auto& dyn = spec.dynamics;
  const double lo = spec.object.joint(0).lo, hi = spec.object.joint(0).hi;
  const double dt = spec.dt;
  double q = prev.q_object[0], v = prev.qd_object[0];

  const Eigen::Vector2d g_old = grasp_position(spec, prev.q_object, grasp);
  const bool engaged = (ee_old - g_old).norm() <= spec.contact.attach_radius;
  double external = 0.0;
  bool slipped = false;
  if (engaged) {
    const Eigen::Vector2d jg = object_point_jacobian(spec, prev.q_object, g_old);
    const Eigen::Vector2d v_ee = (ee_new - ee_old) / dt;
    const double v_des = jg.dot(v_ee) / jg.squaredNorm();
    double required = dyn.inertia * (v_des - v) / dt + dyn.damping * v_des;
    if (v_des != 0.0) required += dyn.friction * (v_des > 0.0 ? 1.0 : -1.0);
    if (dyn.detent) required += dyn.detent->stiffness * (q - dyn.detent->rest);
    const double cap = spec.contact.attach_max_force * jg.norm();
    if (std::abs(required) <= cap) {
      v = v_des;
      q += dt * v;
      if (q < lo) { q = lo; v = 0.0; }
      if (q > hi) { q = hi; v = 0.0; }
    } else {
      external = required > 0.0 ? cap : -cap;
      slipped = true;
    }
  }
  if (!engaged || slipped) {
    const double h = dt / spec.contact.substeps;
    for (int i = 0; i < spec.contact.substeps; ++i) integrate_joint(q, v, external, dyn, lo, hi, h);
  }
  next.q_object[0] = q;
  next.qd_object[0] = v;
  const Eigen::Vector2d g_new = grasp_position(spec, next.q_object, grasp);
  next.attached = engaged && !slipped && (ee_new - g_new).norm() <= spec.contact.attach_radius;
}

void step_push(WorldState& next, const WorldState& prev, const TaskSpec& spec,
               const Eigen::Vector2d& ee_old, const Eigen::Vector2d& ee_new) {
  const auto& dyn = spec.dynamics;
  const auto& cp = spec.contact;
  const double lo = spec.object.joint(0).lo, hi = spec.object.joint(0).hi;
  const int n = cp.substeps;
  const double h = spec.dt / n;
  const Eigen::Vector2d v_ee = (ee_new - ee_old) / spec.dt;
  const Segment local = spec.object.links().back().segments.front();
  Configuration qo = prev.q_object;
  double v = prev.qd_object[0];
  bool touching = false;

  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d p = ee_old + (ee_new - ee_old) * (static_cast<double>(i + 1) / n);
    const Pose2 link = spec.object.link_poses(qo).back();
    const Eigen::Vector2d a = link.apply(local.a), b = link.apply(local.b);
    const double len = (b - a).norm();
    const Eigen::Vector2d u = (b - a) / len;
    const Eigen::Vector2d normal(-u.y(), u.x());
    const double along = (p - a).dot(u);
    const double depth = (p - a).dot(normal);
    double external = 0.0;
    if (along >= 0.0 && along <= len && depth < 0.0 && depth > -cp.push_depth) {
      const Eigen::Vector2d contact = a + along * u;
      const Eigen::Vector2d jc = object_point_jacobian(spec, qo, contact);
      const double penetration_rate = -(v_ee.dot(normal) - v * jc.dot(normal));
      const double force = std::max(0.0, cp.push_stiffness * -depth + cp.push_damping * penetration_rate);
      external = -force * jc.dot(normal);
      touching = force > 0.0;
    }
    integrate_joint(qo[0], v, external, dyn, lo, hi, h);
  }
  next.q_object = qo;
  next.qd_object[0] = v;
  next.attached = touching;
}

void step_strike(WorldState& next, const WorldState& prev, const TaskSpec& spec) {
  const auto& dyn = spec.dynamics;
  const auto& cp = spec.contact;
  const int n = cp.substeps;
  const double h = spec.dt / n;
  Ball ball = *prev.ball;
  const Segment local = spec.robot.links().back().segments.front();
  const double y0 = spec.initial.ball->position.y();

  Configuration q_prev = prev.q_robot;
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i + 1) / n;
    const Configuration q_sub = prev.q_robot + (next.q_robot - prev.q_robot) * s;

    // The arm sweeps at tee height, so only a ball above the ground is hit.
    if (ball.position.z() > 0.0) {
      const Pose2 link = spec.robot.link_poses(q_sub).back();
      const Segment seg{link.apply(local.a), link.apply(local.b)};
      double t = 0.0;
      const Eigen::Vector2d c = ball.position.head<2>();
      const double dist = point_segment_distance(c, seg, &t);
      if (dist < spec.ball_radius) {
        const Eigen::Vector2d hit_local = local.a + t * (local.b - local.a);
        const Pose2 link_prev = spec.robot.link_poses(q_prev).back();
        const Eigen::Vector2d hit = link.apply(hit_local);
        const Eigen::Vector2d v_link = (hit - link_prev.apply(hit_local)) / h;
        Eigen::Vector2d normal = c - hit;
        if (normal.norm() > 1e-12) {
          normal.normalize();
        } else {
          normal = v_link.norm() > 1e-12 ? Eigen::Vector2d(v_link.normalized()) : Eigen::Vector2d(0.0, 1.0);
        }
        const double vn = (ball.velocity.head<2>() - v_link).dot(normal);
        if (vn < 0.0) {
          ball.velocity.head<2>() -= (1.0 + cp.restitution) * vn * normal;
          ball.struck = true;
        }
        ball.position.head<2>() = hit + normal * spec.ball_radius;
      }
    }

    if (ball.struck) {
      const bool airborne = ball.position.z() > 0.0;
      Eigen::Vector3d accel = -dyn.damping / dyn.inertia * ball.velocity;
      if (airborne) {
        accel.z() -= cp.gravity;
        ball.velocity += h * accel;
      } else {
        Eigen::Vector2d vxy = ball.velocity.head<2>();
        const double speed = vxy.norm();
        vxy += h * accel.head<2>();
        if (speed > 0.0) {
          const double decel = h * dyn.friction / dyn.inertia;
          vxy = vxy.norm() > decel ? Eigen::Vector2d(vxy - decel * vxy.normalized()) : Eigen::Vector2d::Zero();
        }
        ball.velocity = Eigen::Vector3d(vxy.x(), vxy.y(), 0.0);
      }
      ball.position += h * ball.velocity;
      if (ball.position.z() <= 0.0) {
        ball.position.z() = 0.0;
        ball.velocity.z() = 0.0;
      }
    }
    q_prev = q_sub;
  }
  next.ball = ball;
  next.q_object[0] = ball.position.y() - y0;
  next.qd_object[0] = ball.velocity.y();
  next.attached = false;
}

}  // namespace

StepResult step(const WorldState& state, const TaskSpec& spec, const Eigen::VectorXd& action) {
  const auto dof = static_cast<Eigen::Index>(spec.robot.dof());
  if (action.size() != dof) throw DimensionMismatch("action has wrong dimension");
  if (!action.allFinite()) throw InvalidAction("action contains non-finite values");

  const Eigen::VectorXd a = action.cwiseMax(-spec.velocity_limit).cwiseMin(spec.velocity_limit);
  WorldState next = state;
  next.q_robot = spec.robot.clamp(state.q_robot + a * spec.dt);
  next.qd_robot = (next.q_robot - state.q_robot) / spec.dt;
  next.step = state.step + 1;

  const Eigen::Vector2d ee_old = fk(spec.robot, state.q_robot, spec.ee_frame).position();
  const Eigen::Vector2d ee_new = fk(spec.robot, next.q_robot, spec.ee_frame).position();
  switch (spec.mode) {
    case ManipulationMode::kAttach: step_attach(next, state, spec, ee_old, ee_new); break;
    case ManipulationMode::kPush: step_push(next, state, spec, ee_old, ee_new); break;
    case ManipulationMode::kStrike: step_strike(next, state, spec); break;
  }
  const double r = reward(spec.reward, next.q_object, a);
  return {std::move(next), r};
}

Eigen::VectorXd observe(const WorldState& state, const TaskSpec& spec) {
  (void)spec;
  Eigen::VectorXd obs(state.q_robot.size() + state.q_object.size());
  obs << state.q_robot, state.q_object;
  return obs;
}

WorldState state_from_observation(const TaskSpec& spec, const Eigen::VectorXd& obs) {
  if (static_cast<std::size_t>(obs.size()) != observation_dim(spec))
    throw DimensionMismatch("observation has wrong dimension");
  WorldState s = spec.initial;
  const auto nr = static_cast<Eigen::Index>(spec.robot.dof());
  s.q_robot = obs.head(nr);
  s.q_object = obs.tail(obs.size() - nr);
  if (s.ball) {
    // Strike episodes always start with the ball resting on the tee.
    s.q_object = spec.initial.q_object;
  }
  return s;
}

Eigen::VectorXd ReplayActor::act(const Eigen::VectorXd& obs, Rng& rng) {
  (void)rng;
  if (t_ < actions_.rows()) return actions_.row(t_++).transpose();
  (void)obs;
  return Eigen::VectorXd::Zero(actions_.cols());
}

Episode rollout(const TaskSpec& spec, Actor& actor, std::uint64_t seed, EpisodeSource source) {
  return rollout(spec, spec.initial, actor, seed, source);
}

Episode rollout(const TaskSpec& spec, const WorldState& initial, Actor& actor, std::uint64_t seed,
                EpisodeSource source) {
  const auto horizon = static_cast<Eigen::Index>(spec.horizon);
  const auto od = static_cast<Eigen::Index>(observation_dim(spec));
  const auto ad = static_cast<Eigen::Index>(action_dim(spec));
  Episode ep;
  ep.task = to_string(spec.id);
  ep.seed = seed;
  ep.source = source;
  ep.observations.resize(horizon, od);
  ep.actions.resize(horizon, ad);
  ep.rewards.resize(horizon);

  Rng rng(seed);
  WorldState state = initial;
  Eigen::VectorXd obs = observe(state, spec);
  actor.reset(obs);
  double ret = 0.0, discount = 1.0;
  for (Eigen::Index t = 0; t < horizon; ++t) {
    const Eigen::VectorXd a = actor.act(obs, rng);
    if (a.size() != ad) throw DimensionMismatch("policy action dimension does not match robot");
    auto [next, r] = step(state, spec, a);
    ep.observations.row(t) = obs.transpose();
    ep.actions.row(t) = a.transpose();
    ep.rewards[t] = r;
    ret += discount * r;
    discount *= spec.reward.gamma;
    state = std::move(next);
    obs = observe(state, spec);
  }
  ep.final_observation = obs;
  ep.ret = ret;
  return ep;
}

Episode replay(const TaskSpec& spec, const Episode& episode) {
  if (episode.length() == 0) throw FormatError("cannot replay an empty episode");
  ReplayActor actor(episode.actions);
  const WorldState init = state_from_observation(spec, episode.observations.row(0).transpose());
  return rollout(spec, init, actor, episode.seed, EpisodeSource::kReplay);
}

}  // namespace skillboot
