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

#include "skillboot/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <set>

#include <Eigen/Dense>

#include "skillboot/error.hpp"
#include "skillboot/random.hpp"

namespace skillboot {

double normalize_angle(double angle) {
  double a = std::atan2(std::sin(angle), std::cos(angle));
  if (a <= -std::numbers::pi) a = std::numbers::pi;
  return a;
}

double angle_diff(double to, double from) { return normalize_angle(to - from); }

Eigen::Vector2d Pose2::rotate(const Eigen::Vector2d& local) const {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * local.x() - s * local.y(), s * local.x() + c * local.y()};
}

Eigen::Vector2d Pose2::apply(const Eigen::Vector2d& local) const {
  return rotate(local) + position();
}

Pose2 Pose2::operator*(const Pose2& rhs) const {
  const Eigen::Vector2d p = apply(rhs.position());
  return {p.x(), p.y(), theta + rhs.theta};
}

Pose2 Pose2::inverse() const {
  const double c = std::cos(theta), s = std::sin(theta);
  return {-(c * x + s * y), s * x - c * y, -theta};
}

KinematicChain::KinematicChain(std::string name, Pose2 base, std::vector<Joint> joints,
                               std::vector<Link> links)
    : name_(std::move(name)), base_(base), joints_(std::move(joints)), links_(std::move(links)) {
  if (joints_.empty()) throw Error("chain '" + name_ + "' has no joints");
  if (joints_.size() != links_.size())
    throw DimensionMismatch("chain '" + name_ + "': joint and link counts differ");
  std::set<std::string> names;
  for (const auto& j : joints_) {
    if (!std::isfinite(j.lo) || !std::isfinite(j.hi) || j.lo > j.hi)
      throw Error("chain '" + name_ + "': invalid joint limits");
  }
  for (const auto& l : links_) {
    for (const auto& f : l.frames) {
      if (!names.insert(f.name).second)
        throw Error("chain '" + name_ + "': duplicate frame '" + f.name + "'");
    }
  }
}

Eigen::VectorXd KinematicChain::lower_limits() const {
  Eigen::VectorXd v(dof());
  for (std::size_t i = 0; i < dof(); ++i) v[i] = joints_[i].lo;
  return v;
}

Eigen::VectorXd KinematicChain::upper_limits() const {
  Eigen::VectorXd v(dof());
  for (std::size_t i = 0; i < dof(); ++i) v[i] = joints_[i].hi;
  return v;
}

std::optional<FrameRef> KinematicChain::find_frame(const std::string& frame) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    for (const auto& f : links_[i].frames) {
      if (f.name == frame) return FrameRef{i, f.offset};
    }
  }
  if (auto l = find_link(frame)) return FrameRef{*l, Pose2{}};
  return std::nullopt;
}

std::optional<std::size_t> KinematicChain::find_link(const std::string& link) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (links_[i].name == link) return i;
  }
  return std::nullopt;
}

void KinematicChain::check_dimension(const Configuration& q) const {
  if (static_cast<std::size_t>(q.size()) != dof()) {
    throw DimensionMismatch("chain '" + name_ + "' expects " + std::to_string(dof()) +
                            " joint values, got " + std::to_string(q.size()));
  }
}

bool KinematicChain::within_limits(const Configuration& q, double slack) const {
  check_dimension(q);
  for (std::size_t i = 0; i < dof(); ++i) {
    if (!(q[i] >= joints_[i].lo - slack && q[i] <= joints_[i].hi + slack)) return false;
  }
  return true;
}

Configuration KinematicChain::clamp(const Configuration& q) const {
  check_dimension(q);
  return q.cwiseMax(lower_limits()).cwiseMin(upper_limits());
}

std::vector<Pose2> KinematicChain::joint_poses(const Configuration& q) const {
  check_dimension(q);
  std::vector<Pose2> out;
  out.reserve(dof());
  Pose2 parent = base_;
  for (std::size_t i = 0; i < dof(); ++i) {
    const Pose2 jp = parent * joints_[i].origin;
    out.push_back(jp);
    parent = joints_[i].kind == JointKind::kRevolute ? jp * Pose2{0.0, 0.0, q[i]}
                                                     : jp * Pose2{q[i], 0.0, 0.0};
  }
  return out;
}

std::vector<Pose2> KinematicChain::link_poses(const Configuration& q) const {
  const auto jp = joint_poses(q);
  std::vector<Pose2> out;
  out.reserve(dof());
  for (std::size_t i = 0; i < dof(); ++i) {
    out.push_back(joints_[i].kind == JointKind::kRevolute ? jp[i] * Pose2{0.0, 0.0, q[i]}
                                                          : jp[i] * Pose2{q[i], 0.0, 0.0});
  }
  return out;
}

std::vector<Segment> KinematicChain::world_segments(const Configuration& q) const {
  const auto poses = link_poses(q);
  std::vector<Segment> out;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    for (const auto& s : links_[i].segments) out.push_back({poses[i].apply(s.a), poses[i].apply(s.b)});
  }
  return out;
}

namespace {

FrameRef resolve(const KinematicChain& chain, const std::string& frame) {
  auto ref = chain.find_frame(frame);
  if (!ref) throw UnknownFrame("chain '" + chain.name() + "' has no frame '" + frame + "'");
  return *ref;
}

}  // namespace

Pose2 fk(const KinematicChain& chain, const Configuration& q, const FrameRef& frame) {
  return chain.link_poses(q).at(frame.link) * frame.offset;
}

Pose2 fk(const KinematicChain& chain, const Configuration& q, const std::string& frame) {
  return fk(chain, q, resolve(chain, frame));
}

Jacobian jacobian(const KinematicChain& chain, const Configuration& q, const FrameRef& frame) {
  const auto jp = chain.joint_poses(q);
  const Pose2 target = fk(chain, q, frame);
  Jacobian jac = Jacobian::Zero(3, static_cast<Eigen::Index>(chain.dof()));
  for (std::size_t i = 0; i <= frame.link; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    if (chain.joint(i).kind == JointKind::kRevolute) {
      jac(0, c) = -(target.y - jp[i].y);
      jac(1, c) = target.x - jp[i].x;
      jac(2, c) = 1.0;
    } else {
      jac(0, c) = std::cos(jp[i].theta);
      jac(1, c) = std::sin(jp[i].theta);
    }
  }
  return jac;
}

Jacobian jacobian(const KinematicChain& chain, const Configuration& q, const std::string& frame) {
  return jacobian(chain, q, resolve(chain, frame));
}

double ik_residual(const KinematicChain& chain, const Configuration& q, const Pose2& target,
                   const FrameRef& frame, double orientation_weight) {
  const Pose2 p = fk(chain, q, frame);
  const double pos = std::hypot(target.x - p.x, target.y - p.y);
  const double ang = orientation_weight * std::abs(angle_diff(target.theta, p.theta));
  return std::max(pos, ang);
}

Configuration ik(const KinematicChain& chain, const Pose2& target, const Configuration& q_init,
                 const std::string& frame, const IkOptions& options) {
  chain.check_dimension(q_init);
  const FrameRef ref = resolve(chain, frame);
  const double w = options.orientation_weight;
  Configuration q = chain.clamp(q_init);
  const double lambda2 = options.damping * options.damping;

  // Folded arms can sit where J^T e vanishes; a restart leaves such points.
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  std::uint64_t restarts = 0;
  for (int iter = 0;; ++iter) {
    const Pose2 p = fk(chain, q, ref);
    Eigen::Vector3d err(target.x - p.x, target.y - p.y, w * angle_diff(target.theta, p.theta));
    const double residual = std::max(err.head<2>().norm(), std::abs(err[2]));
    if (residual <= options.tol) return q;
    if (iter >= options.max_iters) throw NonConvergent("ik did not converge on frame '" + frame + "'", residual);
    if (residual < 0.99 * best) {
      best = residual;
      stalled = 0;
    } else if (options.stall_window > 0 && ++stalled >= options.stall_window) {
      Rng rng(derive_seed(++restarts, 0));
      const Eigen::VectorXd u = sample_uniform(rng, q.size(), 0.0, 1.0);
      const Eigen::VectorXd lo = chain.lower_limits(), hi = chain.upper_limits();
      for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (std::isfinite(hi[i] - lo[i])) q[i] = lo[i] + u[i] * (hi[i] - lo[i]);
      }
      best = std::numeric_limits<double>::infinity();
      stalled = 0;
      continue;
    }
    Jacobian jac = jacobian(chain, q, ref);
    jac.row(2) *= w;
    const Eigen::Matrix3d jjt = jac * jac.transpose() + lambda2 * Eigen::Matrix3d::Identity();
    Eigen::VectorXd dq = jac.transpose() * jjt.ldlt().solve(err);
    const double peak = dq.cwiseAbs().maxCoeff();
    if (peak > options.max_step) dq *= options.max_step / peak;
    q = chain.clamp(q + dq);
  }
}

double point_segment_distance(const Eigen::Vector2d& p, const Segment& s, double* t) {
  const Eigen::Vector2d d = s.b - s.a;
  const double len2 = d.squaredNorm();
  double u = len2 > 0.0 ? (p - s.a).dot(d) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  if (t) *t = u;
  return (s.a + u * d - p).norm();
}

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

double segment_segment_distance(const Segment& s1, const Segment& s2) {
  const Eigen::Vector2d r = s1.b - s1.a, s = s2.b - s2.a;
  const double denom = cross(r, s);
  if (denom != 0.0) {
    const double t = cross(s2.a - s1.a, s) / denom;
    const double u = cross(s2.a - s1.a, r) / denom;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return 0.0;
  }
  return std::min({point_segment_distance(s1.a, s2), point_segment_distance(s1.b, s2),
                   point_segment_distance(s2.a, s1), point_segment_distance(s2.b, s1)});
}

}  // namespace skillboot
