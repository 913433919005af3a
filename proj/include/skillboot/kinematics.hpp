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

// Planar kinematic chains shared by the robot arm and the articulated
// objects it manipulates.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace skillboot {

/// Joint values of a chain, one entry per joint (rad or m by joint kind).
using Configuration = Eigen::VectorXd;

using Jacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Shortest signed rotation taking `from` onto `to`.
double angle_diff(double to, double from);

/// Rigid transform in the plane. `theta` is kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

  Eigen::Vector2d position() const { return {x, y}; }
  Eigen::Vector2d apply(const Eigen::Vector2d& local) const;
  Eigen::Vector2d rotate(const Eigen::Vector2d& local) const;
  Pose2 operator*(const Pose2& rhs) const;
  Pose2 inverse() const;
};

enum class JointKind { kRevolute, kPrismatic };

struct Joint {
  JointKind kind = JointKind::kRevolute;
  Pose2 origin;  ///< joint frame in the parent link frame
  double lo = 0.0;
  double hi = 0.0;
};

struct Segment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
};

struct Circle {
  Eigen::Vector2d center;
  double radius = 0.0;
};

struct NamedFrame {
  std::string name;
  Pose2 offset;  ///< in the owning link frame
};

struct Link {
  std::string name;
  std::vector<Segment> segments;
  std::vector<Circle> circles;
  std::vector<NamedFrame> frames;
};

/// Location of a named frame: owning link index and offset in that link.
struct FrameRef {
  std::size_t link = 0;
  Pose2 offset;
};

/// Serial chain of (joint, link) pairs rooted at a fixed base pose. Link i
/// is moved by joint i. Immutable after construction.
class KinematicChain {
 public:
  KinematicChain(std::string name, Pose2 base, std::vector<Joint> joints, std::vector<Link> links);

  const std::string& name() const { return name_; }
  const Pose2& base() const { return base_; }
  std::size_t dof() const { return joints_.size(); }
  const Joint& joint(std::size_t i) const { return joints_.at(i); }
  const Link& link(std::size_t i) const { return links_.at(i); }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<Link>& links() const { return links_; }

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;

  /// Resolves a named frame; link names resolve to the link origin.
  std::optional<FrameRef> find_frame(const std::string& frame) const;
  std::optional<std::size_t> find_link(const std::string& link) const;

  bool within_limits(const Configuration& q, double slack = 0.0) const;
  Configuration clamp(const Configuration& q) const;

  /// World pose of every link frame.
  std::vector<Pose2> link_poses(const Configuration& q) const;

  /// World pose of each joint frame before the joint motion is applied.
  std::vector<Pose2> joint_poses(const Configuration& q) const;

  /// World-space collision segments of all links (circles excluded).
  std::vector<Segment> world_segments(const Configuration& q) const;

  void check_dimension(const Configuration& q) const;

 private:
  std::string name_;
  Pose2 base_;
  std::vector<Joint> joints_;
  std::vector<Link> links_;
};

Pose2 fk(const KinematicChain& chain, const Configuration& q, const std::string& frame);
Pose2 fk(const KinematicChain& chain, const Configuration& q, const FrameRef& frame);

/// d(x, y, theta)/dq of the named frame.
Jacobian jacobian(const KinematicChain& chain, const Configuration& q, const std::string& frame);
Jacobian jacobian(const KinematicChain& chain, const Configuration& q, const FrameRef& frame);

struct IkOptions {
  double tol = 1e-4;
  int max_iters = 200;
  double damping = 0.1;
  double max_step = 0.2;
  /// Weight on the orientation residual; 0 leaves orientation free.
  double orientation_weight = 1.0;
  /// Iterations without a 1% residual improvement after which the solver
  /// restarts from a fixed pseudo-random configuration; 0 disables restarts.
  int stall_window = 20;
};

/// Damped least squares. Throws NonConvergent if the residual is above
/// `tol` after `max_iters` iterations (restarts included).
Configuration ik(const KinematicChain& chain, const Pose2& target, const Configuration& q_init,
                 const std::string& frame, const IkOptions& options = {});

/// IK residual norm used for the convergence test.
double ik_residual(const KinematicChain& chain, const Configuration& q, const Pose2& target,
                   const FrameRef& frame, double orientation_weight);

// Planar geometry helpers.
double point_segment_distance(const Eigen::Vector2d& p, const Segment& s, double* t = nullptr);
double segment_segment_distance(const Segment& s1, const Segment& s2);

}  // namespace skillboot
