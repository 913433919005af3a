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

// Shared fixtures for the unit tests.

#pragma once

#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "skillboot/kinematics.hpp"
#include "skillboot/optimize.hpp"
#include "skillboot/random.hpp"

namespace skillboot::testing {

/// Serial revolute arm with the given link lengths and a "tip" frame.
inline KinematicChain serial_arm(const std::vector<double>& lengths, double limit = std::numbers::pi,
                                 Pose2 base = {}) {
  std::vector<Joint> joints;
  std::vector<Link> links;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    Joint j;
    j.origin = i == 0 ? Pose2{} : Pose2{lengths[i - 1], 0.0, 0.0};
    j.lo = -limit;
    j.hi = limit;
    joints.push_back(j);
    Link l;
    l.name = "link" + std::to_string(i + 1);
    l.segments.push_back({Eigen::Vector2d::Zero(), Eigen::Vector2d(lengths[i], 0.0)});
    links.push_back(l);
  }
  links.back().frames.push_back({"tip", Pose2{lengths.back(), 0.0, 0.0}});
  return KinematicChain("arm", base, joints, links);
}

/// Single prismatic joint sliding along the base x axis.
inline KinematicChain slider(double lo = -1.0, double hi = 1.0) {
  Joint j{JointKind::kPrismatic, Pose2{}, lo, hi};
  Link l;
  l.name = "carriage";
  l.frames.push_back({"tip", Pose2{}});
  return KinematicChain("slider", Pose2{}, {j}, {l});
}

inline Eigen::Matrix3d homogeneous(double x, double y, double theta) {
  Eigen::Matrix3d m;
  m << std::cos(theta), -std::sin(theta), x, std::sin(theta), std::cos(theta), y, 0, 0, 1;
  return m;
}

/// Demonstration produced by a random 3-joint DMP with `basis` kernels.
inline Trajectory random_dmp_demo(Rng& rng, std::size_t basis, double dt = 0.02, std::size_t steps = 150) {
  const double tau = dt * static_cast<double>(steps);
  DmpPolicy dmp(3, basis, tau);
  Eigen::MatrixXd w(3, static_cast<Eigen::Index>(basis));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = sample_normal(rng, 1, 10.0)[0];
  dmp.set_weights(w);
  const Eigen::VectorXd y0 = sample_uniform(rng, 3, -1.0, 1.0);
  Eigen::VectorXd span = sample_uniform(rng, 3, 0.3, 1.2);
  for (Eigen::Index j = 0; j < 3; ++j)
    if (sample_uniform(rng, 1, 0.0, 1.0)[0] < 0.5) span[j] = -span[j];
  dmp.set_goals(y0 + span);
  Trajectory demo;
  demo.dt = dt;
  demo.chain = "arm";
  demo.waypoints = dmp_rollout(dmp, y0, dt, steps);
  return demo;
}

/// Per-joint RMSE between two equally long trajectories divided by the
/// joint's range in the reference; returns the worst joint.
inline double worst_relative_rmse(const std::vector<Eigen::VectorXd>& ref, const std::vector<Eigen::VectorXd>& other) {
  const Eigen::Index n = ref.front().size();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double lo = ref.front()[j], hi = lo, se = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      lo = std::min(lo, ref[k][j]);
      hi = std::max(hi, ref[k][j]);
      se += (ref[k][j] - other[k][j]) * (ref[k][j] - other[k][j]);
    }
    const double rmse = std::sqrt(se / static_cast<double>(ref.size()));
    worst = std::max(worst, rmse / std::max(hi - lo, 1e-12));
  }
  return worst;
}

}  // namespace skillboot::testing
