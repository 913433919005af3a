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

#include "skillboot/error.hpp"
#include "skillboot/optimize.hpp"

namespace skillboot {

Trajectory episode_robot_trajectory(const Episode& episode, std::size_t robot_dof, double dt) {
  const auto n = static_cast<Eigen::Index>(robot_dof);
  const Eigen::Index steps = episode.length();
  if (steps == 0) throw DegenerateDemo("empty demonstration");
  Trajectory out;
  out.dt = dt;
  out.chain = "robot";
  for (Eigen::Index t = 0; t < steps; ++t) out.waypoints.push_back(episode.observations.row(t).head(n).transpose());
  out.waypoints.push_back(episode.final_observation.head(n));
  while (out.waypoints.size() > 2 &&
         (out.waypoints[out.waypoints.size() - 1] - out.waypoints[out.waypoints.size() - 2]).cwiseAbs().maxCoeff() <
             1e-12) {
    out.waypoints.pop_back();
  }
  return out;
}

DmpPolicy lwr_fit(const Trajectory& demo, std::size_t basis, std::optional<double> tau, DmpConstants constants) {
  if (demo.size() < 2 || demo.size() < basis) throw DegenerateDemo("demonstration shorter than the basis count");
  if (!(demo.dt > 0.0)) throw DegenerateDemo("demonstration has no time step");
  const double dt = demo.dt;
  const auto m = static_cast<Eigen::Index>(demo.size() - 1);  // number of transitions
  const double duration = dt * static_cast<double>(m);
  const double t_scale = tau.value_or(duration);
  const Eigen::VectorXd& y0 = demo.waypoints.front();
  const Eigen::VectorXd& goal = demo.waypoints.back();
  const auto joints = static_cast<std::size_t>(y0.size());

  DmpPolicy policy(joints, basis, t_scale, constants);
  policy.set_goals(goal);
  const auto& k = policy.constants();

  // Phase and basis activations per sample.
  Eigen::VectorXd x(m);
  Eigen::MatrixXd psi(m, static_cast<Eigen::Index>(basis));
  for (Eigen::Index t = 0; t < m; ++t) {
    x[t] = std::exp(-k.alpha_x * dt * static_cast<double>(t) / t_scale);
    psi.row(t) = policy.raw_basis(x[t]).transpose();
  }

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(joints), static_cast<Eigen::Index>(basis));
  bool informative = false;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(joints); ++j) {
    const double span = goal[j] - y0[j];
    if (std::abs(span) < 1e-9) continue;
    informative = true;
    // Discrete inverse of the integrator in dmp_step: z_{t+1} = tau * ydot_t.
    Eigen::VectorXd f(m);
    double z = 0.0;
    for (Eigen::Index t = 0; t < m; ++t) {
      const auto i = static_cast<std::size_t>(t);
      const double y = demo.waypoints[i][j];
      const double z_next = t_scale * (demo.waypoints[i + 1][j] - y) / dt;
      f[t] = t_scale * (z_next - z) / dt - k.alpha_z * (k.beta_z * (goal[j] - y) - z);
      z = z_next;
    }
    const Eigen::VectorXd scaled_phase = x * span;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(basis); ++i) {
      const double num = (psi.col(i).array() * scaled_phase.array() * f.array()).sum();
      const double den = (psi.col(i).array() * scaled_phase.array().square()).sum();
      weights(j, i) = den > 1e-300 ? num / den : 0.0;
    }
  }
  if (!informative) throw DegenerateDemo("every joint of the demonstration is static");
  policy.set_weights(weights);
  return policy;
}

std::vector<Eigen::VectorXd> dmp_rollout(const DmpPolicy& policy, const Eigen::VectorXd& start, double dt,
                                         std::size_t steps) {
  DmpState state = dmp_init(policy, start);
  std::vector<Eigen::VectorXd> out{state.y};
  out.reserve(steps + 1);
  for (std::size_t i = 0; i < steps; ++i) {
    dmp_step(policy, state, dt);
    out.push_back(state.y);
  }
  return out;
}

}  // namespace skillboot
