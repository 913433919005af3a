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

// Fitting policies to demonstrations and improving them from returns.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "skillboot/episode.hpp"
#include "skillboot/planner.hpp"
#include "skillboot/policy.hpp"
#include "skillboot/random.hpp"

namespace skillboot {

// --- Locally weighted regression ---------------------------------------

/// Robot joint trajectory executed in an episode, trailing idle steps removed.
Trajectory episode_robot_trajectory(const Episode& episode, std::size_t robot_dof, double dt);

/// Fits one DMP per joint to a single demonstration. Goal is the final
/// demo value, tau defaults to the demo duration. Joints with goal equal to
/// start get zero weights; DegenerateDemo is raised if every joint is static.
DmpPolicy lwr_fit(const Trajectory& demo, std::size_t basis, std::optional<double> tau = std::nullopt,
                  DmpConstants constants = {});

/// Open-loop DMP integration from `start` for `steps` steps of `dt`.
std::vector<Eigen::VectorXd> dmp_rollout(const DmpPolicy& policy, const Eigen::VectorXd& start, double dt,
                                         std::size_t steps);

// --- PI^2-CMA ---------------------------------------------------------------

struct Pi2CmaState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  int population = 20;
  double temperature = 10.0;
  /// Fraction of the best samples that receive non-zero weight.
  double elite_fraction = 1.0;
  double covariance_floor = 1e-6;
  /// Blend between the previous covariance (0) and the sample estimate (1).
  double covariance_rate = 0.3;
};

/// Returns of a parameter vector; higher is better. May throw to mark a
/// failed rollout.
using ReturnFn = std::function<double(const Eigen::VectorXd&)>;

/// P_k = exp(-h (S_k - S_min) / (S_max - S_min + eps)), normalized.
Eigen::VectorXd pi2_probabilities(const Eigen::VectorXd& costs, double temperature, double elite_fraction = 1.0);

/// Reward-weighted mean and covariance update for given samples (one per
/// column) and their costs, then eigenvalue flooring.
Pi2CmaState pi2cma_apply(const Pi2CmaState& state, const Eigen::MatrixXd& samples, const Eigen::VectorXd& costs);

struct Pi2CmaReport {
  Eigen::VectorXd returns;  ///< of the successful samples
  int failed = 0;
};

Pi2CmaState pi2cma_update(const Pi2CmaState& state, const ReturnFn& objective, Rng& rng,
                          Pi2CmaReport* report = nullptr);

// --- Behavioral cloning -------------------------------------------------------

struct BcOptions {
  int epochs = 10;
  double learning_rate = 3e-3;
  int batch_size = 64;
  /// When false only the mean network is trained and log_std is kept.
  bool fit_log_std = false;
};

struct BcReport {
  std::vector<double> epoch_losses;  ///< mean negative log-likelihood
};

double bc_loss(const MlpPolicy& policy, const std::vector<Episode>& demos);

MlpPolicy bc_fit(const MlpPolicy& policy, const std::vector<Episode>& demos, const BcOptions& options, Rng& rng,
                 BcReport* report = nullptr);

// --- Natural policy gradient and DAPG ---------------------------------------

struct NpgOptions {
  double step_size = 0.05;  ///< KL-like trust region delta
  int cg_iters = 10;
  double cg_damping = 1e-4;
};

/// Score vectors (one row per sample) and advantages of an episode batch.
struct ScoreBatch {
  Eigen::MatrixXd scores;
  Eigen::VectorXd advantages;
};

/// Return-to-go minus the time-indexed batch mean.
std::vector<Eigen::VectorXd> time_baseline_advantages(const std::vector<Episode>& episodes, double gamma);

ScoreBatch score_batch(const MlpPolicy& policy, const std::vector<Episode>& episodes, double gamma);

/// F v with F = mean of score outer products.
Eigen::VectorXd fisher_vector_product(const Eigen::MatrixXd& scores, const Eigen::VectorXd& v);

/// Stops early once the squared residual falls below tol times its initial value.
Eigen::VectorXd conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                                   const Eigen::VectorXd& b, int iters, double tol = 1e-10);

/// Mean of grad log pi(a|s) over all demonstration pairs.
Eigen::VectorXd bc_gradient(const MlpPolicy& policy, const std::vector<Episode>& demos);

struct NpgReport {
  Eigen::VectorXd vanilla_gradient;
  Eigen::VectorXd step;
  double bc_weight = 0.0;
};

/// Natural step along F^-1 g scaled so that 0.5 step^T F step = delta.
Eigen::VectorXd natural_step(const Eigen::MatrixXd& scores, const Eigen::VectorXd& gradient, const NpgOptions& options);

MlpPolicy npg_update(const MlpPolicy& policy, const std::vector<Episode>& episodes, const NpgOptions& options,
                     double gamma = 1.0, NpgReport* report = nullptr);

struct DapgState {
  /// BC coefficient at epoch 0, in units of the batch mean |advantage|.
  double lambda0 = 0.1;
  double decay = 0.97;
  NpgOptions npg;
};

/// BC-term weight lambda0 * decay^epoch (before advantage normalization).
double dapg_bc_weight(const DapgState& state, int epoch);

MlpPolicy dapg_update(const MlpPolicy& policy, const std::vector<Episode>& episodes, const std::vector<Episode>& demos,
                      const DapgState& state, int epoch, double gamma = 1.0, NpgReport* report = nullptr);

}  // namespace skillboot
