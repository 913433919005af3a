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

// Policy classes: per-joint discrete dynamic movement primitives coupled
// through one canonical phase, and a Gaussian tanh MLP.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "skillboot/random.hpp"
#include "skillboot/world.hpp"

namespace skillboot {

struct DmpConstants {
  double alpha_z = 25.0;
  double beta_z = 6.25;
  double alpha_x = 3.0;
};

/// Searchable parameters are the forcing weights, the goals and log(tau).
/// The start y0 is taken from the robot state at the start of each rollout.
class DmpPolicy {
 public:
  DmpPolicy(std::size_t joints, std::size_t basis, double tau, DmpConstants constants = {});

  std::size_t joints() const { return static_cast<std::size_t>(weights_.rows()); }
  std::size_t basis() const { return static_cast<std::size_t>(weights_.cols()); }
  double tau() const { return tau_; }
  const DmpConstants& constants() const { return constants_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& goals() const { return goals_; }
  const Eigen::VectorXd& centers() const { return centers_; }
  const Eigen::VectorXd& widths() const { return widths_; }

  void set_tau(double tau);
  void set_goals(const Eigen::VectorXd& goals);
  void set_weights(const Eigen::MatrixXd& weights);

  /// Normalized basis activations psi_i(x) / sum psi.
  Eigen::VectorXd basis_activations(double x) const;
  Eigen::VectorXd raw_basis(double x) const;

  /// [w joint 0 | ... | w joint n-1 | goals | log tau].
  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& params);
  std::size_t num_params() const { return joints() * basis() + joints() + 1; }

 private:
  DmpConstants constants_;
  double tau_;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd goals_;
  Eigen::VectorXd centers_;
  Eigen::VectorXd widths_;
};

struct DmpState {
  double x = 1.0;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  Eigen::VectorXd y0;
};

DmpState dmp_init(const DmpPolicy& policy, const Eigen::VectorXd& q);

/// Advances the transformation and canonical systems by dt and returns
/// the commanded joint velocities (the new y-dot).
Eigen::VectorXd dmp_step(const DmpPolicy& policy, DmpState& state, double dt);

class DmpActor : public Actor {
 public:
  DmpActor(const DmpPolicy& policy, double dt) : policy_(policy), dt_(dt) {}
  void reset(const Eigen::VectorXd& obs) override;
  Eigen::VectorXd act(const Eigen::VectorXd& obs, Rng& rng) override;

 private:
  const DmpPolicy& policy_;
  double dt_;
  DmpState state_;
};

/// Gaussian policy a ~ N(mlp(s), diag(exp(2 log_std))) with tanh hidden
/// layers and a linear output layer. Parameters live in one flat vector:
/// per layer the row-major weight matrix then the bias, then log_std.
class MlpPolicy {
 public:
  MlpPolicy(std::size_t obs_dim, std::size_t act_dim, std::vector<std::size_t> hidden = {32, 32},
            double init_log_std = -1.0);

  /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static MlpPolicy random(std::size_t obs_dim, std::size_t act_dim, Rng& rng,
                          std::vector<std::size_t> hidden = {32, 32}, double init_log_std = -1.0);

  std::size_t obs_dim() const { return sizes_.front(); }
  std::size_t act_dim() const { return sizes_.back(); }
  const std::vector<std::size_t>& hidden() const { return hidden_; }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }

  const Eigen::VectorXd& params() const { return params_; }
  void set_params(const Eigen::VectorXd& params);
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }

  Eigen::VectorXd log_std() const;
  Eigen::VectorXd mean(const Eigen::VectorXd& obs) const;
  Eigen::VectorXd act(const Eigen::VectorXd& obs, Rng& rng, bool deterministic) const;
  double log_prob(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const;
  /// Log-density and its gradient w.r.t. every parameter.
  std::pair<double, Eigen::VectorXd> log_prob_grad(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const;
  /// Row-wise version: obs is N x obs_dim, actions N x act_dim. Returns the
  /// N log-densities and the N x num_params score matrix.
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> log_prob_grad_batch(const Eigen::MatrixXd& obs,
                                                                  const Eigen::MatrixXd& actions) const;

  /// Offset of the log_std block inside the flat vector.
  std::size_t log_std_offset() const { return num_params() - act_dim(); }

 private:
  std::vector<std::size_t> hidden_;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;  // start of each layer's weight block
  Eigen::VectorXd params_;
};

/// Independent diagonal-Gaussian log-density.
double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std);

class MlpActor : public Actor {
 public:
  MlpActor(const MlpPolicy& policy, bool deterministic) : policy_(policy), deterministic_(deterministic) {}
  void reset(const Eigen::VectorXd&) override {}
  Eigen::VectorXd act(const Eigen::VectorXd& obs, Rng& rng) override {
    return policy_.act(obs, rng, deterministic_);
  }

 private:
  const MlpPolicy& policy_;
  bool deterministic_;
};

// Checkpoints: flat parameters plus the metadata needed to rebuild the class.
void save_checkpoint(const std::string& path, const DmpPolicy& policy);
void save_checkpoint(const std::string& path, const MlpPolicy& policy);
std::string checkpoint_class(const std::string& path);
DmpPolicy load_dmp_checkpoint(const std::string& path);
MlpPolicy load_mlp_checkpoint(const std::string& path);

}  // namespace skillboot
