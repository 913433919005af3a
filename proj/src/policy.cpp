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

#include "skillboot/policy.hpp"

#include <cmath>
#include <numbers>

#include "skillboot/error.hpp"

namespace skillboot {

DmpPolicy::DmpPolicy(std::size_t joints, std::size_t basis, double tau, DmpConstants constants)
    : constants_(constants), tau_(tau) {
  if (joints == 0) throw Error("DMP needs at least one joint");
  if (basis == 0) throw Error("DMP needs at least one basis function");
  if (!(tau > 0.0)) throw Error("DMP tau must be positive");
  const auto k = static_cast<Eigen::Index>(basis);
  weights_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(joints), k);
  goals_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(joints));
  centers_.resize(k);
  widths_.resize(k);
  for (Eigen::Index i = 0; i < k; ++i)
    centers_[i] = k == 1 ? 1.0 : std::exp(-constants_.alpha_x * static_cast<double>(i) / static_cast<double>(k - 1));
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    const double gap = centers_[i + 1] - centers_[i];
    widths_[i] = 1.0 / (gap * gap);
  }
  widths_[k - 1] = k == 1 ? 1.0 : widths_[k - 2];
}

void DmpPolicy::set_tau(double tau) {
  if (!(tau > 0.0)) throw Error("DMP tau must be positive");
  tau_ = tau;
}

void DmpPolicy::set_goals(const Eigen::VectorXd& goals) {
  if (goals.size() != goals_.size()) throw DimensionMismatch("DMP goal vector has wrong size");
  goals_ = goals;
}

void DmpPolicy::set_weights(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights_.rows() || weights.cols() != weights_.cols())
    throw DimensionMismatch("DMP weight matrix has wrong shape");
  weights_ = weights;
}

Eigen::VectorXd DmpPolicy::raw_basis(double x) const {
  return (-widths_.array() * (x - centers_.array()).square()).exp().matrix();
}

Eigen::VectorXd DmpPolicy::basis_activations(double x) const {
  Eigen::VectorXd psi = raw_basis(x);
  const double sum = psi.sum();
  return sum > 1e-300 ? Eigen::VectorXd(psi / sum) : Eigen::VectorXd::Zero(psi.size());
}

Eigen::VectorXd DmpPolicy::params() const {
  const auto n = static_cast<Eigen::Index>(joints()), k = static_cast<Eigen::Index>(basis());
  Eigen::VectorXd p(static_cast<Eigen::Index>(num_params()));
  for (Eigen::Index j = 0; j < n; ++j) p.segment(j * k, k) = weights_.row(j).transpose();
  p.segment(n * k, n) = goals_;
  p[n * k + n] = std::log(tau_);
  return p;
}

void DmpPolicy::set_params(const Eigen::VectorXd& p) {
  if (static_cast<std::size_t>(p.size()) != num_params())
    throw DimensionMismatch("DMP parameter vector has length " + std::to_string(p.size()) + ", expected " +
                            std::to_string(num_params()));
  const auto n = static_cast<Eigen::Index>(joints()), k = static_cast<Eigen::Index>(basis());
  for (Eigen::Index j = 0; j < n; ++j) weights_.row(j) = p.segment(j * k, k).transpose();
  goals_ = p.segment(n * k, n);
  tau_ = std::exp(p[n * k + n]);
}

DmpState dmp_init(const DmpPolicy& policy, const Eigen::VectorXd& q) {
  if (static_cast<std::size_t>(q.size()) != policy.joints()) throw DimensionMismatch("DMP start has wrong size");
  DmpState s;
  s.x = 1.0;
  s.y = q;
  s.y0 = q;
  s.z = Eigen::VectorXd::Zero(q.size());
  return s;
}

Eigen::VectorXd dmp_step(const DmpPolicy& policy, DmpState& state, double dt) {
  const auto& k = policy.constants();
  const double tau = policy.tau();
  const Eigen::VectorXd phi = policy.basis_activations(state.x);
  const Eigen::VectorXd forcing =
      (policy.weights() * phi).cwiseProduct(state.x * (policy.goals() - state.y0));
  const Eigen::VectorXd zdot =
      (k.alpha_z * (k.beta_z * (policy.goals() - state.y) - state.z) + forcing) / tau;
  state.z += dt * zdot;
  const Eigen::VectorXd ydot = state.z / tau;
  state.y += dt * ydot;
  state.x *= std::exp(-k.alpha_x * dt / tau);
  return ydot;
}

void DmpActor::reset(const Eigen::VectorXd& obs) {
  state_ = dmp_init(policy_, obs.head(static_cast<Eigen::Index>(policy_.joints())));
}

Eigen::VectorXd DmpActor::act(const Eigen::VectorXd& obs, Rng& rng) {
  (void)obs;
  (void)rng;
  return dmp_step(policy_, state_, dt_);
}

// --- MLP -------------------------------------------------------------------

MlpPolicy::MlpPolicy(std::size_t obs_dim, std::size_t act_dim, std::vector<std::size_t> hidden,
                     double init_log_std)
    : hidden_(std::move(hidden)) {
  if (obs_dim == 0 || act_dim == 0) throw Error("MLP dimensions must be positive");
  sizes_.push_back(obs_dim);
  for (auto h : hidden_) {
    if (h == 0) throw Error("hidden layer sizes must be positive");
    sizes_.push_back(h);
  }
  sizes_.push_back(act_dim);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  total += act_dim;
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
  params_.tail(static_cast<Eigen::Index>(act_dim)).setConstant(init_log_std);
}

MlpPolicy MlpPolicy::random(std::size_t obs_dim, std::size_t act_dim, Rng& rng, std::vector<std::size_t> hidden,
                            double init_log_std) {
  MlpPolicy p(obs_dim, act_dim, std::move(hidden), init_log_std);
  for (std::size_t l = 0; l + 1 < p.sizes_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.sizes_[l]));
    const auto count = static_cast<Eigen::Index>(p.sizes_[l + 1] * p.sizes_[l] + p.sizes_[l + 1]);
    p.params_.segment(static_cast<Eigen::Index>(p.offsets_[l]), count) = sample_uniform(rng, count, -bound, bound);
  }
  return p;
}

void MlpPolicy::set_params(const Eigen::VectorXd& params) {
  if (params.size() != params_.size()) throw DimensionMismatch("MLP parameter vector has wrong length");
  params_ = params;
}

Eigen::VectorXd MlpPolicy::log_std() const {
  return params_.tail(static_cast<Eigen::Index>(act_dim()));
}

namespace {

using RowMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMapMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

Eigen::VectorXd MlpPolicy::mean(const Eigen::VectorXd& obs) const {
  if (static_cast<std::size_t>(obs.size()) != obs_dim()) throw DimensionMismatch("MLP observation has wrong size");
  Eigen::VectorXd h = obs;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]), in = static_cast<Eigen::Index>(sizes_[l]);
    const double* base = params_.data() + offsets_[l];
    RowMap w(base, out, in);
    Eigen::Map<const Eigen::VectorXd> b(base + out * in, out);
    Eigen::VectorXd pre = w * h + b;
    h = l + 1 < layers ? Eigen::VectorXd(pre.array().tanh().matrix()) : pre;
  }
  return h;
}

Eigen::VectorXd MlpPolicy::act(const Eigen::VectorXd& obs, Rng& rng, bool deterministic) const {
  Eigen::VectorXd mu = mean(obs);
  if (deterministic) return mu;
  const Eigen::VectorXd std = log_std().array().exp().matrix();
  return mu + std.cwiseProduct(sample_normal(rng, mu.size()));
}

double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std) {
  const Eigen::ArrayXd z = (x - mean).array() / log_std.array().exp();
  return -log_std.sum() - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) -
         0.5 * z.square().sum();
}

double MlpPolicy::log_prob(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const {
  if (static_cast<std::size_t>(action.size()) != act_dim()) throw DimensionMismatch("MLP action has wrong size");
  return gaussian_log_density(action, mean(obs), log_std());
}

std::pair<double, Eigen::VectorXd> MlpPolicy::log_prob_grad(const Eigen::VectorXd& obs,
                                                            const Eigen::VectorXd& action) const {
  if (static_cast<std::size_t>(obs.size()) != obs_dim()) throw DimensionMismatch("MLP observation has wrong size");
  if (static_cast<std::size_t>(action.size()) != act_dim()) throw DimensionMismatch("MLP action has wrong size");
  const std::size_t layers = sizes_.size() - 1;
  std::vector<Eigen::VectorXd> acts{obs};
  for (std::size_t l = 0; l < layers; ++l) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]), in = static_cast<Eigen::Index>(sizes_[l]);
    const double* base = params_.data() + offsets_[l];
    RowMap w(base, out, in);
    Eigen::Map<const Eigen::VectorXd> b(base + out * in, out);
    Eigen::VectorXd pre = w * acts.back() + b;
    acts.push_back(l + 1 < layers ? Eigen::VectorXd(pre.array().tanh().matrix()) : pre);
  }
  const Eigen::VectorXd& mu = acts.back();
  const Eigen::VectorXd ls = log_std();
  const Eigen::ArrayXd inv_var = (-2.0 * ls.array()).exp();
  const Eigen::ArrayXd diff = (action - mu).array();
  const double logp = gaussian_log_density(action, mu, ls);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  grad.tail(ls.size()) = (diff.square() * inv_var - 1.0).matrix();
  Eigen::VectorXd delta = (diff * inv_var).matrix();  // d logp / d pre-activation
  for (std::size_t l = layers; l-- > 0;) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]), in = static_cast<Eigen::Index>(sizes_[l]);
    double* gbase = grad.data() + offsets_[l];
    RowMapMut gw(gbase, out, in);
    gw.noalias() = delta * acts[l].transpose();
    Eigen::Map<Eigen::VectorXd>(gbase + out * in, out) = delta;
    if (l > 0) {
      RowMap w(params_.data() + offsets_[l], out, in);
      Eigen::VectorXd back = w.transpose() * delta;
      delta = back.cwiseProduct((1.0 - acts[l].array().square()).matrix());
    }
  }
  return {logp, grad};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> MlpPolicy::log_prob_grad_batch(const Eigen::MatrixXd& obs,
                                                                       const Eigen::MatrixXd& actions) const {
  if (static_cast<std::size_t>(obs.cols()) != obs_dim()) throw DimensionMismatch("MLP observation has wrong size");
  if (static_cast<std::size_t>(actions.cols()) != act_dim()) throw DimensionMismatch("MLP action has wrong size");
  if (obs.rows() != actions.rows()) throw DimensionMismatch("observation and action counts differ");
  const Eigen::Index n = obs.rows();
  const std::size_t layers = sizes_.size() - 1;
  // Column-per-sample activations.
  std::vector<Eigen::MatrixXd> acts{obs.transpose()};
  for (std::size_t l = 0; l < layers; ++l) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]), in = static_cast<Eigen::Index>(sizes_[l]);
    const double* base = params_.data() + offsets_[l];
    RowMap w(base, out, in);
    Eigen::Map<const Eigen::VectorXd> b(base + out * in, out);
    Eigen::MatrixXd pre = w * acts.back();
    pre.colwise() += b;
    if (l + 1 < layers) pre = pre.array().tanh().matrix();
    acts.push_back(std::move(pre));
  }
  const Eigen::VectorXd ls = log_std();
  const Eigen::ArrayXd inv_std = (-ls.array()).exp();
  const Eigen::MatrixXd z = ((actions.transpose() - acts.back()).array().colwise() * inv_std).matrix();
  const double norm = -ls.sum() - 0.5 * static_cast<double>(act_dim()) * std::log(2.0 * std::numbers::pi);
  Eigen::VectorXd logp = (norm - 0.5 * z.array().square().colwise().sum()).matrix().transpose();

  Eigen::MatrixXd scores(n, params_.size());
  scores.rightCols(ls.size()) = (z.array().square() - 1.0).matrix().transpose();
  Eigen::MatrixXd delta = (z.array().colwise() * inv_std).matrix();
  for (std::size_t l = layers; l-- > 0;) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]), in = static_cast<Eigen::Index>(sizes_[l]);
    const auto off = static_cast<Eigen::Index>(offsets_[l]);
    const Eigen::MatrixXd& a = acts[l];
    for (Eigen::Index r = 0; r < out; ++r)
      scores.middleCols(off + r * in, in) = a.transpose().array().colwise() * delta.row(r).transpose().array();
    scores.middleCols(off + out * in, out) = delta.transpose();
    if (l > 0) {
      RowMap w(params_.data() + offsets_[l], out, in);
      delta = ((w.transpose() * delta).array() * (1.0 - a.array().square())).matrix();
    }
  }
  return {logp, scores};
}

}  // namespace skillboot
