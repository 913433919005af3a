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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skillboot/error.hpp"
#include "skillboot/optimize.hpp"

namespace skillboot {

namespace {

struct Pair {
  const Episode* episode;
  Eigen::Index t;
};

std::vector<Pair> all_pairs(const std::vector<Episode>& demos) {
  std::vector<Pair> pairs;
  for (const auto& ep : demos)
    for (Eigen::Index t = 0; t < ep.length(); ++t) pairs.push_back({&ep, t});
  return pairs;
}

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteGradient(what);
}

}  // namespace

double bc_loss(const MlpPolicy& policy, const std::vector<Episode>& demos) {
  const auto pairs = all_pairs(demos);
  if (pairs.empty()) throw EmptyDemoSet("no demonstration pairs");
  double total = 0.0;
  for (const auto& p : pairs)
    total -= policy.log_prob(p.episode->observations.row(p.t).transpose(), p.episode->actions.row(p.t).transpose());
  return total / static_cast<double>(pairs.size());
}

MlpPolicy bc_fit(const MlpPolicy& policy, const std::vector<Episode>& demos, const BcOptions& options, Rng& rng,
                 BcReport* report) {
  auto pairs = all_pairs(demos);
  if (pairs.empty()) throw EmptyDemoSet("no demonstration pairs");
  MlpPolicy out = policy;
  Eigen::VectorXd theta = out.params();
  const Eigen::Index n = theta.size();
  const auto ls_offset = static_cast<Eigen::Index>(out.log_std_offset());
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(n), m2 = Eigen::VectorXd::Zero(n);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;
  const auto batch = static_cast<std::size_t>(std::max(1, options.batch_size));

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(pairs.begin(), pairs.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < pairs.size(); start += batch) {
      const std::size_t stop = std::min(pairs.size(), start + batch);
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
      for (std::size_t i = start; i < stop; ++i) {
        const auto& p = pairs[i];
        auto [logp, g] =
            out.log_prob_grad(p.episode->observations.row(p.t).transpose(), p.episode->actions.row(p.t).transpose());
        grad -= g;
        epoch_loss -= logp;
      }
      grad /= static_cast<double>(stop - start);
      if (!options.fit_log_std) grad.tail(n - ls_offset).setZero();
      require_finite(grad, "behavioral cloning gradient is not finite");
      ++step;
      m1 = beta1 * m1 + (1.0 - beta1) * grad;
      m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseAbs2();
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      theta.array() -= options.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
      out.set_params(theta);
    }
    if (report) report->epoch_losses.push_back(epoch_loss / static_cast<double>(pairs.size()));
  }
  return out;
}

std::vector<Eigen::VectorXd> time_baseline_advantages(const std::vector<Episode>& episodes, double gamma) {
  std::vector<Eigen::VectorXd> to_go;
  Eigen::Index horizon = 0;
  for (const auto& ep : episodes) {
    const Eigen::Index len = ep.length();
    Eigen::VectorXd g(len);
    double acc = 0.0;
    for (Eigen::Index t = len; t-- > 0;) {
      acc = ep.rewards[t] + gamma * acc;
      g[t] = acc;
    }
    to_go.push_back(g);
    horizon = std::max(horizon, len);
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(horizon), count = Eigen::VectorXd::Zero(horizon);
  for (const auto& g : to_go) {
    sum.head(g.size()) += g;
    count.head(g.size()).array() += 1.0;
  }
  for (auto& g : to_go) g.array() -= sum.head(g.size()).array() / count.head(g.size()).array();
  return to_go;
}

ScoreBatch score_batch(const MlpPolicy& policy, const std::vector<Episode>& episodes, double gamma) {
  const auto adv = time_baseline_advantages(episodes, gamma);
  Eigen::Index rows = 0;
  for (const auto& ep : episodes) rows += ep.length();
  if (rows == 0) throw AllRolloutsFailed("no samples in the episode batch");
  Eigen::MatrixXd obs(rows, episodes.front().observations.cols());
  Eigen::MatrixXd act(rows, episodes.front().actions.cols());
  ScoreBatch out;
  out.advantages.resize(rows);
  Eigen::Index r = 0;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const Eigen::Index len = episodes[e].length();
    obs.middleRows(r, len) = episodes[e].observations;
    act.middleRows(r, len) = episodes[e].actions;
    out.advantages.segment(r, len) = adv[e];
    r += len;
  }
  out.scores = policy.log_prob_grad_batch(obs, act).second;
  return out;
}

Eigen::VectorXd fisher_vector_product(const Eigen::MatrixXd& scores, const Eigen::VectorXd& v) {
  return scores.transpose() * (scores * v) / static_cast<double>(scores.rows());
}

Eigen::VectorXd conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                                   const Eigen::VectorXd& b, int iters, double tol) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b, p = b;
  double rr = r.squaredNorm();
  const double stop = tol * rr;  // relative residual threshold
  for (int i = 0; i < iters && rr > stop; ++i) {
    const Eigen::VectorXd ap = apply(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return x;
}

Eigen::VectorXd bc_gradient(const MlpPolicy& policy, const std::vector<Episode>& demos) {
  const auto pairs = all_pairs(demos);
  if (pairs.empty()) throw EmptyDemoSet("no demonstration pairs");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(policy.num_params()));
  for (const auto& ep : demos)
    if (ep.length() > 0) g += policy.log_prob_grad_batch(ep.observations, ep.actions).second.colwise().sum().transpose();
  return g / static_cast<double>(pairs.size());
}

Eigen::VectorXd natural_step(const Eigen::MatrixXd& scores, const Eigen::VectorXd& gradient,
                             const NpgOptions& options) {
  require_finite(gradient, "policy gradient is not finite");
  if (gradient.squaredNorm() == 0.0) return Eigen::VectorXd::Zero(gradient.size());
  auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return fisher_vector_product(scores, v) + options.cg_damping * v;
  };
  const Eigen::VectorXd dir = conjugate_gradient(apply, gradient, options.cg_iters);
  const double curvature = dir.dot(apply(dir));
  if (!(curvature > 0.0) || !std::isfinite(curvature)) throw NonFiniteGradient("degenerate natural gradient");
  const Eigen::VectorXd step = std::sqrt(2.0 * options.step_size / curvature) * dir;
  require_finite(step, "natural step is not finite");
  return step;
}

namespace {

MlpPolicy apply_gradient(const MlpPolicy& policy, const ScoreBatch& batch, const Eigen::VectorXd& g,
                         const NpgOptions& options, NpgReport* report) {
  const Eigen::VectorXd step = natural_step(batch.scores, g, options);
  MlpPolicy out = policy;
  out.set_params(policy.params() + step);
  if (report) report->step = step;
  return out;
}

}  // namespace

MlpPolicy npg_update(const MlpPolicy& policy, const std::vector<Episode>& episodes, const NpgOptions& options,
                     double gamma, NpgReport* report) {
  const ScoreBatch batch = score_batch(policy, episodes, gamma);
  const Eigen::VectorXd g = batch.scores.transpose() * batch.advantages / static_cast<double>(batch.scores.rows());
  if (report) {
    report->vanilla_gradient = g;
    report->bc_weight = 0.0;
  }
  return apply_gradient(policy, batch, g, options, report);
}

double dapg_bc_weight(const DapgState& state, int epoch) {
  return state.lambda0 * std::pow(state.decay, static_cast<double>(epoch));
}

MlpPolicy dapg_update(const MlpPolicy& policy, const std::vector<Episode>& episodes, const std::vector<Episode>& demos,
                      const DapgState& state, int epoch, double gamma, NpgReport* report) {
  const ScoreBatch batch = score_batch(policy, episodes, gamma);
  const double rows = static_cast<double>(batch.scores.rows());
  Eigen::VectorXd g = batch.scores.transpose() * batch.advantages / rows;
  const double weight = dapg_bc_weight(state, epoch) * batch.advantages.cwiseAbs().mean();
  if (weight != 0.0 && !demos.empty()) g += weight * bc_gradient(policy, demos);
  if (report) {
    report->vanilla_gradient = g;
    report->bc_weight = weight;
  }
  return apply_gradient(policy, batch, g, state.npg, report);
}

}  // namespace skillboot
