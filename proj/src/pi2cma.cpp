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
#include <vector>

#include <Eigen/Dense>

#include "skillboot/error.hpp"
#include "skillboot/optimize.hpp"

namespace skillboot {

Eigen::VectorXd pi2_probabilities(const Eigen::VectorXd& costs, double temperature, double elite_fraction) {
  const Eigen::Index n = costs.size();
  if (n == 0) throw Error("pi2_probabilities: no costs");
  const double lo = costs.minCoeff(), hi = costs.maxCoeff();
  const double range = hi - lo;
  Eigen::VectorXd p(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    // Exact zero range maps every sample to the same weight.
    const double normalized = range > 0.0 ? (costs[k] - lo) / range : 0.0;
    p[k] = std::exp(-temperature * normalized);
  }
  if (elite_fraction < 1.0) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return costs[a] < costs[b]; });
    const auto keep = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(elite_fraction * static_cast<double>(n))));
    for (auto i = static_cast<std::size_t>(keep); i < order.size(); ++i) p[order[i]] = 0.0;
  }
  return p / p.sum();
}

Pi2CmaState pi2cma_apply(const Pi2CmaState& state, const Eigen::MatrixXd& samples, const Eigen::VectorXd& costs) {
  if (samples.cols() != costs.size()) throw DimensionMismatch("pi2cma: sample and cost counts differ");
  if (samples.rows() != state.mean.size()) throw DimensionMismatch("pi2cma: sample dimension mismatch");
  const Eigen::VectorXd p = pi2_probabilities(costs, state.temperature, state.elite_fraction);
  Pi2CmaState next = state;
  next.mean = samples * p;
  const Eigen::MatrixXd centered = samples.colwise() - state.mean;
  Eigen::MatrixXd cov = centered * p.asDiagonal() * centered.transpose();
  cov = state.covariance_rate * cov + (1.0 - state.covariance_rate) * state.covariance;
  cov = (0.5 * (cov + cov.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd values = eig.eigenvalues().cwiseMax(state.covariance_floor);
  next.covariance = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  next.covariance = (0.5 * (next.covariance + next.covariance.transpose())).eval();
  return next;
}

Pi2CmaState pi2cma_update(const Pi2CmaState& state, const ReturnFn& objective, Rng& rng, Pi2CmaReport* report) {
  if (state.population < 2) throw Error("pi2cma: population must be at least 2");
  const Eigen::Index dim = state.mean.size();
  Eigen::LLT<Eigen::MatrixXd> llt(state.covariance);
  if (llt.info() != Eigen::Success) throw Error("pi2cma: covariance is not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  Eigen::MatrixXd drawn(dim, state.population);
  for (int k = 0; k < state.population; ++k) drawn.col(k) = state.mean + chol * sample_normal(rng, dim);

  std::vector<Eigen::Index> ok;
  std::vector<double> returns;
  for (int k = 0; k < state.population; ++k) {
    try {
      const double r = objective(drawn.col(k));
      if (!std::isfinite(r)) continue;
      ok.push_back(k);
      returns.push_back(r);
    } catch (const Error&) {
    }
  }
  if (ok.empty()) throw AllRolloutsFailed("pi2cma: every rollout failed");

  Eigen::MatrixXd samples(dim, static_cast<Eigen::Index>(ok.size()));
  Eigen::VectorXd costs(static_cast<Eigen::Index>(ok.size()));
  for (std::size_t i = 0; i < ok.size(); ++i) {
    samples.col(static_cast<Eigen::Index>(i)) = drawn.col(ok[i]);
    costs[static_cast<Eigen::Index>(i)] = -returns[i];
  }
  if (report) {
    report->returns = -costs;
    report->failed = state.population - static_cast<int>(ok.size());
  }
  return pi2cma_apply(state, samples, costs);
}

}  // namespace skillboot
