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
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "skillboot/error.hpp"
#include "skillboot/harness.hpp"
#include "skillboot/planner.hpp"

namespace skillboot {

namespace {

// Independent random streams of one seed.
enum Stream : std::uint64_t {
  kDemoStream = 1,
  kInitStream = 2,
  kOptimizerStream = 3,
  kEvalStream = 4,
  kRolloutStream = 5,
};

struct Stats {
  double mean = 0.0, std = 0.0, best = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(v.size()));
  s.best = *std::max_element(v.begin(), v.end());
  return s;
}

WorldState perturbed_start(const TaskSpec& spec, Rng& rng, double noise) {
  WorldState s = spec.initial;
  const auto n = s.q_robot.size();
  s.q_robot = spec.robot.clamp(s.q_robot + sample_normal(rng, n, noise));
  return s;
}

std::vector<Episode> evaluate(const TaskSpec& spec, const std::vector<WorldState>& starts, Actor& actor,
                              std::uint64_t seed) {
  std::vector<Episode> out;
  for (std::size_t k = 0; k < starts.size(); ++k)
    out.push_back(rollout(spec, starts[k], actor, derive_seed(seed, k), EpisodeSource::kPolicy));
  return out;
}

double mean_return(const std::vector<Episode>& eps) {
  double sum = 0.0;
  for (const auto& e : eps) sum += e.ret;
  return sum / static_cast<double>(eps.size());
}

std::vector<Episode> initial_demos(const ExperimentConfig& config, const TaskSpec& spec, std::uint64_t seed) {
  switch (config.init) {
    case InitMode::kPlanner: return collect_demos(spec, seed, config.demos);
    case InitMode::kRandom: return {};
    case InitMode::kReplayFile: {
      std::vector<Episode> demos;
      for (const auto& path : config.demo_files) {
        Episode ep = read_episode(path);
        if (ep.task != to_string(spec.id))
          throw ConfigError("demo file '" + path + "' belongs to task " + ep.task);
        demos.push_back(std::move(ep));
      }
      return demos;
    }
  }
  return {};
}

Eigen::MatrixXd initial_covariance(const DmpPolicy& policy, const Pi2CmaSettings& s) {
  const auto weights = static_cast<Eigen::Index>(policy.joints() * policy.basis());
  const auto joints = static_cast<Eigen::Index>(policy.joints());
  Eigen::VectorXd var(static_cast<Eigen::Index>(policy.num_params()));
  var.head(weights).setConstant(s.weight_std * s.weight_std);
  var.segment(weights, joints).setConstant(s.goal_std * s.goal_std);
  var.tail(1).setConstant(s.log_tau_std * s.log_tau_std);
  return var.asDiagonal();
}

void run_dmp(const ExperimentConfig& config, const TaskSpec& spec, SeedRun& run, int& epoch) {
  const std::uint64_t seed = run.seed;
  Rng init_rng(derive_seed(seed, kInitStream));
  DmpPolicy policy = random_dmp(spec, config.dmp, init_rng);
  if (!run.demos.empty())
    policy = lwr_fit(episode_robot_trajectory(run.demos.front(), spec.robot.dof(), spec.dt), config.dmp.basis);

  const auto starts = evaluation_starts(spec, seed, config.eval_rollouts, config.start_noise);
  const std::uint64_t eval_seed = derive_seed(seed, kEvalStream);
  auto eval = [&](const DmpPolicy& p) {
    DmpActor actor(p, spec.dt);
    return evaluate(spec, starts, actor, eval_seed);
  };

  Pi2CmaState state;
  state.mean = policy.params();
  state.covariance = initial_covariance(policy, config.pi2cma);
  state.population = config.pi2cma.population;
  state.temperature = config.pi2cma.temperature;
  state.elite_fraction = config.pi2cma.elite_fraction;
  state.covariance_floor = config.pi2cma.covariance_floor;
  state.covariance_rate = config.pi2cma.covariance_rate;

  const ReturnFn objective = [&](const Eigen::VectorXd& theta) {
    DmpPolicy p = policy;
    p.set_params(theta);
    DmpActor actor(p, spec.dt);
    return rollout(spec, actor, seed).ret;
  };

  Rng opt_rng(derive_seed(seed, kOptimizerStream));
  for (epoch = 0;; ++epoch) {
    DmpPolicy current = policy;
    current.set_params(state.mean);
    std::vector<Episode> evaluation = eval(current);
    run.eval_returns.push_back(mean_return(evaluation));
    if (epoch == config.epochs) {
      run.final_evaluation = std::move(evaluation);
      run.dmp = current;
      break;
    }
    Pi2CmaReport report;
    state = pi2cma_update(state, objective, opt_rng, &report);
    const Stats s = stats(std::vector<double>(report.returns.data(), report.returns.data() + report.returns.size()));
    run.metrics.push_back({epoch, s.mean, s.std, s.best, 0.0});
  }
}

void run_mlp(const ExperimentConfig& config, const TaskSpec& spec, SeedRun& run, int& epoch) {
  const std::uint64_t seed = run.seed;
  Rng init_rng(derive_seed(seed, kInitStream));
  MlpPolicy policy = random_mlp(spec, config.mlp, init_rng);
  Rng opt_rng(derive_seed(seed, kOptimizerStream));
  if (!run.demos.empty()) policy = bc_fit(policy, run.demos, config.bc, opt_rng);

  const auto starts = evaluation_starts(spec, seed, config.eval_rollouts, config.start_noise);
  const std::uint64_t eval_seed = derive_seed(seed, kEvalStream);
  const std::uint64_t rollout_seed = derive_seed(seed, kRolloutStream);

  DapgState dapg;
  dapg.lambda0 = config.pg.lambda0;
  dapg.decay = config.pg.decay;
  dapg.npg = config.pg.npg;

  for (epoch = 0;; ++epoch) {
    MlpActor greedy(policy, true);
    std::vector<Episode> evaluation = evaluate(spec, starts, greedy, eval_seed);
    run.eval_returns.push_back(mean_return(evaluation));
    if (epoch == config.epochs) {
      run.final_evaluation = std::move(evaluation);
      run.mlp = policy;
      break;
    }
    const std::uint64_t batch_seed = derive_seed(rollout_seed, static_cast<std::uint64_t>(epoch));
    Rng start_rng(batch_seed);
    MlpActor explorer(policy, false);
    std::vector<Episode> batch;
    std::vector<double> returns;
    for (int k = 0; k < config.pg.rollouts; ++k) {
      const WorldState start = perturbed_start(spec, start_rng, config.start_noise);
      batch.push_back(rollout(spec, start, explorer, derive_seed(batch_seed, static_cast<std::uint64_t>(k))));
      returns.push_back(batch.back().ret);
    }
    NpgReport report;
    if (config.optimizer == OptimizerId::kDapg)
      policy = dapg_update(policy, batch, run.demos, dapg, epoch, config.gamma, &report);
    else
      policy = npg_update(policy, batch, config.pg.npg, config.gamma, &report);
    const Stats s = stats(returns);
    run.metrics.push_back({epoch, s.mean, s.std, s.best, report.bc_weight});
  }
}

TaskSpec task_for(const ExperimentConfig& config) {
  TaskSpec spec = make_task(config.task);
  spec.reward.gamma = config.gamma;
  return spec;
}

}  // namespace

std::vector<WorldState> evaluation_starts(const TaskSpec& spec, std::uint64_t seed, int count, double noise) {
  Rng rng(derive_seed(seed, kEvalStream));
  std::vector<WorldState> starts;
  for (int k = 0; k < count; ++k) starts.push_back(perturbed_start(spec, rng, noise));
  return starts;
}

DmpPolicy random_dmp(const TaskSpec& spec, const DmpSettings& settings, Rng& rng) {
  const std::size_t dof = spec.robot.dof();
  DmpPolicy policy(dof, settings.basis, settings.random_tau);
  const auto n = static_cast<Eigen::Index>(dof), k = static_cast<Eigen::Index>(settings.basis);
  Eigen::VectorXd w = sample_normal(rng, n * k, settings.random_weight_std);
  policy.set_weights(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      w.data(), n, k));
  policy.set_goals(spec.initial.q_robot + sample_normal(rng, n, settings.random_goal_std));
  return policy;
}

MlpPolicy random_mlp(const TaskSpec& spec, const MlpSettings& settings, Rng& rng) {
  return MlpPolicy::random(observation_dim(spec), action_dim(spec), rng, settings.hidden, settings.init_log_std);
}

std::vector<Episode> collect_demos(const TaskSpec& spec, std::uint64_t seed, int count) {
  const std::uint64_t base = derive_seed(seed, kDemoStream);
  std::vector<Episode> demos;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(base, static_cast<std::uint64_t>(i));
    const Trajectory path = initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, s);
    demos.push_back(demo_episode(spec, path, s));
  }
  return demos;
}

double random_floor(const ExperimentConfig& config) {
  const TaskSpec spec = task_for(config);
  double sum = 0.0;
  for (std::uint64_t seed : config.seeds) {
    Rng init_rng(derive_seed(seed, kInitStream));
    const auto starts = evaluation_starts(spec, seed, config.eval_rollouts, config.start_noise);
    const std::uint64_t eval_seed = derive_seed(seed, kEvalStream);
    if (config.policy == PolicyClass::kDmp) {
      const DmpPolicy p = random_dmp(spec, config.dmp, init_rng);
      DmpActor actor(p, spec.dt);
      sum += mean_return(evaluate(spec, starts, actor, eval_seed));
    } else {
      const MlpPolicy p = random_mlp(spec, config.mlp, init_rng);
      MlpActor actor(p, true);
      sum += mean_return(evaluate(spec, starts, actor, eval_seed));
    }
  }
  return sum / static_cast<double>(config.seeds.size());
}

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  validate(config);
  const TaskSpec spec = task_for(config);
  SeedRun run;
  run.seed = seed;
  int epoch = -1;
  try {
    run.demos = initial_demos(config, spec, seed);
    if (config.policy == PolicyClass::kDmp)
      run_dmp(config, spec, run, epoch);
    else
      run_mlp(config, spec, run, epoch);
  } catch (const Error& e) {
    const std::string where = "seed " + std::to_string(seed) +
                              (epoch >= 0 ? ", epoch " + std::to_string(epoch) : std::string(", setup"));
    throw Error(where + ": " + e.what());
  }
  return run;
}

void normalize_curves(std::vector<LearningCurve*> curves, double floor) {
  if (curves.empty()) throw Error("no curves to normalize");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto* c : curves) best = std::max(best, c->returns.maxCoeff());
  if (!(best > floor)) throw Error("normalization undefined: no return exceeds the random floor");
  for (auto* c : curves) {
    c->floor = floor;
    c->best = best;
    c->normalized = (c->returns.array() - floor) / (best - floor);
  }
}

RunResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  RunResult result;
  result.config = config;
  const std::size_t n = config.seeds.size();
  result.seeds.resize(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        result.seeds[i] = run_seed(config, config.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t threads =
      std::min<std::size_t>(n, config.threads > 0 ? static_cast<std::size_t>(config.threads) : hw);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  LearningCurve& curve = result.curve;
  curve.seeds = config.seeds;
  curve.returns.resize(static_cast<Eigen::Index>(n), config.epochs + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (int e = 0; e <= config.epochs; ++e)
      curve.returns(static_cast<Eigen::Index>(i), e) = result.seeds[i].eval_returns[static_cast<std::size_t>(e)];
  const double floor = config.init == InitMode::kRandom ? curve.returns.col(0).mean() : random_floor(config);
  try {
    normalize_curves({&curve}, floor);
  } catch (const Error&) {
    // Degenerate run: no return above the floor. Keep raw returns only.
    curve.floor = floor;
    curve.best = curve.returns.maxCoeff();
    curve.normalized = Eigen::MatrixXd::Constant(curve.returns.rows(), curve.returns.cols(),
                                                 std::numeric_limits<double>::quiet_NaN());
  }
  write_run(result, config.output_dir);
  return result;
}

}  // namespace skillboot
