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

// Experiment orchestration: configuration, per-seed training runs,
// learning curves, aggregation, plots and episode files.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "skillboot/episode.hpp"
#include "skillboot/optimize.hpp"
#include "skillboot/policy.hpp"
#include "skillboot/world.hpp"

namespace skillboot {

enum class PolicyClass { kDmp, kMlp };
enum class InitMode { kPlanner, kRandom, kReplayFile };
enum class OptimizerId { kPi2Cma, kNpg, kDapg };

std::string to_string(PolicyClass c);
std::string to_string(InitMode m);
std::string to_string(OptimizerId o);

struct DmpSettings {
  std::size_t basis = 32;
  /// Random initialization: weight std, goal offset std, and tau.
  double random_weight_std = 2.0;
  double random_goal_std = 0.5;
  double random_tau = 1.5;
};

struct MlpSettings {
  std::vector<std::size_t> hidden = {32, 32};
  double init_log_std = -1.0;
};

struct Pi2CmaSettings {
  int population = 20;
  double temperature = 10.0;
  double elite_fraction = 1.0;
  double weight_std = 2.0;
  double goal_std = 0.05;
  double log_tau_std = 0.05;
  double covariance_floor = 1e-6;
  double covariance_rate = 0.3;
};

struct PolicyGradientSettings {
  NpgOptions npg;
  int rollouts = 10;  ///< stochastic rollouts per update
  double lambda0 = 0.1;
  double decay = 0.97;
};

struct ExperimentConfig {
  TaskId task = TaskId::kDrawerOpen;
  PolicyClass policy = PolicyClass::kDmp;
  InitMode init = InitMode::kPlanner;
  /// Episode files used when init is replay-file.
  std::vector<std::string> demo_files;
  int demos = 1;
  int epochs = 100;
  OptimizerId optimizer = OptimizerId::kPi2Cma;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "out";
  double gamma = 1.0;
  int eval_rollouts = 5;
  /// Std of the robot start-state perturbation for evaluation and
  /// stochastic training rollouts (rad).
  double start_noise = 0.01;
  /// Worker threads for seeds; 0 picks the hardware concurrency.
  int threads = 0;
  DmpSettings dmp;
  MlpSettings mlp;
  Pi2CmaSettings pi2cma;
  PolicyGradientSettings pg;
  BcOptions bc;
};

/// Parses a JSON document; unknown keys and bad values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

/// Rollouts consumed by one optimizer update.
int rollouts_per_epoch(const ExperimentConfig& config);

struct EpochMetrics {
  int epoch = 0;
  double mean_return = 0.0;  ///< over the update's training rollouts
  double std_return = 0.0;
  double best_return = 0.0;
  double bc_weight = 0.0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<Episode> demos;
  /// Mean evaluation return after 0..E updates.
  std::vector<double> eval_returns;
  std::vector<EpochMetrics> metrics;
  /// Evaluation rollouts of the final policy.
  std::vector<Episode> final_evaluation;
  std::optional<DmpPolicy> dmp;
  std::optional<MlpPolicy> mlp;
};

/// Robot start states used for evaluation of one seed.
std::vector<WorldState> evaluation_starts(const TaskSpec& spec, std::uint64_t seed, int count, double noise);

/// The policy a random-init run starts from.
DmpPolicy random_dmp(const TaskSpec& spec, const DmpSettings& settings, Rng& rng);
MlpPolicy random_mlp(const TaskSpec& spec, const MlpSettings& settings, Rng& rng);

/// Planner demonstrations of one seed.
std::vector<Episode> collect_demos(const TaskSpec& spec, std::uint64_t seed, int count);

/// Mean evaluation return of the random initial policy of each seed.
double random_floor(const ExperimentConfig& config);

/// Full pipeline for one seed without touching the filesystem.
SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed);

struct LearningCurve {
  std::vector<std::uint64_t> seeds;
  Eigen::MatrixXd returns;     ///< seeds x (E + 1)
  Eigen::MatrixXd normalized;  ///< same shape
  double floor = 0.0;
  double best = 0.0;
};

/// Maps `floor` to 0 and the best return over all curves to 1.
void normalize_curves(std::vector<LearningCurve*> curves, double floor);

struct RunResult {
  ExperimentConfig config;
  std::vector<SeedRun> seeds;
  LearningCurve curve;
};

/// Runs every seed (in parallel), normalizes and writes curve.csv,
/// metrics.csv, run.json, demo episodes and final checkpoints.
RunResult run_experiment(const ExperimentConfig& config);

/// Writes the files of a finished run into `dir`.
void write_run(const RunResult& result, const std::string& dir);

std::string curve_csv(const LearningCurve& curve);
LearningCurve read_curve_csv(const std::string& path);

struct AggregateTable {
  Eigen::VectorXd mean;    ///< per epoch
  Eigen::VectorXd std_error;  ///< sample std / sqrt(n)
};

/// Rows are seeds, columns epochs. Needs at least two seeds.
AggregateTable aggregate(const Eigen::MatrixXd& per_seed);
/// Same for ragged input; mismatched epoch counts raise Error.
AggregateTable aggregate(const std::vector<std::vector<double>>& per_seed);

struct PlotSeries {
  std::string label;
  AggregateTable table;
};

std::string emit_plot(const std::vector<PlotSeries>& series, const std::string& title = "");

/// Curves of one or more run directories below `dir`, jointly normalized.
std::vector<PlotSeries> load_plot_series(const std::string& dir);

// --- Episode files ------------------------------------------------------------

std::string episode_csv(const Episode& episode);
Episode parse_episode_csv(const std::string& text);
void write_episode(const std::string& path, const Episode& episode);
Episode read_episode(const std::string& path);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace skillboot
