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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. The learning-curve checks run the shipped configs
// at full size, so this binary takes several minutes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "skillboot/error.hpp"
#include "skillboot/harness.hpp"
#include "skillboot/optimize.hpp"
#include "skillboot/planner.hpp"
#include "support.hpp"

using namespace skillboot;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

struct Context {
  fs::path configs;
  fs::path out;
  int seeds = 20;
};

RunResult run_config(const Context& ctx, const std::string& name) {
  ExperimentConfig c = load_config((ctx.configs / (name + ".json")).string());
  if (ctx.seeds < static_cast<int>(c.seeds.size())) c.seeds.resize(static_cast<std::size_t>(ctx.seeds));
  c.output_dir = (ctx.out / name).string();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r = run_experiment(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "  ran %s: %zu seeds, %d epochs in %.1f s\n", name.c_str(), c.seeds.size(), c.epochs, secs);
  return r;
}

/// Normalizes both conditions against the random condition's epoch-0 mean
/// and returns (epoch-0 gap, final-epoch gap) of mean normalized returns.
std::pair<double, double> dominance(RunResult& boot, RunResult& rand) {
  const double floor = rand.curve.returns.col(0).mean();
  normalize_curves({&boot.curve, &rand.curve}, floor);
  const Eigen::Index last = boot.curve.normalized.cols() - 1;
  return {boot.curve.normalized.col(0).mean() - rand.curve.normalized.col(0).mean(),
          boot.curve.normalized.col(last).mean() - rand.curve.normalized.col(last).mean()};
}

Outcome drawer_trend(const Context& ctx) {
  RunResult boot = run_config(ctx, "drawer_planner");
  RunResult rand = run_config(ctx, "drawer_random");
  const auto [start, end] = dominance(boot, rand);
  return {start >= 0.3 && end >= 0.2,
          format("normalized gap epoch 0 = %.3f (need >= 0.3), epoch %d = %.3f (need >= 0.2)", start,
                 boot.config.epochs, end)};
}

Outcome door_trend(const Context& ctx) {
  RunResult boot = run_config(ctx, "door_dapg");
  RunResult rand = run_config(ctx, "door_npg");
  const auto [start, end] = dominance(boot, rand);
  const double goal = make_task(TaskId::kDoorClose).reward.goal[0];

  int demo_total = 0, demo_reached = 0, eval_total = 0, eval_reached = 0;
  for (const auto& run : boot.seeds) {
    for (const auto& d : run.demos) {
      ++demo_total;
      if (std::abs(d.final_observation[3] - goal) < 0.1) ++demo_reached;
    }
    for (const auto& e : run.final_evaluation) {
      ++eval_total;
      if (std::abs(e.final_observation[3] - goal) < 0.1) ++eval_reached;
    }
  }
  const double success = static_cast<double>(eval_reached) / std::max(1, eval_total);
  const bool pass = start >= 0.3 && end >= 0.2 && demo_total > 0 && demo_reached == 0 && success >= 0.7;
  return {pass, format("normalized gap epoch 0 = %.3f, epoch %d = %.3f; demos reaching goal %d/%d; "
                       "final policy success %d/%d = %.2f (need >= 0.70)",
                       start, boot.config.epochs, end, demo_reached, demo_total, eval_reached, eval_total, success)};
}

Outcome teeball_improvement(const Context& ctx) {
  const RunResult run = run_config(ctx, "teeball_planner");
  double demo = 0.0, learned = 0.0;
  for (const auto& s : run.seeds) {
    demo += s.demos.front().final_observation[3];
    double mean = 0.0;
    for (const auto& e : s.final_evaluation) mean += e.final_observation[3];
    learned += mean / static_cast<double>(s.final_evaluation.size());
  }
  demo /= static_cast<double>(run.seeds.size());
  learned /= static_cast<double>(run.seeds.size());
  return {learned >= 1.5 * demo,
          format("mean ball displacement: demo %.3f m, learned %.3f m, ratio %.2f (need >= 1.50)", demo, learned,
                 learned / demo)};
}

Outcome lwr_consistency(const Context&) {
  double worst = 0.0;
  for (std::size_t basis : {10u, 32u}) {
    Rng rng(1000 + basis);
    for (int trial = 0; trial < 50; ++trial) {
      const Trajectory demo = testing::random_dmp_demo(rng, basis);
      const DmpPolicy fit = lwr_fit(demo, basis);
      const auto replayed = dmp_rollout(fit, demo.waypoints.front(), demo.dt, demo.size() - 1);
      worst = std::max(worst, testing::worst_relative_rmse(demo.waypoints, replayed));
    }
  }
  return {worst < 0.02, format("worst per-joint RMSE / range over 100 demos = %.2e (need < 0.02)", worst)};
}

Outcome gradient_checks(const Context&) {
  Rng rng(77);
  double worst_grad = 0.0;
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    MlpPolicy p = MlpPolicy::random(4, 3, rng, {8, 8});
    Eigen::VectorXd theta = p.params();
    theta.tail(3) = sample_uniform(rng, 3, -1.5, 0.5);
    p.set_params(theta);
    const Eigen::VectorXd s = sample_normal(rng, 4);
    const Eigen::VectorXd a = p.act(s, rng, false);
    const Eigen::VectorXd grad = p.log_prob_grad(s, a).second;
    Eigen::VectorXd fd(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      p.set_params(tp);
      const double lp = p.log_prob(s, a);
      p.set_params(tm);
      fd[i] = (lp - p.log_prob(s, a)) / (2 * h);
    }
    worst_grad = std::max(worst_grad, (grad - fd).norm() / std::max(grad.norm(), fd.norm()));
  }

  const MlpPolicy small = MlpPolicy::random(2, 2, rng, {3});
  const auto n = static_cast<Eigen::Index>(small.num_params());
  Eigen::MatrixXd scores(200, n);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const Eigen::VectorXd s = sample_normal(rng, 2);
    scores.row(i) = small.log_prob_grad(s, small.act(s, rng, false)).second.transpose();
  }
  Eigen::MatrixXd fisher = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < 200; ++i) fisher += scores.row(i).transpose() * scores.row(i);
  fisher /= 200.0;
  double worst_fvp = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd v = sample_normal(rng, n);
    worst_fvp = std::max(worst_fvp, (fisher_vector_product(scores, v) - fisher * v).cwiseAbs().maxCoeff());
  }
  return {worst_grad < 1e-4 && worst_fvp < 1e-6 && n <= 20,
          format("score relative error %.2e (need < 1e-4); Fisher-vector error %.2e on %ld parameters (need < 1e-6)",
                 worst_grad, worst_fvp, static_cast<long>(n))};
}

Outcome reward_examples(const Context&) {
  const TaskSpec spec = make_task(TaskId::kDrawerOpen);
  const RewardSpec& r = spec.reward;
  const Configuration goal = r.goal;
  const double at_goal = reward(r, goal, Eigen::Vector3d::Zero());
  const double off = reward(r, goal - Configuration::Constant(1, 0.1), Eigen::Vector3d::Zero());
  const double act = reward(r, goal, Eigen::Vector3d(0.0, 1.0, 0.0));
  const double err = std::max({std::abs(at_goal), std::abs(off + 0.6), std::abs(act + 0.001)});
  return {err <= 1e-12, format("r = %.15g, %.15g, %.15g; max error %.1e", at_goal, off, act, err)};
}

/// Shifts an object chain and the static scene by the same rigid offset.
TaskSpec shifted_scene(TaskId id, Rng& rng) {
  TaskSpec spec = make_task(id);
  const Eigen::Vector2d shift = sample_uniform(rng, 2, -0.03, 0.03);
  const double turn = sample_uniform(rng, 1, -0.05, 0.05)[0];
  const Pose2 base = spec.object.base();
  const Pose2 moved{base.x + shift.x(), base.y + shift.y(), base.theta + turn};
  spec.object = KinematicChain(spec.object.name(), moved, spec.object.joints(), spec.object.links());
  // Keep the scene attached to the object frame.
  const Pose2 delta = moved * base.inverse();
  for (auto& s : spec.scene) s = {delta.apply(s.a), delta.apply(s.b)};
  return spec;
}

Outcome planner_feasibility(const Context&) {
  Rng rng(4242);
  int scenes = 0, limit_violations = 0, failures = 0, reachable = 0, reachable_ok = 0, truncated = 0,
      truncated_ok = 0;
  for (int k = 0; k < 100; ++k) {
    const TaskId id = k % 2 == 0 ? TaskId::kDrawerOpen : TaskId::kDoorClose;
    const TaskSpec spec = shifted_scene(id, rng);
    const auto seed = static_cast<std::uint64_t>(k);
    ++scenes;
    Trajectory demo;
    try {
      demo = initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, seed);
    } catch (const Error& e) {
      std::fprintf(stderr, "  scene %d: demo generation failed: %s\n", k, e.what());
      ++failures;
      continue;
    }
    for (const auto& q : demo.waypoints)
      if (!spec.robot.within_limits(q)) ++limit_violations;

    // Independent reachability verdict on the full object path.
    const Trajectory object_path = plan_object_path(spec.object, spec.initial.q_object, spec.reward.goal,
                                                    derive_seed(seed, 1), spec.plan_speed, spec.dt);
    const PosePath eepath = grasp_path(object_path, spec.object, estimate_grasp(spec.object, spec));
    TrackingOptions loose;
    loose.max_joint_jump = 2.0 * std::numbers::pi;
    const TrackingResult first = track_path(spec.robot, {eepath.front()}, demo.waypoints.front(), spec.scene, loose);
    const TrackingResult full =
        first.failed_at ? first : track_path(spec.robot, eepath, first.waypoints.front(), spec.scene);

    const Episode ep = demo_episode(spec, demo, seed);
    const double start = spec.initial.q_object[0], goal = spec.reward.goal[0];
    const double progress = (ep.final_observation[3] - start) / (goal - start);
    if (!full.failed_at) {
      ++reachable;
      if (spec.mode != ManipulationMode::kAttach || progress >= 0.8) ++reachable_ok;
    } else {
      ++truncated;
      if (demo.size() >= 2 && progress < 1.0) ++truncated_ok;
    }
  }
  const bool pass = failures == 0 && limit_violations == 0 && reachable_ok == reachable && truncated_ok == truncated;
  return {pass, format("%d scenes: %d failures, %d limit violations; reachable %d/%d reach >= 80%%; "
                       "truncated %d/%d returned partial demos",
                       scenes, failures, limit_violations, reachable_ok, reachable, truncated_ok, truncated)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text(e.path().string());
  return files;
}

Outcome determinism(const Context& ctx) {
  int compared = 0, mismatched = 0, replays = 0, replay_mismatch = 0;
  for (const char* name : {"drawer_planner", "door_dapg", "teeball_planner"}) {
    ExperimentConfig c = load_config((ctx.configs / (std::string(name) + ".json")).string());
    c.seeds = {0, 1};
    c.epochs = 3;
    const fs::path dir = ctx.out / "determinism" / name;
    fs::remove_all(dir);
    c.output_dir = dir.string();
    run_experiment(c);
    const auto first = snapshot(dir);
    run_experiment(c);
    const auto second = snapshot(dir);
    compared += static_cast<int>(first.size());
    if (first != second) ++mismatched;

    const TaskSpec spec = make_task(c.task);
    for (const auto& [path, text] : first) {
      if (path.find("demo_") == std::string::npos) continue;
      ++replays;
      const Episode ep = parse_episode_csv(text);
      Episode again = replay(spec, ep);
      again.source = ep.source;
      if (episode_csv(again) != text) ++replay_mismatch;
    }
  }
  return {mismatched == 0 && replay_mismatch == 0 && replays > 0,
          format("%d files over 3 configs, %d runs differ; %d episode files replayed, %d differ", compared,
                 mismatched, replays, replay_mismatch)};
}

Outcome pi2cma_sanity(const Context&) {
  int converged = 0, worst_updates = 0;
  const int trials = 10;
  for (int seed = 0; seed < trials; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    const Eigen::VectorXd target = sample_uniform(rng, 10, -1.0, 1.0);
    Pi2CmaState s;
    s.mean = Eigen::VectorXd::Zero(10);
    s.covariance = Eigen::MatrixXd::Identity(10, 10);
    const ReturnFn objective = [&](const Eigen::VectorXd& theta) { return -(theta - target).squaredNorm(); };
    int updates = 0;
    while (updates < 150 && (s.mean - target).norm() >= 0.05) {
      s = pi2cma_update(s, objective, rng);
      ++updates;
    }
    if ((s.mean - target).norm() < 0.05) ++converged;
    worst_updates = std::max(worst_updates, updates);
  }

  Rng rng(99);
  Pi2CmaState s;
  s.mean = Eigen::VectorXd::Zero(6);
  s.covariance = Eigen::MatrixXd::Identity(6, 6);
  const Eigen::MatrixXd samples = Eigen::MatrixXd::NullaryExpr(6, 20, [&] { return sample_normal(rng, 1)[0]; });
  const Eigen::VectorXd costs = (sample_normal(rng, 20, 5.0) * 256.0).array().round() / 256.0;
  const Eigen::VectorXd p = pi2_probabilities(costs, s.temperature);
  const Pi2CmaState a = pi2cma_apply(s, samples, costs);
  const Pi2CmaState b = pi2cma_apply(s, samples, 8.0 * costs.array() - 64.0);
  const bool exact = pi2_probabilities(8.0 * costs.array() - 64.0, s.temperature) == p && a.mean == b.mean &&
                     a.covariance == b.covariance;
  return {converged == trials && worst_updates <= 150 && exact,
          format("%d/%d quadratic runs reached |mu - theta*| < 0.05 (slowest: %d updates); affine-shifted costs "
                 "give %s weights and updates",
                 converged, trials, worst_updates, exact ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  Context ctx;
  std::string configs = SKILLBOOT_CONFIG_DIR, out = "acceptance_runs";
  app.add_option("--configs", configs, "Directory of experiment configs");
  app.add_option("--out", out, "Directory for run outputs");
  app.add_option("--seeds", ctx.seeds, "Seeds per learning-curve condition")->check(CLI::Range(2, 1000));
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  ctx.configs = configs;
  ctx.out = out;
  fs::create_directories(ctx.out);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria = {
      {"drawer-open bootstrapped vs random learning curves", drawer_trend},
      {"door-close DAPG vs NPG from random, demo fails, learned policy closes", door_trend},
      {"tee-ball learned displacement vs demo", teeball_improvement},
      {"LWR refit self-consistency", lwr_consistency},
      {"score and Fisher-vector checks", gradient_checks},
      {"reward examples", reward_examples},
      {"planner feasibility on randomized scenes", planner_feasibility},
      {"determinism and replay byte-identity", determinism},
      {"PI2-CMA quadratic convergence and cost-shift invariance", pi2cma_sanity},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %d: %s - %s: %s\n", number, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
