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

// Command-line front end: run experiments, emit demos, plot curves and
// verify episode files by replay.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skillboot/error.hpp"
#include "skillboot/harness.hpp"
#include "skillboot/planner.hpp"

using namespace skillboot;

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seeds, const std::string& out) {
  ExperimentConfig config = load_config(config_path);
  if (!seeds.empty()) config.seeds = seeds;
  if (!out.empty()) config.output_dir = out;
  validate(config);
  const RunResult result = run_experiment(config);
  const Eigen::Index last = result.curve.returns.cols() - 1;
  std::printf("%s %s/%s: %zu seeds, %d epochs -> %s\n", to_string(config.task).c_str(),
              to_string(config.policy).c_str(), to_string(config.optimizer).c_str(), config.seeds.size(),
              config.epochs, config.output_dir.c_str());
  std::printf("mean return: epoch 0 %.3f, epoch %ld %.3f\n", result.curve.returns.col(0).mean(),
              static_cast<long>(last), result.curve.returns.col(last).mean());
  return 0;
}

int cmd_demo(const std::string& task_name, std::uint64_t seed, const std::string& out) {
  const TaskSpec spec = make_task(parse_task_id(task_name));
  const Trajectory path = initial_mp_demos(spec, spec.robot, spec.object, spec.reward.goal, seed);
  const Episode ep = demo_episode(spec, path, seed);
  write_episode(out, ep);
  std::printf("wrote %s: %ld steps, return %.6g, final object state %.6g\n", out.c_str(),
              static_cast<long>(ep.length()), ep.ret, ep.final_observation.tail(1)[0]);
  return 0;
}

int cmd_plot(const std::string& in, const std::string& out) {
  const auto series = load_plot_series(in);
  write_text(out, emit_plot(series, in));
  std::printf("wrote %s (%zu series)\n", out.c_str(), series.size());
  return 0;
}

int cmd_replay(const std::string& path) {
  const std::string original = read_text(path);
  const Episode ep = parse_episode_csv(original);
  const TaskSpec spec = make_task(parse_task_id(ep.task));
  Episode again = replay(spec, ep);
  again.source = ep.source;
  const std::string text = episode_csv(again);
  if (text != original) {
    std::printf("MISMATCH: replay of %s differs from the file\n", path.c_str());
    return 1;
  }
  std::printf("OK: replay of %s is byte-identical (%ld steps)\n", path.c_str(), static_cast<long>(ep.length()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planner-bootstrapped policy learning for planar manipulation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::uint64_t> seeds;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", seeds, "Comma-separated seed list")->delimiter(',');
  run->add_option("--out", out_dir, "Output directory");

  std::string task, demo_out;
  std::uint64_t demo_seed = 0;
  auto* demo = app.add_subcommand("demo", "Write one planner demonstration");
  demo->add_option("--task", task, "drawer-open, door-close or tee-ball")->required();
  demo->add_option("--seed", demo_seed, "Demo seed");
  demo->add_option("--out", demo_out, "Episode CSV path")->required();

  std::string plot_in, plot_out;
  auto* plot = app.add_subcommand("plot", "Plot learning curves of run directories");
  plot->add_option("--in", plot_in, "Run directory or a directory of runs")->required();
  plot->add_option("--out", plot_out, "SVG path")->required();

  std::string episode_path;
  auto* rep = app.add_subcommand("replay", "Re-execute an episode file and compare bytes");
  rep->add_option("--episode", episode_path, "Episode CSV path")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, seeds, out_dir);
    if (*demo) return cmd_demo(task, demo_seed, demo_out);
    if (*plot) return cmd_plot(plot_in, plot_out);
    if (*rep) return cmd_replay(episode_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
