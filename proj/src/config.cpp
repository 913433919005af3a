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

#include <set>
#include <string>

#include <json.hpp>

#include "skillboot/error.hpp"
#include "skillboot/harness.hpp"

namespace skillboot {

using nlohmann::json;

std::string to_string(PolicyClass c) { return c == PolicyClass::kDmp ? "dmp" : "mlp"; }

std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::kPlanner: return "planner";
    case InitMode::kRandom: return "random";
    case InitMode::kReplayFile: return "replay-file";
  }
  return "?";
}

std::string to_string(OptimizerId o) {
  switch (o) {
    case OptimizerId::kPi2Cma: return "pi2cma";
    case OptimizerId::kNpg: return "npg";
    case OptimizerId::kDapg: return "dapg";
  }
  return "?";
}

namespace {

/// Reads keys from one JSON object and rejects any it was not asked about.
class Section {
 public:
  Section(const json& node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  void finish() const {
    for (const auto& item : node_.items())
      if (!seen_.count(item.key())) throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) ? &node_.at(key) : nullptr;
  }

  const std::string& where() const { return where_; }

 private:
  const json& node_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename Enum, typename Parse>
void get_enum(Section& s, const std::string& key, Enum& out, Parse parse) {
  std::string text;
  s.get(key, text);
  if (text.empty()) return;
  try {
    out = parse(text);
  } catch (const Error& e) {
    throw ConfigError(s.where() + "." + key + ": " + e.what());
  }
}

PolicyClass parse_policy_class(const std::string& t) {
  if (t == "dmp") return PolicyClass::kDmp;
  if (t == "mlp") return PolicyClass::kMlp;
  throw ConfigError("unknown policy class '" + t + "'");
}

InitMode parse_init(const std::string& t) {
  if (t == "planner") return InitMode::kPlanner;
  if (t == "random") return InitMode::kRandom;
  if (t == "replay-file") return InitMode::kReplayFile;
  throw ConfigError("unknown init mode '" + t + "'");
}

OptimizerId parse_optimizer(const std::string& t) {
  if (t == "pi2cma") return OptimizerId::kPi2Cma;
  if (t == "npg") return OptimizerId::kNpg;
  if (t == "dapg") return OptimizerId::kDapg;
  throw ConfigError("unknown optimizer '" + t + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  {
    Section root(doc, "config");
    get_enum(root, "task", c.task, parse_task_id);
    get_enum(root, "policy", c.policy, parse_policy_class);
    get_enum(root, "init", c.init, parse_init);
    get_enum(root, "optimizer", c.optimizer, parse_optimizer);
    root.get("demo_files", c.demo_files);
    root.get("demos", c.demos);
    root.get("epochs", c.epochs);
    root.get("seeds", c.seeds);
    root.get("output_dir", c.output_dir);
    root.get("gamma", c.gamma);
    root.get("eval_rollouts", c.eval_rollouts);
    root.get("start_noise", c.start_noise);
    root.get("threads", c.threads);
    if (const json* n = root.child("dmp")) {
      Section s(*n, "dmp");
      s.get("basis", c.dmp.basis);
      s.get("random_weight_std", c.dmp.random_weight_std);
      s.get("random_goal_std", c.dmp.random_goal_std);
      s.get("random_tau", c.dmp.random_tau);
      s.finish();
    }
    if (const json* n = root.child("mlp")) {
      Section s(*n, "mlp");
      s.get("hidden", c.mlp.hidden);
      s.get("init_log_std", c.mlp.init_log_std);
      s.finish();
    }
    if (const json* n = root.child("pi2cma")) {
      Section s(*n, "pi2cma");
      s.get("population", c.pi2cma.population);
      s.get("temperature", c.pi2cma.temperature);
      s.get("elite_fraction", c.pi2cma.elite_fraction);
      s.get("weight_std", c.pi2cma.weight_std);
      s.get("goal_std", c.pi2cma.goal_std);
      s.get("log_tau_std", c.pi2cma.log_tau_std);
      s.get("covariance_floor", c.pi2cma.covariance_floor);
      s.get("covariance_rate", c.pi2cma.covariance_rate);
      s.finish();
    }
    if (const json* n = root.child("npg")) {
      Section s(*n, "npg");
      s.get("step_size", c.pg.npg.step_size);
      s.get("cg_iters", c.pg.npg.cg_iters);
      s.get("cg_damping", c.pg.npg.cg_damping);
      s.get("rollouts", c.pg.rollouts);
      s.get("lambda0", c.pg.lambda0);
      s.get("decay", c.pg.decay);
      s.finish();
    }
    if (const json* n = root.child("bc")) {
      Section s(*n, "bc");
      s.get("epochs", c.bc.epochs);
      s.get("learning_rate", c.bc.learning_rate);
      s.get("batch_size", c.bc.batch_size);
      s.get("fit_log_std", c.bc.fit_log_std);
      s.finish();
    }
    root.finish();
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

std::string config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["task"] = to_string(c.task);
  doc["policy"] = to_string(c.policy);
  doc["init"] = to_string(c.init);
  doc["optimizer"] = to_string(c.optimizer);
  doc["demo_files"] = c.demo_files;
  doc["demos"] = c.demos;
  doc["epochs"] = c.epochs;
  doc["seeds"] = c.seeds;
  doc["output_dir"] = c.output_dir;
  doc["gamma"] = c.gamma;
  doc["eval_rollouts"] = c.eval_rollouts;
  doc["start_noise"] = c.start_noise;
  doc["threads"] = c.threads;
  doc["dmp"] = {{"basis", c.dmp.basis},
                {"random_weight_std", c.dmp.random_weight_std},
                {"random_goal_std", c.dmp.random_goal_std},
                {"random_tau", c.dmp.random_tau}};
  doc["mlp"] = {{"hidden", c.mlp.hidden}, {"init_log_std", c.mlp.init_log_std}};
  doc["pi2cma"] = {{"population", c.pi2cma.population},
                   {"temperature", c.pi2cma.temperature},
                   {"elite_fraction", c.pi2cma.elite_fraction},
                   {"weight_std", c.pi2cma.weight_std},
                   {"goal_std", c.pi2cma.goal_std},
                   {"log_tau_std", c.pi2cma.log_tau_std},
                   {"covariance_floor", c.pi2cma.covariance_floor},
                   {"covariance_rate", c.pi2cma.covariance_rate}};
  doc["npg"] = {{"step_size", c.pg.npg.step_size}, {"cg_iters", c.pg.npg.cg_iters},
                {"cg_damping", c.pg.npg.cg_damping}, {"rollouts", c.pg.rollouts},
                {"lambda0", c.pg.lambda0},           {"decay", c.pg.decay}};
  doc["bc"] = {{"epochs", c.bc.epochs},
               {"learning_rate", c.bc.learning_rate},
               {"batch_size", c.bc.batch_size},
               {"fit_log_std", c.bc.fit_log_std}};
  return doc.dump(2) + "\n";
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.demos < 0) fail("demos must be non-negative");
  if (c.demos == 0 && c.init == InitMode::kPlanner) fail("planner init needs at least one demo");
  if (c.init == InitMode::kReplayFile && c.demo_files.empty()) fail("replay-file init needs demo_files");
  if (c.epochs < 1) fail("epochs must be at least 1");
  if (c.seeds.empty()) fail("at least one seed is required");
  if (c.eval_rollouts < 1) fail("eval_rollouts must be at least 1");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("gamma must lie in (0, 1]");
  if (c.start_noise < 0.0) fail("start_noise must be non-negative");
  const bool dmp_opt = c.optimizer == OptimizerId::kPi2Cma;
  if ((c.policy == PolicyClass::kDmp) != dmp_opt) fail("pi2cma pairs with dmp; npg and dapg pair with mlp");
  if (c.optimizer == OptimizerId::kDapg && c.init == InitMode::kRandom)
    fail("dapg needs demonstrations (use planner or replay-file init)");
  if (c.dmp.basis < 1) fail("dmp.basis must be positive");
  if (!(c.dmp.random_tau > 0.0)) fail("dmp.random_tau must be positive");
  if (c.mlp.hidden.empty()) fail("mlp.hidden must list at least one layer");
  if (c.pi2cma.population < 2) fail("pi2cma.population must be at least 2");
  if (!(c.pi2cma.temperature > 0.0)) fail("pi2cma.temperature must be positive");
  if (!(c.pi2cma.elite_fraction > 0.0 && c.pi2cma.elite_fraction <= 1.0))
    fail("pi2cma.elite_fraction must lie in (0, 1]");
  if (!(c.pi2cma.covariance_floor > 0.0)) fail("pi2cma.covariance_floor must be positive");
  if (!(c.pi2cma.covariance_rate > 0.0 && c.pi2cma.covariance_rate <= 1.0))
    fail("pi2cma.covariance_rate must lie in (0, 1]");
  if (!(c.pg.npg.step_size > 0.0)) fail("npg.step_size must be positive");
  if (c.pg.npg.cg_iters < 1) fail("npg.cg_iters must be positive");
  if (c.pg.rollouts < 1) fail("npg.rollouts must be positive");
  if (c.pg.lambda0 < 0.0) fail("npg.lambda0 must be non-negative");
  if (!(c.pg.decay > 0.0 && c.pg.decay <= 1.0)) fail("npg.decay must lie in (0, 1]");
  if (c.bc.epochs < 0 || c.bc.batch_size < 1) fail("bc settings out of range");
  if (c.threads < 0) fail("threads must be non-negative");
}

int rollouts_per_epoch(const ExperimentConfig& c) {
  return c.optimizer == OptimizerId::kPi2Cma ? c.pi2cma.population : c.pg.rollouts;
}

}  // namespace skillboot
