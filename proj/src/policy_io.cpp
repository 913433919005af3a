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

#include <fstream>
#include <vector>

#include <json.hpp>

#include "skillboot/error.hpp"
#include "skillboot/policy.hpp"

namespace skillboot {

using nlohmann::json;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  out << doc.dump(2) << '\n';
}

json read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read checkpoint '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const DmpPolicy& policy) {
  json doc;
  doc["class"] = "dmp";
  doc["joints"] = policy.joints();
  doc["basis"] = policy.basis();
  doc["alpha_z"] = policy.constants().alpha_z;
  doc["beta_z"] = policy.constants().beta_z;
  doc["alpha_x"] = policy.constants().alpha_x;
  doc["layout"] = "weights,goals,log_tau";
  doc["params"] = to_std(policy.params());
  write(path, doc);
}

void save_checkpoint(const std::string& path, const MlpPolicy& policy) {
  json doc;
  doc["class"] = "mlp";
  doc["obs_dim"] = policy.obs_dim();
  doc["act_dim"] = policy.act_dim();
  doc["hidden"] = policy.hidden();
  doc["activation"] = "tanh";
  doc["layout"] = "per-layer row-major weights then bias, then log_std";
  doc["params"] = to_std(policy.params());
  write(path, doc);
}

std::string checkpoint_class(const std::string& path) {
  const json doc = read(path);
  if (!doc.contains("class")) throw FormatError("checkpoint '" + path + "' has no class field");
  return doc["class"].get<std::string>();
}

DmpPolicy load_dmp_checkpoint(const std::string& path) {
  const json doc = read(path);
  try {
    if (doc.at("class") != "dmp") throw FormatError("checkpoint '" + path + "' is not a DMP");
    DmpConstants k{doc.at("alpha_z").get<double>(), doc.at("beta_z").get<double>(), doc.at("alpha_x").get<double>()};
    DmpPolicy p(doc.at("joints").get<std::size_t>(), doc.at("basis").get<std::size_t>(), 1.0, k);
    p.set_params(to_eigen(doc.at("params").get<std::vector<double>>()));
    return p;
  } catch (const json::exception& e) {
    throw FormatError("checkpoint '" + path + "': " + e.what());
  }
}

MlpPolicy load_mlp_checkpoint(const std::string& path) {
  const json doc = read(path);
  try {
    if (doc.at("class") != "mlp") throw FormatError("checkpoint '" + path + "' is not an MLP");
    MlpPolicy p(doc.at("obs_dim").get<std::size_t>(), doc.at("act_dim").get<std::size_t>(),
                doc.at("hidden").get<std::vector<std::size_t>>());
    p.set_params(to_eigen(doc.at("params").get<std::vector<double>>()));
    return p;
  } catch (const json::exception& e) {
    throw FormatError("checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace skillboot
