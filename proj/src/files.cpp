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

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "skillboot/error.hpp"
#include "skillboot/harness.hpp"

namespace skillboot {

namespace fs = std::filesystem;

namespace {

/// Text that parses back to the same double.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& text, const std::string& what) {
  // strtod accepts nan/inf spellings written by %.17g.
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw FormatError(what + ": bad number '" + text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) throw FormatError(what + ": bad integer '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

std::string join_vector(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
  return s;
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

// --- Episodes -------------------------------------------------------------------

std::string episode_csv(const Episode& ep) {
  const Eigen::Index od = ep.observations.cols(), ad = ep.actions.cols();
  std::string out = "# source=" + to_string(ep.source) + ",seed=" + std::to_string(ep.seed) + ",task=" + ep.task +
                    ",return=" + num(ep.ret) + ",final=" + join_vector(ep.final_observation) + "\n";
  out += "t";
  for (Eigen::Index i = 0; i < od; ++i) out += ",s" + std::to_string(i);
  for (Eigen::Index i = 0; i < ad; ++i) out += ",a" + std::to_string(i);
  out += ",r\n";
  for (Eigen::Index t = 0; t < ep.length(); ++t) {
    out += std::to_string(t);
    for (Eigen::Index i = 0; i < od; ++i) out += "," + num(ep.observations(t, i));
    for (Eigen::Index i = 0; i < ad; ++i) out += "," + num(ep.actions(t, i));
    out += "," + num(ep.rewards[t]) + "\n";
  }
  return out;
}

Episode parse_episode_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2 || lines[0].rfind("# ", 0) != 0) throw FormatError("episode file lacks its metadata line");
  Episode ep;
  std::map<std::string, std::string> meta;
  for (const auto& field : split(lines[0].substr(2), ',')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw FormatError("malformed metadata field '" + field + "'");
    meta[field.substr(0, eq)] = field.substr(eq + 1);
  }
  for (const char* key : {"source", "seed", "task", "return", "final"})
    if (!meta.count(key)) throw FormatError(std::string("episode metadata lacks '") + key + "'");
  try {
    ep.source = parse_episode_source(meta["source"]);
  } catch (const Error& e) {
    throw FormatError(e.what());
  }
  ep.seed = parse_u64(meta["seed"], "seed");
  ep.task = meta["task"];
  ep.ret = parse_num(meta["return"], "return");
  const auto finals = split(meta["final"], ';');
  ep.final_observation.resize(static_cast<Eigen::Index>(finals.size()));
  for (std::size_t i = 0; i < finals.size(); ++i)
    ep.final_observation[static_cast<Eigen::Index>(i)] = parse_num(finals[i], "final");

  const auto header = split(lines[1], ',');
  if (header.size() < 3 || header.front() != "t" || header.back() != "r")
    throw FormatError("episode header must read t,s0..,a0..,r");
  Eigen::Index od = 0, ad = 0;
  for (std::size_t i = 1; i + 1 < header.size(); ++i) {
    const std::string& h = header[i];
    if (h == "s" + std::to_string(od) && ad == 0) {
      ++od;
    } else if (h == "a" + std::to_string(ad)) {
      ++ad;
    } else {
      throw FormatError("unexpected episode column '" + h + "'");
    }
  }
  if (od == 0 || ad == 0) throw FormatError("episode needs state and action columns");
  if (od != ep.final_observation.size()) throw FormatError("final observation has the wrong size");

  std::vector<std::string> rows;
  for (std::size_t i = 2; i < lines.size(); ++i)
    if (!lines[i].empty()) rows.push_back(lines[i]);
  const auto T = static_cast<Eigen::Index>(rows.size());
  ep.observations.resize(T, od);
  ep.actions.resize(T, ad);
  ep.rewards.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto cells = split(rows[static_cast<std::size_t>(t)], ',');
    if (static_cast<Eigen::Index>(cells.size()) != 2 + od + ad)
      throw FormatError("episode row " + std::to_string(t) + " has the wrong number of columns");
    if (parse_u64(cells[0], "t") != static_cast<std::uint64_t>(t)) throw FormatError("episode rows out of order");
    for (Eigen::Index i = 0; i < od; ++i) ep.observations(t, i) = parse_num(cells[static_cast<std::size_t>(1 + i)], "s");
    for (Eigen::Index i = 0; i < ad; ++i)
      ep.actions(t, i) = parse_num(cells[static_cast<std::size_t>(1 + od + i)], "a");
    ep.rewards[t] = parse_num(cells.back(), "r");
  }
  return ep;
}

void write_episode(const std::string& path, const Episode& episode) { write_text(path, episode_csv(episode)); }

Episode read_episode(const std::string& path) {
  try {
    return parse_episode_csv(read_text(path));
  } catch (const FormatError& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
}

// --- Curves and run directories -------------------------------------------------

std::string curve_csv(const LearningCurve& curve) {
  std::string out = "seed,epoch,mean_return,normalized_return\n";
  for (Eigen::Index i = 0; i < curve.returns.rows(); ++i)
    for (Eigen::Index e = 0; e < curve.returns.cols(); ++e)
      out += std::to_string(curve.seeds[static_cast<std::size_t>(i)]) + "," + std::to_string(e) + "," +
             num(curve.returns(i, e)) + "," + num(curve.normalized(i, e)) + "\n";
  return out;
}

LearningCurve read_curve_csv(const std::string& path) {
  const auto lines = lines_of(read_text(path));
  if (lines.empty() || lines[0] != "seed,epoch,mean_return,normalized_return")
    throw FormatError("'" + path + "' is not a curve file");
  std::vector<std::uint64_t> seeds;
  std::map<std::uint64_t, std::vector<std::pair<double, double>>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split(lines[i], ',');
    if (cells.size() != 4) throw FormatError("'" + path + "': bad curve row");
    const std::uint64_t seed = parse_u64(cells[0], "seed");
    if (!rows.count(seed)) seeds.push_back(seed);
    auto& r = rows[seed];
    if (parse_u64(cells[1], "epoch") != r.size()) throw FormatError("'" + path + "': epochs out of order");
    r.emplace_back(parse_num(cells[2], "mean_return"), parse_num(cells[3], "normalized_return"));
  }
  if (seeds.empty()) throw FormatError("'" + path + "' has no rows");
  LearningCurve c;
  c.seeds = seeds;
  const auto epochs = static_cast<Eigen::Index>(rows[seeds.front()].size());
  c.returns.resize(static_cast<Eigen::Index>(seeds.size()), epochs);
  c.normalized.resizeLike(c.returns);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& r = rows[seeds[i]];
    if (static_cast<Eigen::Index>(r.size()) != epochs) throw FormatError("'" + path + "': mismatched epoch counts");
    for (Eigen::Index e = 0; e < epochs; ++e) {
      c.returns(static_cast<Eigen::Index>(i), e) = r[static_cast<std::size_t>(e)].first;
      c.normalized(static_cast<Eigen::Index>(i), e) = r[static_cast<std::size_t>(e)].second;
    }
  }
  return c;
}

void write_run(const RunResult& result, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  write_text((root / "curve.csv").string(), curve_csv(result.curve));

  std::string metrics = "seed,epoch,mean_return,std_return,best_return,bc_weight\n";
  for (const auto& run : result.seeds)
    for (const auto& m : run.metrics)
      metrics += std::to_string(run.seed) + "," + std::to_string(m.epoch) + "," + num(m.mean_return) + "," +
                 num(m.std_return) + "," + num(m.best_return) + "," + num(m.bc_weight) + "\n";
  write_text((root / "metrics.csv").string(), metrics);

  nlohmann::json meta;
  meta["config"] = nlohmann::json::parse(config_to_json(result.config));
  meta["rollouts_per_epoch"] = rollouts_per_epoch(result.config);
  meta["eval_rollouts"] = result.config.eval_rollouts;
  meta["random_floor"] = num(result.curve.floor);
  meta["best_return"] = num(result.curve.best);
  write_text((root / "run.json").string(), meta.dump(2) + "\n");

  for (const auto& run : result.seeds) {
    const fs::path seed_dir = root / ("seed_" + std::to_string(run.seed));
    fs::create_directories(seed_dir);
    for (std::size_t i = 0; i < run.demos.size(); ++i)
      write_episode((seed_dir / ("demo_" + std::to_string(i) + ".csv")).string(), run.demos[i]);
    const std::string ckpt = (seed_dir / "policy.json").string();
    if (run.dmp) save_checkpoint(ckpt, *run.dmp);
    if (run.mlp) save_checkpoint(ckpt, *run.mlp);
  }
}

}  // namespace skillboot
