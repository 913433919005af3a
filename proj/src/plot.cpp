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
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "skillboot/error.hpp"
#include "skillboot/harness.hpp"

namespace skillboot {

namespace fs = std::filesystem;

AggregateTable aggregate(const Eigen::MatrixXd& per_seed) {
  const Eigen::Index n = per_seed.rows();
  if (n < 2) throw Error("aggregate needs at least two seeds");
  if (per_seed.cols() == 0) throw Error("aggregate needs at least one epoch");
  AggregateTable t;
  t.mean = per_seed.colwise().mean().transpose();
  const Eigen::MatrixXd centered = per_seed.rowwise() - t.mean.transpose();
  const Eigen::VectorXd var = centered.array().square().colwise().sum().transpose() / static_cast<double>(n - 1);
  t.std_error = (var.array().sqrt() / std::sqrt(static_cast<double>(n))).matrix();
  return t;
}

AggregateTable aggregate(const std::vector<std::vector<double>>& per_seed) {
  if (per_seed.size() < 2) throw Error("aggregate needs at least two seeds");
  const std::size_t epochs = per_seed.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(per_seed.size()), static_cast<Eigen::Index>(epochs));
  for (std::size_t i = 0; i < per_seed.size(); ++i) {
    if (per_seed[i].size() != epochs) throw Error("aggregate: curves have mismatched epoch counts");
    for (std::size_t e = 0; e < epochs; ++e)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e)) = per_seed[i][e];
  }
  return aggregate(m);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string emit_plot(const std::vector<PlotSeries>& series, const std::string& title) {
  if (series.empty()) throw Error("emit_plot: no series");
  Eigen::Index epochs = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series) {
    if (s.table.mean.size() == 0 || s.table.std_error.size() != s.table.mean.size())
      throw Error("emit_plot: series '" + s.label + "' is empty");
    epochs = std::max(epochs, s.table.mean.size());
    for (Eigen::Index e = 0; e < s.table.mean.size(); ++e) {
      if (!std::isfinite(s.table.mean[e])) continue;
      lo = std::min(lo, s.table.mean[e] - s.table.std_error[e]);
      hi = std::max(hi, s.table.mean[e] + s.table.std_error[e]);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;

  const double width = 640, height = 400, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  const double x_span = std::max<Eigen::Index>(1, epochs - 1);
  auto X = [&](double e) { return left + pw * e / x_span; };
  auto Y = [&](double v) { return top + ph * (hi - v) / (hi - lo); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
                    fmt(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    svg += "<text x=\"" + fmt(left) + "\" y=\"24\" font-size=\"14\">" + escape(title) + "</text>\n";
  svg += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    svg += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(Y(v) + 4) + "\" text-anchor=\"end\">" + fmt(v) +
           "</text>\n";
    const double e = x_span * k / 4.0;
    svg += "<text x=\"" + fmt(X(e)) + "\" y=\"" + fmt(top + ph + 18) + "\" text-anchor=\"middle\">" +
           std::to_string(static_cast<long>(std::lround(e))) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(height - 10) +
         "\" text-anchor=\"middle\">epoch</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(top + ph / 2) + "\" transform=\"rotate(-90 16 " + fmt(top + ph / 2) +
         ")\" text-anchor=\"middle\">normalized return</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = kColors[i % std::size(kColors)];
    const Eigen::Index n = s.table.mean.size();
    std::string band, line;
    for (Eigen::Index e = 0; e < n; ++e)
      band += fmt(X(static_cast<double>(e))) + "," + fmt(Y(s.table.mean[e] + s.table.std_error[e])) + " ";
    for (Eigen::Index e = n; e-- > 0;)
      band += fmt(X(static_cast<double>(e))) + "," + fmt(Y(s.table.mean[e] - s.table.std_error[e])) + " ";
    for (Eigen::Index e = 0; e < n; ++e)
      line += fmt(X(static_cast<double>(e))) + "," + fmt(Y(s.table.mean[e])) + " ";
    band.pop_back();
    line.pop_back();
    svg += "<g class=\"series\" data-label=\"" + escape(s.label) + "\">\n";
    svg += "<polygon points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    const double ly = top + 16 + 20.0 * static_cast<double>(i);
    svg += "<line x1=\"" + fmt(left + pw + 12) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" + fmt(left + pw + 32) +
           "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(left + pw + 38) + "\" y=\"" + fmt(ly) + "\">" + escape(s.label) + "</text>\n";
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<PlotSeries> load_plot_series(const std::string& dir) {
  std::vector<fs::path> runs;
  if (fs::exists(fs::path(dir) / "curve.csv")) {
    runs.emplace_back(dir);
  } else {
    if (!fs::is_directory(dir)) throw Error("'" + dir + "' is not a directory");
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_directory() && fs::exists(entry.path() / "curve.csv")) runs.push_back(entry.path());
    std::sort(runs.begin(), runs.end());
  }
  if (runs.empty()) throw Error("no curve.csv found under '" + dir + "'");

  std::vector<LearningCurve> curves;
  std::vector<std::string> labels;
  double floor_sum = 0.0;
  for (const auto& run : runs) {
    curves.push_back(read_curve_csv((run / "curve.csv").string()));
    std::string label = run.filename().string();
    const fs::path meta_path = run / "run.json";
    if (fs::exists(meta_path)) {
      const auto meta = nlohmann::json::parse(read_text(meta_path.string()));
      const auto& cfg = meta.at("config");
      label = cfg.at("optimizer").get<std::string>() + " (" + cfg.at("init").get<std::string>() + ")";
      floor_sum += std::stod(meta.at("random_floor").get<std::string>());
    } else {
      floor_sum += curves.back().returns.col(0).mean();
    }
    labels.push_back(label);
  }
  std::vector<LearningCurve*> ptrs;
  for (auto& c : curves) ptrs.push_back(&c);
  normalize_curves(ptrs, floor_sum / static_cast<double>(curves.size()));

  std::vector<PlotSeries> out;
  for (std::size_t i = 0; i < curves.size(); ++i) out.push_back({labels[i], aggregate(curves[i].normalized)});
  return out;
}

}  // namespace skillboot
