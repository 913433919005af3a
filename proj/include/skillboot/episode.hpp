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

#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace skillboot {

enum class EpisodeSource { kPlanner, kPolicy, kReplay };

std::string to_string(EpisodeSource source);
EpisodeSource parse_episode_source(const std::string& text);

/// One rollout. Row t of `observations`/`actions` is (s_t, a_t); actions are
/// stored as emitted by the policy, before the simulator's velocity clamp.
struct Episode {
  std::string task;
  Eigen::MatrixXd observations;
  Eigen::MatrixXd actions;
  Eigen::VectorXd rewards;
  Eigen::VectorXd final_observation;
  double ret = 0.0;
  std::uint64_t seed = 0;
  EpisodeSource source = EpisodeSource::kPolicy;

  Eigen::Index length() const { return rewards.size(); }
};

}  // namespace skillboot
