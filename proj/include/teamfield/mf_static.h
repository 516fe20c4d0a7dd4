// Copyright 2026 The Teamfield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEAMFIELD_MF_STATIC_H_
#define TEAMFIELD_MF_STATIC_H_

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "teamfield/game.h"
#include "teamfield/prob.h"

namespace teamfield {

// Per-team action laws conditioned on the world: lambda[team][world][u].
struct MeanFieldProfile {
  std::array<std::vector<std::vector<double>>, kNumTeams> lambda;

  bool operator==(const MeanFieldProfile&) const = default;
};

struct MfEquilibrium {
  std::array<Kernel, kNumTeams> policies;
  MeanFieldProfile mean_fields;
  std::array<double, kNumTeams> br_residual = {0.0, 0.0};
  std::array<double, kNumTeams> consistency_residual = {0.0, 0.0};
  int iterations = 0;
  bool converged = false;
};

struct MfSolverConfig {
  double damping = 0.5;
  int max_iters = 10000;
  double tol = 1e-6;
  // Initial softmax temperature; 0 takes exact best responses throughout.
  double smoothing = 1.0;
  double anneal_rate = 0.5;
  double min_smoothing = 1e-9;
  bool adaptive_damping = true;
  std::optional<std::array<Kernel, kNumTeams>> init;
};

// Lambda(u | w) = sum_y Q(y | w) b(u | y), one row per world.
std::vector<std::vector<double>> MeanFieldActionLaw(const StaticGameSpec& spec,
                                                    int team,
                                                    const Kernel& policy);

MeanFieldProfile MeanFieldsOf(const StaticGameSpec& spec,
                              const std::array<Kernel, kNumTeams>& policies);

// q[y][u] = sum_w prior(w) Q(y | w) c(w, u, stats(w)) for fixed mean fields.
// Also returns P(y) in `obs_mass` when non-null.
std::vector<std::vector<double>> ObsActionValues(
    const StaticGameSpec& spec, int team, const MeanFieldProfile& mf,
    std::vector<double>* obs_mass = nullptr);

// Expected cost of `policy` against fixed mean fields.
double MfCost(const StaticGameSpec& spec, int team, const Kernel& policy,
              const MeanFieldProfile& mf);

struct MfBestResponse {
  Kernel policy;  // deterministic, lowest index among minimizers
  double value = 0.0;
};

MfBestResponse BestResponseFixedMf(const StaticGameSpec& spec, int team,
                                   const MeanFieldProfile& mf);

// Recomputes both residuals of a candidate against the given mean fields.
void FillResiduals(const StaticGameSpec& spec, MfEquilibrium* eq);

// Damped, smoothed fixed-point iteration with temperature annealing.
MfEquilibrium SolveMfFixedPoint(const StaticGameSpec& spec,
                                const MfSolverConfig& config = {});

struct GridSearchOptions {
  // Candidate counts above this raise BudgetError.
  std::int64_t max_candidates = 10'000'000;
  // Slack for counting an action as a best response.
  double slack = 1e-9;
};

// Every grid kernel pair whose projected best response lies within
// `resolution` of it in mean-field total variation, in grid order.
std::vector<MfEquilibrium> GridFixedPointSearch(
    const StaticGameSpec& spec, double resolution,
    const GridSearchOptions& options = {});

// Groups hits adjacent on the grid and keeps the lowest-residual member of
// each group.
std::vector<MfEquilibrium> ClusterHits(const std::vector<MfEquilibrium>& hits,
                                       double resolution);

struct MfExploitabilityResult {
  std::array<double, kNumTeams> epsilon = {0.0, 0.0};
  std::array<Kernel, kNumTeams> deviation;
};

// Team-level exploitability: each team deviates to any kernel on the grid of
// the given resolution while the opponent's mean field stays at law(b).
// The team's own statistic follows its deviation.
MfExploitabilityResult MfExploitability(
    const StaticGameSpec& spec, const std::array<Kernel, kNumTeams>& policies,
    double resolution, std::int64_t max_candidates = 10'000'000);

}  // namespace teamfield

#endif  // TEAMFIELD_MF_STATIC_H_
