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

#ifndef TEAMFIELD_DYNAMIC_H_
#define TEAMFIELD_DYNAMIC_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "teamfield/finite_n.h"
#include "teamfield/game.h"
#include "teamfield/prob.h"

namespace teamfield {

inline constexpr std::int64_t kDynamicBrBudget = 1'000'000;

// One observation-to-action kernel per stage.
struct StagePolicy {
  std::vector<Kernel> kernels;

  static StagePolicy Uniform(const DynamicGameSpec& spec, int team);
  // Deterministic stage maps; code digits run over (stage, observation) with
  // stage 0, observation 0 most significant.
  static StagePolicy FromCode(const DynamicGameSpec& spec, int team,
                              std::int64_t code);
  bool operator==(const StagePolicy&) const = default;
};

using StagePolicyPair = std::array<StagePolicy, kNumTeams>;

// Joint (x_t, u_t) laws of each team's representative DM.
struct FlowProfile {
  // joint[team][t][world], flattened x * |U| + u.
  std::array<std::vector<std::vector<std::vector<double>>>, kNumTeams> joint;

  std::vector<double> StateLaw(const DynamicGameSpec& spec, int team, int t,
                               int world) const;
  std::vector<double> ActionLaw(const DynamicGameSpec& spec, int team, int t,
                                int world) const;
};

void CheckStagePolicy(const DynamicGameSpec& spec, int team,
                      const StagePolicy& policy);

FlowProfile PropagateMfFlow(const DynamicGameSpec& spec,
                            const StagePolicyPair& policies);

// Statistic values of the flows at stage t and world w.
StatArgs FlowStats(const DynamicGameSpec& spec, const FlowProfile& flows,
                   int t, int world);

// Representative-DM cost of `policy` with mean-field terms from `flows`.
double MfDynamicCost(const DynamicGameSpec& spec, int team,
                     const StagePolicy& policy, const FlowProfile& flows);

struct DynamicBestResponse {
  StagePolicy policy;
  double value = 0.0;
  bool exhaustive = true;  // false: coordinate-descent local optimum
};

DynamicBestResponse DynamicBestResponseFixedFlow(
    const DynamicGameSpec& spec, int team, const FlowProfile& flows,
    bool allow_coordinate_descent = false,
    std::int64_t budget = kDynamicBrBudget);

struct DynamicMfEquilibrium {
  StagePolicyPair policies;
  FlowProfile flows;
  std::array<double, kNumTeams> br_residual = {0.0, 0.0};
  std::array<double, kNumTeams> consistency_residual = {0.0, 0.0};
  std::array<bool, kNumTeams> exhaustive = {true, true};
  int iterations = 0;
  bool converged = false;
};

struct DynamicSolverConfig {
  double damping = 0.5;
  int max_iters = 10000;
  double tol = 1e-6;
  double smoothing = 1.0;
  double anneal_rate = 0.5;
  double min_smoothing = 1e-9;
  bool adaptive_damping = true;
  bool allow_coordinate_descent = false;
  std::optional<StagePolicyPair> init;
};

// Recomputes residuals of the policies against the declared flows.
void FillDynamicResiduals(const DynamicGameSpec& spec, DynamicMfEquilibrium* eq,
                          bool allow_coordinate_descent = false);

DynamicMfEquilibrium SolveDynamicMfFixedPoint(
    const DynamicGameSpec& spec, const DynamicSolverConfig& config = {});

struct DynamicGridOptions {
  std::int64_t max_candidates = 10'000'000;
  double slack = 1e-9;
};

// Every grid stage-policy pair (each kernel row on the simplex grid of step
// `resolution`) that is a best response to its own flows for both teams,
// within `slack`.
std::vector<DynamicMfEquilibrium> DynamicGridSearch(
    const DynamicGameSpec& spec, double resolution,
    const DynamicGridOptions& options = {});

// Per-DM stage policies of a team; one entry means shared by all DMs.
struct DynamicTeamPolicy {
  std::vector<StagePolicy> per_dm;

  static DynamicTeamPolicy Shared(StagePolicy policy) { return {{std::move(policy)}}; }
  const StagePolicy& At(int dm) const {
    return per_dm.size() == 1 ? per_dm[0] : per_dm.at(dm);
  }
};

using DynamicPolicyPair = std::array<DynamicTeamPolicy, kNumTeams>;

struct SimulationResult {
  std::array<McEstimate, kNumTeams> cost;
  // Average empirical state and action laws per team, stage and world,
  // over the episodes that drew that world.
  std::array<std::vector<std::vector<std::vector<double>>>, kNumTeams> state_flow;
  std::array<std::vector<std::vector<std::vector<double>>>, kNumTeams> action_flow;
  std::vector<int> world_counts;
};

SimulationResult SimulateFiniteN(const DynamicGameSpec& spec,
                                 std::array<int, kNumTeams> team_sizes,
                                 const DynamicPolicyPair& policies, int reps,
                                 std::uint64_t seed);

// Realized per-episode average costs of one team.
std::vector<double> SimulateEpisodeCosts(const DynamicGameSpec& spec,
                                         std::array<int, kNumTeams> team_sizes,
                                         const DynamicPolicyPair& policies,
                                         int team, int reps, std::uint64_t seed);

// States of each DM at `stage` of every episode: result[rep][team][dm].
std::vector<std::array<std::vector<int>, kNumTeams>> SimulateStates(
    const DynamicGameSpec& spec, std::array<int, kNumTeams> team_sizes,
    const DynamicPolicyPair& policies, int stage, int reps, std::uint64_t seed);

// Exact expected per-DM average cost by enumerating joint states.
double ExactDynamicCost(const DynamicGameSpec& spec,
                        std::array<int, kNumTeams> team_sizes,
                        const DynamicPolicyPair& policies, int team,
                        std::int64_t budget = 100'000'000);

struct DynamicEpsilonOptions {
  bool exact = false;
  int reps = 1000;
  std::uint64_t seed = 0;
  double resolution = 0.1;
  std::int64_t deviation_budget = 1'000'000;
};

struct DynamicEpsilonReport {
  std::array<double, kNumTeams> eps = {0.0, 0.0};
  std::array<double, kNumTeams> current_cost = {0.0, 0.0};
  std::array<DynamicTeamPolicy, kNumTeams> best_deviations;
  CertMethod method = CertMethod::kMonteCarlo;
  double ci_halfwidth = 0.0;
};

DynamicEpsilonReport DynamicEpsilonEstimate(
    const DynamicGameSpec& spec, std::array<int, kNumTeams> team_sizes,
    const DynamicPolicyPair& policies, const DynamicEpsilonOptions& options);

// Horizon-1 dynamic game whose state is the static observation.
DynamicGameSpec LiftStaticToDynamic(const StaticGameSpec& spec);

}  // namespace teamfield

#endif  // TEAMFIELD_DYNAMIC_H_
