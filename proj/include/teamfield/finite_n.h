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

#ifndef TEAMFIELD_FINITE_N_H_
#define TEAMFIELD_FINITE_N_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "teamfield/game.h"
#include "teamfield/policies.h"

namespace teamfield {

inline constexpr std::int64_t kExactCostBudget = 100'000'000;
inline constexpr std::int64_t kBestResponseBudget = 10'000'000;

struct FiniteGameInstance {
  StaticGameSpec spec;
  std::array<int, kNumTeams> team_sizes = {1, 1};
};

using PolicyPair = std::array<TeamPolicy, kNumTeams>;

// Expected per-DM average cost of `team`, summed exactly over worlds,
// common-randomness draws, observations and actions.
double ExactCost(const FiniteGameInstance& inst, const PolicyPair& policies,
                 int team, std::int64_t budget = kExactCostBudget);

struct McEstimate {
  double estimate = 0.0;
  double ci_halfwidth = 0.0;  // 2.58 * sample sd / sqrt(reps)
};

// Sample mean with a 99% normal-approximation half-width.
McEstimate SummarizeSamples(const std::vector<double>& samples);

McEstimate McCost(const FiniteGameInstance& inst, const PolicyPair& policies,
                  int team, int reps, std::uint64_t seed);

struct TeamBestResponse {
  std::vector<DetPolicy> profile;
  double value = 0.0;
};

// Exhaustive minimum over deterministic per-DM profiles of the deviating
// team. Ties go to the lexicographically first profile.
TeamBestResponse TeamBestResponseExact(const FiniteGameInstance& inst,
                                       const TeamPolicy& opponent, int team,
                                       std::int64_t budget = kBestResponseBudget);

enum class CertMethod { kExact, kMonteCarlo };
std::string CertMethodName(CertMethod method);

struct EpsilonReport {
  std::array<double, kNumTeams> eps = {0.0, 0.0};
  std::array<double, kNumTeams> current_cost = {0.0, 0.0};
  std::array<double, kNumTeams> deviation_cost = {0.0, 0.0};
  std::array<TeamPolicy, kNumTeams> best_deviations;
  CertMethod method = CertMethod::kExact;
  double ci_halfwidth = 0.0;
};

EpsilonReport EpsilonNeCertify(const FiniteGameInstance& inst,
                               const PolicyPair& policies);

struct McCertifyOptions {
  int reps = 2000;
  std::uint64_t seed = 0;
  // Step of the symmetric-iid kernel grid searched as deviations.
  double resolution = 0.1;
};

// Lower bound on exploitability from symmetric-iid grid deviations and
// single-DM deterministic deviations, with common random numbers. The
// reported half-width belongs to the paired difference of the maximizer.
EpsilonReport EpsilonMcCertify(const FiniteGameInstance& inst,
                               const PolicyPair& policies,
                               const McCertifyOptions& options);

struct SweepRow {
  std::array<int, kNumTeams> n = {1, 1};
  EpsilonReport report;
};

// Certifies the symmetric-iid lift of mean-field kernels at each team size.
// Sizes beyond the exact budgets fall back to Monte Carlo when `mc` is set.
std::vector<SweepRow> EpsilonSweep(
    const StaticGameSpec& spec, const std::array<Kernel, kNumTeams>& kernels,
    const std::vector<std::array<int, kNumTeams>>& sizes,
    const std::optional<McCertifyOptions>& mc = std::nullopt);

// Team sizes (n, ratio * n) for each n.
std::vector<std::array<int, kNumTeams>> SweepSizes(const std::vector<int>& ns,
                                                   int ratio = 1);

struct ExchangeableBrValues {
  double v_all = 0.0;
  double v_exch = 0.0;
};

// Best-response value over all deterministic profiles and over the
// symmetrizations of those profiles, against an exchangeable opponent.
ExchangeableBrValues CheckExchangeableBrValue(const FiniteGameInstance& inst,
                                              const TeamPolicy& opponent,
                                              int team);

// Empirical action measure of n DMs drawing observations from world `world`
// and actions from `kernel`.
std::vector<double> SampleEmpiricalActionLaw(const StaticGameSpec& spec,
                                             int team, const Kernel& kernel,
                                             int world, int n,
                                             std::uint64_t seed);

}  // namespace teamfield

#endif  // TEAMFIELD_FINITE_N_H_
