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

#include "teamfield/finite_n.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "teamfield/parallel.h"
#include "teamfield/rng.h"

namespace teamfield {
namespace {

// Law of a team's action-count vector, keyed by counts packed base n + 1
// with action 0 least significant.
using CountLaw = std::map<std::int64_t, double>;

struct CountCodec {
  int n = 1;
  int actions = 1;

  std::vector<int> Decode(std::int64_t code) const {
    std::vector<int> counts(actions);
    for (int u = 0; u < actions; ++u) {
      counts[u] = static_cast<int>(code % (n + 1));
      code /= n + 1;
    }
    return counts;
  }
  std::int64_t Unit(int u) const {
    std::int64_t unit = 1;
    for (int v = 0; v < u; ++v) unit *= n + 1;
    return unit;
  }
};

// Per-DM action distributions a_k(u) = sum_y Q(y | w) K_k(y, u).
std::vector<double> ActionDistribution(const Kernel& obs, int world,
                                       const Kernel& policy) {
  std::vector<double> a(policy.cols(), 0.0);
  for (int y = 0; y < policy.rows(); ++y) {
    const double qy = obs(world, y);
    if (qy == 0.0) continue;
    for (int u = 0; u < policy.cols(); ++u) a[u] += qy * policy(y, u);
  }
  return a;
}

void AddIndependentDms(const std::vector<const std::vector<double>*>& dists,
                       const CountCodec& codec, double weight, CountLaw* out) {
  CountLaw law = {{0, weight}};
  std::vector<std::int64_t> units(codec.actions);
  for (int u = 0; u < codec.actions; ++u) units[u] = codec.Unit(u);
  for (const auto* a : dists) {
    CountLaw next;
    for (const auto& [code, prob] : law) {
      for (int u = 0; u < codec.actions; ++u) {
        if ((*a)[u] == 0.0) continue;
        next[code + units[u]] += prob * (*a)[u];
      }
    }
    law = std::move(next);
  }
  for (const auto& [code, prob] : law) (*out)[code] += prob;
}

CountLaw TeamCountLaw(const StaticGameSpec& spec, int team, int world, int n,
                      const std::vector<WeightedKernels>& realizations) {
  const CountCodec codec{n, spec.num_actions(team)};
  CountLaw out;
  for (const auto& r : realizations) {
    std::vector<std::vector<double>> dists;
    dists.reserve(r.kernels.size());
    for (const Kernel& k : r.kernels) {
      dists.push_back(ActionDistribution(spec.teams[team].obs_kernel, world, k));
    }
    std::vector<const std::vector<double>*> ptrs;
    for (const auto& d : dists) ptrs.push_back(&d);
    AddIndependentDms(ptrs, codec, r.weight, &out);
  }
  return out;
}

// Expected per-DM average cost of `team` at one world given both count laws.
double CostFromCounts(const FiniteGameInstance& inst, int team, int world,
                      const std::array<CountLaw, kNumTeams>& laws) {
  const StaticGameSpec& spec = inst.spec;
  const std::array<CountCodec, kNumTeams> codecs = {
      CountCodec{inst.team_sizes[0], spec.num_actions(0)},
      CountCodec{inst.team_sizes[1], spec.num_actions(1)}};
  std::array<std::vector<std::pair<std::vector<double>, double>>, kNumTeams>
      emp;
  std::vector<std::vector<int>> own_counts;
  for (int j = 0; j < kNumTeams; ++j) {
    for (const auto& [code, prob] : laws[j]) {
      const auto counts = codecs[j].Decode(code);
      std::vector<double> m(counts.size());
      for (std::size_t u = 0; u < counts.size(); ++u) {
        m[u] = static_cast<double>(counts[u]) / inst.team_sizes[j];
      }
      emp[j].push_back({std::move(m), prob});
      if (j == team) own_counts.push_back(counts);
    }
  }
  KahanSum sum;
  const int nu = spec.num_actions(team);
  for (std::size_t a = 0; a < emp[0].size(); ++a) {
    for (std::size_t b = 0; b < emp[1].size(); ++b) {
      const double prob = emp[0][a].second * emp[1][b].second;
      if (prob == 0.0) continue;
      const StatArgs args = spec.Stats(emp[0][a].first, emp[1][b].first);
      const auto& counts = own_counts[team == 0 ? a : b];
      double total = 0.0;
      for (int u = 0; u < nu; ++u) {
        if (counts[u] == 0) continue;
        total += counts[u] * spec.cost[team].Eval(world, 0, u, args);
      }
      sum.Add(prob * total / inst.team_sizes[team]);
    }
  }
  return sum.value();
}

void CheckInstance(const FiniteGameInstance& inst) {
  for (int j = 0; j < kNumTeams; ++j) {
    if (inst.team_sizes[j] < 1) throw Error("team sizes must be >= 1");
  }
}

void CheckTeam(int team) {
  if (team < 0 || team >= kNumTeams) throw Error("team index out of range");
}

std::int64_t ExactWork(const FiniteGameInstance& inst) {
  long double work = inst.spec.world.size;
  for (int j = 0; j < kNumTeams; ++j) {
    work *= static_cast<long double>(
        SimplexGridSize(inst.spec.num_actions(j), inst.team_sizes[j]));
    work *= inst.spec.num_actions(j);
  }
  return work > 9e18L ? std::numeric_limits<std::int64_t>::max()
                      : static_cast<std::int64_t>(work);
}

double ExactCostChecked(const FiniteGameInstance& inst,
                        const std::array<std::vector<WeightedKernels>, kNumTeams>&
                            realizations,
                        int team) {
  KahanSum sum;
  for (int w = 0; w < inst.spec.world.size; ++w) {
    const double pw = inst.spec.prior[w];
    if (pw == 0.0) continue;
    std::array<CountLaw, kNumTeams> laws;
    for (int j = 0; j < kNumTeams; ++j) {
      laws[j] = TeamCountLaw(inst.spec, j, w, inst.team_sizes[j],
                             realizations[j]);
    }
    sum.Add(pw * CostFromCounts(inst, team, w, laws));
  }
  return sum.value();
}

// Next nondecreasing code sequence over [0, m); false after the last one.
bool NextMultiset(std::vector<std::int64_t>* codes, std::int64_t m) {
  for (int i = static_cast<int>(codes->size()) - 1; i >= 0; --i) {
    if ((*codes)[i] + 1 < m) {
      const std::int64_t v = (*codes)[i] + 1;
      for (std::size_t j = i; j < codes->size(); ++j) (*codes)[j] = v;
      return true;
    }
  }
  return false;
}

std::int64_t MultisetCount(std::int64_t m, int n, std::int64_t limit) {
  // C(m + n - 1, n), saturating at limit + 1.
  long double count = 1.0L;
  for (int i = 1; i <= n; ++i) {
    count = count * (m - 1 + i) / i;
    if (count > static_cast<long double>(limit)) return limit + 1;
  }
  return static_cast<std::int64_t>(count + 0.5L);
}

// Shared setup for enumerating deterministic profiles of one team against a
// fixed opponent.
struct ProfileEvaluator {
  const FiniteGameInstance& inst;
  int team;
  int num_obs;
  int num_actions;
  std::int64_t num_maps;
  // map_dist[w][code] = action distribution of one DM using map `code`.
  std::vector<std::vector<std::vector<double>>> map_dist;
  std::vector<CountLaw> opponent_laws;  // per world

  ProfileEvaluator(const FiniteGameInstance& inst_, const TeamPolicy& opponent,
                   int team_)
      : inst(inst_), team(team_) {
    const StaticGameSpec& spec = inst.spec;
    num_obs = spec.num_obs(team);
    num_actions = spec.num_actions(team);
    num_maps = NumMaps(num_obs, num_actions, kBestResponseBudget);
    const int other = 1 - team;
    const auto opp_real =
        opponent.Realizations(inst.team_sizes[other], spec.num_actions(other));
    map_dist.resize(spec.world.size);
    opponent_laws.resize(spec.world.size);
    for (int w = 0; w < spec.world.size; ++w) {
      map_dist[w].resize(num_maps);
      for (std::int64_t c = 0; c < num_maps; ++c) {
        const DetPolicy map = MapFromCode(c, num_obs, num_actions);
        map_dist[w][c] = ActionDistribution(
            spec.teams[team].obs_kernel, w,
            Kernel::Deterministic(num_actions, map.actions));
      }
      opponent_laws[w] = TeamCountLaw(spec, other, w, inst.team_sizes[other],
                                      opp_real);
    }
  }

  // Cost of a mixture over code profiles (weights, codes per DM).
  double Value(const std::vector<std::pair<double, std::vector<std::int64_t>>>&
                   components) const {
    const CountCodec codec{inst.team_sizes[team], num_actions};
    KahanSum sum;
    for (int w = 0; w < inst.spec.world.size; ++w) {
      const double pw = inst.spec.prior[w];
      if (pw == 0.0) continue;
      std::array<CountLaw, kNumTeams> laws;
      for (const auto& [weight, codes] : components) {
        std::vector<const std::vector<double>*> dists;
        for (std::int64_t c : codes) dists.push_back(&map_dist[w][c]);
        AddIndependentDms(dists, codec, weight, &laws[team]);
      }
      laws[1 - team] = opponent_laws[w];
      sum.Add(pw * CostFromCounts(inst, team, w, laws));
    }
    return sum.value();
  }
};

std::vector<DetPolicy> ProfileFromCodes(const std::vector<std::int64_t>& codes,
                                        int num_obs, int num_actions) {
  std::vector<DetPolicy> profile;
  for (std::int64_t c : codes) profile.push_back(MapFromCode(c, num_obs, num_actions));
  return profile;
}

// Minimizes `value` over all multisets of n codes in [0, m), visiting them
// in lexicographic order and evaluating chunks in parallel.
template <typename ValueFn>
std::pair<std::vector<std::int64_t>, double> MinOverMultisets(std::int64_t m,
                                                              int n,
                                                              ValueFn value) {
  constexpr std::size_t kChunk = 4096;
  std::vector<std::int64_t> codes(n, 0);
  std::vector<std::int64_t> best_codes;
  double best = std::numeric_limits<double>::infinity();
  bool more = true;
  std::vector<std::vector<std::int64_t>> chunk;
  std::vector<double> values;
  while (more) {
    chunk.clear();
    while (more && chunk.size() < kChunk) {
      chunk.push_back(codes);
      more = NextMultiset(&codes, m);
    }
    values.assign(chunk.size(), 0.0);
    ParallelFor(static_cast<std::int64_t>(chunk.size()),
                [&](std::int64_t i) { values[i] = value(chunk[i]); });
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      // Earlier profiles win ties up to round-off.
      if (best_codes.empty() ||
          values[i] < best - 1e-13 * std::max(1.0, std::abs(best))) {
        best = values[i];
        best_codes = chunk[i];
      }
    }
  }
  return {best_codes, best};
}

struct SampledTeam {
  std::vector<WeightedKernels> realizations;
  std::vector<double> weights;
};

SampledTeam PrepareSampling(const TeamPolicy& p, int n, int num_actions) {
  SampledTeam s;
  s.realizations = p.Realizations(n, num_actions);
  for (const auto& r : s.realizations) s.weights.push_back(r.weight);
  return s;
}

// Draws one episode and returns the realized action counts of both teams and
// the world. Each team, DM and the world use separate counter-based streams
// so that changing one team's policy leaves every other draw unchanged.
int SampleEpisode(const FiniteGameInstance& inst,
                  const std::array<SampledTeam, kNumTeams>& teams,
                  std::uint64_t seed, std::uint64_t rep,
                  std::array<std::vector<int>, kNumTeams>* counts) {
  const StaticGameSpec& spec = inst.spec;
  Rng world_rng(DeriveSeed(seed, {rep, 0}));
  const int world = SampleIndex(spec.prior, world_rng.Uniform());
  for (int j = 0; j < kNumTeams; ++j) {
    (*counts)[j].assign(spec.num_actions(j), 0);
    Rng common(DeriveSeed(seed, {rep, 1, static_cast<std::uint64_t>(j)}));
    const double z = common.Uniform();
    const auto& r = teams[j].realizations[SampleIndex(teams[j].weights, z)];
    const Kernel& obs = spec.teams[j].obs_kernel;
    for (int k = 0; k < inst.team_sizes[j]; ++k) {
      Rng dm(DeriveSeed(seed, {rep, 2, static_cast<std::uint64_t>(j),
                               static_cast<std::uint64_t>(k)}));
      const int y = SampleIndex(obs.Row(world), dm.Uniform());
      const int u = SampleIndex(r.kernels[k].Row(y), dm.Uniform());
      (*counts)[j][u] += 1;
    }
  }
  return world;
}

// Per-episode realized average costs of `team`.
std::vector<double> EpisodeCosts(const FiniteGameInstance& inst,
                                 const PolicyPair& policies, int team, int reps,
                                 std::uint64_t seed) {
  std::array<SampledTeam, kNumTeams> teams;
  for (int j = 0; j < kNumTeams; ++j) {
    policies[j].Check(inst.team_sizes[j], inst.spec.num_obs(j),
                      inst.spec.num_actions(j));
    teams[j] = PrepareSampling(policies[j], inst.team_sizes[j],
                               inst.spec.num_actions(j));
  }
  std::vector<double> costs(reps);
  ParallelFor(reps, [&](std::int64_t rep) {
    std::array<std::vector<int>, kNumTeams> counts;
    const int world =
        SampleEpisode(inst, teams, seed, static_cast<std::uint64_t>(rep), &counts);
    std::array<std::vector<double>, kNumTeams> emp;
    for (int j = 0; j < kNumTeams; ++j) {
      emp[j] = EmpFromCounts(counts[j]).vec();
    }
    const StatArgs args = inst.spec.Stats(emp[0], emp[1]);
    double total = 0.0;
    for (int u = 0; u < inst.spec.num_actions(team); ++u) {
      if (counts[team][u] == 0) continue;
      total += counts[team][u] * inst.spec.cost[team].Eval(world, 0, u, args);
    }
    costs[rep] = total / inst.team_sizes[team];
  });
  return costs;
}

TeamPolicy SingleProfile(std::vector<DetPolicy> profile) {
  return TeamPolicy::Mixture({{1.0, std::move(profile)}});
}

// DM 0 switches to `map`; the rest keep their behavior.
TeamPolicy ReplaceFirstDm(const TeamPolicy& p, int n, int num_actions,
                          const DetPolicy& map) {
  switch (p.kind()) {
    case TeamPolicy::Kind::kSymmetricIid: {
      std::vector<BehavioralPolicy> per_dm(n, p.shared());
      per_dm[0] = BehavioralPolicy::FromMap(map, num_actions);
      return TeamPolicy::Product(per_dm);
    }
    case TeamPolicy::Kind::kProduct: {
      auto per_dm = p.per_dm();
      per_dm[0] = BehavioralPolicy::FromMap(map, num_actions);
      return TeamPolicy::Product(per_dm);
    }
    case TeamPolicy::Kind::kMixture: {
      auto components = p.components();
      for (auto& c : components) c.profile[0] = map;
      return TeamPolicy::Mixture(components);
    }
  }
  return p;
}

}  // namespace

McEstimate SummarizeSamples(const std::vector<double>& samples) {
  KahanSum sum;
  for (double s : samples) sum.Add(s);
  const double n = static_cast<double>(samples.size());
  McEstimate est;
  est.estimate = sum.value() / n;
  if (samples.size() > 1) {
    KahanSum sq;
    for (double s : samples) sq.Add((s - est.estimate) * (s - est.estimate));
    est.ci_halfwidth = 2.58 * std::sqrt(sq.value() / (n - 1)) / std::sqrt(n);
  }
  return est;
}

double ExactCost(const FiniteGameInstance& inst, const PolicyPair& policies,
                 int team, std::int64_t budget) {
  CheckInstance(inst);
  CheckTeam(team);
  const std::int64_t work = ExactWork(inst);
  if (work > budget) {
    throw BudgetError("exact cost needs about " + std::to_string(work) +
                      " count evaluations (budget " + std::to_string(budget) +
                      "); use Monte Carlo estimation instead");
  }
  std::array<std::vector<WeightedKernels>, kNumTeams> realizations;
  for (int j = 0; j < kNumTeams; ++j) {
    policies[j].Check(inst.team_sizes[j], inst.spec.num_obs(j),
                      inst.spec.num_actions(j));
    realizations[j] =
        policies[j].Realizations(inst.team_sizes[j], inst.spec.num_actions(j));
  }
  return ExactCostChecked(inst, realizations, team);
}

McEstimate McCost(const FiniteGameInstance& inst, const PolicyPair& policies,
                  int team, int reps, std::uint64_t seed) {
  CheckInstance(inst);
  CheckTeam(team);
  if (reps < 2) throw Error("Monte Carlo needs at least 2 repetitions");
  return SummarizeSamples(EpisodeCosts(inst, policies, team, reps, seed));
}

TeamBestResponse TeamBestResponseExact(const FiniteGameInstance& inst,
                                       const TeamPolicy& opponent, int team,
                                       std::int64_t budget) {
  CheckInstance(inst);
  CheckTeam(team);
  const int other = 1 - team;
  opponent.Check(inst.team_sizes[other], inst.spec.num_obs(other),
                 inst.spec.num_actions(other));
  const int n = inst.team_sizes[team];
  const std::int64_t maps =
      NumMaps(inst.spec.num_obs(team), inst.spec.num_actions(team), budget);
  const std::int64_t candidates = MultisetCount(maps, n, budget);
  if (candidates > budget) {
    throw BudgetError("team best response needs more than " +
                      std::to_string(budget) + " profiles (" +
                      std::to_string(maps) + " maps, " + std::to_string(n) +
                      " DMs)");
  }
  const ProfileEvaluator eval(inst, opponent, team);
  // The team cost is symmetric in its DMs, so multisets of maps suffice; the
  // sorted representative of a multiset is its lexicographically first
  // arrangement.
  const auto [codes, value] =
      MinOverMultisets(maps, n, [&](const std::vector<std::int64_t>& c) {
        return eval.Value({{1.0, c}});
      });
  return {ProfileFromCodes(codes, eval.num_obs, eval.num_actions), value};
}

std::string CertMethodName(CertMethod method) {
  return method == CertMethod::kExact ? "exact" : "monte-carlo";
}

EpsilonReport EpsilonNeCertify(const FiniteGameInstance& inst,
                               const PolicyPair& policies) {
  EpsilonReport report;
  report.method = CertMethod::kExact;
  for (int i = 0; i < kNumTeams; ++i) {
    report.current_cost[i] = ExactCost(inst, policies, i);
    const auto br = TeamBestResponseExact(inst, policies[1 - i], i);
    report.deviation_cost[i] = br.value;
    report.eps[i] = report.current_cost[i] - br.value;
    report.best_deviations[i] = SingleProfile(br.profile);
  }
  return report;
}

EpsilonReport EpsilonMcCertify(const FiniteGameInstance& inst,
                               const PolicyPair& policies,
                               const McCertifyOptions& options) {
  CheckInstance(inst);
  if (options.reps < 2) throw Error("Monte Carlo needs at least 2 repetitions");
  const int steps = StepsForResolution(options.resolution);
  EpsilonReport report;
  report.method = CertMethod::kMonteCarlo;
  double worst_ci = 0.0;
  for (int i = 0; i < kNumTeams; ++i) {
    const int n = inst.team_sizes[i];
    const int ny = inst.spec.num_obs(i);
    const int nu = inst.spec.num_actions(i);
    const auto base = EpisodeCosts(inst, policies, i, options.reps, options.seed);
    report.current_cost[i] = SummarizeSamples(base).estimate;

    std::vector<TeamPolicy> candidates = {policies[i]};
    const auto rows = SimplexGrid(nu, steps);
    const std::int64_t per_row = static_cast<std::int64_t>(rows.size());
    std::int64_t grid = 1;
    for (int y = 0; y < ny; ++y) {
      grid *= per_row;
      if (grid > 100'000) throw BudgetError("deviation grid too large");
    }
    for (std::int64_t g = 0; g < grid; ++g) {
      std::vector<double> data;
      std::int64_t rest = g;
      std::vector<std::int64_t> digits(ny);
      for (int y = ny - 1; y >= 0; --y) {
        digits[y] = rest % per_row;
        rest /= per_row;
      }
      for (int y = 0; y < ny; ++y) {
        data.insert(data.end(), rows[digits[y]].begin(), rows[digits[y]].end());
      }
      candidates.push_back(TeamPolicy::SymmetricIid({Kernel(ny, nu, data)}));
    }
    const std::int64_t maps = NumMaps(ny, nu, 100'000);
    for (std::int64_t c = 0; c < maps; ++c) {
      candidates.push_back(ReplaceFirstDm(policies[i], n, nu, MapFromCode(c, ny, nu)));
    }

    double best_gap = 0.0;
    McEstimate best_diff;
    std::size_t best_index = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c) {
      PolicyPair deviated = policies;
      deviated[i] = candidates[c];
      const auto dev = EpisodeCosts(inst, deviated, i, options.reps, options.seed);
      std::vector<double> diff(base.size());
      for (std::size_t r = 0; r < base.size(); ++r) diff[r] = base[r] - dev[r];
      const McEstimate d = SummarizeSamples(diff);
      if (d.estimate > best_gap) {
        best_gap = d.estimate;
        best_diff = d;
        best_index = c;
      }
    }
    report.eps[i] = best_gap;
    report.deviation_cost[i] = report.current_cost[i] - best_gap;
    report.best_deviations[i] = candidates[best_index];
    worst_ci = std::max(worst_ci, best_diff.ci_halfwidth);
  }
  report.ci_halfwidth = worst_ci;
  return report;
}

std::vector<std::array<int, kNumTeams>> SweepSizes(const std::vector<int>& ns,
                                                   int ratio) {
  if (ratio < 1) throw Error("team size ratio must be >= 1");
  std::vector<std::array<int, kNumTeams>> sizes;
  for (int n : ns) sizes.push_back({n, n * ratio});
  return sizes;
}

std::vector<SweepRow> EpsilonSweep(
    const StaticGameSpec& spec, const std::array<Kernel, kNumTeams>& kernels,
    const std::vector<std::array<int, kNumTeams>>& sizes,
    const std::optional<McCertifyOptions>& mc) {
  const PolicyPair policies = {TeamPolicy::SymmetricIid({kernels[0]}),
                               TeamPolicy::SymmetricIid({kernels[1]})};
  std::vector<SweepRow> rows;
  for (const auto& n : sizes) {
    const FiniteGameInstance inst{spec, n};
    SweepRow row;
    row.n = n;
    try {
      row.report = EpsilonNeCertify(inst, policies);
    } catch (const BudgetError&) {
      if (!mc.has_value()) throw;
      row.report = EpsilonMcCertify(inst, policies, *mc);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ExchangeableBrValues CheckExchangeableBrValue(const FiniteGameInstance& inst,
                                              const TeamPolicy& opponent,
                                              int team) {
  CheckTeam(team);
  const int other = 1 - team;
  if (!IsExchangeable(opponent, inst.team_sizes[other], inst.spec.num_obs(other),
                      inst.spec.num_actions(other))) {
    throw Error("opponent policy is not exchangeable");
  }
  ExchangeableBrValues out;
  out.v_all = TeamBestResponseExact(inst, opponent, team).value;

  const int n = inst.team_sizes[team];
  if (n > kMaxPermutationDms) {
    throw Error("symmetrization needs at most " +
                std::to_string(kMaxPermutationDms) + " DMs");
  }
  const ProfileEvaluator eval(inst, opponent, team);
  const auto perms = AllPermutations(n);
  const double share = 1.0 / static_cast<double>(perms.size());
  // A symmetrization depends only on the multiset of maps.
  out.v_exch =
      MinOverMultisets(eval.num_maps, n, [&](const std::vector<std::int64_t>& c) {
        std::map<std::vector<std::int64_t>, double> merged;
        for (const auto& sigma : perms) {
          std::vector<std::int64_t> permuted(n);
          for (int k = 0; k < n; ++k) permuted[k] = c[sigma[k]];
          merged[permuted] += share;
        }
        std::vector<std::pair<double, std::vector<std::int64_t>>> components;
        for (const auto& [codes, weight] : merged) components.push_back({weight, codes});
        return eval.Value(components);
      }).second;
  return out;
}

std::vector<double> SampleEmpiricalActionLaw(const StaticGameSpec& spec,
                                             int team, const Kernel& kernel,
                                             int world, int n,
                                             std::uint64_t seed) {
  CheckTeam(team);
  if (n < 1) throw Error("sample size must be >= 1");
  const Kernel& obs = spec.teams[team].obs_kernel;
  std::vector<int> counts(kernel.cols(), 0);
  for (int k = 0; k < n; ++k) {
    Rng rng(DeriveSeed(seed, {static_cast<std::uint64_t>(k)}));
    const int y = SampleIndex(obs.Row(world), rng.Uniform());
    counts[SampleIndex(kernel.Row(y), rng.Uniform())] += 1;
  }
  return EmpFromCounts(counts).vec();
}

}  // namespace teamfield
