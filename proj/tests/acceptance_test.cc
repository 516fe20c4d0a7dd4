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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "teamfield/dynamic.h"
#include "teamfield/finite_n.h"
#include "teamfield/io.h"
#include "teamfield/mf_static.h"
#include "teamfield/policies.h"
#include "teamfield/rng.h"
#include "test_games.h"

namespace teamfield {
namespace {

std::string Data(const std::string& name) {
  return std::string(TEAMFIELD_DATA_DIR) + "/" + name;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<double> RandomRow(Rng& rng, int n) {
  std::vector<double> row(n);
  double total = 0.0;
  for (double& v : row) total += (v = 0.02 + rng.Uniform());
  for (double& v : row) v /= total;
  return row;
}

Kernel RandomKernel(Rng& rng, int rows, int cols) {
  std::vector<double> data;
  for (int r = 0; r < rows; ++r) {
    const auto row = RandomRow(rng, cols);
    data.insert(data.end(), row.begin(), row.end());
  }
  return Kernel(rows, cols, data);
}

int Between(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// Random world/action-dependent costs, multilinear in one statistic
// component of each team.
CostFunction RandomTableCost(Rng& rng, int team, int worlds,
                             const std::array<StaticTeamSpec, kNumTeams>& teams) {
  std::vector<GridAxis> axes;
  for (int j = 0; j < kNumTeams; ++j) {
    const bool mean = teams[j].statistic.kind == StatisticMap::Kind::kMeanEmbedding;
    const int component = mean ? 0 : Between(rng, 0, teams[j].action_space.size - 1);
    axes.push_back({StatSlot{false, j}, component, {0.0, 0.5, 1.0}});
  }
  CostFunction::Table table;
  table.worlds = worlds;
  table.states = 1;
  table.actions = teams[team].action_space.size;
  table.grid = GridInterpolator(axes);
  for (std::size_t k = 0; k < static_cast<std::size_t>(worlds) * table.actions * 9; ++k) {
    table.values.push_back(rng.Uniform());
  }
  return CostFunction(team, table);
}

StaticGameSpec RandomStaticSpec(Rng& rng, int max_size) {
  StaticGameSpec spec;
  const int worlds = Between(rng, 1, max_size);
  spec.world = {worlds, {}};
  spec.prior = RandomRow(rng, worlds);
  for (int i = 0; i < kNumTeams; ++i) {
    StaticTeamSpec& team = spec.teams[i];
    const int nu = Between(rng, 1, max_size);
    const int ny = Between(rng, 1, max_size);
    team.action_space = {nu, {}};
    team.obs_space = {ny, {}};
    team.obs_kernel = RandomKernel(rng, worlds, ny);
    if (rng() % 2 == 0) {
      std::vector<double> embedding;
      for (int u = 0; u < nu; ++u) embedding.push_back(rng.Uniform());
      team.statistic = StatisticMap::MeanEmbedding(embedding);
    } else {
      team.statistic = StatisticMap::Identity();
    }
  }
  for (int i = 0; i < kNumTeams; ++i) {
    spec.cost[i] = RandomTableCost(rng, i, worlds, spec.teams);
  }
  return spec;
}

TeamPolicy RandomPolicy(Rng& rng, int n, int ny, int nu) {
  switch (rng() % 3) {
    case 0:
      return TeamPolicy::SymmetricIid({RandomKernel(rng, ny, nu)});
    case 1: {
      std::vector<BehavioralPolicy> per_dm;
      for (int k = 0; k < n; ++k) per_dm.push_back({RandomKernel(rng, ny, nu)});
      return TeamPolicy::Product(per_dm);
    }
    default: {
      const int m = Between(rng, 1, 3);
      const auto weights = RandomRow(rng, m);
      std::vector<MixtureComponent> comps;
      for (int c = 0; c < m; ++c) {
        MixtureComponent comp{weights[c], {}};
        for (int k = 0; k < n; ++k) {
          comp.profile.push_back(MapFromCode(rng() % NumMaps(ny, nu), ny, nu));
        }
        comps.push_back(comp);
      }
      return TeamPolicy::Mixture(comps);
    }
  }
}

Outcome Criterion1() {
  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const StaticGameSpec spec = RandomStaticSpec(rng, 3);
    const FiniteGameInstance inst{spec, {Between(rng, 1, 3), Between(rng, 1, 3)}};
    PolicyPair p;
    for (int i = 0; i < kNumTeams; ++i) {
      p[i] = RandomPolicy(rng, inst.team_sizes[i], spec.num_obs(i), spec.num_actions(i));
    }
    const double base[2] = {ExactCost(inst, p, 0), ExactCost(inst, p, 1)};
    for (const auto& s0 : AllPermutations(inst.team_sizes[0])) {
      for (const auto& s1 : AllPermutations(inst.team_sizes[1])) {
        const PolicyPair q = {PermuteProfile(p[0], s0), PermuteProfile(p[1], s1)};
        for (int team = 0; team < kNumTeams; ++team) {
          worst = std::max(worst, std::abs(ExactCost(inst, q, team) - base[team]));
        }
      }
    }
  }
  return {worst <= 1e-12, "max deviation " + FormatDouble(worst) + " over 100 games"};
}

Outcome Criterion2() {
  Rng rng(2002);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const StaticGameSpec spec = RandomStaticSpec(rng, 2);
    const FiniteGameInstance inst{spec, {Between(rng, 2, 3), Between(rng, 2, 3)}};
    const int team = static_cast<int>(rng() % 2);
    const int other = 1 - team;
    const int n = inst.team_sizes[other];
    const TeamPolicy opp = Symmetrize(
        RandomPolicy(rng, n, spec.num_obs(other), spec.num_actions(other)), n,
        spec.num_obs(other), spec.num_actions(other));
    const auto v = CheckExchangeableBrValue(inst, opp, team);
    worst = std::max(worst, std::abs(v.v_all - v.v_exch));
  }
  return {worst <= 1e-9, "max |v_all - v_exch| " + FormatDouble(worst) + " over 50 games"};
}

Outcome Criterion3() {
  const PolicyPair pair =
      PolicyPairFromJson(ParseJson(ReadFile(Data("anticorrelated_mixture.json")), "mixture"));
  const TeamPolicy& mix = pair[0];
  const bool exchangeable = IsExchangeable(mix, 2, 1, 2);
  const Kernel obs = Kernel::Uniform(1, 1);
  const auto target = JointActionLaw(mix, 2, obs, 0, 2);
  double nearest = 1.0;
  for (int step = 0; step <= 100; ++step) {
    const double p = step / 100.0;
    const auto iid = TeamPolicy::SymmetricIid({Kernel({{1.0 - p, p}})});
    nearest = std::min(nearest, TotalVariation(JointActionLaw(iid, 2, obs, 0, 2), target));
  }
  return {exchangeable && nearest > 0.1,
          "exchangeable=" + std::string(exchangeable ? "yes" : "no") +
              ", nearest iid TV " + FormatDouble(nearest)};
}

Outcome Criterion4() {
  const StaticGameSpec spec = LoadSpec(Data("mf_mismatch.json")).static_spec();
  const MfEquilibrium eq = SolveMfFixedPoint(spec);
  double residual = 0.0;
  for (int i = 0; i < kNumTeams; ++i) {
    residual = std::max({residual, eq.br_residual[i], eq.consistency_residual[i]});
  }
  const auto hits = GridFixedPointSearch(spec, 1e-3);
  double nearest = 1.0;
  for (const auto& hit : hits) {
    double tv = 0.0;
    for (int i = 0; i < kNumTeams; ++i) {
      for (std::size_t w = 0; w < hit.mean_fields.lambda[i].size(); ++w) {
        tv = std::max(tv, TotalVariation(hit.mean_fields.lambda[i][w],
                                         eq.mean_fields.lambda[i][w]));
      }
    }
    nearest = std::min(nearest, tv);
  }
  return {eq.converged && residual < 1e-6 && nearest <= 1e-3,
          "residual " + FormatDouble(residual) + ", " + std::to_string(hits.size()) +
              " grid hits, nearest TV " + FormatDouble(nearest)};
}

Outcome Criterion5() {
  const StaticGameSpec spec = LoadSpec(Data("noisy_tracking.json")).static_spec();
  Rng rng(5005);
  int passing = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Kernel b = RandomKernel(rng, spec.num_obs(0), spec.num_actions(0));
    const auto law = MeanFieldActionLaw(spec, 0, b);
    bool ok = true;
    for (int w = 0; w < spec.world.size; ++w) {
      const auto emp = SampleEmpiricalActionLaw(spec, 0, b, w, 10000,
                                                DeriveSeed(55, {std::uint64_t(trial), std::uint64_t(w)}));
      ok = ok && TotalVariation(emp, law[w]) <= 0.05;
    }
    passing += ok;
  }
  return {passing >= 19, std::to_string(passing) + "/20 trials within TV 0.05"};
}

Outcome Criterion6() {
  const StaticGameSpec mismatch = LoadSpec(Data("mf_mismatch.json")).static_spec();
  const MfEquilibrium eq = SolveMfFixedPoint(mismatch);
  const auto rows = EpsilonSweep(mismatch, eq.policies, SweepSizes({2, 8}));
  bool ok = rows.size() == 2;
  std::ostringstream detail;
  for (int i = 0; ok && i < kNumTeams; ++i) {
    ok = rows[0].report.method == CertMethod::kExact &&
         rows[1].report.method == CertMethod::kExact &&
         rows[1].report.eps[i] <= rows[0].report.eps[i];
    detail << "team " << i + 1 << " eps " << FormatDouble(rows[0].report.eps[i]) << " -> "
           << FormatDouble(rows[1].report.eps[i]) << "; ";
  }
  const StaticGameSpec coord = LoadSpec(Data("coordination.json")).static_spec();
  const MfEquilibrium vertex =
      MfEquilibriumFromJson(ParseJson(ReadFile(Data("coordination_eq.json")), "eq"), coord);
  double coord_max = 0.0;
  for (const auto& row : EpsilonSweep(coord, vertex.policies, SweepSizes({2, 3, 4}))) {
    ok = ok && row.report.method == CertMethod::kExact;
    for (int i = 0; i < kNumTeams; ++i) {
      coord_max = std::max(coord_max, std::abs(row.report.eps[i]));
    }
  }
  ok = ok && coord_max == 0.0;
  detail << "coordination max |eps| " << FormatDouble(coord_max);
  return {ok, detail.str()};
}

// Decoupled dynamic game kept with its raw tables for an independent
// forward-propagation oracle.
struct DecoupledGame {
  DynamicGameSpec spec;
  // trans[team][t][(x * nu + u) * nx + x'], obs[team][t](x, y),
  // cost[team][(w * nx + x) * nu + u].
  std::array<std::vector<std::vector<double>>, kNumTeams> trans;
  std::array<std::vector<Kernel>, kNumTeams> obs;
  std::array<std::vector<double>, kNumTeams> cost;
};

DecoupledGame RandomDecoupledGame(Rng& rng) {
  DecoupledGame g;
  DynamicGameSpec& spec = g.spec;
  const int worlds = Between(rng, 1, 2);
  spec.world = {worlds, {}};
  spec.prior = RandomRow(rng, worlds);
  spec.horizon = Between(rng, 1, 4);
  for (int i = 0; i < kNumTeams; ++i) {
    const int nx = Between(rng, 1, 3), nu = Between(rng, 1, 2), ny = Between(rng, 1, 2);
    DynamicTeamSpec& team = spec.teams[i];
    team.state_space = {nx, {}};
    team.action_space = {nu, {}};
    team.obs_space = {ny, {}};
    team.init_kernel = RandomKernel(rng, worlds, nx);
    for (int t = 0; t < spec.horizon; ++t) {
      std::vector<double> table;
      for (int k = 0; k < nx * nu; ++k) {
        const auto row = RandomRow(rng, nx);
        table.insert(table.end(), row.begin(), row.end());
      }
      g.trans[i].push_back(table);
      team.transitions.push_back(Transition::Fixed(nx, nu, table));
      g.obs[i].push_back(RandomKernel(rng, nx, ny));
      team.obs_models.push_back(g.obs[i].back());
    }
    CostFunction::Table cost;
    cost.worlds = worlds;
    cost.states = nx;
    cost.actions = nu;
    for (int k = 0; k < worlds * nx * nu; ++k) cost.values.push_back(rng.Uniform());
    g.cost[i] = cost.values;
    spec.cost[i] = CostFunction(i, cost);
  }
  return g;
}

// Forward propagation of the state law; returns the expected total cost and
// the joint (x, u) laws per stage and world.
double OracleFlow(const DecoupledGame& g, int team, const StagePolicy& policy,
                  std::vector<std::vector<std::vector<double>>>* joint) {
  const DynamicGameSpec& spec = g.spec;
  const int nx = spec.num_states(team), nu = spec.num_actions(team);
  const int ny = spec.num_obs(team);
  joint->assign(spec.horizon, std::vector<std::vector<double>>(spec.world.size));
  double total = 0.0;
  for (int w = 0; w < spec.world.size; ++w) {
    std::vector<double> law(nx);
    for (int x = 0; x < nx; ++x) law[x] = spec.teams[team].init_kernel(w, x);
    for (int t = 0; t < spec.horizon; ++t) {
      std::vector<double> xu(nx * nu, 0.0);
      for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
          for (int u = 0; u < nu; ++u) {
            xu[x * nu + u] += law[x] * g.obs[team][t](x, y) * policy.kernels[t](y, u);
          }
        }
      }
      for (int k = 0; k < nx * nu; ++k) {
        total += spec.prior[w] * xu[k] * g.cost[team][w * nx * nu + k];
      }
      (*joint)[t][w] = xu;
      std::vector<double> next(nx, 0.0);
      for (int k = 0; k < nx * nu; ++k) {
        for (int z = 0; z < nx; ++z) next[z] += xu[k] * g.trans[team][t][k * nx + z];
      }
      law = next;
    }
  }
  return total;
}

Outcome Criterion7() {
  std::ostringstream detail;
  bool ok = true;

  // Horizon-1 lifts reproduce the static values.
  double lift_gap = 0.0;
  Rng rng(7007);
  for (const char* name : {"mf_mismatch.json", "noisy_tracking.json"}) {
    const StaticGameSpec spec = LoadSpec(Data(name)).static_spec();
    const DynamicGameSpec lifted = LiftStaticToDynamic(spec);
    for (int trial = 0; trial < 5; ++trial) {
      std::array<Kernel, kNumTeams> k;
      StagePolicyPair stage;
      PolicyPair iid;
      for (int i = 0; i < kNumTeams; ++i) {
        k[i] = RandomKernel(rng, spec.num_obs(i), spec.num_actions(i));
        stage[i].kernels = {k[i]};
        iid[i] = TeamPolicy::SymmetricIid({k[i]});
      }
      const MeanFieldProfile mf = MeanFieldsOf(spec, k);
      const FlowProfile flows = PropagateMfFlow(lifted, stage);
      const DynamicPolicyPair dyn = {DynamicTeamPolicy::Shared(stage[0]),
                                     DynamicTeamPolicy::Shared(stage[1])};
      for (int i = 0; i < kNumTeams; ++i) {
        lift_gap = std::max(lift_gap, std::abs(MfDynamicCost(lifted, i, stage[i], flows) -
                                               MfCost(spec, i, k[i], mf)));
        lift_gap = std::max(lift_gap,
                            std::abs(DynamicBestResponseFixedFlow(lifted, i, flows).value -
                                     BestResponseFixedMf(spec, i, mf).value));
        const FiniteGameInstance inst{spec, {2, 2}};
        lift_gap = std::max(lift_gap, std::abs(ExactDynamicCost(lifted, {2, 2}, dyn, i) -
                                               ExactCost(inst, iid, i)));
      }
    }
  }
  ok = ok && lift_gap <= 1e-12;
  detail << "lift gap " << FormatDouble(lift_gap);

  // Decoupled games follow the Markov chain of each team.
  double chain_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const DecoupledGame g = RandomDecoupledGame(rng);
    StagePolicyPair policies;
    for (int i = 0; i < kNumTeams; ++i) {
      for (int t = 0; t < g.spec.horizon; ++t) {
        policies[i].kernels.push_back(
            RandomKernel(rng, g.spec.num_obs(i), g.spec.num_actions(i)));
      }
    }
    const FlowProfile flows = PropagateMfFlow(g.spec, policies);
    const DynamicPolicyPair dyn = {DynamicTeamPolicy::Shared(policies[0]),
                                   DynamicTeamPolicy::Shared(policies[1])};
    for (int i = 0; i < kNumTeams; ++i) {
      std::vector<std::vector<std::vector<double>>> joint;
      const double oracle = OracleFlow(g, i, policies[i], &joint);
      chain_gap = std::max(chain_gap, std::abs(MfDynamicCost(g.spec, i, policies[i], flows) - oracle));
      chain_gap = std::max(chain_gap, std::abs(ExactDynamicCost(g.spec, {2, 1}, dyn, i) - oracle));
      for (int t = 0; t < g.spec.horizon; ++t) {
        for (int w = 0; w < g.spec.world.size; ++w) {
          for (std::size_t k = 0; k < joint[t][w].size(); ++k) {
            chain_gap = std::max(chain_gap, std::abs(flows.joint[i][t][w][k] - joint[t][w][k]));
          }
        }
      }
    }
  }
  ok = ok && chain_gap <= 1e-12;
  detail << ", chain gap " << FormatDouble(chain_gap);

  // Crowd avoidance: solver against the grid, then finite-N exploitability.
  const DynamicGameSpec crowd = LoadSpec(Data("crowd.json")).dynamic_spec();
  const DynamicMfEquilibrium eq = SolveDynamicMfFixedPoint(crowd);
  double residual = 0.0;
  for (int i = 0; i < kNumTeams; ++i) {
    residual = std::max({residual, eq.br_residual[i], eq.consistency_residual[i]});
  }
  const auto hits = DynamicGridSearch(crowd, 1e-2);
  double nearest = 1.0;
  for (const auto& h : hits) {
    double tv = 0.0;
    for (int i = 0; i < kNumTeams; ++i) {
      for (int t = 0; t < crowd.horizon; ++t) {
        for (int w = 0; w < crowd.world.size; ++w) {
          tv = std::max(tv, TotalVariation(h.flows.joint[i][t][w], eq.flows.joint[i][t][w]));
        }
      }
    }
    nearest = std::min(nearest, tv);
  }
  ok = ok && eq.converged && residual < 1e-6 && nearest <= 1e-2;
  detail << ", crowd residual " << FormatDouble(residual) << ", nearest grid flow TV "
         << FormatDouble(nearest);

  const DynamicPolicyPair pols = {DynamicTeamPolicy::Shared(eq.policies[0]),
                                  DynamicTeamPolicy::Shared(eq.policies[1])};
  DynamicEpsilonOptions exact;
  exact.exact = true;
  const auto small = DynamicEpsilonEstimate(crowd, {2, 2}, pols, exact);
  DynamicEpsilonOptions mc;
  mc.reps = 1000;
  mc.seed = 77;
  const auto large = DynamicEpsilonEstimate(crowd, {16, 16}, pols, mc);
  for (int i = 0; i < kNumTeams; ++i) {
    ok = ok && small.eps[i] >= large.eps[i] - large.ci_halfwidth;
  }
  detail << ", eps N=2 " << FormatDouble(small.eps[0]) << " vs N=16 "
         << FormatDouble(large.eps[0]) << " +- " << FormatDouble(large.ci_halfwidth);
  return {ok, detail.str()};
}

Outcome Criterion8() {
  Rng rng(8008);
  const PolicyPair uniform = {TeamPolicy::SymmetricIid({Kernel::Uniform(1, 2)}),
                              TeamPolicy::SymmetricIid({Kernel::Uniform(1, 2)})};
  struct Case {
    FiniteGameInstance inst;
    PolicyPair policies;
  };
  std::vector<Case> suite;
  suite.push_back({{testing::CoordinationGame(), {2, 2}}, uniform});
  suite.push_back({{testing::SpreadGame(), {3, 2}}, uniform});
  suite.push_back({{testing::NoisyTrackingGame(), {3, 2}},
                   {RandomPolicy(rng, 3, 2, 2), RandomPolicy(rng, 2, 2, 2)}});
  suite.push_back({{testing::DyadicGame(), {2, 3}},
                   {RandomPolicy(rng, 2, 2, 2), RandomPolicy(rng, 3, 2, 2)}});
  int covered = 0;
  int trials = 0;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const Case& c = suite[k];
    const double exact = ExactCost(c.inst, c.policies, 0);
    for (std::uint64_t trial = 0; trial < 25; ++trial) {
      // Independent streams per case: a shared seed couples their errors.
      const auto est = McCost(c.inst, c.policies, 0, 2000, DeriveSeed(8, {k, trial}));
      covered += std::abs(est.estimate - exact) <= est.ci_halfwidth;
      ++trials;
    }
  }
  return {covered >= 99, std::to_string(covered) + "/" + std::to_string(trials) +
                             " intervals cover the exact cost"};
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome Criterion9() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "teamfield_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = TEAMFIELD_CLI;
  const std::string d = TEAMFIELD_DATA_DIR;
  const std::string crowd_eq = (dir / "crowd_eq.json").string();
  const std::string mismatch_eq = (dir / "mismatch_eq.json").string();
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate", "validate --spec " + d + "/noisy_tracking.json --format json"},
      {"solve-mf", "solve-mf --spec " + d + "/mf_mismatch.json --seed 1"},
      {"solve-mf-dyn", "solve-mf-dyn --spec " + d + "/crowd.json --seed 1"},
      {"certify", "certify --spec " + d + "/mf_mismatch.json --policy " + d +
                      "/mismatch_uniform_policy.json --n 2 3"},
      {"certify-mc", "certify --spec " + d + "/noisy_tracking.json --policy " + mismatch_eq +
                         " --n 6 6 --monte-carlo --seed 4 --reps 400"},
      {"sweep-n", "sweep-n --spec " + d + "/coordination.json --mfeq " + d +
                      "/coordination_eq.json --ns 2,4,8"},
      {"simulate", "simulate --spec " + d + "/crowd.json --n 12 10 --reps 500 --seed 3"},
      {"eps-dyn", "eps-dyn --spec " + d + "/crowd.json --n 2 --exact --policy " + crowd_eq},
      {"eps-dyn-mc", "eps-dyn --spec " + d + "/crowd.json --n 8 --reps 300 --seed 5 --policy " +
                         crowd_eq},
      {"grid-search", "grid-search --spec " + d + "/crowd.json --resolution 0.1"},
  };
  // Inputs for the commands that consume solver output.
  const std::string prep =
      cli + " solve-mf-dyn --spec " + d + "/crowd.json --out " + crowd_eq + " 2>/dev/null && " +
      cli + " solve-mf --spec " + d + "/noisy_tracking.json --out " + mismatch_eq +
      " 2>/dev/null";
  if (std::system(prep.c_str()) != 0) return {false, "could not prepare solver inputs"};

  int identical = 0;
  std::string mismatch;
  for (const auto& [name, args] : commands) {
    std::vector<std::string> outputs;
    int first_status = -1;
    bool status_same = true;
    for (const char* workers : {"1", "2", "8", "8"}) {
      const std::string out =
          (dir / (name + "_" + workers + "_" + std::to_string(outputs.size()))).string();
      const std::string cmd = std::string("TEAMFIELD_THREADS=") + workers + " " + cli + " " +
                              args + " --out " + out + " 2>/dev/null";
      const int status = std::system(cmd.c_str());
      if (first_status < 0) first_status = status;
      status_same = status_same && status == first_status;
      outputs.push_back(Slurp(out));
    }
    const bool same = status_same && first_status == 0 && !outputs[0].empty() &&
                      std::all_of(outputs.begin(), outputs.end(),
                                  [&](const std::string& o) { return o == outputs[0]; });
    if (same) {
      ++identical;
    } else {
      mismatch += (mismatch.empty() ? "" : ", ") + name;
    }
  }
  const int total = static_cast<int>(commands.size());
  return {identical == total,
          std::to_string(identical) + "/" + std::to_string(total) +
              " commands byte-identical across 1, 2, 8 workers" +
              (mismatch.empty() ? "" : "; differing: " + mismatch)};
}

}  // namespace
}  // namespace teamfield

int main() {
  using teamfield::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"exchangeable costs", teamfield::Criterion1},
      {"exchangeable best responses", teamfield::Criterion2},
      {"exchangeable but not conditionally iid", teamfield::Criterion3},
      {"representative-agent fixed point", teamfield::Criterion4},
      {"law of large numbers", teamfield::Criterion5},
      {"finite-N exploitability", teamfield::Criterion6},
      {"dynamic consistency", teamfield::Criterion7},
      {"Monte Carlo coverage", teamfield::Criterion8},
      {"CLI determinism", teamfield::Criterion9},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !outcome.pass;
    std::printf("criterion %zu %s: %s (%s; %.1fs)\n", k + 1, outcome.pass ? "PASS" : "FAIL",
                criteria[k].first.c_str(), outcome.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
