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

#include "teamfield/dynamic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "teamfield/parallel.h"
#include "teamfield/rng.h"

namespace teamfield {
namespace {

// Saturating base^exponent.
std::int64_t SaturatingPow(std::int64_t base, std::int64_t exponent,
                           std::int64_t limit) {
  long double total = 1.0L;
  for (std::int64_t e = 0; e < exponent; ++e) {
    total *= static_cast<long double>(base);
    if (total > static_cast<long double>(limit)) return limit + 1;
  }
  return static_cast<std::int64_t>(total);
}

std::int64_t NumStageMaps(const DynamicGameSpec& spec, int team,
                          std::int64_t limit) {
  return SaturatingPow(spec.num_actions(team),
                       static_cast<std::int64_t>(spec.horizon) * spec.num_obs(team),
                       limit);
}

// a[x * U + u] = sum_y O(x, y) K(y, u).
std::vector<double> StateActionKernel(const Kernel& obs, const Kernel& policy) {
  const int nx = obs.rows();
  const int ny = obs.cols();
  const int nu = policy.cols();
  std::vector<double> a(static_cast<std::size_t>(nx) * nu, 0.0);
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      const double o = obs(x, y);
      if (o == 0.0) continue;
      for (int u = 0; u < nu; ++u) a[x * nu + u] += o * policy(y, u);
    }
  }
  return a;
}

double MaxFlowTv(const DynamicGameSpec& spec, const FlowProfile& a,
                 const FlowProfile& b, int team) {
  double worst = 0.0;
  for (int t = 0; t < spec.horizon; ++t) {
    for (int w = 0; w < spec.world.size; ++w) {
      worst = std::max(worst, TotalVariation(a.joint[team][t][w],
                                             b.joint[team][t][w]));
    }
  }
  return worst;
}

// A team's single-DM control problem once the flows are frozen.
struct FrozenProblem {
  const DynamicGameSpec* spec = nullptr;
  int team = 0;
  int nx = 0;
  int nu = 0;
  // cost[w][t][x * U + u], trans[w][t][(x * U + u) * X + x'].
  std::vector<std::vector<std::vector<double>>> cost;
  std::vector<std::vector<std::vector<double>>> trans;

  FrozenProblem(const DynamicGameSpec& s, int i, const FlowProfile& flows)
      : spec(&s), team(i), nx(s.num_states(i)), nu(s.num_actions(i)) {
    const int nw = s.world.size;
    cost.assign(nw, std::vector<std::vector<double>>(s.horizon));
    trans.assign(nw, std::vector<std::vector<double>>(s.horizon));
    for (int w = 0; w < nw; ++w) {
      for (int t = 0; t < s.horizon; ++t) {
        const StatArgs args = FlowStats(s, flows, t, w);
        auto& c = cost[w][t];
        c.resize(static_cast<std::size_t>(nx) * nu);
        for (int x = 0; x < nx; ++x) {
          for (int u = 0; u < nu; ++u) {
            c[x * nu + u] = s.cost[i].Eval(w, x, u, args);
          }
        }
        if (t + 1 < s.horizon) s.teams[i].TransitionAt(t).Fill(args, &trans[w][t]);
      }
    }
  }

  double Value(const StagePolicy& policy) const {
    const DynamicGameSpec& s = *spec;
    const DynamicTeamSpec& ts = s.teams[team];
    KahanSum total;
    for (int w = 0; w < s.world.size; ++w) {
      const double pw = s.prior[w];
      if (pw == 0.0) continue;
      std::vector<double> nu_x(ts.init_kernel.Row(w).begin(),
                               ts.init_kernel.Row(w).end());
      KahanSum sum;
      for (int t = 0; t < s.horizon; ++t) {
        const auto a = StateActionKernel(ts.ObsAt(t), policy.kernels[t]);
        std::vector<double> next(nx, 0.0);
        for (int x = 0; x < nx; ++x) {
          if (nu_x[x] == 0.0) continue;
          for (int u = 0; u < nu; ++u) {
            const double m = nu_x[x] * a[x * nu + u];
            if (m == 0.0) continue;
            sum.Add(m * cost[w][t][x * nu + u]);
            if (t + 1 == s.horizon) continue;
            const double* p = trans[w][t].data() + (x * nu + u) * nx;
            for (int z = 0; z < nx; ++z) next[z] += m * p[z];
          }
        }
        nu_x = std::move(next);
      }
      total.Add(pw * sum.value());
    }
    return total.value();
  }

  // q[t][y * U + u]: expected cost-to-go of taking u on y at stage t and
  // following `policy` afterwards, weighted by the occupancy under `policy`.
  // mass[t][y] is the probability of observing y at stage t.
  void StageValues(const StagePolicy& policy,
                   std::vector<std::vector<double>>* q,
                   std::vector<std::vector<double>>* mass) const {
    const DynamicGameSpec& s = *spec;
    const DynamicTeamSpec& ts = s.teams[team];
    const int T = s.horizon;
    const int ny = s.num_obs(team);
    q->assign(T, std::vector<double>(static_cast<std::size_t>(ny) * nu, 0.0));
    mass->assign(T, std::vector<double>(ny, 0.0));
    std::vector<std::vector<double>> a(T);
    for (int t = 0; t < T; ++t) a[t] = StateActionKernel(ts.ObsAt(t), policy.kernels[t]);
    for (int w = 0; w < s.world.size; ++w) {
      const double pw = s.prior[w];
      if (pw == 0.0) continue;
      // Forward occupancy.
      std::vector<std::vector<double>> occ(T, std::vector<double>(nx, 0.0));
      occ[0].assign(ts.init_kernel.Row(w).begin(), ts.init_kernel.Row(w).end());
      for (int t = 0; t + 1 < T; ++t) {
        for (int x = 0; x < nx; ++x) {
          for (int u = 0; u < nu; ++u) {
            const double m = occ[t][x] * a[t][x * nu + u];
            if (m == 0.0) continue;
            const double* p = trans[w][t].data() + (x * nu + u) * nx;
            for (int z = 0; z < nx; ++z) occ[t + 1][z] += m * p[z];
          }
        }
      }
      // Backward evaluation.
      std::vector<double> v(nx, 0.0);
      for (int t = T - 1; t >= 0; --t) {
        std::vector<double> qxu(static_cast<std::size_t>(nx) * nu);
        for (int x = 0; x < nx; ++x) {
          for (int u = 0; u < nu; ++u) {
            double cont = 0.0;
            if (t + 1 < T) {
              const double* p = trans[w][t].data() + (x * nu + u) * nx;
              for (int z = 0; z < nx; ++z) cont += p[z] * v[z];
            }
            qxu[x * nu + u] = cost[w][t][x * nu + u] + cont;
          }
        }
        const Kernel& obs = ts.ObsAt(t);
        for (int x = 0; x < nx; ++x) {
          const double m = pw * occ[t][x];
          if (m == 0.0) continue;
          for (int y = 0; y < ny; ++y) {
            const double my = m * obs(x, y);
            if (my == 0.0) continue;
            (*mass)[t][y] += my;
            for (int u = 0; u < nu; ++u) (*q)[t][y * nu + u] += my * qxu[x * nu + u];
          }
        }
        std::vector<double> vt(nx, 0.0);
        for (int x = 0; x < nx; ++x) {
          for (int u = 0; u < nu; ++u) vt[x] += a[t][x * nu + u] * qxu[x * nu + u];
        }
        v = std::move(vt);
      }
    }
  }
};

bool Better(double value, double best) {
  return value < best - 1e-13 * std::max(1.0, std::abs(best));
}

DynamicBestResponse BestResponseOf(const DynamicGameSpec& spec, int team,
                                   const FrozenProblem& problem,
                                   bool allow_coordinate_descent,
                                   std::int64_t budget) {
  const std::int64_t maps = NumStageMaps(spec, team, budget);
  DynamicBestResponse br;
  if (maps <= budget) {
    std::vector<double> values(maps);
    auto eval = [&](std::int64_t code) {
      values[code] = problem.Value(StagePolicy::FromCode(spec, team, code));
    };
    if (maps < 256) {
      for (std::int64_t code = 0; code < maps; ++code) eval(code);
    } else {
      ParallelFor(maps, eval);
    }
    std::int64_t arg = 0;
    for (std::int64_t code = 1; code < maps; ++code) {
      if (Better(values[code], values[arg])) arg = code;
    }
    br.policy = StagePolicy::FromCode(spec, team, arg);
    br.value = values[arg];
    br.exhaustive = true;
    return br;
  }
  if (!allow_coordinate_descent) {
    throw BudgetError("dynamic best response needs more than " +
                      std::to_string(budget) +
                      " stage maps; enable coordinate descent");
  }
  const int T = spec.horizon;
  const int ny = spec.num_obs(team);
  const int nu = spec.num_actions(team);
  std::vector<std::vector<int>> targets(T, std::vector<int>(ny, 0));
  auto build = [&] {
    StagePolicy p;
    for (int t = 0; t < T; ++t) p.kernels.push_back(Kernel::Deterministic(nu, targets[t]));
    return p;
  };
  double best = problem.Value(build());
  bool changed = true;
  while (changed) {
    changed = false;
    for (int t = 0; t < T; ++t) {
      for (int y = 0; y < ny; ++y) {
        const int keep = targets[t][y];
        int arg = keep;
        for (int u = 0; u < nu; ++u) {
          if (u == keep) continue;
          targets[t][y] = u;
          const double v = problem.Value(build());
          if (Better(v, best)) {
            best = v;
            arg = u;
          }
        }
        targets[t][y] = arg;
        changed = changed || arg != keep;
      }
    }
  }
  br.policy = build();
  br.value = best;
  br.exhaustive = false;
  return br;
}

// Softmax of the stage values; rows never observed keep the current kernel.
StagePolicy SmoothedResponse(const DynamicGameSpec& spec, int team,
                             const FrozenProblem& problem,
                             const StagePolicy& current, double tau) {
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> mass;
  problem.StageValues(current, &q, &mass);
  const int ny = spec.num_obs(team);
  const int nu = spec.num_actions(team);
  StagePolicy out;
  for (int t = 0; t < spec.horizon; ++t) {
    std::vector<double> data(current.kernels[t].data());
    for (int y = 0; y < ny; ++y) {
      if (mass[t][y] <= 0.0) continue;
      const double* row_q = q[t].data() + y * nu;
      const double best = *std::min_element(row_q, row_q + nu);
      double* row = data.data() + y * nu;
      double total = 0.0;
      for (int u = 0; u < nu; ++u) {
        row[u] = std::exp(-(row_q[u] - best) / mass[t][y] / tau);
        total += row[u];
      }
      for (int u = 0; u < nu; ++u) row[u] /= total;
    }
    out.kernels.push_back(Kernel(ny, nu, std::move(data)));
  }
  return out;
}

StagePolicy BlendStages(const StagePolicy& a, const StagePolicy& b,
                        double alpha) {
  StagePolicy out;
  for (std::size_t t = 0; t < a.kernels.size(); ++t) {
    out.kernels.push_back(Blend(a.kernels[t], b.kernels[t], alpha));
  }
  return out;
}

double MaxStageTv(const StagePolicy& a, const StagePolicy& b) {
  double worst = 0.0;
  for (std::size_t t = 0; t < a.kernels.size(); ++t) {
    worst = std::max(worst, a.kernels[t].MaxRowTv(b.kernels[t]));
  }
  return worst;
}

void CheckResolution(double resolution) {
  if (!(resolution > 0.0) || resolution > 1.0) {
    throw Error("resolution must lie in (0, 1]");
  }
}

// Stage policies whose rows all lie on a simplex grid.
struct StageGrid {
  int stages = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<double>> points;

  std::int64_t Size(std::int64_t limit) const {
    return SaturatingPow(static_cast<std::int64_t>(points.size()),
                         static_cast<std::int64_t>(stages) * rows, limit);
  }

  // Stage 0, row 0 most significant.
  StagePolicy Decode(std::int64_t index) const {
    const auto base = static_cast<std::int64_t>(points.size());
    std::vector<std::vector<double>> data(
        stages, std::vector<double>(static_cast<std::size_t>(rows) * cols));
    for (int t = stages - 1; t >= 0; --t) {
      for (int r = rows - 1; r >= 0; --r) {
        const auto& p = points[index % base];
        index /= base;
        std::copy(p.begin(), p.end(), data[t].begin() + r * cols);
      }
    }
    StagePolicy out;
    for (auto& d : data) out.kernels.push_back(Kernel::Unchecked(rows, cols, std::move(d)));
    return out;
  }
};

StageGrid MakeStageGrid(const DynamicGameSpec& spec, int team, int steps) {
  if (SimplexGridSize(spec.num_actions(team), steps) > 10'000'000) {
    throw BudgetError("grid too large: simplex grid exceeds 1e7 points");
  }
  StageGrid g;
  g.stages = spec.horizon;
  g.rows = spec.num_obs(team);
  g.cols = spec.num_actions(team);
  g.points = SimplexGrid(g.cols, steps);
  return g;
}

constexpr std::uint64_t kWorldStream = 0;
constexpr std::uint64_t kStageStream = 2;
constexpr std::uint64_t kInitStream = 3;

struct EpisodeRecord {
  int world = 0;
  std::array<double, kNumTeams> cost = {0.0, 0.0};
  // Empirical laws per team and stage; filled when requested.
  std::array<std::vector<std::vector<double>>, kNumTeams> state_laws;
  std::array<std::vector<std::vector<double>>, kNumTeams> action_laws;
  std::array<std::vector<int>, kNumTeams> states_at;
};

// One episode of the coupled finite-population dynamics. DM k of team i
// draws its initial state from stream (rep, init, i, k) and its stage-t
// observation, action and next state from stream (rep, stage, i, k, t).
EpisodeRecord RunEpisode(const DynamicGameSpec& spec,
                         const std::array<int, kNumTeams>& sizes,
                         const DynamicPolicyPair& policies, std::uint64_t seed,
                         std::uint64_t rep, bool record_laws, int record_stage) {
  EpisodeRecord rec;
  Rng world_rng(DeriveSeed(seed, {rep, kWorldStream}));
  rec.world = SampleIndex(spec.prior, world_rng.Uniform());
  const int w = rec.world;
  std::array<std::vector<int>, kNumTeams> x;
  std::array<std::vector<int>, kNumTeams> u;
  std::array<std::vector<Rng>, kNumTeams> rngs;
  for (int i = 0; i < kNumTeams; ++i) {
    x[i].resize(sizes[i]);
    u[i].resize(sizes[i]);
    for (int k = 0; k < sizes[i]; ++k) {
      Rng r(DeriveSeed(seed, {rep, kInitStream, static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(k)}));
      x[i][k] = SampleIndex(spec.teams[i].init_kernel.Row(w), r.Uniform());
    }
    if (record_laws) {
      rec.state_laws[i].resize(spec.horizon);
      rec.action_laws[i].resize(spec.horizon);
    }
  }
  std::vector<double> table;
  for (int t = 0; t < spec.horizon; ++t) {
    if (t == record_stage) rec.states_at = x;
    std::array<std::vector<double>, kNumTeams> state_law;
    std::array<std::vector<double>, kNumTeams> action_law;
    for (int i = 0; i < kNumTeams; ++i) {
      const DynamicTeamSpec& ts = spec.teams[i];
      rngs[i].clear();
      for (int k = 0; k < sizes[i]; ++k) {
        rngs[i].emplace_back(DeriveSeed(
            seed, {rep, kStageStream, static_cast<std::uint64_t>(i),
                   static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(t)}));
        Rng& r = rngs[i][k];
        const int y = SampleIndex(ts.ObsAt(t).Row(x[i][k]), r.Uniform());
        u[i][k] = SampleIndex(policies[i].At(k).kernels[t].Row(y), r.Uniform());
      }
      state_law[i] = EmpMeasure(x[i], spec.num_states(i)).vec();
      action_law[i] = EmpMeasure(u[i], spec.num_actions(i)).vec();
    }
    const StatArgs args = spec.Stats(state_law, action_law);
    for (int i = 0; i < kNumTeams; ++i) {
      double stage = 0.0;
      for (int k = 0; k < sizes[i]; ++k) {
        stage += spec.cost[i].Eval(w, x[i][k], u[i][k], args);
      }
      rec.cost[i] += stage;
      const int nx = spec.num_states(i);
      const int nu = spec.num_actions(i);
      if (t + 1 < spec.horizon) spec.teams[i].TransitionAt(t).Fill(args, &table);
      for (int k = 0; k < sizes[i] && t + 1 < spec.horizon; ++k) {
        const std::span<const double> row(
            table.data() + (x[i][k] * nu + u[i][k]) * nx, nx);
        x[i][k] = SampleIndex(row, rngs[i][k].Uniform());
      }
      if (record_laws) {
        rec.state_laws[i][t] = std::move(state_law[i]);
        rec.action_laws[i][t] = std::move(action_law[i]);
      }
    }
  }
  for (int i = 0; i < kNumTeams; ++i) rec.cost[i] /= sizes[i];
  return rec;
}

void CheckSimulationArgs(const DynamicGameSpec& spec,
                         const std::array<int, kNumTeams>& sizes,
                         const DynamicPolicyPair& policies, int reps) {
  if (reps < 1) throw Error("reps must be >= 1");
  for (int i = 0; i < kNumTeams; ++i) {
    if (sizes[i] < 1) throw Error("team sizes must be >= 1");
    const auto& per_dm = policies[i].per_dm;
    if (per_dm.size() != 1 && per_dm.size() != static_cast<std::size_t>(sizes[i])) {
      throw Error("team " + std::to_string(i + 1) +
                  " needs one shared policy or one per DM");
    }
    for (const auto& p : per_dm) CheckStagePolicy(spec, i, p);
  }
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
  long double count = 1.0L;
  for (int i = 1; i <= n; ++i) {
    count = count * (m - 1 + i) / i;
    if (count > static_cast<long double>(limit)) return limit + 1;
  }
  return static_cast<std::int64_t>(count + 0.5L);
}

}  // namespace

StagePolicy StagePolicy::Uniform(const DynamicGameSpec& spec, int team) {
  StagePolicy p;
  for (int t = 0; t < spec.horizon; ++t) {
    p.kernels.push_back(Kernel::Uniform(spec.num_obs(team), spec.num_actions(team)));
  }
  return p;
}

StagePolicy StagePolicy::FromCode(const DynamicGameSpec& spec, int team,
                                  std::int64_t code) {
  const int T = spec.horizon;
  const int ny = spec.num_obs(team);
  const int nu = spec.num_actions(team);
  std::vector<std::vector<int>> targets(T, std::vector<int>(ny));
  for (int t = T - 1; t >= 0; --t) {
    for (int y = ny - 1; y >= 0; --y) {
      targets[t][y] = static_cast<int>(code % nu);
      code /= nu;
    }
  }
  StagePolicy p;
  for (int t = 0; t < T; ++t) p.kernels.push_back(Kernel::Deterministic(nu, targets[t]));
  return p;
}

std::vector<double> FlowProfile::StateLaw(const DynamicGameSpec& spec, int team,
                                          int t, int world) const {
  const int nu = spec.num_actions(team);
  const auto& j = joint[team][t][world];
  std::vector<double> law(spec.num_states(team), 0.0);
  for (std::size_t k = 0; k < j.size(); ++k) law[k / nu] += j[k];
  return law;
}

std::vector<double> FlowProfile::ActionLaw(const DynamicGameSpec& spec, int team,
                                           int t, int world) const {
  const int nu = spec.num_actions(team);
  const auto& j = joint[team][t][world];
  std::vector<double> law(nu, 0.0);
  for (std::size_t k = 0; k < j.size(); ++k) law[k % nu] += j[k];
  return law;
}

void CheckStagePolicy(const DynamicGameSpec& spec, int team,
                      const StagePolicy& policy) {
  const std::string who = "team " + std::to_string(team + 1);
  if (policy.kernels.size() != static_cast<std::size_t>(spec.horizon)) {
    throw Error(who + " policy needs " + std::to_string(spec.horizon) +
                " stage kernels, got " + std::to_string(policy.kernels.size()));
  }
  for (const Kernel& k : policy.kernels) {
    if (k.rows() != spec.num_obs(team) || k.cols() != spec.num_actions(team)) {
      throw Error(who + " stage kernel shape does not match the spec");
    }
  }
}

StatArgs FlowStats(const DynamicGameSpec& spec, const FlowProfile& flows, int t,
                   int world) {
  std::array<std::vector<double>, kNumTeams> states;
  std::array<std::vector<double>, kNumTeams> actions;
  for (int i = 0; i < kNumTeams; ++i) {
    states[i] = flows.StateLaw(spec, i, t, world);
    actions[i] = flows.ActionLaw(spec, i, t, world);
  }
  return spec.Stats(states, actions);
}

FlowProfile PropagateMfFlow(const DynamicGameSpec& spec,
                            const StagePolicyPair& policies) {
  for (int i = 0; i < kNumTeams; ++i) CheckStagePolicy(spec, i, policies[i]);
  const int T = spec.horizon;
  const int nw = spec.world.size;
  FlowProfile flows;
  std::array<std::vector<std::vector<double>>, kNumTeams> a;
  for (int i = 0; i < kNumTeams; ++i) {
    flows.joint[i].assign(T, std::vector<std::vector<double>>(nw));
    for (int t = 0; t < T; ++t) {
      a[i].push_back(StateActionKernel(spec.teams[i].ObsAt(t), policies[i].kernels[t]));
    }
  }
  std::vector<double> table;
  for (int w = 0; w < nw; ++w) {
    std::array<std::vector<double>, kNumTeams> mu;
    for (int i = 0; i < kNumTeams; ++i) {
      const auto row = spec.teams[i].init_kernel.Row(w);
      mu[i].assign(row.begin(), row.end());
    }
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < kNumTeams; ++i) {
        const int nx = spec.num_states(i);
        const int nu = spec.num_actions(i);
        auto& j = flows.joint[i][t][w];
        j.assign(static_cast<std::size_t>(nx) * nu, 0.0);
        for (int x = 0; x < nx; ++x) {
          for (int u = 0; u < nu; ++u) j[x * nu + u] = mu[i][x] * a[i][t][x * nu + u];
        }
      }
      if (t + 1 == T) break;
      const StatArgs args = FlowStats(spec, flows, t, w);
      for (int i = 0; i < kNumTeams; ++i) {
        const int nx = spec.num_states(i);
        const int nu = spec.num_actions(i);
        spec.teams[i].TransitionAt(t).Fill(args, &table);
        std::vector<double> next(nx, 0.0);
        const auto& j = flows.joint[i][t][w];
        for (int k = 0; k < nx * nu; ++k) {
          if (j[k] == 0.0) continue;
          for (int z = 0; z < nx; ++z) next[z] += j[k] * table[k * nx + z];
        }
        mu[i] = std::move(next);
      }
    }
  }
  return flows;
}

double MfDynamicCost(const DynamicGameSpec& spec, int team,
                     const StagePolicy& policy, const FlowProfile& flows) {
  CheckStagePolicy(spec, team, policy);
  return FrozenProblem(spec, team, flows).Value(policy);
}

DynamicBestResponse DynamicBestResponseFixedFlow(const DynamicGameSpec& spec,
                                                 int team,
                                                 const FlowProfile& flows,
                                                 bool allow_coordinate_descent,
                                                 std::int64_t budget) {
  const FrozenProblem problem(spec, team, flows);
  return BestResponseOf(spec, team, problem, allow_coordinate_descent, budget);
}

void FillDynamicResiduals(const DynamicGameSpec& spec, DynamicMfEquilibrium* eq,
                          bool allow_coordinate_descent) {
  const FlowProfile propagated = PropagateMfFlow(spec, eq->policies);
  for (int i = 0; i < kNumTeams; ++i) {
    const FrozenProblem problem(spec, i, eq->flows);
    const DynamicBestResponse br = BestResponseOf(
        spec, i, problem, allow_coordinate_descent, kDynamicBrBudget);
    eq->br_residual[i] = problem.Value(eq->policies[i]) - br.value;
    eq->exhaustive[i] = br.exhaustive;
    eq->consistency_residual[i] = MaxFlowTv(spec, eq->flows, propagated, i);
  }
}

namespace {

double MaxResidual(const DynamicMfEquilibrium& eq) {
  double out = 0.0;
  for (int i = 0; i < kNumTeams; ++i) {
    out = std::max({out, eq.br_residual[i], eq.consistency_residual[i]});
  }
  return out;
}

}  // namespace

DynamicMfEquilibrium SolveDynamicMfFixedPoint(const DynamicGameSpec& spec,
                                              const DynamicSolverConfig& config) {
  if (!(config.damping > 0.0) || config.damping > 1.0) {
    throw Error("damping must lie in (0, 1]");
  }
  if (!(config.tol > 0.0)) throw Error("tol must be positive");
  if (config.smoothing < 0.0) throw Error("smoothing must be nonnegative");
  if (config.max_iters < 1) throw Error("max_iters must be >= 1");
  if (!(config.anneal_rate > 0.0) || config.anneal_rate >= 1.0) {
    throw Error("anneal_rate must lie in (0, 1)");
  }
  StagePolicyPair policies;
  for (int i = 0; i < kNumTeams; ++i) {
    policies[i] = config.init.has_value() ? (*config.init)[i]
                                          : StagePolicy::Uniform(spec, i);
    CheckStagePolicy(spec, i, policies[i]);
  }

  const double stage_tol = config.tol * 1e-2;
  const double keep_tol = config.tol * 1e-6;
  double tau = config.smoothing;
  double alpha = config.damping;
  double prev_update = std::numeric_limits<double>::infinity();

  DynamicMfEquilibrium eq;
  for (int it = 1; it <= config.max_iters; ++it) {
    const FlowProfile flows = PropagateMfFlow(spec, policies);
    StagePolicyPair next;
    std::array<double, kNumTeams> best_value;
    std::array<bool, kNumTeams> exhaustive;
    double update = 0.0;
    std::vector<FrozenProblem> problems;
    for (int i = 0; i < kNumTeams; ++i) {
      problems.emplace_back(spec, i, flows);
      const DynamicBestResponse br =
          BestResponseOf(spec, i, problems[i], config.allow_coordinate_descent,
                         kDynamicBrBudget);
      best_value[i] = br.value;
      exhaustive[i] = br.exhaustive;
      if (problems[i].Value(policies[i]) - br.value <= keep_tol) {
        next[i] = policies[i];
        continue;
      }
      const StagePolicy response =
          tau > 0.0 ? SmoothedResponse(spec, i, problems[i], policies[i], tau)
                    : br.policy;
      next[i] = BlendStages(policies[i], response, alpha);
      update = std::max(update, MaxStageTv(next[i], policies[i]));
    }

    const FlowProfile propagated = PropagateMfFlow(spec, next);
    for (int i = 0; i < kNumTeams; ++i) {
      eq.br_residual[i] = problems[i].Value(next[i]) - best_value[i];
      eq.consistency_residual[i] = MaxFlowTv(spec, flows, propagated, i);
      eq.exhaustive[i] = exhaustive[i];
    }
    eq.policies = next;
    eq.flows = flows;
    eq.iterations = it;
    policies = std::move(next);

    bool done = true;
    for (int i = 0; i < kNumTeams; ++i) {
      done = done && eq.br_residual[i] <= config.tol &&
             eq.consistency_residual[i] <= config.tol;
    }
    if (done) break;

    if (update < stage_tol) {
      if (tau <= config.min_smoothing) break;
      tau = std::max(tau * config.anneal_rate, config.min_smoothing);
      prev_update = std::numeric_limits<double>::infinity();
      continue;
    }
    if (config.adaptive_damping && update > prev_update) {
      alpha = std::max(alpha * 0.5, 1e-12);
    }
    prev_update = update;
  }

  // Snap to the exact best response when it is itself a closer fixed point.
  DynamicMfEquilibrium snapped = eq;
  for (int i = 0; i < kNumTeams; ++i) {
    snapped.policies[i] =
        DynamicBestResponseFixedFlow(spec, i, eq.flows,
                                     config.allow_coordinate_descent)
            .policy;
  }
  snapped.flows = PropagateMfFlow(spec, snapped.policies);
  FillDynamicResiduals(spec, &snapped, config.allow_coordinate_descent);
  if (MaxResidual(snapped) < MaxResidual(eq)) eq = std::move(snapped);

  eq.converged = true;
  for (int i = 0; i < kNumTeams; ++i) {
    eq.converged = eq.converged && eq.br_residual[i] <= config.tol &&
                   eq.consistency_residual[i] <= config.tol;
  }
  return eq;
}

std::vector<DynamicMfEquilibrium> DynamicGridSearch(
    const DynamicGameSpec& spec, double resolution,
    const DynamicGridOptions& options) {
  CheckResolution(resolution);
  const int steps = StepsForResolution(resolution);
  std::array<StageGrid, kNumTeams> grids;
  std::array<std::int64_t, kNumTeams> sizes;
  long double total = 1.0L;
  for (int i = 0; i < kNumTeams; ++i) {
    grids[i] = MakeStageGrid(spec, i, steps);
    sizes[i] = grids[i].Size(options.max_candidates);
    total *= static_cast<long double>(sizes[i]);
    if (NumStageMaps(spec, i, kDynamicBrBudget) > kDynamicBrBudget) {
      throw BudgetError("grid search needs exhaustive best responses; team " +
                        std::to_string(i + 1) + " has too many stage maps");
    }
  }
  if (total > static_cast<long double>(options.max_candidates)) {
    throw BudgetError("grid too large: more than " +
                      std::to_string(options.max_candidates) + " candidates");
  }
  const std::int64_t count = sizes[0] * sizes[1];
  std::vector<char> hit(count, 0);
  ParallelFor(count, [&](std::int64_t index) {
    const StagePolicyPair cand = {grids[0].Decode(index / sizes[1]),
                                  grids[1].Decode(index % sizes[1])};
    const FlowProfile flows = PropagateMfFlow(spec, cand);
    for (int i = 0; i < kNumTeams; ++i) {
      const FrozenProblem problem(spec, i, flows);
      const double own = problem.Value(cand[i]);
      const std::int64_t maps = NumStageMaps(spec, i, kDynamicBrBudget);
      for (std::int64_t code = 0; code < maps; ++code) {
        if (problem.Value(StagePolicy::FromCode(spec, i, code)) <
            own - options.slack) {
          return;
        }
      }
    }
    hit[index] = 1;
  });

  std::vector<DynamicMfEquilibrium> hits;
  for (std::int64_t index = 0; index < count; ++index) {
    if (!hit[index]) continue;
    DynamicMfEquilibrium eq;
    eq.policies = {grids[0].Decode(index / sizes[1]),
                   grids[1].Decode(index % sizes[1])};
    eq.flows = PropagateMfFlow(spec, eq.policies);
    FillDynamicResiduals(spec, &eq);
    eq.converged = true;
    hits.push_back(std::move(eq));
  }
  return hits;
}

SimulationResult SimulateFiniteN(const DynamicGameSpec& spec,
                                 std::array<int, kNumTeams> team_sizes,
                                 const DynamicPolicyPair& policies, int reps,
                                 std::uint64_t seed) {
  CheckSimulationArgs(spec, team_sizes, policies, reps);
  std::vector<EpisodeRecord> records(reps);
  ParallelFor(reps, [&](std::int64_t rep) {
    records[rep] = RunEpisode(spec, team_sizes, policies, seed,
                              static_cast<std::uint64_t>(rep), true, -1);
  });
  SimulationResult result;
  const int nw = spec.world.size;
  result.world_counts.assign(nw, 0);
  for (const auto& r : records) ++result.world_counts[r.world];
  for (int i = 0; i < kNumTeams; ++i) {
    std::vector<double> costs(reps);
    for (int rep = 0; rep < reps; ++rep) costs[rep] = records[rep].cost[i];
    result.cost[i] = SummarizeSamples(costs);
    result.state_flow[i].assign(
        spec.horizon, std::vector<std::vector<double>>(
                          nw, std::vector<double>(spec.num_states(i), 0.0)));
    result.action_flow[i].assign(
        spec.horizon, std::vector<std::vector<double>>(
                          nw, std::vector<double>(spec.num_actions(i), 0.0)));
    for (const auto& r : records) {
      for (int t = 0; t < spec.horizon; ++t) {
        auto& s = result.state_flow[i][t][r.world];
        auto& a = result.action_flow[i][t][r.world];
        for (std::size_t k = 0; k < s.size(); ++k) s[k] += r.state_laws[i][t][k];
        for (std::size_t k = 0; k < a.size(); ++k) a[k] += r.action_laws[i][t][k];
      }
    }
    for (int t = 0; t < spec.horizon; ++t) {
      for (int w = 0; w < nw; ++w) {
        if (result.world_counts[w] == 0) continue;
        for (double& v : result.state_flow[i][t][w]) v /= result.world_counts[w];
        for (double& v : result.action_flow[i][t][w]) v /= result.world_counts[w];
      }
    }
  }
  return result;
}

std::vector<double> SimulateEpisodeCosts(const DynamicGameSpec& spec,
                                         std::array<int, kNumTeams> team_sizes,
                                         const DynamicPolicyPair& policies,
                                         int team, int reps, std::uint64_t seed) {
  CheckSimulationArgs(spec, team_sizes, policies, reps);
  std::vector<double> costs(reps);
  ParallelFor(reps, [&](std::int64_t rep) {
    costs[rep] = RunEpisode(spec, team_sizes, policies, seed,
                            static_cast<std::uint64_t>(rep), false, -1)
                     .cost[team];
  });
  return costs;
}

std::vector<std::array<std::vector<int>, kNumTeams>> SimulateStates(
    const DynamicGameSpec& spec, std::array<int, kNumTeams> team_sizes,
    const DynamicPolicyPair& policies, int stage, int reps, std::uint64_t seed) {
  CheckSimulationArgs(spec, team_sizes, policies, reps);
  if (stage < 0 || stage >= spec.horizon) throw Error("stage out of range");
  std::vector<std::array<std::vector<int>, kNumTeams>> out(reps);
  ParallelFor(reps, [&](std::int64_t rep) {
    out[rep] = RunEpisode(spec, team_sizes, policies, seed,
                          static_cast<std::uint64_t>(rep), false, stage)
                   .states_at;
  });
  return out;
}

double ExactDynamicCost(const DynamicGameSpec& spec,
                        std::array<int, kNumTeams> team_sizes,
                        const DynamicPolicyPair& policies, int team,
                        std::int64_t budget) {
  CheckSimulationArgs(spec, team_sizes, policies, 1);
  // DMs of both teams in one list.
  std::vector<int> dm_team;
  std::vector<int> dm_index;
  for (int i = 0; i < kNumTeams; ++i) {
    for (int k = 0; k < team_sizes[i]; ++k) {
      dm_team.push_back(i);
      dm_index.push_back(k);
    }
  }
  const int D = static_cast<int>(dm_team.size());
  long double joint_states = 1.0L;
  long double joint_actions = 1.0L;
  for (int d = 0; d < D; ++d) {
    joint_states *= spec.num_states(dm_team[d]);
    joint_actions *= spec.num_actions(dm_team[d]);
  }
  const long double work = joint_states * joint_states * joint_actions *
                           spec.horizon * spec.world.size;
  if (work > static_cast<long double>(budget)) {
    throw BudgetError("exact dynamic cost exceeds the enumeration budget of " +
                      std::to_string(budget) + "; use Monte Carlo");
  }
  const auto ns = static_cast<std::size_t>(joint_states);
  std::vector<std::int64_t> stride(D);
  {
    std::int64_t s = 1;
    for (int d = D - 1; d >= 0; --d) {
      stride[d] = s;
      s *= spec.num_states(dm_team[d]);
    }
  }

  // Odometer over per-DM supports; calls fn(choice, prob).
  auto for_each_product = [&](const std::vector<std::vector<std::pair<int, double>>>& supp,
                              auto&& fn) {
    std::vector<int> pos(D, 0);
    std::vector<int> choice(D);
    while (true) {
      double p = 1.0;
      for (int d = 0; d < D; ++d) {
        choice[d] = supp[d][pos[d]].first;
        p *= supp[d][pos[d]].second;
      }
      fn(choice, p);
      int d = D - 1;
      while (d >= 0 && ++pos[d] == static_cast<int>(supp[d].size())) pos[d--] = 0;
      if (d < 0) break;
    }
  };

  KahanSum total;
  std::vector<std::vector<double>> tables(kNumTeams);
  for (int w = 0; w < spec.world.size; ++w) {
    const double pw = spec.prior[w];
    if (pw == 0.0) continue;
    std::vector<double> dist(ns, 0.0);
    {
      std::vector<std::vector<std::pair<int, double>>> supp(D);
      for (int d = 0; d < D; ++d) {
        const auto row = spec.teams[dm_team[d]].init_kernel.Row(w);
        for (int x = 0; x < static_cast<int>(row.size()); ++x) {
          if (row[x] > 0.0) supp[d].push_back({x, row[x]});
        }
      }
      for_each_product(supp, [&](const std::vector<int>& xs, double p) {
        std::int64_t idx = 0;
        for (int d = 0; d < D; ++d) idx += xs[d] * stride[d];
        dist[idx] += p;
      });
    }
    KahanSum cost;
    for (int t = 0; t < spec.horizon; ++t) {
      std::vector<double> next(ns, 0.0);
      std::vector<int> xs(D);
      for (std::size_t s = 0; s < ns; ++s) {
        const double ps = dist[s];
        if (ps == 0.0) continue;
        for (int d = 0; d < D; ++d) {
          xs[d] = static_cast<int>((static_cast<std::int64_t>(s) / stride[d]) %
                                   spec.num_states(dm_team[d]));
        }
        std::vector<std::vector<std::pair<int, double>>> act(D);
        for (int d = 0; d < D; ++d) {
          const int i = dm_team[d];
          const Kernel& obs = spec.teams[i].ObsAt(t);
          const Kernel& k = policies[i].At(dm_index[d]).kernels[t];
          for (int u = 0; u < spec.num_actions(i); ++u) {
            double p = 0.0;
            for (int y = 0; y < obs.cols(); ++y) p += obs(xs[d], y) * k(y, u);
            if (p > 0.0) act[d].push_back({u, p});
          }
        }
        for_each_product(act, [&](const std::vector<int>& us, double pu) {
          const double mass = ps * pu;
          std::array<std::vector<double>, kNumTeams> sl;
          std::array<std::vector<double>, kNumTeams> al;
          for (int i = 0; i < kNumTeams; ++i) {
            sl[i].assign(spec.num_states(i), 0.0);
            al[i].assign(spec.num_actions(i), 0.0);
          }
          for (int d = 0; d < D; ++d) {
            const int i = dm_team[d];
            sl[i][xs[d]] += 1.0 / team_sizes[i];
            al[i][us[d]] += 1.0 / team_sizes[i];
          }
          const StatArgs args = spec.Stats(sl, al);
          double c = 0.0;
          for (int d = 0; d < D; ++d) {
            if (dm_team[d] == team) c += spec.cost[team].Eval(w, xs[d], us[d], args);
          }
          cost.Add(mass * c / team_sizes[team]);
          if (t + 1 == spec.horizon) return;
          for (int i = 0; i < kNumTeams; ++i) {
            spec.teams[i].TransitionAt(t).Fill(args, &tables[i]);
          }
          std::vector<std::vector<std::pair<int, double>>> moves(D);
          for (int d = 0; d < D; ++d) {
            const int i = dm_team[d];
            const int nx = spec.num_states(i);
            const int nu = spec.num_actions(i);
            const double* row = tables[i].data() + (xs[d] * nu + us[d]) * nx;
            for (int z = 0; z < nx; ++z) {
              if (row[z] > 0.0) moves[d].push_back({z, row[z]});
            }
          }
          for_each_product(moves, [&](const std::vector<int>& zs, double pz) {
            std::int64_t idx = 0;
            for (int d = 0; d < D; ++d) idx += zs[d] * stride[d];
            next[idx] += mass * pz;
          });
        });
      }
      dist = std::move(next);
    }
    total.Add(pw * cost.value());
  }
  return total.value();
}

DynamicEpsilonReport DynamicEpsilonEstimate(const DynamicGameSpec& spec,
                                            std::array<int, kNumTeams> team_sizes,
                                            const DynamicPolicyPair& policies,
                                            const DynamicEpsilonOptions& options) {
  CheckSimulationArgs(spec, team_sizes, policies, std::max(options.reps, 1));
  DynamicEpsilonReport report;
  report.method = options.exact ? CertMethod::kExact : CertMethod::kMonteCarlo;
  for (int i = 0; i < kNumTeams; ++i) {
    const int n = team_sizes[i];
    const std::int64_t maps = NumStageMaps(spec, i, options.deviation_budget);
    if (options.exact) {
      const std::int64_t count = MultisetCount(maps, n, options.deviation_budget);
      if (maps > options.deviation_budget || count > options.deviation_budget) {
        throw BudgetError("exact dynamic deviation search exceeds " +
                          std::to_string(options.deviation_budget) +
                          " profiles; use Monte Carlo");
      }
      report.current_cost[i] = ExactDynamicCost(spec, team_sizes, policies, i);
      std::vector<std::vector<std::int64_t>> profiles;
      std::vector<std::int64_t> codes(n, 0);
      do {
        profiles.push_back(codes);
      } while (NextMultiset(&codes, maps));
      std::vector<double> values(profiles.size());
      auto deviation = [&](const std::vector<std::int64_t>& c) {
        DynamicTeamPolicy p;
        for (std::int64_t code : c) p.per_dm.push_back(StagePolicy::FromCode(spec, i, code));
        return p;
      };
      ParallelFor(static_cast<std::int64_t>(profiles.size()), [&](std::int64_t k) {
        DynamicPolicyPair pair = policies;
        pair[i] = deviation(profiles[k]);
        values[k] = ExactDynamicCost(spec, team_sizes, pair, i);
      });
      std::size_t arg = 0;
      for (std::size_t k = 1; k < values.size(); ++k) {
        if (Better(values[k], values[arg])) arg = k;
      }
      report.eps[i] = std::max(0.0, report.current_cost[i] - values[arg]);
      report.best_deviations[i] =
          report.eps[i] > 0.0 ? deviation(profiles[arg]) : policies[i];
      continue;
    }

    const int steps = StepsForResolution(options.resolution);
    const StageGrid grid = MakeStageGrid(spec, i, steps);
    const std::int64_t grid_count = grid.Size(options.deviation_budget);
    if (grid_count + std::min(maps, options.deviation_budget) >
        options.deviation_budget) {
      throw BudgetError("Monte Carlo deviation set exceeds " +
                        std::to_string(options.deviation_budget) + " candidates");
    }
    std::vector<DynamicTeamPolicy> candidates;
    for (std::int64_t k = 0; k < grid_count; ++k) {
      candidates.push_back(DynamicTeamPolicy::Shared(grid.Decode(k)));
    }
    for (std::int64_t code = 0; code < maps; ++code) {
      DynamicTeamPolicy p;
      p.per_dm.push_back(StagePolicy::FromCode(spec, i, code));
      for (int k = 1; k < n; ++k) p.per_dm.push_back(policies[i].At(k));
      candidates.push_back(std::move(p));
    }
    const std::vector<double> base =
        SimulateEpisodeCosts(spec, team_sizes, policies, i, options.reps, options.seed);
    report.current_cost[i] = SummarizeSamples(base).estimate;
    double best_gain = 0.0;
    McEstimate best_diff;
    DynamicTeamPolicy best_policy = policies[i];
    bool found = false;
    for (const auto& cand : candidates) {
      DynamicPolicyPair pair = policies;
      pair[i] = cand;
      const auto dev =
          SimulateEpisodeCosts(spec, team_sizes, pair, i, options.reps, options.seed);
      std::vector<double> diff(options.reps);
      for (int r = 0; r < options.reps; ++r) diff[r] = base[r] - dev[r];
      const McEstimate d = SummarizeSamples(diff);
      if (!found || d.estimate > best_diff.estimate) {
        best_diff = d;
        if (d.estimate > best_gain) {
          best_gain = d.estimate;
          best_policy = cand;
        }
        found = true;
      }
    }
    report.eps[i] = best_gain;
    report.best_deviations[i] = best_policy;
    report.ci_halfwidth = std::max(report.ci_halfwidth, best_diff.ci_halfwidth);
  }
  return report;
}

DynamicGameSpec LiftStaticToDynamic(const StaticGameSpec& spec) {
  DynamicGameSpec d;
  d.world = spec.world;
  d.prior = spec.prior;
  d.horizon = 1;
  for (int i = 0; i < kNumTeams; ++i) {
    const StaticTeamSpec& ts = spec.teams[i];
    const int nx = ts.obs_space.size;
    const int nu = ts.action_space.size;
    DynamicTeamSpec& dt = d.teams[i];
    dt.state_space = ts.obs_space;
    dt.action_space = ts.action_space;
    dt.obs_space = ts.obs_space;
    dt.init_kernel = ts.obs_kernel;
    std::vector<double> stay(static_cast<std::size_t>(nx) * nu * nx, 0.0);
    std::vector<int> identity(nx);
    for (int x = 0; x < nx; ++x) {
      identity[x] = x;
      for (int u = 0; u < nu; ++u) stay[(x * nu + u) * nx + x] = 1.0;
    }
    dt.transitions = {Transition::Fixed(nx, nu, std::move(stay))};
    dt.obs_models = {Kernel::Deterministic(nx, identity)};
    dt.state_statistic = StatisticMap::Identity();
    dt.action_statistic = ts.statistic;

    CostFunction::Family family = spec.cost[i].family();
    if (auto* table = std::get_if<CostFunction::Table>(&family)) {
      // Static tables ignore the state; repeat them across lifted states.
      const std::size_t points = table->grid.num_points();
      std::vector<double> values;
      values.reserve(table->worlds * nx * table->actions * points);
      for (int w = 0; w < table->worlds; ++w) {
        for (int x = 0; x < nx; ++x) {
          const auto begin = table->values.begin() +
                             static_cast<std::ptrdiff_t>(w * table->actions * points);
          values.insert(values.end(), begin,
                        begin + static_cast<std::ptrdiff_t>(table->actions * points));
        }
      }
      table->states = nx;
      table->values = std::move(values);
    }
    d.cost[i] = CostFunction(spec.cost[i].team(), std::move(family));
  }
  return d;
}

}  // namespace teamfield
