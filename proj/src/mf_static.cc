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

#include "teamfield/mf_static.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "teamfield/parallel.h"

namespace teamfield {
namespace {

double MaxWorldTv(const std::vector<std::vector<double>>& a,
                  const std::vector<std::vector<double>>& b) {
  double worst = 0.0;
  for (std::size_t w = 0; w < a.size(); ++w) {
    worst = std::max(worst, TotalVariation(a[w], b[w]));
  }
  return worst;
}

std::vector<StatArgs> WorldStats(const StaticGameSpec& spec,
                                 const MeanFieldProfile& mf) {
  std::vector<StatArgs> stats;
  stats.reserve(spec.world.size);
  for (int w = 0; w < spec.world.size; ++w) {
    stats.push_back(spec.Stats(mf.lambda[0][w], mf.lambda[1][w]));
  }
  return stats;
}

// q[y][u] against precomputed per-world statistics.
std::vector<std::vector<double>> ValuesFromStats(
    const StaticGameSpec& spec, int team, const std::vector<StatArgs>& stats,
    std::vector<double>* obs_mass) {
  const StaticTeamSpec& ts = spec.teams[team];
  const int ny = ts.obs_space.size;
  const int nu = ts.action_space.size;
  std::vector<std::vector<double>> q(ny, std::vector<double>(nu, 0.0));
  if (obs_mass != nullptr) obs_mass->assign(ny, 0.0);
  for (int w = 0; w < spec.world.size; ++w) {
    const double pw = spec.prior[w];
    if (pw == 0.0) continue;
    std::vector<double> c(nu);
    for (int u = 0; u < nu; ++u) {
      c[u] = spec.cost[team].Eval(w, 0, u, stats[w]);
    }
    for (int y = 0; y < ny; ++y) {
      const double weight = pw * ts.obs_kernel(w, y);
      if (weight == 0.0) continue;
      if (obs_mass != nullptr) (*obs_mass)[y] += weight;
      for (int u = 0; u < nu; ++u) q[y][u] += weight * c[u];
    }
  }
  return q;
}

double KernelValue(const Kernel& policy,
                   const std::vector<std::vector<double>>& q) {
  KahanSum sum;
  for (int y = 0; y < policy.rows(); ++y) {
    for (int u = 0; u < policy.cols(); ++u) {
      sum.Add(policy(y, u) * q[y][u]);
    }
  }
  return sum.value();
}

double BestValue(const std::vector<std::vector<double>>& q) {
  KahanSum sum;
  for (const auto& row : q) sum.Add(*std::min_element(row.begin(), row.end()));
  return sum.value();
}

// Per-row grid points for a team's kernel.
struct KernelGrid {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<double>> points;  // simplex points over cols

  std::int64_t Size(std::int64_t limit) const {
    long double total = 1.0L;
    for (int r = 0; r < rows; ++r) {
      total *= static_cast<long double>(points.size());
      if (total > static_cast<long double>(limit)) return limit + 1;
    }
    return static_cast<std::int64_t>(total);
  }

  // Row 0 most significant.
  Kernel Decode(std::int64_t index) const {
    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    const auto base = static_cast<std::int64_t>(points.size());
    for (int r = rows - 1; r >= 0; --r) {
      const auto& p = points[index % base];
      index /= base;
      std::copy(p.begin(), p.end(), data.begin() + r * cols);
    }
    return Kernel::Unchecked(rows, cols, std::move(data));
  }
};

KernelGrid MakeKernelGrid(int rows, int cols, int steps) {
  KernelGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  if (SimplexGridSize(cols, steps) > 10'000'000) {
    throw BudgetError("grid too large: simplex grid exceeds 1e7 points");
  }
  grid.points = SimplexGrid(cols, steps);
  return grid;
}

void CheckResolution(double resolution) {
  if (!(resolution > 0.0) || resolution > 1.0) {
    throw Error("resolution must lie in (0, 1]");
  }
}

}  // namespace

std::vector<std::vector<double>> MeanFieldActionLaw(const StaticGameSpec& spec,
                                                    int team,
                                                    const Kernel& policy) {
  const Kernel& obs = spec.teams[team].obs_kernel;
  if (policy.rows() != obs.cols() ||
      policy.cols() != spec.num_actions(team)) {
    throw Error("policy shape does not match team " + std::to_string(team + 1));
  }
  std::vector<std::vector<double>> law(spec.world.size,
                                       std::vector<double>(policy.cols()));
  for (int w = 0; w < spec.world.size; ++w) {
    for (int u = 0; u < policy.cols(); ++u) {
      KahanSum sum;
      for (int y = 0; y < policy.rows(); ++y) {
        sum.Add(obs(w, y) * policy(y, u));
      }
      law[w][u] = sum.value();
    }
  }
  return law;
}

MeanFieldProfile MeanFieldsOf(const StaticGameSpec& spec,
                              const std::array<Kernel, kNumTeams>& policies) {
  MeanFieldProfile mf;
  for (int i = 0; i < kNumTeams; ++i) {
    mf.lambda[i] = MeanFieldActionLaw(spec, i, policies[i]);
  }
  return mf;
}

std::vector<std::vector<double>> ObsActionValues(const StaticGameSpec& spec,
                                                 int team,
                                                 const MeanFieldProfile& mf,
                                                 std::vector<double>* obs_mass) {
  return ValuesFromStats(spec, team, WorldStats(spec, mf), obs_mass);
}

double MfCost(const StaticGameSpec& spec, int team, const Kernel& policy,
              const MeanFieldProfile& mf) {
  return KernelValue(policy, ObsActionValues(spec, team, mf));
}

MfBestResponse BestResponseFixedMf(const StaticGameSpec& spec, int team,
                                   const MeanFieldProfile& mf) {
  const auto q = ObsActionValues(spec, team, mf);
  std::vector<int> targets(q.size());
  for (std::size_t y = 0; y < q.size(); ++y) {
    targets[y] = static_cast<int>(
        std::min_element(q[y].begin(), q[y].end()) - q[y].begin());
  }
  MfBestResponse br;
  br.policy = Kernel::Deterministic(spec.num_actions(team), targets);
  br.value = KernelValue(br.policy, q);
  return br;
}

void FillResiduals(const StaticGameSpec& spec, MfEquilibrium* eq) {
  const auto stats = WorldStats(spec, eq->mean_fields);
  for (int i = 0; i < kNumTeams; ++i) {
    const auto q = ValuesFromStats(spec, i, stats, nullptr);
    eq->br_residual[i] = KernelValue(eq->policies[i], q) - BestValue(q);
    eq->consistency_residual[i] =
        MaxWorldTv(eq->mean_fields.lambda[i],
                   MeanFieldActionLaw(spec, i, eq->policies[i]));
  }
}

namespace {

double MaxResidual(const MfEquilibrium& eq) {
  double out = 0.0;
  for (int i = 0; i < kNumTeams; ++i) {
    out = std::max({out, eq.br_residual[i], eq.consistency_residual[i]});
  }
  return out;
}

}  // namespace

MfEquilibrium SolveMfFixedPoint(const StaticGameSpec& spec,
                                const MfSolverConfig& config) {
  if (!(config.damping > 0.0) || config.damping > 1.0) {
    throw Error("damping must lie in (0, 1]");
  }
  if (!(config.tol > 0.0)) throw Error("tol must be positive");
  if (config.smoothing < 0.0) throw Error("smoothing must be nonnegative");
  if (config.max_iters < 1) throw Error("max_iters must be >= 1");
  if (!(config.anneal_rate > 0.0) || config.anneal_rate >= 1.0) {
    throw Error("anneal_rate must lie in (0, 1)");
  }

  std::array<Kernel, kNumTeams> kernels;
  for (int i = 0; i < kNumTeams; ++i) {
    if (config.init.has_value()) {
      kernels[i] = (*config.init)[i];
      if (kernels[i].rows() != spec.num_obs(i) ||
          kernels[i].cols() != spec.num_actions(i)) {
        throw Error("initial kernel shape does not match team " +
                    std::to_string(i + 1));
      }
    } else {
      kernels[i] = Kernel::Uniform(spec.num_obs(i), spec.num_actions(i));
    }
  }

  // A stage at fixed temperature ends once updates fall below this.
  const double stage_tol = config.tol * 1e-2;
  // Teams already this close to optimal keep their kernel.
  const double keep_tol = config.tol * 1e-6;
  double tau = config.smoothing;
  double alpha = config.damping;
  double prev_update = std::numeric_limits<double>::infinity();

  MfEquilibrium eq;
  for (int it = 1; it <= config.max_iters; ++it) {
    const MeanFieldProfile mf = MeanFieldsOf(spec, kernels);
    const auto stats = WorldStats(spec, mf);
    std::array<Kernel, kNumTeams> next;
    double update = 0.0;
    for (int i = 0; i < kNumTeams; ++i) {
      std::vector<double> mass;
      const auto q = ValuesFromStats(spec, i, stats, &mass);
      const double residual = KernelValue(kernels[i], q) - BestValue(q);
      if (residual <= keep_tol) {
        next[i] = kernels[i];
        continue;
      }
      const int ny = kernels[i].rows();
      const int nu = kernels[i].cols();
      std::vector<double> response(kernels[i].data());
      for (int y = 0; y < ny; ++y) {
        if (mass[y] <= 0.0) continue;
        const double best = *std::min_element(q[y].begin(), q[y].end());
        double* row = response.data() + y * nu;
        if (tau > 0.0) {
          double total = 0.0;
          for (int u = 0; u < nu; ++u) {
            row[u] = std::exp(-(q[y][u] - best) / mass[y] / tau);
            total += row[u];
          }
          for (int u = 0; u < nu; ++u) row[u] /= total;
        } else {
          const int arg = static_cast<int>(
              std::min_element(q[y].begin(), q[y].end()) - q[y].begin());
          for (int u = 0; u < nu; ++u) row[u] = (u == arg) ? 1.0 : 0.0;
        }
      }
      next[i] = Blend(kernels[i], Kernel(ny, nu, std::move(response)), alpha);
      update = std::max(update, next[i].MaxRowTv(kernels[i]));
    }

    eq.policies = next;
    eq.mean_fields = mf;
    eq.iterations = it;
    FillResiduals(spec, &eq);
    kernels = std::move(next);

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
      alpha = config.damping;
      continue;
    }
    if (config.adaptive_damping && update > prev_update) {
      alpha = std::max(alpha * 0.5, 1e-12);
    }
    prev_update = update;
  }

  // Snap to the exact best response when it is itself a closer fixed point.
  MfEquilibrium snapped = eq;
  for (int i = 0; i < kNumTeams; ++i) {
    snapped.policies[i] = BestResponseFixedMf(spec, i, eq.mean_fields).policy;
  }
  snapped.mean_fields = MeanFieldsOf(spec, snapped.policies);
  FillResiduals(spec, &snapped);
  if (MaxResidual(snapped) < MaxResidual(eq)) eq = std::move(snapped);

  eq.converged = true;
  for (int i = 0; i < kNumTeams; ++i) {
    eq.converged = eq.converged && eq.br_residual[i] <= config.tol &&
                   eq.consistency_residual[i] <= config.tol;
  }
  return eq;
}

std::vector<MfEquilibrium> GridFixedPointSearch(
    const StaticGameSpec& spec, double resolution,
    const GridSearchOptions& options) {
  CheckResolution(resolution);
  const int steps = StepsForResolution(resolution);
  std::array<KernelGrid, kNumTeams> grids;
  std::array<std::int64_t, kNumTeams> sizes;
  long double total = 1.0L;
  for (int i = 0; i < kNumTeams; ++i) {
    grids[i] = MakeKernelGrid(spec.num_obs(i), spec.num_actions(i), steps);
    sizes[i] = grids[i].Size(options.max_candidates);
    total *= static_cast<long double>(sizes[i]);
  }
  if (total > static_cast<long double>(options.max_candidates)) {
    throw BudgetError("grid too large: more than " +
                      std::to_string(options.max_candidates) + " candidates");
  }
  const std::int64_t count = sizes[0] * sizes[1];
  const double tv_tol = resolution + 1e-12;

  std::vector<char> hit(count, 0);
  ParallelFor(count, [&](std::int64_t index) {
    const std::array<Kernel, kNumTeams> cand = {
        grids[0].Decode(index / sizes[1]), grids[1].Decode(index % sizes[1])};
    MeanFieldProfile mf = MeanFieldsOf(spec, cand);
    const auto stats = WorldStats(spec, mf);
    for (int i = 0; i < kNumTeams; ++i) {
      std::vector<double> mass;
      const auto q = ValuesFromStats(spec, i, stats, &mass);
      const int ny = cand[i].rows();
      const int nu = cand[i].cols();
      // Closest best response: keep mass on near-optimal actions, move the
      // rest to the lowest-index minimizer.
      std::vector<double> projected(cand[i].data());
      for (int y = 0; y < ny; ++y) {
        if (mass[y] <= 0.0) continue;
        const double best = *std::min_element(q[y].begin(), q[y].end());
        const int arg = static_cast<int>(
            std::min_element(q[y].begin(), q[y].end()) - q[y].begin());
        double* row = projected.data() + y * nu;
        double kept = 0.0;
        for (int u = 0; u < nu; ++u) {
          if ((q[y][u] - best) / mass[y] > options.slack) {
            row[u] = 0.0;
          } else {
            kept += row[u];
          }
        }
        if (kept <= 0.0) {
          for (int u = 0; u < nu; ++u) row[u] = (u == arg) ? 1.0 : 0.0;
        } else {
          for (int u = 0; u < nu; ++u) row[u] /= kept;
        }
      }
      const Kernel g = Kernel::Unchecked(ny, nu, std::move(projected));
      if (MaxWorldTv(MeanFieldActionLaw(spec, i, g), mf.lambda[i]) > tv_tol) {
        return;
      }
    }
    hit[index] = 1;
  });

  std::vector<MfEquilibrium> hits;
  for (std::int64_t index = 0; index < count; ++index) {
    if (!hit[index]) continue;
    MfEquilibrium eq;
    eq.policies = {grids[0].Decode(index / sizes[1]),
                   grids[1].Decode(index % sizes[1])};
    eq.mean_fields = MeanFieldsOf(spec, eq.policies);
    FillResiduals(spec, &eq);
    eq.converged = true;
    hits.push_back(std::move(eq));
  }
  return hits;
}

std::vector<MfEquilibrium> ClusterHits(const std::vector<MfEquilibrium>& hits,
                                       double resolution) {
  const std::size_t n = hits.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const double tol = resolution + 1e-9;
  auto adjacent = [&](const MfEquilibrium& a, const MfEquilibrium& b) {
    for (int i = 0; i < kNumTeams; ++i) {
      const auto& da = a.policies[i].data();
      const auto& db = b.policies[i].data();
      for (std::size_t k = 0; k < da.size(); ++k) {
        if (std::abs(da[k] - db[k]) > tol) return false;
      }
    }
    return true;
  };
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (find(a) != find(b) && adjacent(hits[a], hits[b])) {
        parent[std::max(find(a), find(b))] = std::min(find(a), find(b));
      }
    }
  }
  auto score = [](const MfEquilibrium& eq) {
    return std::max(eq.br_residual[0], eq.br_residual[1]);
  };
  std::vector<std::size_t> best(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t root = find(a);
    if (best[root] == n || score(hits[a]) < score(hits[best[root]])) {
      best[root] = a;
    }
  }
  std::vector<MfEquilibrium> out;
  for (std::size_t a = 0; a < n; ++a) {
    if (find(a) == a) out.push_back(hits[best[a]]);
  }
  return out;
}

MfExploitabilityResult MfExploitability(
    const StaticGameSpec& spec, const std::array<Kernel, kNumTeams>& policies,
    double resolution, std::int64_t max_candidates) {
  CheckResolution(resolution);
  const int steps = StepsForResolution(resolution);
  const MeanFieldProfile base = MeanFieldsOf(spec, policies);
  MfExploitabilityResult result;
  for (int i = 0; i < kNumTeams; ++i) {
    // Team i's cost with its own mean field following the kernel.
    auto value = [&](const Kernel& g) {
      MeanFieldProfile mf = base;
      mf.lambda[i] = MeanFieldActionLaw(spec, i, g);
      return MfCost(spec, i, g, mf);
    };
    const KernelGrid grid =
        MakeKernelGrid(spec.num_obs(i), spec.num_actions(i), steps);
    const std::int64_t count = grid.Size(max_candidates);
    if (count > max_candidates) {
      throw BudgetError("grid too large: more than " +
                        std::to_string(max_candidates) + " deviations");
    }
    std::vector<double> values(count);
    ParallelFor(count, [&](std::int64_t index) {
      values[index] = value(grid.Decode(index));
    });
    const double own = value(policies[i]);
    double best = own;
    std::int64_t arg = -1;
    for (std::int64_t index = 0; index < count; ++index) {
      if (values[index] < best) {
        best = values[index];
        arg = index;
      }
    }
    result.epsilon[i] = own - best;
    result.deviation[i] = arg < 0 ? policies[i] : grid.Decode(arg);
  }
  return result;
}

}  // namespace teamfield
