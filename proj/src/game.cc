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

#include "teamfield/game.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace teamfield {

StatValue ApplyStatistic(const StatisticMap& xi, std::span<const double> p) {
  if (xi.kind == StatisticMap::Kind::kIdentity) {
    return StatValue(p.begin(), p.end());
  }
  if (xi.embedding.size() != p.size()) {
    throw Error("statistic dimension mismatch: embedding has " +
                std::to_string(xi.embedding.size()) + " entries, measure has " +
                std::to_string(p.size()));
  }
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) total += xi.embedding[i] * p[i];
  return {total};
}

double StatMean(const StatValue& value) {
  if (value.size() == 1) return value[0];
  double total = 0.0;
  for (size_t i = 0; i < value.size(); ++i) total += i * value[i];
  return total;
}

StatSlot StatSlot::Parse(const std::string& name) {
  if (name.size() == 2 && (name[0] == 'x' || name[0] == 'u') &&
      (name[1] == '1' || name[1] == '2')) {
    return {name[0] == 'x', name[1] - '1'};
  }
  throw Error("unknown statistic slot '" + name + "' (expected x1, x2, u1, u2)");
}

std::string StatSlot::Name() const {
  return std::string(1, is_state ? 'x' : 'u') + std::to_string(team + 1);
}

GridInterpolator::GridInterpolator(std::vector<GridAxis> axes)
    : axes_(std::move(axes)) {
  strides_.assign(axes_.size(), 1);
  num_points_ = 1;
  for (int a = static_cast<int>(axes_.size()) - 1; a >= 0; --a) {
    const auto& pts = axes_[a].points;
    if (pts.empty()) throw Error("grid axis has no points");
    for (size_t i = 1; i < pts.size(); ++i) {
      if (!(pts[i] > pts[i - 1])) {
        throw Error("grid axis points must be strictly increasing");
      }
    }
    strides_[a] = num_points_;
    num_points_ *= pts.size();
  }
}

void GridInterpolator::Vertices(
    const StatArgs& args,
    std::vector<std::pair<std::size_t, double>>* out) const {
  out->clear();
  out->emplace_back(0, 1.0);
  std::vector<std::pair<std::size_t, double>> next;
  for (size_t a = 0; a < axes_.size(); ++a) {
    const GridAxis& axis = axes_[a];
    const StatValue& value = axis.slot.Get(args);
    if (axis.component < 0 || axis.component >= static_cast<int>(value.size())) {
      throw Error("grid axis component out of range for slot " +
                  axis.slot.Name());
    }
    const double q = value[axis.component];
    const auto& pts = axis.points;
    size_t lo = 0;
    double frac = 0.0;
    if (pts.size() == 1 || q <= pts.front()) {
      lo = 0;
    } else if (q >= pts.back()) {
      lo = pts.size() - 1;
    } else {
      lo = std::upper_bound(pts.begin(), pts.end(), q) - pts.begin() - 1;
      frac = (q - pts[lo]) / (pts[lo + 1] - pts[lo]);
    }
    next.clear();
    for (const auto& [index, weight] : *out) {
      if (frac < 1.0) next.emplace_back(index + lo * strides_[a], weight * (1.0 - frac));
      if (frac > 0.0) {
        next.emplace_back(index + (lo + 1) * strides_[a], weight * frac);
      }
    }
    out->swap(next);
  }
}

double CostFunction::Eval(int world, int state, int action,
                          const StatArgs& stats) const {
  const int self = team_;
  const int other = 1 - team_;
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return f.value;
        } else if constexpr (std::is_same_v<T, TrackMean>) {
          const int target = f.target_self ? self : other;
          const StatValue& s =
              f.on_state ? stats.state[target] : stats.action[target];
          const double own = f.on_state ? state : action;
          const double gap = std::abs(own - StatMean(s));
          const double term = f.power == 2.0 ? gap * gap : std::pow(gap, f.power);
          return f.offset + f.scale * term;
        } else if constexpr (std::is_same_v<T, Congestion>) {
          double value = f.scale * stats.state[self].at(state);
          if (f.cross != 0.0) value += f.cross * stats.state[other].at(state);
          return value;
        } else if constexpr (std::is_same_v<T, Indicator>) {
          const int own = f.on_state ? state : action;
          return own == f.element ? f.scale : 0.0;
        } else {
          const size_t base =
              ((static_cast<size_t>(world) * f.states + state) * f.actions +
               action) *
              f.grid.num_points();
          if (f.grid.axes().empty()) return f.values.at(base);
          thread_local std::vector<std::pair<std::size_t, double>> vertices;
          f.grid.Vertices(stats, &vertices);
          double value = 0.0;
          for (const auto& [point, weight] : vertices) {
            value += weight * f.values.at(base + point);
          }
          return value;
        }
      },
      family_);
}

std::string CostFunction::FamilyName() const {
  static const char* kNames[] = {"constant", "track-mean", "congestion",
                                 "indicator", "table"};
  return kNames[family_.index()];
}

StatArgs StaticGameSpec::Stats(std::span<const double> m1,
                               std::span<const double> m2) const {
  StatArgs args;
  args.action[0] = ApplyStatistic(teams[0].statistic, m1);
  args.action[1] = ApplyStatistic(teams[1].statistic, m2);
  return args;
}

double StaticGameSpec::Cost(int team, int world, int action,
                            std::span<const double> m1,
                            std::span<const double> m2) const {
  if (team < 0 || team >= kNumTeams) throw Error("team index out of range");
  if (world < 0 || world >= this->world.size) {
    throw Error("world index out of range");
  }
  if (action < 0 || action >= num_actions(team)) {
    throw Error("action index out of range");
  }
  return cost[team].Eval(world, 0, action, Stats(m1, m2));
}

Transition::Transition(int states, int actions, GridInterpolator grid,
                       std::vector<double> tables)
    : states_(states),
      actions_(actions),
      grid_(std::move(grid)),
      tables_(std::move(tables)) {
  const size_t expected = grid_.num_points() * states_ * actions_ * states_;
  if (tables_.size() != expected) {
    throw Error("transition table has " + std::to_string(tables_.size()) +
                " entries, expected " + std::to_string(expected));
  }
}

Transition Transition::Fixed(int states, int actions,
                             std::vector<double> table) {
  return Transition(states, actions, GridInterpolator(), std::move(table));
}

Transition Transition::CopyAction(int states, double noise) {
  std::vector<double> table(states * states * states, noise / states);
  for (int x = 0; x < states; ++x) {
    for (int u = 0; u < states; ++u) {
      table[(x * states + u) * states + u] += 1.0 - noise;
    }
  }
  return Fixed(states, states, std::move(table));
}

void Transition::Fill(const StatArgs& stats, std::vector<double>* out) const {
  const size_t block = static_cast<size_t>(states_) * actions_ * states_;
  if (grid_.axes().empty()) {
    out->assign(tables_.begin(), tables_.begin() + block);
    return;
  }
  thread_local std::vector<std::pair<std::size_t, double>> vertices;
  grid_.Vertices(stats, &vertices);
  out->assign(block, 0.0);
  for (const auto& [point, weight] : vertices) {
    const double* src = tables_.data() + point * block;
    for (size_t i = 0; i < block; ++i) (*out)[i] += weight * src[i];
  }
}

StatArgs DynamicGameSpec::Stats(
    const std::array<std::vector<double>, kNumTeams>& state_laws,
    const std::array<std::vector<double>, kNumTeams>& action_laws) const {
  StatArgs args;
  for (int i = 0; i < kNumTeams; ++i) {
    args.state[i] = ApplyStatistic(teams[i].state_statistic, state_laws[i]);
    args.action[i] = ApplyStatistic(teams[i].action_statistic, action_laws[i]);
  }
  return args;
}

namespace {

std::string TeamPrefix(int team) {
  return "team " + std::to_string(team) + ": ";
}

void CheckSpace(const FiniteSpace& space, const std::string& name,
                ValidationReport* report) {
  if (space.size < 1) {
    report->Add(name + " size must be >= 1");
    return;
  }
  if (!space.labels.empty()) {
    if (static_cast<int>(space.labels.size()) != space.size) {
      report->Add(name + " labels must have exactly " +
                  std::to_string(space.size) + " entries");
    }
    std::set<std::string> distinct(space.labels.begin(), space.labels.end());
    if (distinct.size() != space.labels.size()) {
      report->Add(name + " labels must be distinct");
    }
  }
}

void CheckPrior(const std::vector<double>& prior, int worlds,
                ValidationReport* report) {
  if (static_cast<int>(prior.size()) != worlds) {
    report->Add("prior has " + std::to_string(prior.size()) +
                " entries, world has " + std::to_string(worlds));
    return;
  }
  for (double w : prior) {
    if (!std::isfinite(w) || w < 0.0) {
      report->Add("prior has negative or non-finite weight");
      return;
    }
  }
  if (!SimplexViolation(prior).empty()) report->Add("prior not normalized");
}

void CheckKernel(const Kernel& k, int rows, int cols, const std::string& name,
                 ValidationReport* report) {
  if (k.rows() != rows || k.cols() != cols) {
    report->Add(name + " has shape " + std::to_string(k.rows()) + "x" +
                std::to_string(k.cols()) + ", expected " +
                std::to_string(rows) + "x" + std::to_string(cols));
    return;
  }
  for (int r = 0; r < rows; ++r) {
    if (std::string why = SimplexViolation(k.Row(r)); !why.empty()) {
      report->Add(name + " row " + std::to_string(r) + " not stochastic: " +
                  why);
    }
  }
}

void CheckStatistic(const StatisticMap& xi, int size, const std::string& name,
                    ValidationReport* report) {
  if (xi.kind != StatisticMap::Kind::kMeanEmbedding) return;
  if (static_cast<int>(xi.embedding.size()) != size) {
    report->Add(name + " embedding has " + std::to_string(xi.embedding.size()) +
                " entries, space has " + std::to_string(size));
  }
  for (double e : xi.embedding) {
    if (!std::isfinite(e)) report->Add(name + " embedding is not finite");
  }
}

int StatDim(const StatisticMap& xi, int size) {
  return xi.kind == StatisticMap::Kind::kIdentity ? size : 1;
}

// Shape information needed to check a cost against its game.
struct CostContext {
  bool dynamic = false;
  int worlds = 1;
  std::array<int, kNumTeams> states{1, 1};
  std::array<int, kNumTeams> actions{1, 1};
  std::array<int, kNumTeams> state_dims{0, 0};
  std::array<int, kNumTeams> action_dims{1, 1};
  std::array<bool, kNumTeams> state_identity{false, false};
};

void CheckAxes(const GridInterpolator& grid, const CostContext& ctx,
               const std::string& name, ValidationReport* report) {
  for (const GridAxis& axis : grid.axes()) {
    if (axis.slot.is_state && !ctx.dynamic) {
      report->Add(name + " axis uses state slot " + axis.slot.Name() +
                  " in a static game");
      continue;
    }
    const int dim = axis.slot.is_state ? ctx.state_dims[axis.slot.team]
                                       : ctx.action_dims[axis.slot.team];
    if (axis.component < 0 || axis.component >= dim) {
      report->Add(name + " axis component " + std::to_string(axis.component) +
                  " out of range for slot " + axis.slot.Name());
    }
  }
}

// Enumerates statistic arguments built from vertex and uniform measures.
std::vector<StatArgs> ProbeStats(const CostContext& ctx,
                                 const std::array<StatisticMap, 2>& state_xi,
                                 const std::array<StatisticMap, 2>& action_xi) {
  auto probes = [](int size) {
    std::vector<std::vector<double>> out;
    for (int i = 0; i < size; ++i) {
      std::vector<double> v(size, 0.0);
      v[i] = 1.0;
      out.push_back(v);
    }
    if (size > 1) out.push_back(std::vector<double>(size, 1.0 / size));
    return out;
  };
  std::vector<StatArgs> result;
  const auto u1 = probes(ctx.actions[0]);
  const auto u2 = probes(ctx.actions[1]);
  const auto x1 = ctx.dynamic ? probes(ctx.states[0])
                              : std::vector<std::vector<double>>{{1.0}};
  const auto x2 = ctx.dynamic ? probes(ctx.states[1])
                              : std::vector<std::vector<double>>{{1.0}};
  for (const auto& a : u1) {
    for (const auto& b : u2) {
      for (const auto& c : x1) {
        for (const auto& d : x2) {
          StatArgs args;
          args.action[0] = ApplyStatistic(action_xi[0], a);
          args.action[1] = ApplyStatistic(action_xi[1], b);
          if (ctx.dynamic) {
            args.state[0] = ApplyStatistic(state_xi[0], c);
            args.state[1] = ApplyStatistic(state_xi[1], d);
          }
          result.push_back(std::move(args));
        }
      }
    }
  }
  return result;
}

void CheckCost(const CostFunction& cost, int team, const CostContext& ctx,
               const std::vector<StatArgs>& probes, ValidationReport* report) {
  const std::string name = TeamPrefix(team) + "cost";
  if (cost.team() != team) report->Add(name + " bound to wrong team");
  bool structural_ok = true;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, CostFunction::TrackMean>) {
          if (f.on_state && !ctx.dynamic) {
            report->Add(name + " tracks states in a static game");
            structural_ok = false;
          }
          if (!(f.power > 0.0)) {
            report->Add(name + " power must be positive");
            structural_ok = false;
          }
        } else if constexpr (std::is_same_v<T, CostFunction::Congestion>) {
          if (!ctx.dynamic) {
            report->Add(name + " congestion needs state statistics");
            structural_ok = false;
          } else {
            if (!ctx.state_identity[team]) {
              report->Add(name + " congestion needs an identity state statistic");
              structural_ok = false;
            }
            if (f.cross != 0.0 &&
                (!ctx.state_identity[1 - team] || ctx.states[0] != ctx.states[1])) {
              report->Add(name +
                          " congestion cross term needs equal state spaces "
                          "with identity statistics");
              structural_ok = false;
            }
          }
        } else if constexpr (std::is_same_v<T, CostFunction::Indicator>) {
          if (f.on_state && !ctx.dynamic) {
            report->Add(name + " indicator on states in a static game");
            structural_ok = false;
          }
          const int limit = f.on_state ? ctx.states[team] : ctx.actions[team];
          if (f.element < 0 || f.element >= limit) {
            report->Add(name + " indicator element out of range");
            structural_ok = false;
          }
        } else if constexpr (std::is_same_v<T, CostFunction::Table>) {
          const int states = ctx.dynamic ? ctx.states[team] : 1;
          if (f.worlds != ctx.worlds || f.states != states ||
              f.actions != ctx.actions[team]) {
            report->Add(name + " table shape does not match the game");
            structural_ok = false;
          }
          const size_t expected = static_cast<size_t>(f.worlds) * f.states *
                                  f.actions * f.grid.num_points();
          if (f.values.size() != expected) {
            report->Add(name + " table has " + std::to_string(f.values.size()) +
                        " values, expected " + std::to_string(expected));
            structural_ok = false;
          }
          CheckAxes(f.grid, ctx, name, report);
          for (double v : f.values) {
            if (!std::isfinite(v)) {
              report->Add("non-finite cost in " + name + " table");
              structural_ok = false;
              break;
            }
          }
          for (double v : f.values) {
            if (std::isfinite(v)) {
              report->cost_bound[team] = std::max(report->cost_bound[team], v);
            }
          }
          for (double v : f.values) {
            if (v < 0.0) {
              report->Add("negative cost in " + name + " table");
              structural_ok = false;
              break;
            }
          }
        }
      },
      cost.family());
  if (!structural_ok) return;
  // Probe at vertex and uniform measures: finite and nonnegative.
  const int states = ctx.dynamic ? ctx.states[team] : 1;
  bool negative = false;
  bool non_finite = false;
  try {
    for (int w = 0; w < ctx.worlds && !negative && !non_finite; ++w) {
      for (int x = 0; x < states; ++x) {
        for (int u = 0; u < ctx.actions[team]; ++u) {
          for (const StatArgs& args : probes) {
            const double c = cost.Eval(w, x, u, args);
            if (!std::isfinite(c)) non_finite = true;
            if (c < 0.0) negative = true;
            if (std::isfinite(c)) {
              report->cost_bound[team] = std::max(report->cost_bound[team], c);
            }
          }
        }
      }
    }
  } catch (const std::exception& e) {
    report->Add(name + " cannot be evaluated: " + e.what());
    return;
  }
  if (negative) report->Add("negative cost for " + name);
  if (non_finite) report->Add("non-finite cost for " + name);
}

}  // namespace

ValidationReport ValidateStaticSpec(const StaticGameSpec& spec) {
  ValidationReport report;
  CheckSpace(spec.world, "world", &report);
  if (!report.ok()) return report;
  CheckPrior(spec.prior, spec.world.size, &report);
  CostContext ctx;
  ctx.worlds = spec.world.size;
  bool shapes_ok = true;
  for (int i = 0; i < kNumTeams; ++i) {
    const StaticTeamSpec& team = spec.teams[i];
    const std::string prefix = TeamPrefix(i);
    const size_t before = report.entries.size();
    CheckSpace(team.action_space, prefix + "action_space", &report);
    CheckSpace(team.obs_space, prefix + "obs_space", &report);
    if (report.entries.size() != before) {
      shapes_ok = false;
      continue;
    }
    CheckKernel(team.obs_kernel, spec.world.size, team.obs_space.size,
                prefix + "obs_kernel", &report);
    const size_t before_statistic = report.entries.size();
    CheckStatistic(team.statistic, team.action_space.size, prefix + "statistic",
                   &report);
    if (report.entries.size() != before_statistic) shapes_ok = false;
    ctx.actions[i] = team.action_space.size;
    ctx.action_dims[i] = StatDim(team.statistic, team.action_space.size);
  }
  if (!shapes_ok) return report;
  const auto probes = ProbeStats(
      ctx, {StatisticMap{}, StatisticMap{}},
      {spec.teams[0].statistic, spec.teams[1].statistic});
  for (int i = 0; i < kNumTeams; ++i) {
    CheckCost(spec.cost[i], i, ctx, probes, &report);
  }
  return report;
}

ValidationReport ValidateDynamicSpec(const DynamicGameSpec& spec) {
  ValidationReport report;
  CheckSpace(spec.world, "world", &report);
  if (!report.ok()) return report;
  CheckPrior(spec.prior, spec.world.size, &report);
  if (spec.horizon < 1) report.Add("horizon must be >= 1");
  CostContext ctx;
  ctx.dynamic = true;
  ctx.worlds = spec.world.size;
  bool shapes_ok = true;
  for (int i = 0; i < kNumTeams; ++i) {
    const DynamicTeamSpec& team = spec.teams[i];
    const std::string prefix = TeamPrefix(i);
    const size_t before = report.entries.size();
    CheckSpace(team.state_space, prefix + "state_space", &report);
    CheckSpace(team.action_space, prefix + "action_space", &report);
    CheckSpace(team.obs_space, prefix + "obs_space", &report);
    if (report.entries.size() != before) {
      shapes_ok = false;
      continue;
    }
    const int nx = team.state_space.size;
    const int nu = team.action_space.size;
    const int ny = team.obs_space.size;
    CheckKernel(team.init_kernel, spec.world.size, nx, prefix + "init_kernel",
                &report);
    const int needed_stages = std::max(1, spec.horizon);
    if (team.obs_models.size() != 1 &&
        static_cast<int>(team.obs_models.size()) < needed_stages) {
      report.Add(prefix + "obs_model needs one shared kernel or one per stage");
    }
    for (size_t t = 0; t < team.obs_models.size(); ++t) {
      CheckKernel(team.obs_models[t], nx, ny,
                  prefix + "obs_model stage " + std::to_string(t), &report);
    }
    if (team.transitions.size() != 1 &&
        static_cast<int>(team.transitions.size()) < spec.horizon - 1) {
      report.Add(prefix + "transition needs one shared table or one per stage");
    }
    for (size_t t = 0; t < team.transitions.size(); ++t) {
      const Transition& tr = team.transitions[t];
      const std::string name = prefix + "transition stage " + std::to_string(t);
      if (tr.states() != nx || tr.actions() != nu) {
        report.Add(name + " shape does not match state/action spaces");
        continue;
      }
      const size_t block = static_cast<size_t>(nx) * nu * nx;
      for (size_t p = 0; p < tr.grid().num_points(); ++p) {
        for (int x = 0; x < nx; ++x) {
          for (int u = 0; u < nu; ++u) {
            std::span<const double> row(tr.tables().data() + p * block +
                                            (x * nu + u) * nx,
                                        nx);
            if (std::string why = SimplexViolation(row); !why.empty()) {
              report.Add(name + " row (x=" + std::to_string(x) +
                         ", u=" + std::to_string(u) + ", grid point " +
                         std::to_string(p) + ") not stochastic: " + why);
            }
          }
        }
      }
    }
    const size_t before_statistic = report.entries.size();
    CheckStatistic(team.state_statistic, nx, prefix + "state_statistic",
                   &report);
    CheckStatistic(team.action_statistic, nu, prefix + "action_statistic",
                   &report);
    if (report.entries.size() != before_statistic) shapes_ok = false;
    ctx.states[i] = nx;
    ctx.actions[i] = nu;
    ctx.state_dims[i] = StatDim(team.state_statistic, nx);
    ctx.action_dims[i] = StatDim(team.action_statistic, nu);
    ctx.state_identity[i] =
        team.state_statistic.kind == StatisticMap::Kind::kIdentity;
  }
  if (!shapes_ok) return report;
  for (int i = 0; i < kNumTeams; ++i) {
    for (const Transition& tr : spec.teams[i].transitions) {
      CostContext tctx = ctx;
      CheckAxes(tr.grid(), tctx, TeamPrefix(i) + "transition", &report);
    }
  }
  const auto probes = ProbeStats(
      ctx, {spec.teams[0].state_statistic, spec.teams[1].state_statistic},
      {spec.teams[0].action_statistic, spec.teams[1].action_statistic});
  for (int i = 0; i < kNumTeams; ++i) {
    CheckCost(spec.cost[i], i, ctx, probes, &report);
  }
  return report;
}

}  // namespace teamfield
