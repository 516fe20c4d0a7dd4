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

#ifndef TEAMFIELD_GAME_H_
#define TEAMFIELD_GAME_H_

#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "teamfield/prob.h"

namespace teamfield {

inline constexpr int kNumTeams = 2;

struct FiniteSpace {
  int size = 1;
  std::vector<std::string> labels;  // empty or exactly `size` distinct entries

  bool operator==(const FiniteSpace&) const = default;
};

// Statistic map applied to a team's empirical (or mean-field) measure before
// it reaches a cost or transition.
struct StatisticMap {
  enum class Kind { kIdentity, kMeanEmbedding };
  Kind kind = Kind::kIdentity;
  std::vector<double> embedding;  // one entry per element for kMeanEmbedding

  static StatisticMap Identity() { return {}; }
  static StatisticMap MeanEmbedding(std::vector<double> embedding) {
    return {Kind::kMeanEmbedding, std::move(embedding)};
  }

  bool operator==(const StatisticMap&) const = default;
};

// Identity statistics yield the whole measure; mean embeddings a 1-vector.
using StatValue = std::vector<double>;

StatValue ApplyStatistic(const StatisticMap& xi, std::span<const double> p);

// Scalar summary of a statistic value: the value itself for a mean embedding,
// the index-weighted mean for a full measure.
double StatMean(const StatValue& value);

// Statistic values visible to costs and transitions at one stage. Static games
// only populate `action`.
struct StatArgs {
  std::array<StatValue, kNumTeams> state;
  std::array<StatValue, kNumTeams> action;
};

// Names a component of StatArgs: "x1", "x2", "u1", "u2".
struct StatSlot {
  bool is_state = false;
  int team = 0;

  static StatSlot Parse(const std::string& name);
  std::string Name() const;
  const StatValue& Get(const StatArgs& args) const {
    return is_state ? args.state[team] : args.action[team];
  }
  bool operator==(const StatSlot&) const = default;
};

struct GridAxis {
  StatSlot slot;
  int component = 0;
  std::vector<double> points;  // strictly increasing

  bool operator==(const GridAxis&) const = default;
};

// Multilinear interpolation weights over a tensor grid of statistic values.
// Queries outside the grid are clamped to its boundary.
class GridInterpolator {
 public:
  GridInterpolator() = default;
  explicit GridInterpolator(std::vector<GridAxis> axes);

  const std::vector<GridAxis>& axes() const { return axes_; }
  std::size_t num_points() const { return num_points_; }

  // Appends (grid point index, weight) pairs with positive weight; weights
  // sum to one.
  void Vertices(const StatArgs& args,
                std::vector<std::pair<std::size_t, double>>* out) const;

  bool operator==(const GridInterpolator& o) const { return axes_ == o.axes_; }

 private:
  std::vector<GridAxis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t num_points_ = 1;
};

// Per-team stage cost c(world, state, action, statistics). Static games use
// state 0.
class CostFunction {
 public:
  struct Constant {
    double value = 0.0;
    bool operator==(const Constant&) const = default;
  };
  // offset + scale * |v(own element) - mean(target statistic)|^power
  struct TrackMean {
    bool target_self = false;
    bool on_state = false;
    double power = 2.0;
    double scale = 1.0;
    double offset = 0.0;
    bool operator==(const TrackMean&) const = default;
  };
  // scale * own_state_law[x] + cross * opponent_state_law[x]
  struct Congestion {
    double scale = 1.0;
    double cross = 0.0;
    bool operator==(const Congestion&) const = default;
  };
  // scale * 1{own element == element}
  struct Indicator {
    bool on_state = true;
    int element = 0;
    double scale = 1.0;
    bool operator==(const Indicator&) const = default;
  };
  // values[((world * states + state) * actions + action) * points + point]
  struct Table {
    int worlds = 1;
    int states = 1;
    int actions = 1;
    GridInterpolator grid;
    std::vector<double> values;
    bool operator==(const Table&) const = default;
  };
  using Family = std::variant<Constant, TrackMean, Congestion, Indicator, Table>;

  CostFunction() = default;
  CostFunction(int team, Family family) : team_(team), family_(std::move(family)) {}

  int team() const { return team_; }
  const Family& family() const { return family_; }

  double Eval(int world, int state, int action, const StatArgs& stats) const;

  // Stable name of the active family.
  std::string FamilyName() const;

  bool operator==(const CostFunction&) const = default;

 private:
  int team_ = 0;
  Family family_ = Constant{};
};

struct StaticTeamSpec {
  FiniteSpace action_space;
  FiniteSpace obs_space;
  Kernel obs_kernel;  // world -> obs
  StatisticMap statistic;

  bool operator==(const StaticTeamSpec&) const = default;
};

struct StaticGameSpec {
  FiniteSpace world;
  std::vector<double> prior;
  std::array<StaticTeamSpec, kNumTeams> teams;
  std::array<CostFunction, kNumTeams> cost;

  int num_actions(int team) const { return teams[team].action_space.size; }
  int num_obs(int team) const { return teams[team].obs_space.size; }

  // c^team(world, u, Xi^1(m1), Xi^2(m2)).
  double Cost(int team, int world, int action, std::span<const double> m1,
              std::span<const double> m2) const;
  StatArgs Stats(std::span<const double> m1, std::span<const double> m2) const;

  bool operator==(const StaticGameSpec&) const = default;
};

// P(x' | x, u, statistics) for one stage, as tables at grid points that are
// interpolated multilinearly. No axes means a statistic-independent table.
class Transition {
 public:
  Transition() = default;
  // tables[point][x][u][x'] flattened.
  Transition(int states, int actions, GridInterpolator grid,
             std::vector<double> tables);

  static Transition Fixed(int states, int actions, std::vector<double> table);
  // x' = u with probability 1 - noise, otherwise uniform over states.
  static Transition CopyAction(int states, double noise);

  int states() const { return states_; }
  int actions() const { return actions_; }
  const GridInterpolator& grid() const { return grid_; }
  const std::vector<double>& tables() const { return tables_; }

  // Writes the interpolated [x][u][x'] table for the given statistics.
  void Fill(const StatArgs& stats, std::vector<double>* out) const;

  bool operator==(const Transition&) const = default;

 private:
  int states_ = 1;
  int actions_ = 1;
  GridInterpolator grid_;
  std::vector<double> tables_ = {1.0};
};

struct DynamicTeamSpec {
  FiniteSpace state_space;
  FiniteSpace action_space;
  FiniteSpace obs_space;
  Kernel init_kernel;                   // world -> state
  std::vector<Transition> transitions;  // one shared, or one per stage
  std::vector<Kernel> obs_models;       // state -> obs; one shared or per stage
  StatisticMap state_statistic;
  StatisticMap action_statistic;

  const Transition& TransitionAt(int t) const {
    return transitions.size() == 1 ? transitions[0] : transitions.at(t);
  }
  const Kernel& ObsAt(int t) const {
    return obs_models.size() == 1 ? obs_models[0] : obs_models.at(t);
  }

  bool operator==(const DynamicTeamSpec&) const = default;
};

struct DynamicGameSpec {
  FiniteSpace world;
  std::vector<double> prior;
  int horizon = 1;
  std::array<DynamicTeamSpec, kNumTeams> teams;
  std::array<CostFunction, kNumTeams> cost;

  int num_states(int team) const { return teams[team].state_space.size; }
  int num_actions(int team) const { return teams[team].action_space.size; }
  int num_obs(int team) const { return teams[team].obs_space.size; }

  // Statistic values from per-team state and action measures.
  StatArgs Stats(const std::array<std::vector<double>, kNumTeams>& state_laws,
                 const std::array<std::vector<double>, kNumTeams>& action_laws)
      const;

  bool operator==(const DynamicGameSpec&) const = default;
};

// Every violated invariant as a readable entry; empty means valid.
struct ValidationReport {
  std::vector<std::string> entries;
  // Largest cost seen while probing each team's cost.
  std::array<double, kNumTeams> cost_bound = {0.0, 0.0};
  bool ok() const { return entries.empty(); }
  void Add(std::string entry) { entries.push_back(std::move(entry)); }
};

ValidationReport ValidateStaticSpec(const StaticGameSpec& spec);
ValidationReport ValidateDynamicSpec(const DynamicGameSpec& spec);

}  // namespace teamfield

#endif  // TEAMFIELD_GAME_H_
