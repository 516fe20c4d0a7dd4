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

#ifndef TEAMFIELD_TESTS_TEST_GAMES_H_
#define TEAMFIELD_TESTS_TEST_GAMES_H_

#include <vector>

#include "teamfield/game.h"

namespace teamfield::testing {

inline StaticTeamSpec BinaryTeam(const Kernel& obs) {
  StaticTeamSpec team;
  team.action_space = {2, {}};
  team.obs_space = {obs.cols(), {}};
  team.obs_kernel = obs;
  team.statistic = StatisticMap::Identity();
  return team;
}

inline StaticGameSpec SingleWorldBinary(CostFunction::Family c1,
                                        CostFunction::Family c2) {
  StaticGameSpec spec;
  spec.world = {1, {}};
  spec.prior = {1.0};
  spec.teams = {BinaryTeam(Kernel::Uniform(1, 1)), BinaryTeam(Kernel::Uniform(1, 1))};
  spec.cost = {CostFunction(0, std::move(c1)), CostFunction(1, std::move(c2))};
  return spec;
}

// c1 = (u - mean m2)^2, c2 = 1 - (u - mean m1)^2.
inline StaticGameSpec MismatchGame() {
  return SingleWorldBinary(CostFunction::TrackMean{},
                           CostFunction::TrackMean{false, false, 2.0, -1.0, 1.0});
}

// c^i = (u - mean m^i)^2.
inline StaticGameSpec CoordinationGame() {
  return SingleWorldBinary(CostFunction::TrackMean{true},
                           CostFunction::TrackMean{true});
}

inline StaticGameSpec ConstantGame(double value) {
  return SingleWorldBinary(CostFunction::Constant{value},
                           CostFunction::Constant{value});
}

// Two worlds with noisy two-symbol observations and c^i = (u - mean m^-i)^2.
inline StaticGameSpec NoisyTrackingGame() {
  StaticGameSpec spec;
  spec.world = {2, {}};
  spec.prior = {0.3, 0.7};
  const Kernel obs({{0.9, 0.1}, {0.2, 0.8}});
  spec.teams = {BinaryTeam(obs), BinaryTeam(obs)};
  spec.cost = {CostFunction(0, CostFunction::TrackMean{}),
               CostFunction(1, CostFunction::TrackMean{})};
  return spec;
}

// Like NoisyTrackingGame with dyadic probabilities, so that float
// arithmetic on the inputs is exact. Team 2 plays the mismatch cost.
inline StaticGameSpec DyadicGame() {
  StaticGameSpec spec;
  spec.world = {2, {}};
  spec.prior = {0.25, 0.75};
  spec.teams = {BinaryTeam(Kernel({{0.75, 0.25}, {0.5, 0.5}})),
                BinaryTeam(Kernel({{0.125, 0.875}, {1.0, 0.0}}))};
  spec.cost = {CostFunction(0, CostFunction::TrackMean{}),
               CostFunction(1, CostFunction::TrackMean{false, false, 2.0, -1.0, 1.0})};
  return spec;
}

// c^i = 1 - |u - mean m^i|: DMs of a team prefer to split.
inline StaticGameSpec SpreadGame() {
  return SingleWorldBinary(CostFunction::TrackMean{true, false, 1.0, -1.0, 1.0},
                           CostFunction::TrackMean{true, false, 1.0, -1.0, 1.0});
}

// Team 1 moves between two cells with x' = u and pays own occupancy plus half
// the occupancy of a passive crowd (team 2) fixed at (0.7, 0.3). T = 2.
inline DynamicGameSpec CrowdGame() {
  DynamicGameSpec spec;
  spec.world = {1, {}};
  spec.prior = {1.0};
  spec.horizon = 2;
  DynamicTeamSpec mover;
  mover.state_space = {2, {}};
  mover.action_space = {2, {}};
  mover.obs_space = {1, {}};
  mover.init_kernel = Kernel({{0.5, 0.5}});
  mover.transitions = {Transition::CopyAction(2, 0.0)};
  mover.obs_models = {Kernel({{1.0}, {1.0}})};
  DynamicTeamSpec crowd;
  crowd.state_space = {2, {}};
  crowd.action_space = {1, {}};
  crowd.obs_space = {1, {}};
  crowd.init_kernel = Kernel({{0.7, 0.3}});
  crowd.transitions = {Transition::Fixed(2, 1, {1.0, 0.0, 0.0, 1.0})};
  crowd.obs_models = {Kernel({{1.0}, {1.0}})};
  spec.teams = {mover, crowd};
  spec.cost = {CostFunction(0, CostFunction::Congestion{1.0, 0.5}),
               CostFunction(1, CostFunction::Constant{0.0})};
  return spec;
}

// One-state team with a single action and zero cost.
inline DynamicTeamSpec PassiveTeam() {
  DynamicTeamSpec team;
  team.state_space = {1, {}};
  team.action_space = {1, {}};
  team.obs_space = {1, {}};
  team.init_kernel = Kernel::Uniform(1, 1);
  team.transitions = {Transition::Fixed(1, 1, {1.0})};
  team.obs_models = {Kernel::Uniform(1, 1)};
  return team;
}

// Team 1 observes its binary state exactly and sets x' = u; team 2 is
// passive.
inline DynamicGameSpec CopyActionGame(CostFunction::Family cost,
                                      std::vector<double> init, int horizon) {
  DynamicGameSpec spec;
  spec.world = {1, {}};
  spec.prior = {1.0};
  spec.horizon = horizon;
  DynamicTeamSpec mover;
  mover.state_space = {2, {}};
  mover.action_space = {2, {}};
  mover.obs_space = {2, {}};
  mover.init_kernel = Kernel({init});
  mover.transitions = {Transition::CopyAction(2, 0.0)};
  mover.obs_models = {Kernel::Deterministic(2, {0, 1})};
  spec.teams = {mover, PassiveTeam()};
  spec.cost = {CostFunction(0, std::move(cost)),
               CostFunction(1, CostFunction::Constant{0.0})};
  return spec;
}

}  // namespace teamfield::testing

#endif  // TEAMFIELD_TESTS_TEST_GAMES_H_
