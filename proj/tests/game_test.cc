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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "teamfield/game.h"
#include "teamfield/rng.h"
#include "test_games.h"

namespace teamfield {
namespace {

bool HasEntry(const ValidationReport& report, const std::string& needle) {
  return std::any_of(report.entries.begin(), report.entries.end(),
                     [&](const std::string& e) {
                       return e.find(needle) != std::string::npos;
                     });
}

TEST_CASE("static validation") {
  StaticGameSpec spec = testing::NoisyTrackingGame();
  CHECK(ValidateStaticSpec(spec).ok());

  spec.prior = {0.6, 0.6};
  CHECK(HasEntry(ValidateStaticSpec(spec), "prior not normalized"));

  spec = testing::NoisyTrackingGame();
  spec.teams[0].obs_kernel = Kernel::Unchecked(2, 2, {0.5, 0.4, 0.5, 0.5});
  CHECK(HasEntry(ValidateStaticSpec(spec), "not stochastic"));

  spec = testing::ConstantGame(1.0);
  CostFunction::Table table;
  table.worlds = 1;
  table.states = 1;
  table.actions = 2;
  table.values = {0.5, -1.0};
  spec.cost[0] = CostFunction(0, table);
  CHECK(HasEntry(ValidateStaticSpec(spec), "negative cost"));

  spec = testing::ConstantGame(1.0);
  spec.world.labels = {"a", "b"};
  CHECK_FALSE(ValidateStaticSpec(spec).ok());
  spec.world = {2, {"a", "a"}};
  spec.prior = {0.5, 0.5};
  spec.teams[0].obs_kernel = Kernel({{1.0}, {1.0}});
  spec.teams[1].obs_kernel = Kernel({{1.0}, {1.0}});
  CHECK(HasEntry(ValidateStaticSpec(spec), "distinct"));
}

TEST_CASE("negative built-in cost is caught by probing") {
  StaticGameSpec spec = testing::SingleWorldBinary(
      CostFunction::TrackMean{false, false, 2.0, -1.0, 0.0},
      CostFunction::Constant{0.0});
  CHECK(HasEntry(ValidateStaticSpec(spec), "negative cost"));
}

TEST_CASE("dynamic validation") {
  DynamicGameSpec spec = testing::CrowdGame();
  CHECK(ValidateDynamicSpec(spec).ok());
  spec.horizon = 0;
  CHECK(HasEntry(ValidateDynamicSpec(spec), "horizon must be >= 1"));
  spec = testing::CrowdGame();
  spec.teams[0].transitions = {
      Transition::Fixed(2, 2, {0.9, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0})};
  CHECK(HasEntry(ValidateDynamicSpec(spec), "row"));
}

TEST_CASE("statistics") {
  const std::vector<double> p = {0.3, 0.7};
  CHECK(ApplyStatistic(StatisticMap::Identity(), p) == p);
  CHECK(ApplyStatistic(StatisticMap::MeanEmbedding({0.0, 1.0}), p)[0] ==
        doctest::Approx(0.7));
  CHECK(ApplyStatistic(StatisticMap::MeanEmbedding({2.0, 2.0}), p)[0] ==
        doctest::Approx(2.0));
  CHECK_THROWS_AS(ApplyStatistic(StatisticMap::MeanEmbedding({1.0}), p), Error);
}

TEST_CASE("mean embedding is Lipschitz in total variation") {
  Rng rng(11);
  std::vector<double> e(4);
  for (double& x : e) x = rng.Uniform();
  const double emax = *std::max_element(e.begin(), e.end());
  const auto xi = StatisticMap::MeanEmbedding(e);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> p(4), q(4);
    for (double& x : p) x = rng.Uniform();
    for (double& x : q) x = rng.Uniform();
    p = ProbVec::Normalized(p).vec();
    q = ProbVec::Normalized(q).vec();
    const double gap = std::abs(ApplyStatistic(xi, p)[0] - ApplyStatistic(xi, q)[0]);
    CHECK(gap <= emax * TotalVariation(p, q) * 2 + 1e-15);
  }
}

TEST_CASE("static cost evaluation") {
  const StaticGameSpec spec = testing::NoisyTrackingGame();
  const std::vector<double> any = {0.5, 0.5};
  CHECK(spec.Cost(0, 0, 1, any, std::vector<double>{1.0, 0.0}) == 1.0);
  CHECK(spec.Cost(0, 0, 0, any, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(0.25));
  CHECK(testing::ConstantGame(3.0).Cost(1, 0, 1, any, any) == 3.0);
  CHECK_THROWS_AS(spec.Cost(0, 2, 0, any, any), Error);
  CHECK_THROWS_AS(spec.Cost(0, 0, 2, any, any), Error);
}

TEST_CASE("cost is invariant under permutations of the sample lists") {
  const StaticGameSpec spec = testing::NoisyTrackingGame();
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> a(6), b(6);
    for (int& x : a) x = static_cast<int>(rng() % 2);
    for (int& x : b) x = static_cast<int>(rng() % 2);
    const double before =
        spec.Cost(0, 1, 1, EmpMeasure(a, 2).vec(), EmpMeasure(b, 2).vec());
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    const double after =
        spec.Cost(0, 1, 1, EmpMeasure(a, 2).vec(), EmpMeasure(b, 2).vec());
    CHECK(before == after);
  }
}

TEST_CASE("grid tables interpolate multilinearly") {
  GridAxis axis{StatSlot::Parse("u2"), 1, {0.0, 1.0}};
  CostFunction::Table table;
  table.worlds = 1;
  table.states = 1;
  table.actions = 2;
  table.grid = GridInterpolator({axis});
  table.values = {0.0, 1.0, 2.0, 4.0};  // (u, point)
  const CostFunction cost(0, table);
  StatArgs args;
  args.action[0] = {0.5, 0.5};
  args.action[1] = {0.75, 0.25};
  CHECK(cost.Eval(0, 0, 0, args) == doctest::Approx(0.25));
  CHECK(cost.Eval(0, 0, 1, args) == doctest::Approx(2.5));
  args.action[1] = {-1.0, 2.0};  // clamped to the last grid point
  CHECK(cost.Eval(0, 0, 1, args) == doctest::Approx(4.0));
  CHECK(StatSlot::Parse("x1").Name() == "x1");
}

TEST_CASE("copy-action transition") {
  const Transition t = Transition::CopyAction(2, 0.2);
  std::vector<double> table;
  t.Fill(StatArgs{}, &table);
  // [x][u][x']
  CHECK(table[(0 * 2 + 1) * 2 + 1] == doctest::Approx(0.9));
  CHECK(table[(1 * 2 + 0) * 2 + 1] == doctest::Approx(0.1));
}

}  // namespace
}  // namespace teamfield
