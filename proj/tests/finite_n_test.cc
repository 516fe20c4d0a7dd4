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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "rational_oracle.h"
#include "teamfield/finite_n.h"
#include "teamfield/mf_static.h"
#include "teamfield/rng.h"
#include "test_games.h"

namespace teamfield {
namespace {

const DetPolicy kZero{{0}};
const DetPolicy kOne{{1}};

TeamPolicy Iid(const Kernel& k) { return TeamPolicy::SymmetricIid({k}); }
TeamPolicy Fixed(std::vector<DetPolicy> profile) {
  return TeamPolicy::Mixture({{1.0, std::move(profile)}});
}

// Kernels with entries in multiples of 1/8.
Kernel DyadicKernel(Rng& rng, int rows, int cols) {
  std::vector<double> data(rows * cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int unit = 0; unit < 8; ++unit) data[r * cols + rng() % cols] += 0.125;
  }
  return Kernel(rows, cols, data);
}

Kernel RandomKernel(Rng& rng, int rows, int cols) {
  std::vector<double> data(rows * cols);
  for (int r = 0; r < rows; ++r) {
    double total = 0.0;
    for (int c = 0; c < cols; ++c) total += data[r * cols + c] = rng.Uniform() + 1e-3;
    for (int c = 0; c < cols; ++c) data[r * cols + c] /= total;
  }
  return Kernel(rows, cols, data);
}

// A random policy of any representation for n DMs.
TeamPolicy RandomPolicy(Rng& rng, int n, int ny, int nu, bool dyadic) {
  auto kernel = [&] { return dyadic ? DyadicKernel(rng, ny, nu) : RandomKernel(rng, ny, nu); };
  switch (rng() % 3) {
    case 0:
      return Iid(kernel());
    case 1: {
      std::vector<BehavioralPolicy> per_dm;
      for (int k = 0; k < n; ++k) per_dm.push_back({kernel()});
      return TeamPolicy::Product(per_dm);
    }
    default: {
      std::vector<MixtureComponent> comps;
      const int m = 1 + static_cast<int>(rng() % 3);
      for (int c = 0; c < m; ++c) {
        MixtureComponent comp;
        comp.weight = dyadic ? 0.0 : rng.Uniform() + 0.01;
        for (int k = 0; k < n; ++k) {
          comp.profile.push_back(MapFromCode(rng() % NumMaps(ny, nu), ny, nu));
        }
        comps.push_back(comp);
      }
      if (dyadic) {
        for (int unit = 0; unit < 8; ++unit) comps[rng() % m].weight += 0.125;
      } else {
        double total = 0.0;
        for (const auto& c : comps) total += c.weight;
        for (auto& c : comps) c.weight /= total;
      }
      return TeamPolicy::Mixture(comps);
    }
  }
}

TEST_CASE("exact cost examples") {
  const FiniteGameInstance constant{testing::ConstantGame(3.0), {3, 2}};
  CHECK(ExactCost(constant, {Iid(Kernel::Uniform(1, 2)), Iid(Kernel::Uniform(1, 2))}, 0) ==
        doctest::Approx(3.0));
  const FiniteGameInstance coord{testing::CoordinationGame(), {2, 1}};
  const TeamPolicy other = Fixed({kZero});
  CHECK(ExactCost(coord, {Fixed({kZero, kZero}), other}, 0) == 0.0);
  CHECK(ExactCost(coord, {Fixed({kZero, kOne}), other}, 0) == doctest::Approx(0.25));
}

TEST_CASE("exact cost matches the rational brute force") {
  Rng rng(101);
  for (const std::array<int, 2> n : {std::array<int, 2>{1, 1}, {2, 1}, {2, 3}, {3, 2}}) {
    const FiniteGameInstance inst{testing::DyadicGame(), n};
    for (int trial = 0; trial < 6; ++trial) {
      const PolicyPair p = {RandomPolicy(rng, n[0], 2, 2, true),
                            RandomPolicy(rng, n[1], 2, 2, true)};
      for (int team = 0; team < 2; ++team) {
        const double oracle =
            static_cast<double>(testing::RationalExactCost(inst, p, team));
        CHECK(std::abs(ExactCost(inst, p, team) - oracle) <= 1e-13);
      }
    }
  }
  const FiniteGameInstance spread{testing::SpreadGame(), {3, 2}};
  const PolicyPair p = {Iid(Kernel({{0.375, 0.625}})), Fixed({kOne, kZero})};
  CHECK(std::abs(ExactCost(spread, p, 0) -
                 static_cast<double>(testing::RationalExactCost(spread, p, 0))) <= 1e-13);
}

TEST_CASE("exact cost is invariant under permutations of either team") {
  Rng rng(5);
  const FiniteGameInstance inst{testing::NoisyTrackingGame(), {3, 3}};
  const std::vector<int> sigma = {2, 0, 1};
  for (int trial = 0; trial < 20; ++trial) {
    const PolicyPair p = {RandomPolicy(rng, 3, 2, 2, false),
                          RandomPolicy(rng, 3, 2, 2, false)};
    for (int team = 0; team < 2; ++team) {
      const double base = ExactCost(inst, p, team);
      PolicyPair q = p;
      q[0] = PermuteProfile(p[0], sigma);
      CHECK(std::abs(ExactCost(inst, q, team) - base) <= 1e-12);
      q = p;
      q[1] = PermuteProfile(p[1], sigma);
      CHECK(std::abs(ExactCost(inst, q, team) - base) <= 1e-12);
    }
  }
}

TEST_CASE("symmetric-iid and its mixture expansion cost the same") {
  Rng rng(6);
  const FiniteGameInstance inst{testing::NoisyTrackingGame(), {2, 3}};
  for (int trial = 0; trial < 10; ++trial) {
    const BehavioralPolicy b0{RandomKernel(rng, 2, 2)}, b1{RandomKernel(rng, 2, 2)};
    const PolicyPair iid = {TeamPolicy::SymmetricIid(b0), TeamPolicy::SymmetricIid(b1)};
    const PolicyPair mix = {BehavioralToMixture(b0, 2), BehavioralToMixture(b1, 3)};
    for (int team = 0; team < 2; ++team) {
      CHECK(std::abs(ExactCost(inst, iid, team) - ExactCost(inst, mix, team)) <= 1e-12);
    }
  }
}

TEST_CASE("symmetrization is cost neutral against exchangeable opponents") {
  Rng rng(8);
  const FiniteGameInstance inst{testing::NoisyTrackingGame(), {3, 2}};
  for (int trial = 0; trial < 10; ++trial) {
    const TeamPolicy p = RandomPolicy(rng, 3, 2, 2, false);
    const TeamPolicy opp = Symmetrize(RandomPolicy(rng, 2, 2, 2, false), 2, 2, 2);
    for (int team = 0; team < 2; ++team) {
      CHECK(std::abs(ExactCost(inst, {p, opp}, team) -
                     ExactCost(inst, {Symmetrize(p, 3, 2, 2), opp}, team)) <= 1e-12);
    }
  }
}

TEST_CASE("team best response examples") {
  const FiniteGameInstance constant{testing::ConstantGame(2.0), {2, 2}};
  const auto c = TeamBestResponseExact(constant, Iid(Kernel::Uniform(1, 2)), 0);
  CHECK(c.value == doctest::Approx(2.0));
  CHECK(c.profile == std::vector<DetPolicy>{kZero, kZero});

  const FiniteGameInstance coord{testing::CoordinationGame(), {2, 2}};
  const auto co = TeamBestResponseExact(coord, Iid(Kernel::Uniform(1, 2)), 0);
  CHECK(co.value == 0.0);
  CHECK(co.profile == std::vector<DetPolicy>{kZero, kZero});

  const FiniteGameInstance spread{testing::SpreadGame(), {2, 2}};
  const auto s = TeamBestResponseExact(spread, Iid(Kernel::Uniform(1, 2)), 0);
  CHECK(s.value == doctest::Approx(0.5));
  CHECK(s.profile == std::vector<DetPolicy>{kZero, kOne});
  // All four profiles by hand.
  double best = 1e9;
  for (const auto& a : {kZero, kOne}) {
    for (const auto& b : {kZero, kOne}) {
      best = std::min(best, ExactCost(spread, {Fixed({a, b}), Iid(Kernel::Uniform(1, 2))}, 0));
    }
  }
  CHECK(best == doctest::Approx(s.value));
}

TEST_CASE("team best response beats random mixed policies") {
  Rng rng(12);
  for (const auto& spec : {testing::NoisyTrackingGame(), testing::DyadicGame(),
                           testing::SpreadGame()}) {
    const int ny = spec.num_obs(0);
    const FiniteGameInstance inst{spec, {3, 2}};
    const TeamPolicy opp = RandomPolicy(rng, 2, spec.num_obs(1), 2, false);
    const auto br = TeamBestResponseExact(inst, opp, 0);
    CHECK(std::abs(ExactCost(inst, {Fixed(br.profile), opp}, 0) - br.value) <= 1e-12);
    for (int trial = 0; trial < 50; ++trial) {
      const TeamPolicy p = RandomPolicy(rng, 3, ny, 2, false);
      CHECK(br.value <= ExactCost(inst, {p, opp}, 0) + 1e-12);
    }
  }
}

TEST_CASE("budget errors") {
  const FiniteGameInstance big{testing::NoisyTrackingGame(), {30, 30}};
  const PolicyPair p = {Iid(Kernel::Uniform(2, 2)), Iid(Kernel::Uniform(2, 2))};
  CHECK_THROWS_AS(TeamBestResponseExact(big, p[1], 0, 1000), BudgetError);
  CHECK_THROWS_AS(ExactCost(big, p, 0, 1000), BudgetError);
}

TEST_CASE("certification") {
  const FiniteGameInstance constant{testing::ConstantGame(1.0), {2, 3}};
  const auto c = EpsilonNeCertify(
      constant, {Iid(Kernel::Uniform(1, 2)), Iid(Kernel::Uniform(1, 2))});
  CHECK(c.eps[0] == doctest::Approx(0.0));
  CHECK(c.eps[1] == doctest::Approx(0.0));
  CHECK(c.method == CertMethod::kExact);

  const FiniteGameInstance coord{testing::CoordinationGame(), {3, 3}};
  const auto z = EpsilonNeCertify(coord, {Fixed({kZero, kZero, kZero}),
                                          Fixed({kZero, kZero, kZero})});
  CHECK(z.eps[0] == 0.0);
  CHECK(z.eps[1] == 0.0);

  Rng rng(31);
  const FiniteGameInstance inst{testing::NoisyTrackingGame(), {2, 3}};
  for (int trial = 0; trial < 10; ++trial) {
    const PolicyPair p = {RandomPolicy(rng, 2, 2, 2, false),
                          RandomPolicy(rng, 3, 2, 2, false)};
    const auto r = EpsilonNeCertify(inst, p);
    CHECK(r.eps[0] >= -1e-9);
    CHECK(r.eps[1] >= -1e-9);
  }

  // Mutual best responses certify at zero.
  PolicyPair p = {Iid(Kernel::Uniform(2, 2)), Iid(Kernel::Uniform(2, 2))};
  for (int round = 0; round < 10; ++round) {
    p[0] = Fixed(TeamBestResponseExact(inst, p[1], 0).profile);
    p[1] = Fixed(TeamBestResponseExact(inst, p[0], 1).profile);
  }
  const auto mutual = EpsilonNeCertify(inst, p);
  CHECK(mutual.eps[1] == doctest::Approx(0.0));
  if (std::abs(mutual.eps[0]) <= 1e-12) CHECK(mutual.eps[1] <= 1e-12);
}

TEST_CASE("Monte Carlo cost") {
  const PolicyPair uni = {Iid(Kernel::Uniform(1, 2)), Iid(Kernel::Uniform(1, 2))};
  const auto constant = McCost({testing::ConstantGame(3.0), {4, 4}}, uni, 0, 500, 1);
  CHECK(constant.estimate == 3.0);
  CHECK(constant.ci_halfwidth == 0.0);

  const FiniteGameInstance coord{testing::CoordinationGame(), {2, 2}};
  CHECK(ExactCost(coord, uni, 0) == doctest::Approx(0.125));
  const auto est = McCost(coord, uni, 0, 4000, 7);
  CHECK(std::abs(est.estimate - 0.125) <= est.ci_halfwidth);
}

TEST_CASE("Monte Carlo covers the exact cost") {
  const FiniteGameInstance inst{testing::NoisyTrackingGame(), {3, 2}};
  Rng rng(44);
  const PolicyPair p = {Iid(RandomKernel(rng, 2, 2)),
                        TeamPolicy::Product({{RandomKernel(rng, 2, 2)},
                                             {RandomKernel(rng, 2, 2)}})};
  const double exact = ExactCost(inst, p, 0);
  // A calibrated 99% interval misses twice or more in 100 trials about a
  // quarter of the time, so coverage is measured over 1000 trials with
  // binomial slack.
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto est = McCost(inst, p, 0, 1000, seed);
    covered += std::abs(est.estimate - exact) <= est.ci_halfwidth + 1e-12;
  }
  MESSAGE("coverage ", covered, "/1000");
  CHECK(covered >= 985);
}

TEST_CASE("epsilon sweep") {
  const std::array<Kernel, 2> uniform = {Kernel::Uniform(1, 2), Kernel::Uniform(1, 2)};
  for (const auto& row : EpsilonSweep(testing::ConstantGame(1.0), uniform,
                                      SweepSizes({2, 3}))) {
    CHECK(row.report.eps[0] == doctest::Approx(0.0));
    CHECK(row.report.eps[1] == doctest::Approx(0.0));
  }
  const std::array<Kernel, 2> zero = {Kernel::Deterministic(2, {0}),
                                      Kernel::Deterministic(2, {0})};
  for (const auto& row : EpsilonSweep(testing::CoordinationGame(), zero,
                                      SweepSizes({2, 3, 4}))) {
    CHECK(row.report.eps[0] == 0.0);
    CHECK(row.report.eps[1] == 0.0);
  }
  const auto mismatch = EpsilonSweep(testing::MismatchGame(), uniform,
                                     SweepSizes({2, 4, 8}));
  REQUIRE(mismatch.size() == 3);
  for (int i = 0; i < 2; ++i) {
    CHECK(mismatch[2].report.eps[i] <= mismatch[0].report.eps[i] + 1e-12);
    CHECK(mismatch[0].report.eps[i] >= -1e-12);
  }
  const auto ratio = SweepSizes({2, 3}, 2);
  CHECK(ratio[1] == std::array<int, 2>{3, 6});
}

TEST_CASE("sweep falls back to Monte Carlo beyond the exact budget") {
  // Four observations and three actions: 81 maps per DM, far too many
  // multisets of ten DMs to enumerate.
  StaticGameSpec spec = testing::CoordinationGame();
  for (auto& team : spec.teams) {
    team.action_space = {3, {}};
    team.obs_space = {4, {}};
    team.obs_kernel = Kernel::Uniform(1, 4);
  }
  const std::array<Kernel, 2> uniform = {Kernel::Uniform(4, 3), Kernel::Uniform(4, 3)};
  McCertifyOptions mc;
  mc.reps = 200;
  mc.seed = 3;
  mc.resolution = 0.5;
  const auto rows = EpsilonSweep(spec, uniform, {{10, 10}}, mc);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].report.method == CertMethod::kMonteCarlo);
  // Uniform play in a coordination game is beaten by a common vertex.
  CHECK(rows[0].report.eps[0] > 0.3);
  CHECK(rows[0].report.ci_halfwidth > 0.0);
  CHECK_THROWS_AS(EpsilonSweep(spec, uniform, {{10, 10}}), BudgetError);
}

TEST_CASE("restricting to exchangeable best responses loses nothing") {
  Rng rng(77);
  const FiniteGameInstance constant{testing::ConstantGame(2.0), {2, 2}};
  const auto c = CheckExchangeableBrValue(constant, Iid(Kernel::Uniform(1, 2)), 0);
  CHECK(c.v_all == doctest::Approx(2.0));
  CHECK(c.v_exch == doctest::Approx(2.0));

  const FiniteGameInstance spread{testing::SpreadGame(), {2, 2}};
  const auto s = CheckExchangeableBrValue(spread, Iid(Kernel::Uniform(1, 2)), 0);
  CHECK(s.v_all == doctest::Approx(0.5));
  CHECK(s.v_exch == doctest::Approx(0.5));

  for (const auto& spec : {testing::NoisyTrackingGame(), testing::DyadicGame()}) {
    const FiniteGameInstance inst{spec, {3, 3}};
    for (int trial = 0; trial < 5; ++trial) {
      const TeamPolicy opp = Symmetrize(RandomPolicy(rng, 3, 2, 2, false), 3, 2, 2);
      for (int team = 0; team < 2; ++team) {
        const auto v = CheckExchangeableBrValue(inst, opp, team);
        CHECK(std::abs(v.v_all - v.v_exch) <= 1e-9);
      }
    }
  }
  CHECK_THROWS_AS(CheckExchangeableBrValue(spread, Fixed({kZero, kOne}), 0), Error);
}

TEST_CASE("empirical action measures approach the mean-field law") {
  const StaticGameSpec spec = testing::NoisyTrackingGame();
  const Kernel b({{0.3, 0.7}, {0.8, 0.2}});
  const auto law = MeanFieldActionLaw(spec, 0, b);
  for (int w = 0; w < 2; ++w) {
    const auto emp = SampleEmpiricalActionLaw(spec, 0, b, w, 10000, 99 + w);
    // Allowance: 0.05 or three binomial standard deviations, whichever is
    // larger; both dominate at this size.
    const double sigma = std::sqrt(law[w][0] * law[w][1] / 10000);
    CHECK(TotalVariation(emp, law[w]) <= std::max(0.05, 3 * sigma));
    CHECK(TotalVariation(emp, law[w]) <= 3 * sigma + 1e-12);
  }
}

}  // namespace
}  // namespace teamfield
