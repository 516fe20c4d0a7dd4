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

#ifndef TEAMFIELD_POLICIES_H_
#define TEAMFIELD_POLICIES_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "teamfield/prob.h"
#include "teamfield/rng.h"

namespace teamfield {

inline constexpr std::size_t kDefaultSupportCap = 4096;
inline constexpr int kMaxPermutationDms = 6;

// A deterministic map from observations to actions.
struct DetPolicy {
  std::vector<int> actions;  // actions[y]

  auto operator<=>(const DetPolicy&) const = default;
};

// Mixed-radix code of a map, observation 0 most significant.
std::int64_t MapCode(const DetPolicy& map, int num_actions);
DetPolicy MapFromCode(std::int64_t code, int num_obs, int num_actions);
// Number of deterministic maps, |U|^|Y|; throws BudgetError above `limit`.
std::int64_t NumMaps(int num_obs, int num_actions,
                     std::int64_t limit = std::int64_t{1} << 40);

// Private randomization: a stochastic kernel from observations to actions.
struct BehavioralPolicy {
  Kernel kernel;

  static BehavioralPolicy FromMap(const DetPolicy& map, int num_actions) {
    return {Kernel::Deterministic(num_actions, map.actions)};
  }
  bool operator==(const BehavioralPolicy&) const = default;
};

struct MixtureComponent {
  double weight = 0.0;
  std::vector<DetPolicy> profile;  // one map per DM

  bool operator==(const MixtureComponent&) const = default;
};

// Per-DM kernels of one common-randomness realization.
struct WeightedKernels {
  double weight = 1.0;
  std::vector<Kernel> kernels;
};

// A randomized policy for one team.
//   symmetric-iid: every DM draws independently from one kernel.
//   product: DM k draws independently from its own kernel.
//   mixture: a common draw picks one deterministic profile.
class TeamPolicy {
 public:
  enum class Kind { kSymmetricIid, kProduct, kMixture };

  static TeamPolicy SymmetricIid(BehavioralPolicy policy);
  static TeamPolicy Product(std::vector<BehavioralPolicy> per_dm);
  static TeamPolicy Mixture(std::vector<MixtureComponent> components);

  Kind kind() const { return kind_; }
  const BehavioralPolicy& shared() const { return shared_; }
  const std::vector<BehavioralPolicy>& per_dm() const { return per_dm_; }
  const std::vector<MixtureComponent>& components() const {
    return components_;
  }

  // DM count fixed by the representation; nullopt for symmetric-iid.
  std::optional<int> num_dms() const;

  // Throws unless the policy acts on (num_obs, num_actions) with `n` DMs.
  void Check(int n, int num_obs, int num_actions) const;

  // The per-DM kernels of each common-randomness realization.
  std::vector<WeightedKernels> Realizations(int n, int num_actions) const;

  // Marginal kernel of one DM.
  Kernel MarginalKernel(int dm, int n, int num_obs, int num_actions) const;

  bool operator==(const TeamPolicy&) const = default;

 private:
  Kind kind_ = Kind::kSymmetricIid;
  BehavioralPolicy shared_;
  std::vector<BehavioralPolicy> per_dm_;
  std::vector<MixtureComponent> components_;
};

// Joint law over indexed profiles, keyed by per-DM map codes.
using ProfileLaw = std::map<std::vector<std::int64_t>, double>;

// Expands any team policy into a finite mixture with merged duplicate
// profiles in lexicographic order of map codes.
TeamPolicy ExpandToMixture(const TeamPolicy& p, int n, int num_obs,
                           int num_actions,
                           std::size_t support_cap = kDefaultSupportCap);

ProfileLaw JointProfileLaw(const TeamPolicy& p, int n, int num_obs,
                           int num_actions,
                           std::size_t support_cap = kDefaultSupportCap);

double LawDistance(const ProfileLaw& a, const ProfileLaw& b);

// Realizes independent per-DM draws from `b` as a mixture over deterministic
// profiles of `n` DMs with product weights.
TeamPolicy BehavioralToMixture(const BehavioralPolicy& b, int n,
                               std::size_t support_cap = kDefaultSupportCap);

// DM k's role is taken by DM sigma[k]. Symmetric-iid policies are unchanged.
TeamPolicy PermuteProfile(const TeamPolicy& p, std::span<const int> sigma);

// Average of all n! permutations of p, as a mixture.
TeamPolicy Symmetrize(const TeamPolicy& p, int n, int num_obs, int num_actions,
                      std::size_t support_cap = kDefaultSupportCap);

// True iff every permutation of p induces the same profile law within `tol`
// in total variation.
bool IsExchangeable(const TeamPolicy& p, int n, int num_obs, int num_actions,
                    double tol = 1e-12);

// Draws the realized deterministic maps of `n` DMs.
std::vector<DetPolicy> SampleProfile(const TeamPolicy& p, int n, Rng& rng);

// Joint law of the n action tuple given one world state, over codes with
// DM 0 most significant.
std::vector<double> JointActionLaw(const TeamPolicy& p, int n,
                                   const Kernel& obs_kernel, int world,
                                   int num_actions);

// All permutations of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> AllPermutations(int n);

}  // namespace teamfield

#endif  // TEAMFIELD_POLICIES_H_
