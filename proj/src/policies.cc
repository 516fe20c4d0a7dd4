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

#include "teamfield/policies.h"

#include <algorithm>
#include <numeric>
#include <string>

namespace teamfield {

std::int64_t MapCode(const DetPolicy& map, int num_actions) {
  std::int64_t code = 0;
  for (int a : map.actions) code = code * num_actions + a;
  return code;
}

DetPolicy MapFromCode(std::int64_t code, int num_obs, int num_actions) {
  DetPolicy map;
  map.actions.assign(num_obs, 0);
  for (int y = num_obs - 1; y >= 0; --y) {
    map.actions[y] = static_cast<int>(code % num_actions);
    code /= num_actions;
  }
  return map;
}

std::int64_t NumMaps(int num_obs, int num_actions, std::int64_t limit) {
  std::int64_t count = 1;
  for (int y = 0; y < num_obs; ++y) {
    if (count > limit / num_actions) {
      throw BudgetError("number of deterministic maps |U|^|Y| = " +
                        std::to_string(num_actions) + "^" +
                        std::to_string(num_obs) + " exceeds budget " +
                        std::to_string(limit));
    }
    count *= num_actions;
  }
  return count;
}

TeamPolicy TeamPolicy::SymmetricIid(BehavioralPolicy policy) {
  TeamPolicy p;
  p.kind_ = Kind::kSymmetricIid;
  p.shared_ = std::move(policy);
  return p;
}

TeamPolicy TeamPolicy::Product(std::vector<BehavioralPolicy> per_dm) {
  if (per_dm.empty()) throw Error("product policy needs at least one DM");
  TeamPolicy p;
  p.kind_ = Kind::kProduct;
  p.per_dm_ = std::move(per_dm);
  return p;
}

TeamPolicy TeamPolicy::Mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) throw Error("mixture policy needs a component");
  const size_t n = components.front().profile.size();
  KahanSum total;
  for (const auto& c : components) {
    if (c.profile.size() != n || n == 0) {
      throw Error("mixture profiles must have equal, positive DM counts");
    }
    if (!(c.weight >= 0.0)) throw Error("mixture weights must be nonnegative");
    total.Add(c.weight);
  }
  if (std::abs(total.value() - 1.0) > kSimplexTolerance) {
    throw Error("mixture weights must sum to 1");
  }
  TeamPolicy p;
  p.kind_ = Kind::kMixture;
  p.components_ = std::move(components);
  return p;
}

std::optional<int> TeamPolicy::num_dms() const {
  switch (kind_) {
    case Kind::kSymmetricIid:
      return std::nullopt;
    case Kind::kProduct:
      return static_cast<int>(per_dm_.size());
    case Kind::kMixture:
      return static_cast<int>(components_.front().profile.size());
  }
  return std::nullopt;
}

void TeamPolicy::Check(int n, int num_obs, int num_actions) const {
  if (auto fixed = num_dms(); fixed && *fixed != n) {
    throw Error("policy has " + std::to_string(*fixed) + " DMs, game has " +
                std::to_string(n));
  }
  auto check_kernel = [&](const Kernel& k) {
    if (k.rows() != num_obs || k.cols() != num_actions) {
      throw Error("policy kernel shape does not match the team's spaces");
    }
  };
  switch (kind_) {
    case Kind::kSymmetricIid:
      check_kernel(shared_.kernel);
      break;
    case Kind::kProduct:
      for (const auto& b : per_dm_) check_kernel(b.kernel);
      break;
    case Kind::kMixture:
      for (const auto& c : components_) {
        for (const auto& map : c.profile) {
          if (static_cast<int>(map.actions.size()) != num_obs) {
            throw Error("deterministic map length does not match |Y|");
          }
          for (int a : map.actions) {
            if (a < 0 || a >= num_actions) {
              throw Error("deterministic map action out of range");
            }
          }
        }
      }
      break;
  }
}

std::vector<WeightedKernels> TeamPolicy::Realizations(int n,
                                                      int num_actions) const {
  std::vector<WeightedKernels> out;
  switch (kind_) {
    case Kind::kSymmetricIid:
      out.push_back({1.0, std::vector<Kernel>(n, shared_.kernel)});
      break;
    case Kind::kProduct: {
      WeightedKernels r;
      for (const auto& b : per_dm_) r.kernels.push_back(b.kernel);
      out.push_back(std::move(r));
      break;
    }
    case Kind::kMixture:
      for (const auto& c : components_) {
        if (c.weight == 0.0) continue;
        WeightedKernels r;
        r.weight = c.weight;
        for (const auto& map : c.profile) {
          r.kernels.push_back(Kernel::Deterministic(num_actions, map.actions));
        }
        out.push_back(std::move(r));
      }
      break;
  }
  return out;
}

Kernel TeamPolicy::MarginalKernel(int dm, int n, int num_obs,
                                  int num_actions) const {
  Check(n, num_obs, num_actions);
  switch (kind_) {
    case Kind::kSymmetricIid:
      return shared_.kernel;
    case Kind::kProduct:
      return per_dm_.at(dm).kernel;
    case Kind::kMixture: {
      std::vector<double> data(num_obs * num_actions, 0.0);
      for (const auto& c : components_) {
        const auto& map = c.profile.at(dm);
        for (int y = 0; y < num_obs; ++y) {
          data[y * num_actions + map.actions[y]] += c.weight;
        }
      }
      return Kernel(num_obs, num_actions, std::move(data));
    }
  }
  throw Error("unreachable");
}

namespace {

// Maps with positive probability under a kernel, with their probabilities.
std::vector<std::pair<std::int64_t, double>> MapLaw(const Kernel& k) {
  std::vector<std::pair<std::int64_t, double>> law = {{0, 1.0}};
  for (int y = 0; y < k.rows(); ++y) {
    std::vector<std::pair<std::int64_t, double>> next;
    for (const auto& [code, prob] : law) {
      for (int a = 0; a < k.cols(); ++a) {
        if (k(y, a) > 0.0) next.emplace_back(code * k.cols() + a, prob * k(y, a));
      }
    }
    law.swap(next);
  }
  return law;
}

ProfileLaw ProductLaw(const std::vector<const Kernel*>& kernels,
                      std::size_t support_cap) {
  ProfileLaw law;
  law[{}] = 1.0;
  for (const Kernel* k : kernels) {
    const auto marginal = MapLaw(*k);
    const std::size_t size = law.size() * marginal.size();
    if (size > support_cap) {
      throw BudgetError("support-size overflow: mixture needs at least " +
                        std::to_string(size) + " profiles, cap is " +
                        std::to_string(support_cap));
    }
    ProfileLaw next;
    for (const auto& [profile, prob] : law) {
      for (const auto& [code, p] : marginal) {
        auto extended = profile;
        extended.push_back(code);
        next[extended] += prob * p;
      }
    }
    law.swap(next);
  }
  return law;
}

TeamPolicy FromLaw(const ProfileLaw& law, int num_obs, int num_actions) {
  std::vector<MixtureComponent> components;
  for (const auto& [codes, prob] : law) {
    MixtureComponent c;
    c.weight = prob;
    for (std::int64_t code : codes) {
      c.profile.push_back(MapFromCode(code, num_obs, num_actions));
    }
    components.push_back(std::move(c));
  }
  return TeamPolicy::Mixture(std::move(components));
}

void CheckPermutationSize(int n) {
  if (n > kMaxPermutationDms) {
    throw BudgetError("permutation enumeration limited to N <= " +
                      std::to_string(kMaxPermutationDms) + ", got N = " +
                      std::to_string(n));
  }
}

}  // namespace

ProfileLaw JointProfileLaw(const TeamPolicy& p, int n, int num_obs,
                           int num_actions, std::size_t support_cap) {
  p.Check(n, num_obs, num_actions);
  switch (p.kind()) {
    case TeamPolicy::Kind::kSymmetricIid:
      return ProductLaw(std::vector<const Kernel*>(n, &p.shared().kernel),
                        support_cap);
    case TeamPolicy::Kind::kProduct: {
      std::vector<const Kernel*> kernels;
      for (const auto& b : p.per_dm()) kernels.push_back(&b.kernel);
      return ProductLaw(kernels, support_cap);
    }
    case TeamPolicy::Kind::kMixture: {
      ProfileLaw law;
      for (const auto& c : p.components()) {
        if (c.weight == 0.0) continue;
        std::vector<std::int64_t> codes;
        for (const auto& map : c.profile) {
          codes.push_back(MapCode(map, num_actions));
        }
        law[codes] += c.weight;
      }
      return law;
    }
  }
  throw Error("unreachable");
}

double LawDistance(const ProfileLaw& a, const ProfileLaw& b) {
  double total = 0.0;
  for (const auto& [key, prob] : a) {
    auto it = b.find(key);
    total += std::abs(prob - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [key, prob] : b) {
    if (!a.contains(key)) total += prob;
  }
  return 0.5 * total;
}

TeamPolicy ExpandToMixture(const TeamPolicy& p, int n, int num_obs,
                           int num_actions, std::size_t support_cap) {
  return FromLaw(JointProfileLaw(p, n, num_obs, num_actions, support_cap),
                 num_obs, num_actions);
}

TeamPolicy BehavioralToMixture(const BehavioralPolicy& b, int n,
                               std::size_t support_cap) {
  if (n < 1) throw Error("behavioral_to_mixture needs N >= 1");
  return ExpandToMixture(TeamPolicy::SymmetricIid(b), n, b.kernel.rows(),
                         b.kernel.cols(), support_cap);
}

TeamPolicy PermuteProfile(const TeamPolicy& p, std::span<const int> sigma) {
  std::vector<int> check(sigma.begin(), sigma.end());
  std::sort(check.begin(), check.end());
  for (size_t i = 0; i < check.size(); ++i) {
    if (check[i] != static_cast<int>(i)) throw Error("invalid permutation");
  }
  const int n = static_cast<int>(sigma.size());
  switch (p.kind()) {
    case TeamPolicy::Kind::kSymmetricIid:
      return p;
    case TeamPolicy::Kind::kProduct: {
      if (p.per_dm().size() != sigma.size()) {
        throw Error("permutation length does not match DM count");
      }
      std::vector<BehavioralPolicy> per_dm;
      for (int k = 0; k < n; ++k) per_dm.push_back(p.per_dm()[sigma[k]]);
      return TeamPolicy::Product(std::move(per_dm));
    }
    case TeamPolicy::Kind::kMixture: {
      if (*p.num_dms() != n) {
        throw Error("permutation length does not match DM count");
      }
      std::vector<MixtureComponent> components;
      for (const auto& c : p.components()) {
        MixtureComponent out{c.weight, {}};
        for (int k = 0; k < n; ++k) out.profile.push_back(c.profile[sigma[k]]);
        components.push_back(std::move(out));
      }
      return TeamPolicy::Mixture(std::move(components));
    }
  }
  throw Error("unreachable");
}

std::vector<std::vector<int>> AllPermutations(int n) {
  std::vector<int> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(sigma);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return out;
}

TeamPolicy Symmetrize(const TeamPolicy& p, int n, int num_obs, int num_actions,
                      std::size_t support_cap) {
  CheckPermutationSize(n);
  const ProfileLaw law = JointProfileLaw(p, n, num_obs, num_actions, support_cap);
  const auto perms = AllPermutations(n);
  const double share = 1.0 / perms.size();
  ProfileLaw averaged;
  for (const auto& sigma : perms) {
    for (const auto& [codes, prob] : law) {
      std::vector<std::int64_t> permuted(n);
      for (int k = 0; k < n; ++k) permuted[k] = codes[sigma[k]];
      averaged[permuted] += prob * share;
    }
  }
  if (averaged.size() > support_cap * perms.size()) {
    throw BudgetError("support-size overflow in symmetrize");
  }
  return FromLaw(averaged, num_obs, num_actions);
}

bool IsExchangeable(const TeamPolicy& p, int n, int num_obs, int num_actions,
                    double tol) {
  if (p.kind() == TeamPolicy::Kind::kSymmetricIid) return true;
  CheckPermutationSize(n);
  ProfileLaw law;
  try {
    law = JointProfileLaw(p, n, num_obs, num_actions);
  } catch (const BudgetError&) {
    if (p.kind() != TeamPolicy::Kind::kProduct) throw;
    // Independent DMs are exchangeable iff their marginals coincide.
    for (const auto& b : p.per_dm()) {
      if (b.kernel.MaxRowTv(p.per_dm().front().kernel) > tol) return false;
    }
    return true;
  }
  for (const auto& sigma : AllPermutations(n)) {
    ProfileLaw permuted;
    for (const auto& [codes, prob] : law) {
      std::vector<std::int64_t> moved(n);
      for (int k = 0; k < n; ++k) moved[k] = codes[sigma[k]];
      permuted[moved] += prob;
    }
    if (LawDistance(law, permuted) > tol) return false;
  }
  return true;
}

std::vector<DetPolicy> SampleProfile(const TeamPolicy& p, int n, Rng& rng) {
  auto draw_map = [&rng](const Kernel& k) {
    DetPolicy map;
    for (int y = 0; y < k.rows(); ++y) {
      map.actions.push_back(SampleIndex(k.Row(y), rng.Uniform()));
    }
    return map;
  };
  std::vector<DetPolicy> out;
  switch (p.kind()) {
    case TeamPolicy::Kind::kSymmetricIid:
      for (int k = 0; k < n; ++k) out.push_back(draw_map(p.shared().kernel));
      break;
    case TeamPolicy::Kind::kProduct:
      if (static_cast<int>(p.per_dm().size()) != n) {
        throw Error("product policy DM count mismatch");
      }
      for (const auto& b : p.per_dm()) out.push_back(draw_map(b.kernel));
      break;
    case TeamPolicy::Kind::kMixture: {
      if (*p.num_dms() != n) throw Error("mixture policy DM count mismatch");
      std::vector<double> weights;
      for (const auto& c : p.components()) weights.push_back(c.weight);
      out = p.components()[SampleIndex(weights, rng.Uniform())].profile;
      break;
    }
  }
  return out;
}

std::vector<double> JointActionLaw(const TeamPolicy& p, int n,
                                   const Kernel& obs_kernel, int world,
                                   int num_actions) {
  p.Check(n, obs_kernel.cols(), num_actions);
  std::int64_t size = 1;
  for (int k = 0; k < n; ++k) size *= num_actions;
  std::vector<double> law(size, 0.0);
  for (const auto& r : p.Realizations(n, num_actions)) {
    std::vector<double> joint = {r.weight};
    for (const Kernel& k : r.kernels) {
      std::vector<double> marginal(num_actions, 0.0);
      for (int y = 0; y < obs_kernel.cols(); ++y) {
        for (int a = 0; a < num_actions; ++a) {
          marginal[a] += obs_kernel(world, y) * k(y, a);
        }
      }
      std::vector<double> next(joint.size() * num_actions);
      for (size_t c = 0; c < joint.size(); ++c) {
        for (int a = 0; a < num_actions; ++a) {
          next[c * num_actions + a] = joint[c] * marginal[a];
        }
      }
      joint.swap(next);
    }
    for (std::int64_t c = 0; c < size; ++c) law[c] += joint[c];
  }
  return law;
}

}  // namespace teamfield
