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

#ifndef TEAMFIELD_IO_H_
#define TEAMFIELD_IO_H_

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "teamfield/dynamic.h"
#include "teamfield/finite_n.h"
#include "teamfield/game.h"
#include "teamfield/mf_static.h"
#include "teamfield/policies.h"

namespace teamfield {

using Json = nlohmann::ordered_json;

inline constexpr char kSchema[] = "teamfield/v1";

// Malformed JSON text or a document that does not follow the schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A spec that parsed but failed validation.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, ValidationReport report)
      : Error(what), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

using GameSpec = std::variant<StaticGameSpec, DynamicGameSpec>;

struct LoadedSpec {
  GameSpec spec;
  ValidationReport report;

  bool is_static() const { return spec.index() == 0; }
  const StaticGameSpec& static_spec() const { return std::get<0>(spec); }
  const DynamicGameSpec& dynamic_spec() const { return std::get<1>(spec); }
};

// Reads a whole file; throws Error naming the path when it cannot.
std::string ReadFile(const std::string& path);

// Parses JSON text; errors carry `origin:line:column`.
Json ParseJson(const std::string& text, const std::string& origin);

// Builds a spec from a document without validating it.
GameSpec SpecFromJson(const Json& doc);

// Parses and validates. Invalid specs raise ValidationError unless `force`.
LoadedSpec LoadSpecText(const std::string& text, const std::string& origin,
                        bool force = false);
LoadedSpec LoadSpec(const std::string& path, bool force = false);

ValidationReport Validate(const GameSpec& spec);

// Canonical documents: built-in aliases are written as their family.
Json SpecToJson(const StaticGameSpec& spec);
Json SpecToJson(const DynamicGameSpec& spec);
Json SpecToJson(const GameSpec& spec);

Json KernelToJson(const Kernel& kernel);
Kernel KernelFromJson(const Json& j, const std::string& path);

Json TeamPolicyToJson(const TeamPolicy& policy);
TeamPolicy TeamPolicyFromJson(const Json& j, const std::string& path);

Json PolicyPairToJson(const PolicyPair& policies);
// Accepts a policy-pair document or a static mean-field equilibrium, whose
// kernels become symmetric-iid team policies.
PolicyPair PolicyPairFromJson(const Json& doc);

Json MfEquilibriumToJson(const MfEquilibrium& eq);
MfEquilibrium MfEquilibriumFromJson(const Json& doc, const StaticGameSpec& spec);

Json StagePolicyToJson(const StagePolicy& policy);
StagePolicy StagePolicyFromJson(const Json& j, const std::string& path);

Json DynamicPolicyPairToJson(const DynamicPolicyPair& policies);
// Accepts a dynamic policy-pair document or a dynamic equilibrium.
DynamicPolicyPair DynamicPolicyPairFromJson(const Json& doc);

Json DynamicMfEquilibriumToJson(const DynamicGameSpec& spec,
                                const DynamicMfEquilibrium& eq);

Json SimulationToJson(std::array<int, kNumTeams> n, int reps,
                      std::uint64_t seed, const SimulationResult& result);

// One line of an exploitability table.
struct EpsilonRow {
  std::array<int, kNumTeams> n = {1, 1};
  std::array<double, kNumTeams> eps = {0.0, 0.0};
  std::array<double, kNumTeams> current_cost = {0.0, 0.0};
  CertMethod method = CertMethod::kExact;
  double ci = 0.0;
};

EpsilonRow RowFromReport(std::array<int, kNumTeams> n, const EpsilonReport& r);
EpsilonRow RowFromReport(std::array<int, kNumTeams> n,
                         const DynamicEpsilonReport& r);

// Header "N1,N2,eps1,eps2,method,ci" and one line per row.
std::string EpsilonCsv(const std::vector<EpsilonRow>& rows);
Json EpsilonJson(const std::vector<EpsilonRow>& rows);

// `%.17g` for every float, two-space indent, trailing newline. Non-finite
// floats become null.
std::string DumpJson(const Json& j);
std::string FormatDouble(double value);

// Writes to `path`, or to stdout when the path is empty or "-".
void WriteOutput(const std::string& path, const std::string& content);

}  // namespace teamfield

#endif  // TEAMFIELD_IO_H_
