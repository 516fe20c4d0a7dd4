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

// Command-line entry point: validate specs, solve mean-field equilibria,
// certify finite-population policies and run simulations.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "teamfield/dynamic.h"
#include "teamfield/finite_n.h"
#include "teamfield/io.h"
#include "teamfield/mf_static.h"
#include "teamfield/rng.h"

namespace teamfield {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitBudget = 2;

// Budget or convergence failure after results were written.
class SoftFailure : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string spec_path;
  std::string policy_path;
  std::string mfeq_path;
  std::string out_path;
  std::string format;
  bool force = false;

  double damping = 0.5;
  double tol = 1e-6;
  double smooth_init = 1.0;
  double anneal_rate = 0.5;
  int max_iters = 10000;
  bool coordinate_descent = false;

  std::optional<std::uint64_t> seed;
  int reps = 2000;
  double resolution = 0.1;
  std::vector<int> n;
  std::string ns = "";
  int ratio = 1;
  bool exact = false;
  bool monte_carlo = false;
  std::int64_t max_candidates = 10'000'000;
};

void Summary(const std::string& line) { std::cerr << line << "\n"; }

std::array<int, kNumTeams> Sizes(const std::vector<int>& n) {
  if (n.empty()) throw Error("--n needs one or two team sizes");
  return {n[0], n.size() > 1 ? n[1] : n[0]};
}

std::string SizesText(const std::array<int, kNumTeams>& n) {
  return std::to_string(n[0]) + "x" + std::to_string(n[1]);
}

std::uint64_t RequireSeed(const Options& o, const std::string& why) {
  if (!o.seed.has_value()) throw Error(why + " needs --seed (no default seed)");
  return *o.seed;
}

const StaticGameSpec& RequireStatic(const LoadedSpec& s, const std::string& cmd) {
  if (!s.is_static()) throw Error(cmd + " needs a static spec");
  return s.static_spec();
}

const DynamicGameSpec& RequireDynamic(const LoadedSpec& s, const std::string& cmd) {
  if (s.is_static()) throw Error(cmd + " needs a dynamic spec");
  return s.dynamic_spec();
}

// Rows drawn uniformly from the simplex.
Kernel RandomKernel(int rows, int cols, Rng& rng) {
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    double total = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double e = -std::log1p(-rng.Uniform());
      data[r * cols + c] = e;
      total += e;
    }
    for (int c = 0; c < cols; ++c) data[r * cols + c] /= total;
  }
  return Kernel(rows, cols, std::move(data));
}

std::optional<std::array<Kernel, kNumTeams>> RandomStaticInit(
    const Options& o, const StaticGameSpec& spec) {
  if (!o.seed.has_value()) return std::nullopt;
  Rng rng(DeriveSeed(*o.seed, {0}));
  std::array<Kernel, kNumTeams> init;
  for (int i = 0; i < kNumTeams; ++i) {
    init[i] = RandomKernel(spec.num_obs(i), spec.num_actions(i), rng);
  }
  return init;
}

std::optional<StagePolicyPair> RandomDynamicInit(const Options& o,
                                                 const DynamicGameSpec& spec) {
  if (!o.seed.has_value()) return std::nullopt;
  Rng rng(DeriveSeed(*o.seed, {0}));
  StagePolicyPair init;
  for (int i = 0; i < kNumTeams; ++i) {
    for (int t = 0; t < spec.horizon; ++t) {
      init[i].kernels.push_back(RandomKernel(spec.num_obs(i), spec.num_actions(i), rng));
    }
  }
  return init;
}

Json LoadJson(const std::string& path) { return ParseJson(ReadFile(path), path); }

void Emit(const Options& o, const std::string& content) { WriteOutput(o.out_path, content); }

void EmitRows(const Options& o, const std::vector<EpsilonRow>& rows) {
  Emit(o, o.format == "json" ? DumpJson(EpsilonJson(rows)) : EpsilonCsv(rows));
}

std::vector<int> ParseList(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || value < 1) {
      throw Error("--ns entries must be positive integers, got '" + item + "'");
    }
    out.push_back(value);
  }
  return out;
}

int RunValidate(const Options& o) {
  const LoadedSpec s = LoadSpec(o.spec_path, /*force=*/true);
  if (o.format == "json") {
    Json doc{{"schema", kSchema},
             {"kind", "validation-report"},
             {"spec_kind", s.is_static() ? "static" : "dynamic"},
             {"valid", s.report.ok()},
             {"errors", s.report.entries},
             {"cost_bound", Json::array({s.report.cost_bound[0], s.report.cost_bound[1]})}};
    Emit(o, DumpJson(doc));
  } else {
    std::string text;
    for (const auto& e : s.report.entries) text += e + "\n";
    if (s.report.ok()) {
      text += "valid " + std::string(s.is_static() ? "static" : "dynamic") +
              " spec; cost bounds " + FormatDouble(s.report.cost_bound[0]) + ", " +
              FormatDouble(s.report.cost_bound[1]) + "\n";
    }
    Emit(o, text);
  }
  if (!s.report.ok()) {
    Summary("validate: " + o.spec_path + ": " + std::to_string(s.report.entries.size()) +
            " problem(s)");
    return kExitInvalid;
  }
  Summary("validate: " + o.spec_path + ": ok");
  return kExitOk;
}

int RunSolveMf(const Options& o, const LoadedSpec& s) {
  const StaticGameSpec& spec = RequireStatic(s, "solve-mf");
  MfSolverConfig config;
  config.damping = o.damping;
  config.tol = o.tol;
  config.smoothing = o.smooth_init;
  config.anneal_rate = o.anneal_rate;
  config.max_iters = o.max_iters;
  config.init = RandomStaticInit(o, spec);
  const MfEquilibrium eq = SolveMfFixedPoint(spec, config);
  Emit(o, DumpJson(MfEquilibriumToJson(eq)));
  const std::string line =
      "solve-mf: " + std::string(eq.converged ? "converged" : "not converged") + " after " +
      std::to_string(eq.iterations) + " iterations";
  if (!eq.converged) throw SoftFailure(line);
  Summary(line);
  return kExitOk;
}

int RunSolveMfDyn(const Options& o, const LoadedSpec& s) {
  const DynamicGameSpec& spec = RequireDynamic(s, "solve-mf-dyn");
  DynamicSolverConfig config;
  config.damping = o.damping;
  config.tol = o.tol;
  config.smoothing = o.smooth_init;
  config.anneal_rate = o.anneal_rate;
  config.max_iters = o.max_iters;
  config.allow_coordinate_descent = o.coordinate_descent;
  config.init = RandomDynamicInit(o, spec);
  const DynamicMfEquilibrium eq = SolveDynamicMfFixedPoint(spec, config);
  Emit(o, DumpJson(DynamicMfEquilibriumToJson(spec, eq)));
  const std::string line =
      "solve-mf-dyn: " + std::string(eq.converged ? "converged" : "not converged") +
      " after " + std::to_string(eq.iterations) + " iterations";
  if (!eq.converged) throw SoftFailure(line);
  Summary(line);
  return kExitOk;
}

McCertifyOptions McOptions(const Options& o, const std::string& why) {
  McCertifyOptions mc;
  mc.reps = o.reps;
  mc.seed = RequireSeed(o, why);
  mc.resolution = o.resolution;
  return mc;
}

int RunCertify(const Options& o, const LoadedSpec& s) {
  const StaticGameSpec& spec = RequireStatic(s, "certify");
  if (o.policy_path.empty()) throw Error("certify needs --policy");
  const PolicyPair policies = PolicyPairFromJson(LoadJson(o.policy_path));
  const FiniteGameInstance inst{spec, Sizes(o.n)};
  EpsilonReport report;
  if (o.monte_carlo) {
    report = EpsilonMcCertify(inst, policies, McOptions(o, "Monte Carlo certification"));
  } else {
    try {
      report = EpsilonNeCertify(inst, policies);
    } catch (const BudgetError& e) {
      if (!o.seed.has_value()) {
        throw BudgetError(std::string(e.what()) +
                          "; pass --seed to fall back to Monte Carlo");
      }
      report = EpsilonMcCertify(inst, policies, McOptions(o, "Monte Carlo fallback"));
    }
  }
  EmitRows(o, {RowFromReport(inst.team_sizes, report)});
  Summary("certify: N=" + SizesText(inst.team_sizes) + " eps=(" + FormatDouble(report.eps[0]) +
          ", " + FormatDouble(report.eps[1]) + ") " + CertMethodName(report.method));
  return kExitOk;
}

int RunSweep(const Options& o, const LoadedSpec& s) {
  const StaticGameSpec& spec = RequireStatic(s, "sweep-n");
  if (o.mfeq_path.empty()) throw Error("sweep-n needs --mfeq");
  const MfEquilibrium eq = MfEquilibriumFromJson(LoadJson(o.mfeq_path), spec);
  const auto sizes = SweepSizes(ParseList(o.ns), o.ratio);
  std::optional<McCertifyOptions> mc;
  if (o.seed.has_value()) mc = McOptions(o, "sweep-n");
  std::vector<SweepRow> rows;
  try {
    rows = EpsilonSweep(spec, eq.policies, sizes, mc);
  } catch (const BudgetError& e) {
    throw BudgetError(std::string(e.what()) + "; pass --seed to fall back to Monte Carlo");
  }
  std::vector<EpsilonRow> out;
  for (const SweepRow& r : rows) out.push_back(RowFromReport(r.n, r.report));
  EmitRows(o, out);
  Summary("sweep-n: " + std::to_string(out.size()) + " row(s)");
  return kExitOk;
}

DynamicPolicyPair DynamicPolicies(const Options& o, const DynamicGameSpec& spec) {
  if (!o.policy_path.empty()) return DynamicPolicyPairFromJson(LoadJson(o.policy_path));
  DynamicSolverConfig config;
  config.damping = o.damping;
  config.tol = o.tol;
  config.smoothing = o.smooth_init;
  config.anneal_rate = o.anneal_rate;
  config.max_iters = o.max_iters;
  config.allow_coordinate_descent = o.coordinate_descent;
  const DynamicMfEquilibrium eq = SolveDynamicMfFixedPoint(spec, config);
  if (!eq.converged) {
    throw SoftFailure("mean-field solve for the default policy did not converge");
  }
  return {DynamicTeamPolicy::Shared(eq.policies[0]), DynamicTeamPolicy::Shared(eq.policies[1])};
}

int RunSimulate(const Options& o, const LoadedSpec& s) {
  const DynamicGameSpec& spec = RequireDynamic(s, "simulate");
  const std::uint64_t seed = RequireSeed(o, "simulate");
  const auto n = Sizes(o.n);
  const DynamicPolicyPair policies = DynamicPolicies(o, spec);
  const SimulationResult result = SimulateFiniteN(spec, n, policies, o.reps, seed);
  Emit(o, DumpJson(SimulationToJson(n, o.reps, seed, result)));
  Summary("simulate: N=" + SizesText(n) + " cost=(" + FormatDouble(result.cost[0].estimate) +
          ", " + FormatDouble(result.cost[1].estimate) + ")");
  return kExitOk;
}

int RunEpsDyn(const Options& o, const LoadedSpec& s) {
  const DynamicGameSpec& spec = RequireDynamic(s, "eps-dyn");
  const auto n = Sizes(o.n);
  DynamicEpsilonOptions options;
  options.exact = o.exact;
  options.reps = o.reps;
  options.resolution = o.resolution;
  if (!o.exact) options.seed = RequireSeed(o, "Monte Carlo eps-dyn");
  const DynamicPolicyPair policies = DynamicPolicies(o, spec);
  const DynamicEpsilonReport report = DynamicEpsilonEstimate(spec, n, policies, options);
  EmitRows(o, {RowFromReport(n, report)});
  Summary("eps-dyn: N=" + SizesText(n) + " eps=(" + FormatDouble(report.eps[0]) + ", " +
          FormatDouble(report.eps[1]) + ") " + CertMethodName(report.method));
  return kExitOk;
}

int RunGridSearch(const Options& o, const LoadedSpec& s) {
  Json doc{{"schema", kSchema}, {"kind", "grid-search"}, {"resolution", o.resolution}};
  std::size_t found = 0;
  if (s.is_static()) {
    GridSearchOptions options;
    options.max_candidates = o.max_candidates;
    const auto hits = GridFixedPointSearch(s.static_spec(), o.resolution, options);
    const auto clusters = ClusterHits(hits, o.resolution);
    doc["hits"] = hits.size();
    Json list = Json::array();
    for (const auto& eq : clusters) list.push_back(MfEquilibriumToJson(eq));
    doc["equilibria"] = list;
    found = clusters.size();
  } else {
    DynamicGridOptions options;
    options.max_candidates = o.max_candidates;
    const auto hits = DynamicGridSearch(s.dynamic_spec(), o.resolution, options);
    doc["hits"] = hits.size();
    Json list = Json::array();
    for (const auto& eq : hits) list.push_back(DynamicMfEquilibriumToJson(s.dynamic_spec(), eq));
    doc["equilibria"] = list;
    found = hits.size();
  }
  Emit(o, DumpJson(doc));
  Summary("grid-search: " + std::to_string(found) + " fixed point(s)");
  return kExitOk;
}

// CLI11 validators for the documented knob ranges.
const auto kDamping = CLI::Validator(
    [](std::string& s) {
      const double v = std::stod(s);
      return v > 0.0 && v <= 1.0 ? std::string() : "damping must lie in (0, 1]";
    },
    "in (0, 1]");
const auto kResolution = CLI::Validator(
    [](std::string& s) {
      const double v = std::stod(s);
      return v > 0.0 && v <= 0.1 ? std::string() : "resolution must lie in (0, 0.1]";
    },
    "in (0, 0.1]");
const auto kPositive = CLI::Validator(
    [](std::string& s) {
      return std::stod(s) > 0.0 ? std::string() : "must be positive";
    },
    "> 0");

int Main(int argc, char** argv) {
  CLI::App app{"teamfield: two-team mean-field games on finite spaces"};
  app.require_subcommand(1);
  Options o;

  std::vector<std::pair<CLI::App*, std::string>> default_formats;
  auto common = [&](CLI::App* cmd, const std::string& default_format) {
    default_formats.emplace_back(cmd, default_format);
    cmd->add_option("--spec", o.spec_path, "game spec (JSON)")->required();
    cmd->add_flag("--force", o.force, "continue with a spec that fails validation");
    cmd->add_option("--out", o.out_path, "output path (default stdout)");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
  };
  auto solver = [&](CLI::App* cmd) {
    cmd->add_option("--damping", o.damping, "damping alpha in (0, 1]")->check(kDamping);
    cmd->add_option("--tol", o.tol, "residual tolerance")->check(kPositive);
    cmd->add_option("--smooth-init", o.smooth_init, "initial softmax temperature")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--anneal-rate", o.anneal_rate, "temperature decay in (0, 1)")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--max-iters", o.max_iters, "iteration cap")->check(CLI::PositiveNumber);
    cmd->add_flag("--coordinate-descent", o.coordinate_descent,
                  "allow local dynamic best responses beyond the exhaustive budget");
  };
  auto seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "random seed");
  };
  auto reps = [&](CLI::App* cmd, int fallback) {
    o.reps = fallback;
    cmd->add_option("--reps", o.reps, "Monte Carlo replications (>= 100)")
        ->check(CLI::Range(100, std::numeric_limits<int>::max()));
  };
  auto resolution = [&](CLI::App* cmd) {
    cmd->add_option("--resolution", o.resolution, "grid step in (0, 0.1]")->check(kResolution);
  };

  CLI::App* validate = app.add_subcommand("validate", "validate a spec");
  common(validate, "text");
  validate->get_option("--format")->check(CLI::IsMember({"json", "text"}));

  CLI::App* solve_mf = app.add_subcommand("solve-mf", "solve a static mean-field equilibrium");
  common(solve_mf, "json");
  solver(solve_mf);
  seed(solve_mf);

  CLI::App* solve_dyn =
      app.add_subcommand("solve-mf-dyn", "solve a dynamic mean-field equilibrium");
  common(solve_dyn, "json");
  solver(solve_dyn);
  seed(solve_dyn);

  CLI::App* certify = app.add_subcommand("certify", "finite-N exploitability of a policy pair");
  common(certify, "csv");
  certify->add_option("--policy", o.policy_path, "policy pair or MF equilibrium (JSON)")
      ->required();
  certify->add_option("--n", o.n, "team sizes N1 [N2]")->required()->expected(1, 2)
      ->check(CLI::PositiveNumber);
  certify->add_flag("--monte-carlo", o.monte_carlo, "skip exact certification");
  seed(certify);
  reps(certify, 2000);
  resolution(certify);

  CLI::App* sweep = app.add_subcommand("sweep-n", "exploitability of the MF lift across N");
  common(sweep, "csv");
  sweep->add_option("--mfeq", o.mfeq_path, "MF equilibrium (JSON)")->required();
  sweep->add_option("--ns", o.ns, "comma-separated team-1 sizes")->required();
  sweep->add_option("--ratio", o.ratio, "N2 = ratio * N1")->check(CLI::PositiveNumber);
  seed(sweep);
  reps(sweep, 2000);
  resolution(sweep);

  CLI::App* simulate = app.add_subcommand("simulate", "simulate the finite-N dynamic game");
  common(simulate, "json");
  simulate->add_option("--n", o.n, "team sizes N1 [N2]")->required()->expected(1, 2)
      ->check(CLI::PositiveNumber);
  simulate->add_option("--policy", o.policy_path, "stage policies (default: MF solution)");
  solver(simulate);
  seed(simulate);
  reps(simulate, 1000);

  CLI::App* eps_dyn = app.add_subcommand("eps-dyn", "finite-N exploitability, dynamic game");
  common(eps_dyn, "csv");
  eps_dyn->add_option("--n", o.n, "team sizes N1 [N2]")->required()->expected(1, 2)
      ->check(CLI::PositiveNumber);
  eps_dyn->add_option("--policy", o.policy_path, "stage policies (default: MF solution)");
  eps_dyn->add_flag("--exact", o.exact, "exhaustive deviations with exact costs");
  solver(eps_dyn);
  seed(eps_dyn);
  reps(eps_dyn, 1000);
  resolution(eps_dyn);

  CLI::App* grid = app.add_subcommand("grid-search", "grid fixed-point search");
  common(grid, "json");
  resolution(grid);
  grid->add_option("--max-candidates", o.max_candidates, "candidate budget")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  for (const auto& [cmd, format] : default_formats) {
    if (cmd->parsed() && o.format.empty()) o.format = format;
  }

  try {
    if (validate->parsed()) return RunValidate(o);
    const LoadedSpec spec = LoadSpec(o.spec_path, o.force);
    if (solve_mf->parsed()) return RunSolveMf(o, spec);
    if (solve_dyn->parsed()) return RunSolveMfDyn(o, spec);
    if (certify->parsed()) return RunCertify(o, spec);
    if (sweep->parsed()) return RunSweep(o, spec);
    if (simulate->parsed()) return RunSimulate(o, spec);
    if (eps_dyn->parsed()) return RunEpsDyn(o, spec);
    if (grid->parsed()) return RunGridSearch(o, spec);
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    for (const auto& entry : e.report().entries) std::cerr << "  " << entry << "\n";
    return kExitInvalid;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const SoftFailure& e) {
    std::cerr << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace
}  // namespace teamfield

int main(int argc, char** argv) { return teamfield::Main(argc, argv); }
