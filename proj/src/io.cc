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

#include "teamfield/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace teamfield {
namespace {

[[noreturn]] void Fail(const std::string& path, const std::string& what) {
  throw FormatError((path.empty() ? std::string("document") : path) + ": " + what);
}

std::string Sub(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string Sub(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

const Json& Field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) Fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) Fail(path, "missing field '" + key + "'");
  return *it;
}

bool Has(const Json& j, const std::string& key) {
  return j.is_object() && j.contains(key);
}

double Real(const Json& j, const std::string& path) {
  if (!j.is_number()) Fail(path, "expected a number");
  return j.get<double>();
}

double RealOr(const Json& j, const std::string& key, double fallback,
              const std::string& path) {
  return Has(j, key) ? Real(j.at(key), Sub(path, key)) : fallback;
}

int Int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) Fail(path, "expected an integer");
  return j.get<int>();
}

std::string Str(const Json& j, const std::string& path) {
  if (!j.is_string()) Fail(path, "expected a string");
  return j.get<std::string>();
}

const Json& Array(const Json& j, const std::string& path) {
  if (!j.is_array()) Fail(path, "expected an array");
  return j;
}

std::vector<double> Reals(const Json& j, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < Array(j, path).size(); ++i) {
    out.push_back(Real(j[i], Sub(path, i)));
  }
  return out;
}

std::vector<int> Ints(const Json& j, const std::string& path) {
  std::vector<int> out;
  for (std::size_t i = 0; i < Array(j, path).size(); ++i) {
    out.push_back(Int(j[i], Sub(path, i)));
  }
  return out;
}

// Rows of a matrix; returns the row count and the flattened data.
std::vector<double> Matrix(const Json& j, const std::string& path, int* rows,
                           int* cols) {
  Array(j, path);
  *rows = static_cast<int>(j.size());
  *cols = -1;
  std::vector<double> data;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = Reals(j[r], Sub(path, r));
    if (*cols < 0) *cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != *cols) Fail(Sub(path, r), "ragged matrix row");
    data.insert(data.end(), row.begin(), row.end());
  }
  if (*cols < 0) *cols = 0;
  return data;
}

Kernel UncheckedKernel(const Json& j, const std::string& path) {
  int rows = 0;
  int cols = 0;
  auto data = Matrix(j, path, &rows, &cols);
  return Kernel::Unchecked(rows, cols, std::move(data));
}

FiniteSpace SpaceFromJson(const Json& j, const std::string& path) {
  FiniteSpace space;
  if (j.is_number_integer()) {
    space.size = j.get<int>();
    return space;
  }
  if (!j.is_object()) Fail(path, "expected a size or {\"size\", \"labels\"}");
  if (Has(j, "labels")) {
    const Json& labels = Array(j.at("labels"), Sub(path, "labels"));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      space.labels.push_back(Str(labels[i], Sub(Sub(path, "labels"), i)));
    }
    space.size = static_cast<int>(space.labels.size());
  }
  if (Has(j, "size")) {
    space.size = Int(j.at("size"), Sub(path, "size"));
  } else if (!Has(j, "labels")) {
    Fail(path, "missing field 'size'");
  }
  return space;
}

Json SpaceToJson(const FiniteSpace& space) {
  if (space.labels.empty()) return space.size;
  return Json{{"size", space.size}, {"labels", space.labels}};
}

StatisticMap StatisticFromJson(const Json& j, const std::string& path) {
  const std::string kind = j.is_string() ? j.get<std::string>()
                                         : Str(Field(j, "kind", path), Sub(path, "kind"));
  if (kind == "identity") return StatisticMap::Identity();
  if (kind == "mean-embedding") {
    return StatisticMap::MeanEmbedding(
        Reals(Field(j, "embedding", path), Sub(path, "embedding")));
  }
  Fail(path, "unknown statistic '" + kind + "' (expected identity, mean-embedding)");
}

Json StatisticToJson(const StatisticMap& xi) {
  if (xi.kind == StatisticMap::Kind::kIdentity) return Json{{"kind", "identity"}};
  return Json{{"kind", "mean-embedding"}, {"embedding", xi.embedding}};
}

GridInterpolator GridFromJson(const Json& j, const std::string& path) {
  std::vector<GridAxis> axes;
  if (j.is_null()) return GridInterpolator();
  for (std::size_t a = 0; a < Array(j, path).size(); ++a) {
    const std::string ap = Sub(path, a);
    GridAxis axis;
    try {
      axis.slot = StatSlot::Parse(Str(Field(j[a], "slot", ap), Sub(ap, "slot")));
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      Fail(Sub(ap, "slot"), e.what());
    }
    axis.component = Has(j[a], "component") ? Int(j[a].at("component"), Sub(ap, "component")) : 0;
    axis.points = Reals(Field(j[a], "points", ap), Sub(ap, "points"));
    axes.push_back(std::move(axis));
  }
  try {
    return GridInterpolator(std::move(axes));
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    Fail(path, e.what());
  }
}

Json GridToJson(const GridInterpolator& grid) {
  Json axes = Json::array();
  for (const GridAxis& axis : grid.axes()) {
    axes.push_back(Json{{"slot", axis.slot.Name()},
                        {"component", axis.component},
                        {"points", axis.points}});
  }
  return axes;
}

bool TargetSelf(const Json& j, const std::string& path, bool fallback) {
  if (!Has(j, "target")) return fallback;
  const std::string t = Str(j.at("target"), Sub(path, "target"));
  if (t == "self") return true;
  if (t == "opponent") return false;
  Fail(Sub(path, "target"), "expected 'self' or 'opponent'");
}

bool OnState(const Json& j, const std::string& path, bool fallback) {
  if (!Has(j, "on")) return fallback;
  const std::string t = Str(j.at("on"), Sub(path, "on"));
  if (t == "state") return true;
  if (t == "action") return false;
  Fail(Sub(path, "on"), "expected 'state' or 'action'");
}

CostFunction::TrackMean TrackMeanFromJson(const Json& j, const std::string& path,
                                          CostFunction::TrackMean base) {
  base.target_self = TargetSelf(j, path, base.target_self);
  base.on_state = OnState(j, path, base.on_state);
  base.power = RealOr(j, "power", base.power, path);
  base.scale = RealOr(j, "scale", base.scale, path);
  base.offset = RealOr(j, "offset", base.offset, path);
  return base;
}

CostFunction CostFromJson(const Json& j, int team, bool dynamic,
                          const std::string& path) {
  const std::string family = Str(Field(j, "family", path), Sub(path, "family"));
  using CF = CostFunction;
  if (family == "constant") {
    return CF(team, CF::Constant{Real(Field(j, "value", path), Sub(path, "value"))});
  }
  if (family == "track-mean") return CF(team, TrackMeanFromJson(j, path, {}));
  if (family == "track-opponent-mean") {
    return CF(team, TrackMeanFromJson(j, path, CF::TrackMean{false}));
  }
  if (family == "team-coordination" || family == "pure-coordination") {
    return CF(team, TrackMeanFromJson(j, path, CF::TrackMean{true}));
  }
  if (family == "spread") {
    return CF(team, TrackMeanFromJson(j, path, CF::TrackMean{true, false, 1.0, -1.0, 1.0}));
  }
  if (family == "mf-mismatch-zero-sum") {
    const CF::TrackMean base = team == 0 ? CF::TrackMean{}
                                         : CF::TrackMean{false, false, 2.0, -1.0, 1.0};
    return CF(team, TrackMeanFromJson(j, path, base));
  }
  if (family == "congestion") {
    return CF(team, CF::Congestion{RealOr(j, "scale", 1.0, path),
                                   RealOr(j, "cross", 0.0, path)});
  }
  if (family == "indicator") {
    CF::Indicator f;
    f.on_state = OnState(j, path, true);
    f.element = Int(Field(j, "element", path), Sub(path, "element"));
    f.scale = RealOr(j, "scale", 1.0, path);
    return CF(team, f);
  }
  if (family == "table") {
    CF::Table f;
    f.worlds = Int(Field(j, "worlds", path), Sub(path, "worlds"));
    f.states = Has(j, "states") ? Int(j.at("states"), Sub(path, "states")) : 1;
    f.actions = Int(Field(j, "actions", path), Sub(path, "actions"));
    f.grid = GridFromJson(Has(j, "axes") ? j.at("axes") : Json(), Sub(path, "axes"));
    f.values = Reals(Field(j, "values", path), Sub(path, "values"));
    (void)dynamic;
    return CF(team, std::move(f));
  }
  Fail(Sub(path, "family"),
       "unknown cost family '" + family +
           "' (expected constant, track-mean, track-opponent-mean, "
           "team-coordination, spread, mf-mismatch-zero-sum, congestion, "
           "indicator, table)");
}

Json CostToJson(const CostFunction& cost) {
  using CF = CostFunction;
  return std::visit(
      [](const auto& f) -> Json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, CF::Constant>) {
          return Json{{"family", "constant"}, {"value", f.value}};
        } else if constexpr (std::is_same_v<T, CF::TrackMean>) {
          return Json{{"family", "track-mean"},
                      {"target", f.target_self ? "self" : "opponent"},
                      {"on", f.on_state ? "state" : "action"},
                      {"power", f.power},
                      {"scale", f.scale},
                      {"offset", f.offset}};
        } else if constexpr (std::is_same_v<T, CF::Congestion>) {
          return Json{{"family", "congestion"}, {"scale", f.scale}, {"cross", f.cross}};
        } else if constexpr (std::is_same_v<T, CF::Indicator>) {
          return Json{{"family", "indicator"},
                      {"on", f.on_state ? "state" : "action"},
                      {"element", f.element},
                      {"scale", f.scale}};
        } else {
          return Json{{"family", "table"},
                      {"worlds", f.worlds},
                      {"states", f.states},
                      {"actions", f.actions},
                      {"axes", GridToJson(f.grid)},
                      {"values", f.values}};
        }
      },
      cost.family());
}

std::array<CostFunction, kNumTeams> CostsFromJson(const Json& doc, bool dynamic) {
  const Json& costs = Array(Field(doc, "cost", ""), "cost");
  if (costs.size() != kNumTeams) Fail("cost", "expected one cost per team (2)");
  return {CostFromJson(costs[0], 0, dynamic, "cost[0]"),
          CostFromJson(costs[1], 1, dynamic, "cost[1]")};
}

void CheckTeams(const Json& doc) {
  const Json& teams = Array(Field(doc, "teams", ""), "teams");
  if (teams.size() != kNumTeams) Fail("teams", "expected exactly 2 teams");
}

Transition TransitionFromJson(const Json& j, int nx, int nu, const std::string& path) {
  const std::string kind = Str(Field(j, "kind", path), Sub(path, "kind"));
  // Nested [x][u][x'] tables flatten in row-major order.
  auto table = [&](const Json& t, const std::string& tp) {
    std::vector<double> flat;
    if (Array(t, tp).size() != static_cast<std::size_t>(nx)) {
      Fail(tp, "expected " + std::to_string(nx) + " state blocks");
    }
    for (std::size_t x = 0; x < t.size(); ++x) {
      const std::string xp = Sub(tp, x);
      if (Array(t[x], xp).size() != static_cast<std::size_t>(nu)) {
        Fail(xp, "expected " + std::to_string(nu) + " action rows");
      }
      for (std::size_t u = 0; u < t[x].size(); ++u) {
        const auto row = Reals(t[x][u], Sub(xp, u));
        if (row.size() != static_cast<std::size_t>(nx)) {
          Fail(Sub(xp, u), "expected " + std::to_string(nx) + " next-state entries");
        }
        flat.insert(flat.end(), row.begin(), row.end());
      }
    }
    return flat;
  };
  if (kind == "table") return Transition::Fixed(nx, nu, table(Field(j, "table", path), Sub(path, "table")));
  if (kind == "copy-action") {
    if (nx != nu) Fail(path, "copy-action needs as many actions as states");
    return Transition::CopyAction(nx, RealOr(j, "noise", 0.0, path));
  }
  if (kind == "grid") {
    GridInterpolator grid = GridFromJson(Field(j, "axes", path), Sub(path, "axes"));
    const Json& tables = Array(Field(j, "tables", path), Sub(path, "tables"));
    if (tables.size() != grid.num_points()) {
      Fail(Sub(path, "tables"), "expected one table per grid point (" +
                                    std::to_string(grid.num_points()) + ")");
    }
    std::vector<double> flat;
    for (std::size_t p = 0; p < tables.size(); ++p) {
      const auto t = table(tables[p], Sub(Sub(path, "tables"), p));
      flat.insert(flat.end(), t.begin(), t.end());
    }
    try {
      return Transition(nx, nu, std::move(grid), std::move(flat));
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      Fail(path, e.what());
    }
  }
  Fail(Sub(path, "kind"), "unknown transition '" + kind + "' (expected table, copy-action, grid)");
}

Json TransitionToJson(const Transition& tr) {
  const int nx = tr.states();
  const int nu = tr.actions();
  auto nested = [&](std::size_t offset) {
    Json t = Json::array();
    for (int x = 0; x < nx; ++x) {
      Json rows = Json::array();
      for (int u = 0; u < nu; ++u) {
        const auto begin = tr.tables().begin() +
                           static_cast<std::ptrdiff_t>(offset + (x * nu + u) * nx);
        rows.push_back(std::vector<double>(begin, begin + nx));
      }
      t.push_back(std::move(rows));
    }
    return t;
  };
  if (tr.grid().axes().empty()) return Json{{"kind", "table"}, {"table", nested(0)}};
  Json tables = Json::array();
  const std::size_t block = static_cast<std::size_t>(nx) * nu * nx;
  for (std::size_t p = 0; p < tr.grid().num_points(); ++p) tables.push_back(nested(p * block));
  return Json{{"kind", "grid"}, {"axes", GridToJson(tr.grid())}, {"tables", tables}};
}

// Accepts one item or an array of items.
template <typename Fn>
auto OneOrMany(const Json& j, const std::string& path, Fn fn, bool item_is_array) {
  using T = decltype(fn(j, path));
  std::vector<T> out;
  const bool many = j.is_array() && (!item_is_array || (!j.empty() && j[0].is_array() &&
                                                        !j[0].empty() && j[0][0].is_array()));
  if (many) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(fn(j[i], Sub(path, i)));
  } else {
    out.push_back(fn(j, path));
  }
  return out;
}

StaticGameSpec StaticFromJson(const Json& doc) {
  StaticGameSpec spec;
  spec.world = SpaceFromJson(Field(doc, "world", ""), "world");
  spec.prior = Reals(Field(doc, "prior", ""), "prior");
  CheckTeams(doc);
  for (int i = 0; i < kNumTeams; ++i) {
    const std::string path = Sub("teams", i);
    const Json& t = doc.at("teams")[i];
    StaticTeamSpec& team = spec.teams[i];
    team.action_space = SpaceFromJson(Field(t, "actions", path), Sub(path, "actions"));
    team.obs_space = Has(t, "observations")
                         ? SpaceFromJson(t.at("observations"), Sub(path, "observations"))
                         : FiniteSpace{1, {}};
    team.obs_kernel = Has(t, "obs_kernel")
                          ? UncheckedKernel(t.at("obs_kernel"), Sub(path, "obs_kernel"))
                          : Kernel::Uniform(spec.world.size, 1);
    team.statistic = Has(t, "statistic")
                         ? StatisticFromJson(t.at("statistic"), Sub(path, "statistic"))
                         : StatisticMap::Identity();
  }
  spec.cost = CostsFromJson(doc, false);
  return spec;
}

DynamicGameSpec DynamicFromJson(const Json& doc) {
  DynamicGameSpec spec;
  spec.world = SpaceFromJson(Field(doc, "world", ""), "world");
  spec.prior = Reals(Field(doc, "prior", ""), "prior");
  spec.horizon = Int(Field(doc, "horizon", ""), "horizon");
  CheckTeams(doc);
  for (int i = 0; i < kNumTeams; ++i) {
    const std::string path = Sub("teams", i);
    const Json& t = doc.at("teams")[i];
    DynamicTeamSpec& team = spec.teams[i];
    team.state_space = SpaceFromJson(Field(t, "states", path), Sub(path, "states"));
    team.action_space = SpaceFromJson(Field(t, "actions", path), Sub(path, "actions"));
    team.obs_space = SpaceFromJson(Field(t, "observations", path), Sub(path, "observations"));
    team.init_kernel = UncheckedKernel(Field(t, "init_kernel", path), Sub(path, "init_kernel"));
    const int nx = team.state_space.size;
    const int nu = team.action_space.size;
    team.transitions = OneOrMany(
        Field(t, "transitions", path), Sub(path, "transitions"),
        [&](const Json& j, const std::string& p) { return TransitionFromJson(j, nx, nu, p); },
        false);
    team.obs_models = OneOrMany(Field(t, "obs_models", path), Sub(path, "obs_models"),
                                UncheckedKernel, true);
    team.state_statistic =
        Has(t, "state_statistic")
            ? StatisticFromJson(t.at("state_statistic"), Sub(path, "state_statistic"))
            : StatisticMap::Identity();
    team.action_statistic =
        Has(t, "action_statistic")
            ? StatisticFromJson(t.at("action_statistic"), Sub(path, "action_statistic"))
            : StatisticMap::Identity();
  }
  spec.cost = CostsFromJson(doc, true);
  return spec;
}

void CheckSchema(const Json& doc) {
  if (!doc.is_object()) Fail("", "expected a JSON object");
  if (Has(doc, "schema") && Str(doc.at("schema"), "schema") != kSchema) {
    Fail("schema", "unsupported schema '" + doc.at("schema").get<std::string>() +
                       "' (expected " + kSchema + ")");
  }
}

Json Doc(const std::string& kind) {
  return Json{{"schema", kSchema}, {"kind", kind}};
}

std::string Kind(const Json& doc) {
  return Has(doc, "kind") ? Str(doc.at("kind"), "kind") : "";
}

void DumpValue(const Json& j, int indent, std::string* out) {
  const std::string pad(indent, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        *out += "{}";
        return;
      }
      *out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) *out += ",\n";
        first = false;
        *out += pad + "  " + Json(it.key()).dump() + ": ";
        DumpValue(it.value(), indent + 2, out);
      }
      *out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        *out += "[]";
        return;
      }
      bool scalars = true;
      for (const auto& v : j) scalars = scalars && !v.is_structured();
      if (scalars) {
        *out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i > 0) *out += ", ";
          DumpValue(j[i], indent, out);
        }
        *out += "]";
        return;
      }
      *out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) *out += ",\n";
        *out += pad + "  ";
        DumpValue(j[i], indent + 2, out);
      }
      *out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      *out += std::isfinite(v) ? FormatDouble(v) : "null";
      return;
    }
    default:
      *out += j.dump();
  }
}

Json Pair(double a, double b) { return Json::array({a, b}); }

}  // namespace

std::string FormatDouble(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string DumpJson(const Json& j) {
  std::string out;
  DumpValue(j, 0, &out);
  out += "\n";
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json ParseJson(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw FormatError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": parse error: " + what);
  }
}

GameSpec SpecFromJson(const Json& doc) {
  CheckSchema(doc);
  const std::string kind = Str(Field(doc, "kind", ""), "kind");
  if (kind == "static") return StaticFromJson(doc);
  if (kind == "dynamic") return DynamicFromJson(doc);
  Fail("kind", "expected 'static' or 'dynamic', got '" + kind + "'");
}

ValidationReport Validate(const GameSpec& spec) {
  return spec.index() == 0 ? ValidateStaticSpec(std::get<0>(spec))
                           : ValidateDynamicSpec(std::get<1>(spec));
}

LoadedSpec LoadSpecText(const std::string& text, const std::string& origin, bool force) {
  const Json doc = ParseJson(text, origin);
  LoadedSpec loaded;
  try {
    loaded.spec = SpecFromJson(doc);
  } catch (const FormatError& e) {
    throw FormatError(origin + ": " + e.what());
  }
  loaded.report = Validate(loaded.spec);
  if (!loaded.report.ok() && !force) {
    throw ValidationError(origin + ": spec failed validation with " +
                              std::to_string(loaded.report.entries.size()) + " problem(s)",
                          loaded.report);
  }
  return loaded;
}

LoadedSpec LoadSpec(const std::string& path, bool force) {
  return LoadSpecText(ReadFile(path), path, force);
}

Json SpecToJson(const StaticGameSpec& spec) {
  Json doc = Doc("static");
  doc["world"] = SpaceToJson(spec.world);
  doc["prior"] = spec.prior;
  Json teams = Json::array();
  for (const StaticTeamSpec& t : spec.teams) {
    teams.push_back(Json{{"actions", SpaceToJson(t.action_space)},
                         {"observations", SpaceToJson(t.obs_space)},
                         {"obs_kernel", KernelToJson(t.obs_kernel)},
                         {"statistic", StatisticToJson(t.statistic)}});
  }
  doc["teams"] = teams;
  doc["cost"] = Json::array({CostToJson(spec.cost[0]), CostToJson(spec.cost[1])});
  return doc;
}

Json SpecToJson(const DynamicGameSpec& spec) {
  Json doc = Doc("dynamic");
  doc["world"] = SpaceToJson(spec.world);
  doc["prior"] = spec.prior;
  doc["horizon"] = spec.horizon;
  Json teams = Json::array();
  for (const DynamicTeamSpec& t : spec.teams) {
    Json transitions = Json::array();
    for (const Transition& tr : t.transitions) transitions.push_back(TransitionToJson(tr));
    Json obs = Json::array();
    for (const Kernel& k : t.obs_models) obs.push_back(KernelToJson(k));
    teams.push_back(Json{{"states", SpaceToJson(t.state_space)},
                         {"actions", SpaceToJson(t.action_space)},
                         {"observations", SpaceToJson(t.obs_space)},
                         {"init_kernel", KernelToJson(t.init_kernel)},
                         {"transitions", transitions},
                         {"obs_models", obs},
                         {"state_statistic", StatisticToJson(t.state_statistic)},
                         {"action_statistic", StatisticToJson(t.action_statistic)}});
  }
  doc["teams"] = teams;
  doc["cost"] = Json::array({CostToJson(spec.cost[0]), CostToJson(spec.cost[1])});
  return doc;
}

Json SpecToJson(const GameSpec& spec) {
  return std::visit([](const auto& s) { return SpecToJson(s); }, spec);
}

Json KernelToJson(const Kernel& kernel) {
  Json rows = Json::array();
  for (const auto& row : kernel.ToRows()) rows.push_back(row);
  return rows;
}

Kernel KernelFromJson(const Json& j, const std::string& path) {
  int rows = 0;
  int cols = 0;
  auto data = Matrix(j, path, &rows, &cols);
  try {
    return Kernel(rows, cols, std::move(data));
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    Fail(path, e.what());
  }
}

Json TeamPolicyToJson(const TeamPolicy& policy) {
  switch (policy.kind()) {
    case TeamPolicy::Kind::kSymmetricIid:
      return Json{{"kind", "symmetric-iid"}, {"kernel", KernelToJson(policy.shared().kernel)}};
    case TeamPolicy::Kind::kProduct: {
      Json kernels = Json::array();
      for (const auto& b : policy.per_dm()) kernels.push_back(KernelToJson(b.kernel));
      return Json{{"kind", "product"}, {"kernels", kernels}};
    }
    case TeamPolicy::Kind::kMixture: {
      Json profiles = Json::array();
      for (const auto& c : policy.components()) {
        Json maps = Json::array();
        for (const auto& m : c.profile) maps.push_back(m.actions);
        profiles.push_back(Json{{"weight", c.weight}, {"maps", maps}});
      }
      return Json{{"kind", "mixture"}, {"profiles", profiles}};
    }
  }
  return Json();
}

TeamPolicy TeamPolicyFromJson(const Json& j, const std::string& path) {
  const std::string kind = Str(Field(j, "kind", path), Sub(path, "kind"));
  try {
    if (kind == "symmetric-iid") {
      return TeamPolicy::SymmetricIid({KernelFromJson(Field(j, "kernel", path), Sub(path, "kernel"))});
    }
    if (kind == "product") {
      std::vector<BehavioralPolicy> per_dm;
      const Json& ks = Array(Field(j, "kernels", path), Sub(path, "kernels"));
      for (std::size_t k = 0; k < ks.size(); ++k) {
        per_dm.push_back({KernelFromJson(ks[k], Sub(Sub(path, "kernels"), k))});
      }
      return TeamPolicy::Product(std::move(per_dm));
    }
    if (kind == "mixture" || kind == "deterministic") {
      std::vector<MixtureComponent> comps;
      auto maps_of = [&](const Json& m, const std::string& mp) {
        std::vector<DetPolicy> profile;
        for (std::size_t k = 0; k < Array(m, mp).size(); ++k) {
          profile.push_back({Ints(m[k], Sub(mp, k))});
        }
        return profile;
      };
      if (kind == "deterministic") {
        comps.push_back({1.0, maps_of(Field(j, "maps", path), Sub(path, "maps"))});
      } else {
        const Json& ps = Array(Field(j, "profiles", path), Sub(path, "profiles"));
        for (std::size_t c = 0; c < ps.size(); ++c) {
          const std::string cp = Sub(Sub(path, "profiles"), c);
          comps.push_back({Real(Field(ps[c], "weight", cp), Sub(cp, "weight")),
                           maps_of(Field(ps[c], "maps", cp), Sub(cp, "maps"))});
        }
      }
      return TeamPolicy::Mixture(std::move(comps));
    }
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    Fail(path, e.what());
  }
  Fail(Sub(path, "kind"), "unknown team policy '" + kind +
                              "' (expected symmetric-iid, product, mixture, deterministic)");
}

Json PolicyPairToJson(const PolicyPair& policies) {
  Json doc = Doc("policy-pair");
  doc["teams"] = Json::array({TeamPolicyToJson(policies[0]), TeamPolicyToJson(policies[1])});
  return doc;
}

PolicyPair PolicyPairFromJson(const Json& doc) {
  CheckSchema(doc);
  const std::string kind = Kind(doc);
  if (kind == "mf-equilibrium") {
    const Json& ps = Array(Field(doc, "policies", ""), "policies");
    if (ps.size() != kNumTeams) Fail("policies", "expected 2 kernels");
    return {TeamPolicy::SymmetricIid({KernelFromJson(ps[0], "policies[0]")}),
            TeamPolicy::SymmetricIid({KernelFromJson(ps[1], "policies[1]")})};
  }
  if (kind != "policy-pair") {
    Fail("kind", "expected 'policy-pair' or 'mf-equilibrium', got '" + kind + "'");
  }
  const Json& teams = Array(Field(doc, "teams", ""), "teams");
  if (teams.size() != kNumTeams) Fail("teams", "expected 2 team policies");
  return {TeamPolicyFromJson(teams[0], "teams[0]"), TeamPolicyFromJson(teams[1], "teams[1]")};
}

Json MfEquilibriumToJson(const MfEquilibrium& eq) {
  Json doc = Doc("mf-equilibrium");
  doc["converged"] = eq.converged;
  doc["iterations"] = eq.iterations;
  doc["br_residual"] = Pair(eq.br_residual[0], eq.br_residual[1]);
  doc["consistency_residual"] =
      Pair(eq.consistency_residual[0], eq.consistency_residual[1]);
  doc["policies"] = Json::array({KernelToJson(eq.policies[0]), KernelToJson(eq.policies[1])});
  doc["mean_fields"] = Json::array({eq.mean_fields.lambda[0], eq.mean_fields.lambda[1]});
  return doc;
}

MfEquilibrium MfEquilibriumFromJson(const Json& doc, const StaticGameSpec& spec) {
  CheckSchema(doc);
  if (Kind(doc) != "mf-equilibrium") Fail("kind", "expected 'mf-equilibrium'");
  const Json& ps = Array(Field(doc, "policies", ""), "policies");
  if (ps.size() != kNumTeams) Fail("policies", "expected 2 kernels");
  MfEquilibrium eq;
  eq.policies = {KernelFromJson(ps[0], "policies[0]"), KernelFromJson(ps[1], "policies[1]")};
  try {
    eq.mean_fields = MeanFieldsOf(spec, eq.policies);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    Fail("policies", e.what());
  }
  FillResiduals(spec, &eq);
  eq.iterations = Has(doc, "iterations") ? Int(doc.at("iterations"), "iterations") : 0;
  eq.converged = Has(doc, "converged") && doc.at("converged").is_boolean() &&
                 doc.at("converged").get<bool>();
  return eq;
}

Json StagePolicyToJson(const StagePolicy& policy) {
  Json kernels = Json::array();
  for (const Kernel& k : policy.kernels) kernels.push_back(KernelToJson(k));
  return kernels;
}

StagePolicy StagePolicyFromJson(const Json& j, const std::string& path) {
  StagePolicy p;
  for (std::size_t t = 0; t < Array(j, path).size(); ++t) {
    p.kernels.push_back(KernelFromJson(j[t], Sub(path, t)));
  }
  return p;
}

Json DynamicPolicyPairToJson(const DynamicPolicyPair& policies) {
  Json doc = Doc("stage-policy-pair");
  Json teams = Json::array();
  for (const DynamicTeamPolicy& tp : policies) {
    if (tp.per_dm.size() == 1) {
      teams.push_back(Json{{"stages", StagePolicyToJson(tp.per_dm[0])}});
    } else {
      Json per = Json::array();
      for (const StagePolicy& p : tp.per_dm) per.push_back(StagePolicyToJson(p));
      teams.push_back(Json{{"per_dm", per}});
    }
  }
  doc["teams"] = teams;
  return doc;
}

DynamicPolicyPair DynamicPolicyPairFromJson(const Json& doc) {
  CheckSchema(doc);
  const std::string kind = Kind(doc);
  DynamicPolicyPair out;
  if (kind == "dynamic-mf-equilibrium") {
    const Json& ps = Array(Field(doc, "policies", ""), "policies");
    if (ps.size() != kNumTeams) Fail("policies", "expected 2 stage policies");
    for (int i = 0; i < kNumTeams; ++i) {
      out[i] = DynamicTeamPolicy::Shared(StagePolicyFromJson(ps[i], Sub("policies", i)));
    }
    return out;
  }
  if (kind != "stage-policy-pair") {
    Fail("kind", "expected 'stage-policy-pair' or 'dynamic-mf-equilibrium', got '" +
                     kind + "'");
  }
  const Json& teams = Array(Field(doc, "teams", ""), "teams");
  if (teams.size() != kNumTeams) Fail("teams", "expected 2 team policies");
  for (int i = 0; i < kNumTeams; ++i) {
    const std::string path = Sub("teams", i);
    if (Has(teams[i], "per_dm")) {
      const Json& per = Array(teams[i].at("per_dm"), Sub(path, "per_dm"));
      for (std::size_t k = 0; k < per.size(); ++k) {
        out[i].per_dm.push_back(StagePolicyFromJson(per[k], Sub(Sub(path, "per_dm"), k)));
      }
      if (out[i].per_dm.empty()) Fail(Sub(path, "per_dm"), "needs at least one DM");
    } else {
      out[i] = DynamicTeamPolicy::Shared(
          StagePolicyFromJson(Field(teams[i], "stages", path), Sub(path, "stages")));
    }
  }
  return out;
}

Json DynamicMfEquilibriumToJson(const DynamicGameSpec& spec,
                                const DynamicMfEquilibrium& eq) {
  Json doc = Doc("dynamic-mf-equilibrium");
  doc["converged"] = eq.converged;
  doc["iterations"] = eq.iterations;
  doc["br_residual"] = Pair(eq.br_residual[0], eq.br_residual[1]);
  doc["consistency_residual"] =
      Pair(eq.consistency_residual[0], eq.consistency_residual[1]);
  doc["exhaustive_best_response"] = Json::array({eq.exhaustive[0], eq.exhaustive[1]});
  doc["policies"] = Json::array({StagePolicyToJson(eq.policies[0]),
                                 StagePolicyToJson(eq.policies[1])});
  Json state_flow = Json::array();
  Json action_flow = Json::array();
  for (int i = 0; i < kNumTeams; ++i) {
    Json st = Json::array();
    Json ac = Json::array();
    for (int t = 0; t < spec.horizon; ++t) {
      Json sw = Json::array();
      Json aw = Json::array();
      for (int w = 0; w < spec.world.size; ++w) {
        sw.push_back(eq.flows.StateLaw(spec, i, t, w));
        aw.push_back(eq.flows.ActionLaw(spec, i, t, w));
      }
      st.push_back(sw);
      ac.push_back(aw);
    }
    state_flow.push_back(st);
    action_flow.push_back(ac);
  }
  doc["state_flow"] = state_flow;
  doc["action_flow"] = action_flow;
  return doc;
}

Json SimulationToJson(std::array<int, kNumTeams> n, int reps, std::uint64_t seed,
                      const SimulationResult& result) {
  Json doc = Doc("simulation");
  doc["n"] = Json::array({n[0], n[1]});
  doc["reps"] = reps;
  doc["seed"] = seed;
  Json cost = Json::array();
  for (const McEstimate& c : result.cost) {
    cost.push_back(Json{{"estimate", c.estimate}, {"ci", c.ci_halfwidth}});
  }
  doc["cost"] = cost;
  doc["world_counts"] = result.world_counts;
  doc["state_flow"] = Json::array({result.state_flow[0], result.state_flow[1]});
  doc["action_flow"] = Json::array({result.action_flow[0], result.action_flow[1]});
  return doc;
}

EpsilonRow RowFromReport(std::array<int, kNumTeams> n, const EpsilonReport& r) {
  return {n, r.eps, r.current_cost, r.method, r.ci_halfwidth};
}

EpsilonRow RowFromReport(std::array<int, kNumTeams> n, const DynamicEpsilonReport& r) {
  return {n, r.eps, r.current_cost, r.method, r.ci_halfwidth};
}

std::string EpsilonCsv(const std::vector<EpsilonRow>& rows) {
  std::string out = "N1,N2,eps1,eps2,method,ci\n";
  for (const EpsilonRow& r : rows) {
    out += std::to_string(r.n[0]) + "," + std::to_string(r.n[1]) + "," +
           FormatDouble(r.eps[0]) + "," + FormatDouble(r.eps[1]) + "," +
           CertMethodName(r.method) + "," + FormatDouble(r.ci) + "\n";
  }
  return out;
}

Json EpsilonJson(const std::vector<EpsilonRow>& rows) {
  Json doc = Doc("epsilon-report");
  Json list = Json::array();
  for (const EpsilonRow& r : rows) {
    list.push_back(Json{{"n", Json::array({r.n[0], r.n[1]})},
                        {"eps", Pair(r.eps[0], r.eps[1])},
                        {"current_cost", Pair(r.current_cost[0], r.current_cost[1])},
                        {"method", CertMethodName(r.method)},
                        {"ci", r.ci}});
  }
  doc["rows"] = list;
  return doc;
}

void WriteOutput(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("cannot write " + path);
}

}  // namespace teamfield
