#pragma once

// JSON instance and result files.
//
// Instance:
//   {
//     "problem_class": "p1" | "p1_lower" | "box" | "ascending" | "maxmin" | "cluster" | "cluster_maxmin",
//     "budget": 6.0,                      // all classes except ascending
//     "budgets": [0.5, 2.0],              // ascending only
//     "objectives": [ {"family": "log_capacity", "w": 1, "a": 1, "b": 1}, ... ],
//     "lower": [...], "upper": [..., null],   // null = no upper bound
//     "groups": [ {"objectives": [...], "lower": [...], "upper": [...]} ],  // group classes
//     "metadata": { ... }                 // free-form, echoed back
//   }
//
// Objective records carry their parameters next to "family":
//   log_capacity, inverse_mse, af_relay   w, a, b
//   sum_log, sum_inverse_mse              w[], a, b, c[], d[]
//   cluster_log_capacity                  w, a, sigma_e2, sigma_n2
//
// Unknown keys are rejected; every diagnostic names the offending field.
// Numbers are written in shortest round-trip form, so reading a file back
// reproduces every double exactly.

#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "waterline/error.hpp"
#include "waterline/objective.hpp"
#include "waterline/problem.hpp"

namespace waterline {

using Json = nlohmann::json;

enum class ProblemClass { P1, P1Lower, Box, Ascending, MaxMin, Cluster, ClusterMaxMin };

inline std::string_view to_string(ProblemClass c) {
  switch (c) {
    case ProblemClass::P1: return "p1";
    case ProblemClass::P1Lower: return "p1_lower";
    case ProblemClass::Box: return "box";
    case ProblemClass::Ascending: return "ascending";
    case ProblemClass::MaxMin: return "maxmin";
    case ProblemClass::Cluster: return "cluster";
    case ProblemClass::ClusterMaxMin: return "cluster_maxmin";
  }
  return "unknown";
}

inline bool is_group_class(ProblemClass c) {
  return c == ProblemClass::MaxMin || c == ProblemClass::Cluster || c == ProblemClass::ClusterMaxMin;
}

struct Instance {
  ProblemClass problem_class = ProblemClass::P1;
  std::variant<SimplexProblem, BoxProblem, AscendingProblem, FairProblem> problem;
  Json metadata = Json::object();

  std::size_t channel_count() const {
    return std::visit(
        [](const auto& p) -> std::size_t {
          if constexpr (std::is_same_v<std::decay_t<decltype(p)>, FairProblem>) return p.channel_count();
          else return p.size();
        },
        problem);
  }
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Schema, "field '" + path + "': " + what);
}

inline std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline void reject_unknown(const Json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) schema_error(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) schema_error(child(path, key), "unknown field");
  }
}

inline const Json& require(const Json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) schema_error(child(path, key), "missing required field");
  return obj.at(key);
}

inline double number(const Json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

inline std::vector<double> number_array(const Json& v, const std::string& path, bool allow_null = false) {
  if (!v.is_array()) schema_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (allow_null && v[i].is_null()) out.push_back(kInf);
    else out.push_back(number(v[i], index(path, i)));
  }
  return out;
}

inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json array_or_null(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

}  // namespace detail

inline Objective objective_from_json(const Json& j, const std::string& path) {
  using namespace detail;
  if (!j.is_object()) schema_error(path, "expected an objective record");
  const Json& fam = require(j, path, "family");
  if (!fam.is_string()) schema_error(child(path, "family"), "expected a string");
  const std::string family = fam.get<std::string>();
  auto num = [&](const char* key) { return number(require(j, path, key), child(path, key)); };
  auto arr = [&](const char* key) { return number_array(require(j, path, key), child(path, key)); };
  try {
    if (family == "log_capacity" || family == "inverse_mse" || family == "af_relay") {
      reject_unknown(j, path, {"family", "w", "a", "b"});
      const double w = num("w"), a = num("a"), b = num("b");
      if (family == "log_capacity") return Objective::log_capacity(w, a, b);
      if (family == "inverse_mse") return Objective::inverse_mse(w, a, b);
      return Objective::af_relay(w, a, b);
    }
    if (family == "sum_log" || family == "sum_inverse_mse") {
      reject_unknown(j, path, {"family", "w", "a", "b", "c", "d"});
      if (family == "sum_log") return Objective(SumLog{arr("w"), num("a"), num("b"), arr("c"), arr("d")});
      return Objective(SumInverseMse{arr("w"), num("a"), num("b"), arr("c"), arr("d")});
    }
    if (family == "cluster_log_capacity") {
      reject_unknown(j, path, {"family", "w", "a", "sigma_e2", "sigma_n2"});
      return Objective::cluster_log_capacity(num("w"), num("a"), num("sigma_e2"), num("sigma_n2"));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Schema) throw;
    schema_error(path, e.what());
  }
  schema_error(child(path, "family"), "unknown family '" + family + "'");
}

inline Json objective_to_json(const Objective& f) {
  return std::visit(
      [&](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        Json j;
        j["family"] = std::string(f.family_name());
        if constexpr (std::is_same_v<T, LogCapacity> || std::is_same_v<T, InverseMse> || std::is_same_v<T, AfRelay>) {
          j["w"] = p.w;
          j["a"] = p.a;
          j["b"] = p.b;
        } else if constexpr (std::is_same_v<T, SumLog> || std::is_same_v<T, SumInverseMse>) {
          j["w"] = p.w;
          j["a"] = p.a;
          j["b"] = p.b;
          j["c"] = p.c;
          j["d"] = p.d;
        } else if constexpr (std::is_same_v<T, ClusterLogCapacity>) {
          j["w"] = p.w;
          j["a"] = p.a;
          j["sigma_e2"] = p.sigma_e2;
          j["sigma_n2"] = p.sigma_n2;
        } else {
          throw Error(ErrorKind::Schema, "custom objectives cannot be serialized");
        }
        return j;
      },
      f.family());
}

namespace detail {

inline std::vector<Objective> objectives_from_json(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) schema_error(path, "expected a non-empty array of objectives");
  std::vector<Objective> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(objective_from_json(v[i], index(path, i)));
  return out;
}

inline Json objectives_to_json(const std::vector<Objective>& objs) {
  Json a = Json::array();
  for (const auto& f : objs) a.push_back(objective_to_json(f));
  return a;
}

inline std::vector<double> bounds(const Json& obj, const std::string& path, const char* key, std::size_t n,
                                  bool allow_null) {
  if (!obj.contains(key)) return {};
  auto v = number_array(obj.at(key), child(path, key), allow_null);
  if (v.size() != n) schema_error(child(path, key), "expected " + std::to_string(n) + " entries");
  return v;
}

}  // namespace detail

inline ProblemClass parse_problem_class(const Json& v) {
  if (!v.is_string()) detail::schema_error("problem_class", "expected a string");
  const auto s = v.get<std::string>();
  for (auto c : {ProblemClass::P1, ProblemClass::P1Lower, ProblemClass::Box, ProblemClass::Ascending,
                 ProblemClass::MaxMin, ProblemClass::Cluster, ProblemClass::ClusterMaxMin}) {
    if (to_string(c) == s) return c;
  }
  detail::schema_error("problem_class", "unknown problem class '" + s + "'");
}

/// Parses and validates an instance document.  Schema problems raise
/// ErrorKind::Schema; problems that parse but violate an invariant raise
/// the solver-side kind (InvalidProblem / InfeasibleBudget).
inline Instance instance_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) schema_error("<root>", "expected an object");
  Instance inst;
  inst.problem_class = parse_problem_class(require(j, "", "problem_class"));
  if (j.contains("metadata")) {
    if (!j.at("metadata").is_object()) schema_error("metadata", "expected an object");
    inst.metadata = j.at("metadata");
  }
  const auto cls = inst.problem_class;

  if (is_group_class(cls)) {
    reject_unknown(j, "", {"problem_class", "budget", "groups", "metadata"});
    FairProblem fp;
    fp.budget = number(require(j, "", "budget"), "budget");
    fp.mode = cls == ProblemClass::MaxMin ? FairMode::MaxMin
              : cls == ProblemClass::Cluster ? FairMode::Cluster
                                             : FairMode::ClusterMaxMin;
    const Json& groups = require(j, "", "groups");
    if (!groups.is_array() || groups.empty()) schema_error("groups", "expected a non-empty array");
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto path = index("groups", g);
      reject_unknown(groups[g], path, {"objectives", "lower", "upper"});
      Group grp;
      grp.objectives = objectives_from_json(require(groups[g], path, "objectives"), child(path, "objectives"));
      grp.lower = bounds(groups[g], path, "lower", grp.size(), false);
      grp.upper = bounds(groups[g], path, "upper", grp.size(), true);
      fp.groups.push_back(std::move(grp));
    }
    fp.validate();
    inst.problem = std::move(fp);
    return inst;
  }

  if (cls == ProblemClass::Ascending) {
    reject_unknown(j, "", {"problem_class", "budgets", "objectives", "lower", "upper", "metadata"});
  } else if (cls == ProblemClass::Box) {
    reject_unknown(j, "", {"problem_class", "budget", "objectives", "lower", "upper", "metadata"});
  } else if (cls == ProblemClass::P1Lower) {
    reject_unknown(j, "", {"problem_class", "budget", "objectives", "lower", "metadata"});
  } else {
    reject_unknown(j, "", {"problem_class", "budget", "objectives", "metadata"});
  }
  auto objs = objectives_from_json(require(j, "", "objectives"), "objectives");
  const std::size_t n = objs.size();
  auto lower = bounds(j, "", "lower", n, false);
  auto upper = bounds(j, "", "upper", n, true);

  switch (cls) {
    case ProblemClass::P1:
    case ProblemClass::P1Lower: {
      if (cls == ProblemClass::P1Lower && lower.empty()) schema_error("lower", "missing required field");
      SimplexProblem sp{std::move(objs), number(require(j, "", "budget"), "budget"), std::move(lower)};
      sp.validate();
      inst.problem = std::move(sp);
      break;
    }
    case ProblemClass::Box: {
      BoxProblem bp{std::move(objs), number(require(j, "", "budget"), "budget"), std::move(lower), std::move(upper)};
      bp.validate();
      inst.problem = std::move(bp);
      break;
    }
    case ProblemClass::Ascending: {
      auto budgets = number_array(require(j, "", "budgets"), "budgets");
      if (budgets.size() != n) schema_error("budgets", "expected " + std::to_string(n) + " entries");
      AscendingProblem ap{std::move(objs), std::move(budgets), std::move(lower), std::move(upper)};
      ap.validate();
      inst.problem = std::move(ap);
      break;
    }
    default:
      break;
  }
  return inst;
}

inline Json instance_to_json(const Instance& inst) {
  using detail::array_or_null;
  Json j;
  j["problem_class"] = std::string(to_string(inst.problem_class));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FairProblem>) {
          j["budget"] = p.budget;
          Json groups = Json::array();
          for (const auto& g : p.groups) {
            Json gj;
            gj["objectives"] = detail::objectives_to_json(g.objectives);
            if (!g.lower.empty()) gj["lower"] = g.lower;
            if (!g.upper.empty()) gj["upper"] = array_or_null(g.upper);
            groups.push_back(std::move(gj));
          }
          j["groups"] = std::move(groups);
        } else if constexpr (std::is_same_v<T, AscendingProblem>) {
          j["budgets"] = p.budgets;
          j["objectives"] = detail::objectives_to_json(p.objectives);
          if (!p.lower.empty()) j["lower"] = p.lower;
          if (!p.upper.empty()) j["upper"] = array_or_null(p.upper);
        } else if constexpr (std::is_same_v<T, BoxProblem>) {
          j["budget"] = p.budget;
          j["objectives"] = detail::objectives_to_json(p.objectives);
          if (!p.lower.empty()) j["lower"] = p.lower;
          if (!p.upper.empty()) j["upper"] = array_or_null(p.upper);
        } else {
          j["budget"] = p.budget;
          j["objectives"] = detail::objectives_to_json(p.objectives);
          if (inst.problem_class == ProblemClass::P1Lower) j["lower"] = p.lower;
        }
      },
      inst.problem);
  if (!inst.metadata.empty()) j["metadata"] = inst.metadata;
  return j;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Schema, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Schema, "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Schema, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline Instance load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

// --- results ------------------------------------------------------------------

inline Json report_to_json(const KktReport& r) {
  Json a = Json::array();
  for (const auto& c : r.conditions) {
    a.push_back({{"name", c.name},
                 {"residual", detail::number_or_null(c.residual)},
                 {"tolerance", c.tolerance},
                 {"applicable", c.applicable},
                 {"pass", c.pass}});
  }
  return a;
}

inline Json config_to_json(const SolverConfig& cfg) {
  return {{"mu_tolerance", cfg.mu_tolerance},
          {"power_tolerance", cfg.power_tolerance},
          {"max_outer_iterations", cfg.max_outer_iterations},
          {"box_strategy", std::string(to_string(cfg.box_strategy))}};
}

inline Json allocation_to_json(const Allocation& a) {
  return {{"status", std::string(to_string(a.status))},
          {"powers", a.powers},
          {"water_level", a.water_level},
          {"sets", {{"active", a.active_set}, {"lower", a.lower_set}, {"upper", a.upper_set}}},
          {"iterations", a.iterations},
          {"water_level_trace", a.water_level_trace},
          {"objective", a.objective_value},
          {"solver", a.algorithm}};
}

inline Json fair_solution_to_json(const FairSolution& s) {
  Json trace = Json::array();
  for (auto [x, d] : s.trace) trace.push_back({x, detail::number_or_null(d)});
  return {{"status", std::string(to_string(s.status))},
          {"group_powers", s.powers},
          {"water_levels", s.water_levels},
          {"group_totals", s.group_totals},
          {"group_utilities", s.group_utilities},
          {"indicators", s.indicators},
          {"t", s.t},
          {"outer_rate", s.outer_rate},
          {"iterations", s.iterations},
          {"outer_trace", trace},
          {"objective", s.objective_value}};
}

/// Flat powers of a result document (single-constraint and ascending classes).
inline std::vector<double> result_powers(const Json& result) {
  if (!result.is_object() || !result.contains("powers")) detail::schema_error("powers", "missing required field");
  return detail::number_array(result.at("powers"), "powers");
}

/// Per-group powers of a result document (group classes).
inline std::vector<std::vector<double>> result_group_powers(const Json& result) {
  if (!result.is_object() || !result.contains("group_powers")) {
    detail::schema_error("group_powers", "missing required field");
  }
  const Json& g = result.at("group_powers");
  if (!g.is_array()) detail::schema_error("group_powers", "expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < g.size(); ++i) out.push_back(detail::number_array(g[i], detail::index("group_powers", i)));
  return out;
}

}  // namespace waterline
