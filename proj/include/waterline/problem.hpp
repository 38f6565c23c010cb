#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "waterline/error.hpp"
#include "waterline/objective.hpp"

namespace waterline {

enum class Status { Optimal, Feasible, IterationCap };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Feasible: return "feasible";
    case Status::IterationCap: return "iteration_cap";
  }
  return "unknown";
}

enum class BoxStrategy { SetBasedA, SetBasedB, Bisection, OrderBased };

inline std::string_view to_string(BoxStrategy s) {
  switch (s) {
    case BoxStrategy::SetBasedA: return "set_a";
    case BoxStrategy::SetBasedB: return "set_b";
    case BoxStrategy::Bisection: return "bisection";
    case BoxStrategy::OrderBased: return "ordered";
  }
  return "unknown";
}

inline std::optional<BoxStrategy> parse_box_strategy(std::string_view name) {
  for (auto s : {BoxStrategy::SetBasedA, BoxStrategy::SetBasedB, BoxStrategy::Bisection,
                 BoxStrategy::OrderBased}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

struct SolverConfig {
  double mu_tolerance = 1e-10;     // relative
  double power_tolerance = 1e-9;   // fraction of the budget
  int max_outer_iterations = 0;    // 0 means 4 * K
  BoxStrategy box_strategy = BoxStrategy::OrderBased;

  int outer_cap(std::size_t k) const {
    return max_outer_iterations > 0 ? max_outer_iterations : static_cast<int>(4 * std::max<std::size_t>(k, 1));
  }
  void validate() const {
    if (!(mu_tolerance > 0.0) || !(power_tolerance > 0.0)) {
      throw Error(ErrorKind::InvalidProblem, "solver tolerances must be > 0");
    }
  }
};

namespace detail {

inline void fill_default(std::vector<double>& v, std::size_t n, double value) {
  if (v.empty()) v.assign(n, value);
}

inline void check_bounds(const std::vector<double>& lower, const std::vector<double>& upper,
                         std::size_t n) {
  if (lower.size() != n) throw Error(ErrorKind::InvalidProblem, "lower bounds length mismatch");
  if (upper.size() != n) throw Error(ErrorKind::InvalidProblem, "upper bounds length mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(lower[k]) || lower[k] < 0.0) {
      throw Error(ErrorKind::InvalidProblem, "lower bound " + std::to_string(k) + " must be finite and >= 0");
    }
    if (std::isnan(upper[k]) || upper[k] < lower[k]) {
      throw Error(ErrorKind::InvalidProblem, "upper bound " + std::to_string(k) + " must be >= lower bound");
    }
  }
}

inline double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace detail

/// Single sum constraint with per-channel lower bounds; all-zero lower
/// bounds give the plain problem.
struct SimplexProblem {
  std::vector<Objective> objectives;
  double budget = 0.0;
  std::vector<double> lower;

  std::size_t size() const { return objectives.size(); }

  bool has_lower_bounds() const {
    return std::any_of(lower.begin(), lower.end(), [](double g) { return g != 0.0; });
  }

  void validate() {
    if (objectives.empty()) throw Error(ErrorKind::InvalidProblem, "at least one subchannel required");
    if (!(budget > 0.0) || !std::isfinite(budget)) throw Error(ErrorKind::InvalidProblem, "budget must be finite and > 0");
    detail::fill_default(lower, size(), 0.0);
    std::vector<double> upper(size(), kInf);
    detail::check_bounds(lower, upper, size());
    if (detail::sum(lower) > budget) throw Error(ErrorKind::InfeasibleBudget, "sum of lower bounds exceeds budget");
  }
};

/// Single sum constraint with a box on every channel.
struct BoxProblem {
  std::vector<Objective> objectives;
  double budget = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;  // +inf allowed

  std::size_t size() const { return objectives.size(); }

  void validate() {
    if (objectives.empty()) throw Error(ErrorKind::InvalidProblem, "at least one subchannel required");
    if (!(budget > 0.0) || !std::isfinite(budget)) throw Error(ErrorKind::InvalidProblem, "budget must be finite and > 0");
    detail::fill_default(lower, size(), 0.0);
    detail::fill_default(upper, size(), kInf);
    detail::check_bounds(lower, upper, size());
    if (detail::sum(lower) > budget) throw Error(ErrorKind::InfeasibleBudget, "sum of lower bounds exceeds budget");
  }

  static BoxProblem from(const SimplexProblem& p) {
    BoxProblem b{p.objectives, p.budget, p.lower, {}};
    b.validate();
    return b;
  }
};

/// Prefix budgets: sum_{k <= J} p_k <= budgets[J] for every J.
struct AscendingProblem {
  std::vector<Objective> objectives;
  std::vector<double> budgets;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return objectives.size(); }

  void validate() {
    if (objectives.empty()) throw Error(ErrorKind::InvalidProblem, "at least one subchannel required");
    if (budgets.size() != size()) throw Error(ErrorKind::InvalidProblem, "one prefix budget per subchannel required");
    detail::fill_default(lower, size(), 0.0);
    detail::fill_default(upper, size(), kInf);
    detail::check_bounds(lower, upper, size());
    double prefix_lower = 0.0;
    for (std::size_t j = 0; j < size(); ++j) {
      if (!(budgets[j] > 0.0) || !std::isfinite(budgets[j])) {
        throw Error(ErrorKind::InvalidProblem, "prefix budgets must be finite and > 0");
      }
      if (j > 0 && budgets[j] < budgets[j - 1]) {
        throw Error(ErrorKind::InvalidProblem, "prefix budgets must be nondecreasing");
      }
      prefix_lower += lower[j];
      if (prefix_lower > budgets[j]) {
        throw Error(ErrorKind::InfeasibleBudget, "lower bounds violate prefix budget " + std::to_string(j));
      }
    }
  }
};

enum class FairMode { MaxMin, Cluster, ClusterMaxMin };

inline std::string_view to_string(FairMode m) {
  switch (m) {
    case FairMode::MaxMin: return "maxmin";
    case FairMode::Cluster: return "cluster";
    case FairMode::ClusterMaxMin: return "cluster_maxmin";
  }
  return "unknown";
}

struct Group {
  std::vector<Objective> objectives;
  std::vector<double> lower;  // empty: zeros
  std::vector<double> upper;  // empty: +inf

  std::size_t size() const { return objectives.size(); }
  bool has_boxes() const {
    return std::any_of(lower.begin(), lower.end(), [](double g) { return g != 0.0; }) ||
           std::any_of(upper.begin(), upper.end(), [](double t) { return std::isfinite(t); });
  }
};

struct FairProblem {
  std::vector<Group> groups;
  double budget = 0.0;
  FairMode mode = FairMode::MaxMin;

  std::size_t size() const { return groups.size(); }
  std::size_t channel_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
  bool has_boxes() const {
    return std::any_of(groups.begin(), groups.end(), [](const Group& g) { return g.has_boxes(); });
  }

  void validate() {
    if (groups.empty()) throw Error(ErrorKind::InvalidProblem, "at least one group required");
    if (!(budget > 0.0) || !std::isfinite(budget)) throw Error(ErrorKind::InvalidProblem, "budget must be finite and > 0");
    double lower_total = 0.0;
    for (auto& g : groups) {
      if (g.objectives.empty()) throw Error(ErrorKind::InvalidProblem, "every group needs at least one subchannel");
      detail::fill_default(g.lower, g.size(), 0.0);
      detail::fill_default(g.upper, g.size(), kInf);
      detail::check_bounds(g.lower, g.upper, g.size());
      lower_total += detail::sum(g.lower);
    }
    if (lower_total > budget) throw Error(ErrorKind::InfeasibleBudget, "sum of lower bounds exceeds budget");
    if (mode != FairMode::MaxMin && has_boxes()) {
      throw Error(ErrorKind::InvalidProblem, "boxes are only supported in maxmin mode");
    }
  }
};

/// Result of every single-constraint solver.
struct Allocation {
  std::vector<double> powers;
  double water_level = 0.0;  // 0 when no channel is active
  std::vector<std::size_t> active_set;
  std::vector<std::size_t> lower_set;  // includes pinned channels (lower == upper)
  std::vector<std::size_t> upper_set;
  int iterations = 0;
  std::vector<double> water_level_trace;
  double objective_value = 0.0;
  Status status = Status::Optimal;
  std::string algorithm;

  double total_power() const { return detail::sum(powers); }
};

struct FairSolution {
  std::vector<std::vector<double>> powers;
  std::vector<double> water_levels;
  std::vector<double> group_totals;
  std::vector<double> group_utilities;
  std::vector<std::vector<int>> indicators;
  double t = 0.0;           // common utility level (maxmin modes)
  double outer_rate = 0.0;  // common d(group value)/d(group power) (cluster mode)
  int iterations = 0;
  /// (outer variable, total power demanded) pairs visited by the outer search.
  std::vector<std::pair<double, double>> trace;
  double objective_value = 0.0;
  Status status = Status::Optimal;

  double total_power() const { return detail::sum(group_totals); }
};

struct ConditionResidual {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool applicable = true;
  bool pass = true;
};

struct KktReport {
  std::vector<ConditionResidual> conditions;
  double water_level = 0.0;
  std::vector<double> water_levels;  // per group, fair classes only

  void add(std::string name, double residual, double tolerance, bool applicable = true) {
    const bool ok = !applicable || (std::isfinite(residual) && residual <= tolerance);
    conditions.push_back({std::move(name), residual, tolerance, applicable, ok});
  }

  bool pass() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
  }

  const ConditionResidual* find(std::string_view name) const {
    for (const auto& c : conditions) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  double max_residual() const {
    double m = 0.0;
    for (const auto& c : conditions) {
      if (c.applicable) m = std::max(m, c.residual);
    }
    return m;
  }
};

inline double total_utility(std::span<const Objective> objs, std::span<const double> p,
                            double cluster_power = 0.0) {
  double s = 0.0;
  for (std::size_t k = 0; k < objs.size(); ++k) s += objs[k].eval(p[k], cluster_power);
  return s;
}

}  // namespace waterline
