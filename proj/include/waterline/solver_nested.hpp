#pragma once

// Ascending prefix budgets: sum_{k <= J} p_k <= P_J for J = 1..K, with a
// box on every channel.
//
// A channel range is first solved against its last prefix budget only.  If
// that relaxed allocation breaks an interior prefix budget, the range is
// split at the first broken index J: the left part is solved against P_J,
// the right part gets whatever the left part did not use.  Both parts
// recurse.
//
// Before any of this the prefix budgets are tightened backwards,
//   P_J <- min(P_J, P_{J+1} - gamma_{J+1}),
// which leaves the feasible set unchanged but guarantees that a left part
// never takes power a later lower bound needs.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "waterline/conditions.hpp"
#include "waterline/error.hpp"
#include "waterline/problem.hpp"
#include "waterline/solver_box.hpp"

namespace waterline {

/// Prefix budgets with the implied lower-bound tightening applied.
inline std::vector<double> tightened_prefix_budgets(const AscendingProblem& pb) {
  std::vector<double> t = pb.budgets;
  for (std::size_t j = t.size() - 1; j-- > 0;) t[j] = std::min(t[j], t[j + 1] - pb.lower[j + 1]);
  return t;
}

namespace detail {

struct AscendingRun {
  const AscendingProblem& pb;
  const SolverConfig& cfg;
  std::vector<double> budgets;
  std::vector<double> powers;
  std::vector<double> trace;
  int splits = 0;
  int depth = 0;

  void solve_range(std::size_t lo, std::size_t hi, double base) {
    ++depth;
    const double budget = budgets[hi] - base;
    double floor = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) floor += pb.lower[k];
    if (budget - floor <= 1e-15 * std::max(1.0, budgets.back())) {
      for (std::size_t k = lo; k <= hi; ++k) powers[k] = pb.lower[k];
      return;
    }
    BoxProblem sub;
    const auto first = static_cast<std::ptrdiff_t>(lo);
    const auto last = static_cast<std::ptrdiff_t>(hi + 1);
    sub.objectives.assign(pb.objectives.begin() + first, pb.objectives.begin() + last);
    sub.lower.assign(pb.lower.begin() + first, pb.lower.begin() + last);
    sub.upper.assign(pb.upper.begin() + first, pb.upper.begin() + last);
    sub.budget = budget;
    const Allocation relaxed = solve_box(sub, cfg);
    trace.push_back(relaxed.water_level);

    const double slack_tol = 1e-12 * std::max(1.0, budgets.back());
    double prefix = base;
    for (std::size_t j = lo; j < hi; ++j) {
      prefix += relaxed.powers[j - lo];
      if (prefix > budgets[j] + slack_tol) {
        ++splits;
        solve_range(lo, j, base);
        double used = base;
        for (std::size_t k = lo; k <= j; ++k) used += powers[k];
        solve_range(j + 1, hi, used);
        return;
      }
    }
    for (std::size_t k = lo; k <= hi; ++k) powers[k] = relaxed.powers[k - lo];
  }
};

}  // namespace detail

inline Allocation solve_ascending(AscendingProblem pb, const SolverConfig& cfg = {}) {
  pb.validate();
  cfg.validate();
  detail::AscendingRun run{pb, cfg, tightened_prefix_budgets(pb), std::vector<double>(pb.size(), 0.0), {}};
  run.solve_range(0, pb.size() - 1, 0.0);

  Allocation a = detail::finish_allocation(pb.objectives, std::move(run.powers), pb.lower, pb.upper, 0.0,
                                           "ascending");
  a.water_level = detail::mean_active_rate(pb.objectives, a);
  a.iterations = run.splits;
  a.water_level_trace = std::move(run.trace);
  a.status = run.splits == 0 ? Status::Optimal : Status::Feasible;
  return a;
}

/// Largest relative violation of any prefix budget or box.
inline double ascending_violation(const AscendingProblem& pb, std::span<const double> p) {
  const double scale = pb.budgets.back();
  double v = 0.0;
  double prefix = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    prefix += p[j];
    v = std::max(v, prefix - pb.budgets[j]);
    if (!pb.lower.empty()) v = std::max(v, pb.lower[j] - p[j]);
    if (!pb.upper.empty() && std::isfinite(pb.upper[j])) v = std::max(v, p[j] - pb.upper[j]);
  }
  return std::max(v, 0.0) / scale;
}

/// Optimality conditions for prefix budgets.  Binding prefix budgets cut
/// the channels into segments; inside a segment the active channels share
/// one rate, bound channels satisfy the box rate inequalities against it,
/// and the segment rates never increase from left to right.  The last
/// segment must also use up the final budget unless its upper bounds stop
/// it.
inline KktReport kkt_residual_ascending(AscendingProblem pb, std::span<const double> p,
                                        double tolerance = detail::kDefaultConditionTolerance) {
  pb.validate();
  if (p.size() != pb.size()) throw Error(ErrorKind::InvalidProblem, "allocation length does not match problem");
  const auto budgets = tightened_prefix_budgets(pb);
  const double scale = budgets.back();
  const double eps = 1e-9 * scale;

  KktReport report;
  report.add("feasibility", ascending_violation(pb, p), tolerance);

  std::vector<std::pair<std::size_t, std::size_t>> segments;
  double prefix = 0.0;
  std::size_t start = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    prefix += p[j];
    if (j + 1 == p.size() || prefix >= budgets[j] - eps) {
      segments.emplace_back(start, j);
      start = j + 1;
    }
  }

  double spread = 0.0;
  double lower_violation = 0.0;
  double upper_violation = 0.0;
  double order_violation = 0.0;
  double previous_mu = kInf;
  bool any_active = false;
  for (auto [lo, hi] : segments) {
    const auto first = static_cast<std::ptrdiff_t>(lo);
    const auto last = static_cast<std::ptrdiff_t>(hi + 1);
    const std::span<const Objective> objs(pb.objectives.begin() + first, pb.objectives.begin() + last);
    const std::span<const double> lower(pb.lower.begin() + first, pb.lower.begin() + last);
    const std::span<const double> upper(pb.upper.begin() + first, pb.upper.begin() + last);
    const std::span<const double> seg(p.begin() + first, p.begin() + last);
    double seg_total = 0.0;
    for (double x : seg) seg_total += x;
    auto r = detail::single_constraint_report(objs, lower, upper, std::max(seg_total, 1e-300), seg, tolerance);
    if (r.water_level > 0.0) {
      any_active = true;
      spread = std::max(spread, r.find("rate_spread")->residual);
      lower_violation = std::max(lower_violation, r.find("lower_rate")->residual);
      upper_violation = std::max(upper_violation, r.find("upper_rate")->residual);
      if (std::isfinite(previous_mu)) {
        order_violation = std::max(order_violation, (r.water_level - previous_mu) / previous_mu);
      }
      previous_mu = r.water_level;
    }
  }
  report.add("rate_spread", spread, tolerance, any_active);
  report.add("lower_rate", lower_violation, tolerance, any_active);
  report.add("upper_rate", upper_violation, tolerance, any_active);
  report.add("segment_order", order_violation, tolerance, segments.size() > 1);

  // the last segment either exhausts the final budget or sits at its upper bounds
  const auto [last_lo, last_hi] = segments.back();
  double before = 0.0;
  for (std::size_t k = 0; k < last_lo; ++k) before += p[k];
  double last_upper = 0.0;
  for (std::size_t k = last_lo; k <= last_hi; ++k) last_upper += pb.upper[k];
  double total = 0.0;
  for (double x : p) total += x;
  report.add("budget", std::abs(total - budgets.back()) / scale, tolerance,
             before + last_upper > budgets.back());
  report.water_level = previous_mu == kInf ? 0.0 : previous_mu;
  return report;
}

}  // namespace waterline
