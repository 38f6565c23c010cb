#pragma once

// Water-filling under a single sum constraint, with optional lower bounds.
//
// The solver treats the active set through 0/1 indicators: every channel
// starts active, the common water level mu is solved from
//   sum_{active} g_k(mu) = budget - sum_{inactive} lower_k,
// and every active channel whose signed demand g_k(mu) does not exceed its
// lower bound is switched off (pinned to the bound) before re-solving.
// Each pass removes at least one channel, so at most K - 1 passes run, and
// the water level strictly increases from pass to pass.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "waterline/conditions.hpp"
#include "waterline/error.hpp"
#include "waterline/objective.hpp"
#include "waterline/problem.hpp"

namespace waterline {

namespace detail {

enum class ClosedForm { None, Log, InverseMse };

inline ClosedForm shared_closed_form(std::span<const Objective> objs, std::span<const std::size_t> idx) {
  bool all_log = true;
  bool all_mse = true;
  for (auto k : idx) {
    all_log = all_log && objs[k].is<LogCapacity>();
    all_mse = all_mse && objs[k].is<InverseMse>();
  }
  if (all_log) return ClosedForm::Log;
  if (all_mse) return ClosedForm::InverseMse;
  return ClosedForm::None;
}

inline double demand(std::span<const Objective> objs, std::span<const std::size_t> idx, double mu) {
  double s = 0.0;
  for (auto k : idx) s += objs[k].inverse_rate(mu);
  return s;
}

}  // namespace detail

/// Common water level mu of the channels in `active` such that their
/// demands use up `budget - fixed_consumption`.
///
/// Homogeneous log-capacity and inverse-MSE sets use the closed forms
///   mu = sum w / (T + sum b/a)               (log capacity)
///   mu = (sum sqrt(w/a) / (T + sum b/a))^2   (inverse MSE)
/// with T the available budget; everything else bisects on the strictly
/// decreasing map mu -> sum g_k(mu).
inline double solve_water_level(std::span<const Objective> objs, std::span<const std::size_t> active,
                                double fixed_consumption, double budget) {
  const double target = budget - fixed_consumption;
  if (active.empty()) throw Error(ErrorKind::InvalidProblem, "water level needs at least one active channel");
  if (!(target > 0.0)) throw Error(ErrorKind::InvalidProblem, "water level needs a positive remaining budget");

  switch (detail::shared_closed_form(objs, active)) {
    case detail::ClosedForm::Log: {
      double wsum = 0.0;
      double offset = 0.0;
      for (auto k : active) {
        const auto& f = std::get<LogCapacity>(objs[k].family());
        wsum += f.w;
        offset += f.b / f.a;
      }
      return wsum / (target + offset);
    }
    case detail::ClosedForm::InverseMse: {
      double root_sum = 0.0;
      double offset = 0.0;
      for (auto k : active) {
        const auto& f = std::get<InverseMse>(objs[k].family());
        root_sum += std::sqrt(f.w / f.a);
        offset += f.b / f.a;
      }
      const double r = root_sum / (target + offset);
      return r * r;
    }
    case detail::ClosedForm::None:
      break;
  }

  // Every channel demands at least target/n at the smallest of the rates
  // evaluated there, and at most target/n at the largest.
  const double share = target / static_cast<double>(active.size());
  double lo = kInf;
  double hi = 0.0;
  for (auto k : active) {
    const double r = objs[k].rate(share);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  int expansions = 0;
  while (detail::demand(objs, active, lo) < target) {
    lo *= 0.5;
    if (++expansions > 60) throw Error(ErrorKind::BracketFailure, "no lower water-level bracket");
  }
  while (detail::demand(objs, active, hi) > target) {
    hi *= 2.0;
    if (++expansions > 120) throw Error(ErrorKind::BracketFailure, "no upper water-level bracket");
  }
  if (hi == lo) return lo;

  double best = hi;
  double best_gap = std::abs(detail::demand(objs, active, hi) - target);
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    const double d = detail::demand(objs, active, mid);
    const double gap = std::abs(d - target);
    if (gap < best_gap || (gap == best_gap && d <= target)) {
      best = mid;
      best_gap = gap;
    }
    if (gap <= 1e-14 * target) break;
    if (d > target) lo = mid;
    else hi = mid;
  }
  return best;
}

namespace detail {

struct LowerFill {
  std::vector<double> powers;  // indexed like the full problem; untouched outside idx
  std::vector<char> active;    // indexed like the full problem
  double water_level = 0.0;
  int iterations = 0;
  std::vector<double> trace;
  bool capped = false;
};

/// Lower-bounded water-filling restricted to the channels in `idx`.
inline LowerFill lower_bounded_fill(std::span<const Objective> objs, std::span<const std::size_t> idx,
                                    std::span<const double> lower, double budget, int cap) {
  LowerFill out;
  out.powers.assign(objs.size(), 0.0);
  out.active.assign(objs.size(), 0);
  std::vector<std::size_t> active(idx.begin(), idx.end());
  for (auto k : idx) out.active[k] = 1;
  double fixed = 0.0;

  while (!active.empty()) {
    double active_floor = 0.0;
    for (auto k : active) active_floor += lower[k];
    if (budget - fixed - active_floor <= 1e-15 * budget) {
      for (auto k : active) {
        out.powers[k] = lower[k];
        out.active[k] = 0;
      }
      active.clear();
      break;
    }
    const double mu = solve_water_level(objs, active, fixed, budget);
    out.water_level = mu;
    out.trace.push_back(mu);

    std::vector<std::size_t> keep;
    std::vector<std::size_t> drop;
    for (auto k : active) {
      const double p = objs[k].inverse_rate(mu);
      out.powers[k] = p;
      (p <= lower[k] ? drop : keep).push_back(k);
    }
    if (drop.empty()) break;
    if (out.iterations >= cap) {
      out.capped = true;
      for (auto k : drop) out.powers[k] = lower[k];
      break;
    }
    ++out.iterations;
    for (auto k : drop) {
      out.powers[k] = lower[k];
      out.active[k] = 0;
      fixed += lower[k];
    }
    active = std::move(keep);
  }
  if (active.empty()) out.water_level = 0.0;
  return out;
}

inline Allocation finish_allocation(std::span<const Objective> objs, std::vector<double> powers,
                                    std::span<const double> lower, std::span<const double> upper,
                                    double water_level, std::string algorithm) {
  Allocation a;
  a.powers = std::move(powers);
  a.water_level = water_level;
  for (std::size_t k = 0; k < a.powers.size(); ++k) {
    if (a.powers[k] <= lower[k]) {
      a.powers[k] = lower[k];
      a.lower_set.push_back(k);
    } else if (a.powers[k] >= upper[k]) {
      a.powers[k] = upper[k];
      a.upper_set.push_back(k);
    } else {
      a.active_set.push_back(k);
    }
  }
  a.objective_value = total_utility(objs, a.powers);
  a.algorithm = std::move(algorithm);
  return a;
}

}  // namespace detail

/// Algorithm for P1.1: sum p_k <= budget, p_k >= lower_k.
inline Allocation solve_p1_lower(SimplexProblem problem, const SolverConfig& cfg = {}) {
  problem.validate();
  cfg.validate();
  const std::size_t n = problem.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto fill = detail::lower_bounded_fill(problem.objectives, all, problem.lower, problem.budget,
                                         cfg.outer_cap(n));
  const std::vector<double> upper(n, kInf);
  Allocation a = detail::finish_allocation(problem.objectives, std::move(fill.powers), problem.lower, upper,
                                           fill.water_level, problem.has_lower_bounds() ? "p1_lower" : "p1");
  a.iterations = fill.iterations;
  a.water_level_trace = std::move(fill.trace);
  a.status = fill.capped ? Status::IterationCap : Status::Optimal;
  return a;
}

/// Algorithm for P1: sum p_k <= budget, p_k >= 0.
inline Allocation solve_p1(SimplexProblem problem, const SolverConfig& cfg = {}) {
  problem.validate();
  if (problem.has_lower_bounds()) {
    throw Error(ErrorKind::InvalidProblem, "solve_p1 expects zero lower bounds; use solve_p1_lower");
  }
  return solve_p1_lower(std::move(problem), cfg);
}

/// Residuals of the equal-rate / lower-rate / budget conditions.
inline KktReport kkt_residual_p1(SimplexProblem problem, const Allocation& allocation,
                                 double tolerance = detail::kDefaultConditionTolerance) {
  problem.validate();
  if (allocation.powers.size() != problem.size()) {
    throw Error(ErrorKind::InvalidProblem, "allocation length does not match problem");
  }
  const std::vector<double> upper(problem.size(), kInf);
  auto report = detail::single_constraint_report(problem.objectives, problem.lower, upper, problem.budget,
                                                 allocation.powers, tolerance);
  // the upper-bound line never applies here
  std::erase_if(report.conditions, [](const auto& c) { return c.name == "upper_rate"; });
  return report;
}

}  // namespace waterline
