#pragma once

// Water-filling under a sum constraint plus a box gamma_k <= p_k <= tau_k on
// every channel.  Four interchangeable strategies:
//
//   set_a      repeated lower-bounded fills, clamping upper violators
//   set_b      joint lower/upper indicator updates (falls back to set_a if
//              the indicator updates have not settled after 4K rounds)
//   bisection  bisection on the water level with clamped demands
//   ordered    sweep over channels sorted by rate(tau), then one
//              lower-bounded fill on the channels that stay below tau
//
// Common preprocessing: when sum tau <= budget every channel takes tau and
// the status is Feasible; channels with gamma == tau are pinned and never
// take part in the water-level computations.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "waterline/conditions.hpp"
#include "waterline/error.hpp"
#include "waterline/objective.hpp"
#include "waterline/problem.hpp"
#include "waterline/solver_core.hpp"

namespace waterline {

namespace detail {

struct BoxWork {
  std::vector<std::size_t> free;  // channels with gamma < tau
  double budget = 0.0;            // budget left after pinned channels
  std::vector<double> powers;     // pinned channels already filled in
};

inline BoxWork box_work(const BoxProblem& pb) {
  BoxWork w;
  w.powers.assign(pb.size(), 0.0);
  w.budget = pb.budget;
  for (std::size_t k = 0; k < pb.size(); ++k) {
    if (pb.upper[k] <= pb.lower[k]) {
      w.powers[k] = pb.lower[k];
      w.budget -= pb.lower[k];
    } else {
      w.free.push_back(k);
    }
  }
  return w;
}

inline std::optional<Allocation> budget_slack(const BoxProblem& pb, std::string_view strategy) {
  if (sum(pb.upper) > pb.budget) return std::nullopt;
  Allocation a;
  a.powers = pb.upper;
  for (std::size_t k = 0; k < pb.size(); ++k) {
    (pb.upper[k] <= pb.lower[k] ? a.lower_set : a.upper_set).push_back(k);
  }
  a.objective_value = total_utility(pb.objectives, a.powers);
  a.status = Status::Feasible;
  a.algorithm = std::string(strategy);
  return a;
}

inline double mean_active_rate(std::span<const Objective> objs, const Allocation& a) {
  if (a.active_set.empty()) return 0.0;
  double s = 0.0;
  for (auto k : a.active_set) s += objs[k].rate(a.powers[k]);
  return s / static_cast<double>(a.active_set.size());
}

inline Allocation finish_box(const BoxProblem& pb, std::vector<double> powers, std::string_view strategy,
                             int iterations, std::vector<double> trace) {
  Allocation a = finish_allocation(pb.objectives, std::move(powers), pb.lower, pb.upper, 0.0,
                                   std::string(strategy));
  a.water_level = mean_active_rate(pb.objectives, a);
  a.iterations = iterations;
  a.water_level_trace = std::move(trace);
  return a;
}

}  // namespace detail

/// Strategy set_a: lower-bounded fill, clamp every channel at or above its
/// upper bound, shrink the budget and refill the rest until nothing
/// exceeds its upper bound.
inline Allocation solve_box_setA(BoxProblem pb, const SolverConfig& cfg = {}) {
  pb.validate();
  cfg.validate();
  if (auto slack = detail::budget_slack(pb, "set_a")) return *slack;
  auto work = detail::box_work(pb);
  std::vector<double> p = work.powers;
  std::vector<std::size_t> others = work.free;
  double budget = work.budget;
  std::vector<double> trace;
  int rounds = 0;
  const int cap = cfg.outer_cap(pb.size());

  while (true) {
    ++rounds;
    auto fill = detail::lower_bounded_fill(pb.objectives, others, pb.lower, budget, cap);
    trace.push_back(fill.water_level);
    std::vector<std::size_t> below;
    std::vector<std::size_t> clamped;
    for (auto k : others) {
      p[k] = fill.powers[k];
      (p[k] >= pb.upper[k] ? clamped : below).push_back(k);
    }
    if (clamped.empty()) break;
    for (auto k : clamped) {
      p[k] = pb.upper[k];
      budget -= pb.upper[k];
    }
    others = std::move(below);
    if (others.empty()) break;
  }
  return detail::finish_box(pb, std::move(p), "set_a", rounds, std::move(trace));
}

namespace detail {

struct IndicatorState {
  std::vector<char> above_lower;  // I_k
  std::vector<char> below_upper;  // J_k
};

/// Powers for fixed indicators: bound values for flagged channels, g(mu)
/// for the rest with mu chosen to meet the budget.
inline double indicator_powers(const BoxProblem& pb, std::span<const std::size_t> channels,
                               const IndicatorState& s, double budget, std::vector<double>& p) {
  std::vector<std::size_t> active;
  double fixed = 0.0;
  double active_floor = 0.0;
  for (auto k : channels) {
    if (!s.below_upper[k]) {
      p[k] = pb.upper[k];
      fixed += p[k];
    } else if (!s.above_lower[k]) {
      p[k] = pb.lower[k];
      fixed += p[k];
    } else {
      active.push_back(k);
      active_floor += pb.lower[k];
    }
  }
  if (active.empty()) return 0.0;
  if (budget - fixed - active_floor <= 1e-15 * budget) {
    for (auto k : active) p[k] = pb.lower[k];
    return 0.0;
  }
  const double mu = solve_water_level(pb.objectives, active, fixed, budget);
  for (auto k : active) p[k] = pb.objectives[k].inverse_rate(mu);
  return mu;
}

}  // namespace detail

/// Strategy set_b: both indicator families updated jointly.
inline Allocation solve_box_setB(BoxProblem pb, const SolverConfig& cfg = {}) {
  pb.validate();
  cfg.validate();
  if (auto slack = detail::budget_slack(pb, "set_b")) return *slack;
  auto work = detail::box_work(pb);
  const auto& ch = work.free;
  std::vector<double> p = work.powers;
  detail::IndicatorState s{std::vector<char>(pb.size(), 1), std::vector<char>(pb.size(), 1)};
  std::vector<double> trace;

  auto is_free = [&](std::size_t k) { return s.above_lower[k] && s.below_upper[k]; };
  auto count_violations = [&](bool lower_side) {
    std::size_t n = 0;
    for (auto k : ch) {
      if (!is_free(k)) continue;
      if (lower_side ? p[k] < pb.lower[k] : p[k] > pb.upper[k]) ++n;
    }
    return n;
  };

  trace.push_back(detail::indicator_powers(pb, ch, s, work.budget, p));
  const int cap = cfg.outer_cap(pb.size());
  int rounds = 0;
  bool settled = true;
  while (count_violations(true) + count_violations(false) > 0) {
    if (rounds >= cap) {
      settled = false;
      break;
    }
    ++rounds;
    for (auto k : ch) {
      if (is_free(k) && p[k] <= pb.lower[k]) {
        p[k] = pb.lower[k];
        s.above_lower[k] = 0;
      }
    }
    trace.push_back(detail::indicator_powers(pb, ch, s, work.budget, p));
    if (count_violations(true) == 0 && count_violations(false) > 0) {
      for (auto k : ch) {
        if (is_free(k) && p[k] >= pb.upper[k]) {
          p[k] = pb.upper[k];
          s.below_upper[k] = 0;
        }
      }
      std::fill(s.above_lower.begin(), s.above_lower.end(), 1);
      trace.push_back(detail::indicator_powers(pb, ch, s, work.budget, p));
    }
  }
  if (settled) {
    const double total = detail::sum(p);
    settled = std::abs(total - pb.budget) <= cfg.power_tolerance * pb.budget;
  }
  if (!settled) {
    Allocation a = solve_box_setA(pb, cfg);
    a.algorithm = "set_b_fallback_set_a";
    a.iterations += rounds;
    return a;
  }
  return detail::finish_box(pb, std::move(p), "set_b", rounds, std::move(trace));
}

/// Strategy bisection: bisection on mu with p_k = clamp(g_k(mu), gamma_k, tau_k)
/// until the power residual is within 1e-12 * budget.  If the bracket
/// collapses first, the best iterate is returned with status Feasible.
inline Allocation solve_box_bisect(BoxProblem pb, const SolverConfig& cfg = {}) {
  pb.validate();
  cfg.validate();
  if (auto slack = detail::budget_slack(pb, "bisection")) return *slack;
  auto work = detail::box_work(pb);
  const auto& ch = work.free;
  const auto& objs = pb.objectives;

  double mu_max = 0.0;
  double mu_min_finite = kInf;
  double mu_min_open = 0.0;
  bool any_open = false;
  for (auto k : ch) {
    double r = objs[k].rate(pb.lower[k]);
    if (!std::isfinite(r)) r = objs[k].rate(pb.lower[k] + 1e-12);
    mu_max = std::max(mu_max, r);
    if (std::isfinite(pb.upper[k])) {
      mu_min_finite = std::min(mu_min_finite, objs[k].rate(pb.upper[k]));
    } else {
      any_open = true;
      mu_min_open = std::max(mu_min_open, objs[k].rate(pb.budget));
    }
  }
  double mu_min = any_open ? std::min(mu_min_finite, mu_min_open) : mu_min_finite;

  std::vector<double> p = work.powers;
  auto clamp_powers = [&](double mu) {
    double total = 0.0;
    for (auto k : ch) {
      const double g = objs[k].inverse_rate(mu);
      p[k] = g >= pb.upper[k] ? pb.upper[k] : (g <= pb.lower[k] ? pb.lower[k] : g);
    }
    for (double x : p) total += x;
    return total;
  };

  const double sigma = 1e-12 * pb.budget;
  std::vector<double> trace;
  double mu = 0.5 * (mu_min + mu_max);
  double total = clamp_powers(mu);
  trace.push_back(mu);
  int rounds = 0;
  Status status = Status::Optimal;
  double best_mu = mu;
  double best_gap = std::abs(total - pb.budget);
  while (std::abs(total - pb.budget) > sigma) {
    if (total > pb.budget) mu_min = mu;
    else mu_max = mu;
    const double next = 0.5 * (mu_min + mu_max);
    if (!(next > mu_min && next < mu_max)) {
      status = Status::Feasible;
      break;
    }
    mu = next;
    total = clamp_powers(mu);
    trace.push_back(mu);
    ++rounds;
    if (std::abs(total - pb.budget) < best_gap) {
      best_gap = std::abs(total - pb.budget);
      best_mu = mu;
    }
  }
  if (status != Status::Optimal) {
    clamp_powers(best_mu);
    // never hand back an allocation above the budget
    if (detail::sum(p) > pb.budget) clamp_powers(mu_max);
  }
  Allocation a = detail::finish_box(pb, std::move(p), "bisection", rounds, std::move(trace));
  a.status = status;
  return a;
}

/// Strategy ordered: sort the free channels by rate(tau) descending.  Case
/// i assumes the first i channels sit at tau and prices the rest at
/// mu = rate_i(tau_i).  The first case whose trial total reaches the budget
/// shows channel i does not bind, so channels 1..i-1 are fixed at tau and
/// the lower-bounded fill allocates the rest.
inline Allocation solve_box_ordered(BoxProblem pb, const SolverConfig& cfg = {}) {
  pb.validate();
  cfg.validate();
  if (auto slack = detail::budget_slack(pb, "ordered")) return *slack;
  auto work = detail::box_work(pb);
  const auto& objs = pb.objectives;
  std::vector<std::size_t> order = work.free;
  std::vector<double> key(pb.size(), 0.0);
  for (auto k : order) key[k] = std::isfinite(pb.upper[k]) ? objs[k].rate(pb.upper[k]) : 0.0;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return key[x] > key[y]; });

  const std::size_t n = order.size();
  std::size_t exit_case = n;  // 0-based index of sigma_i
  std::vector<double> trace;
  double fixed_prefix = 0.0;   // sum of tau over sigma_1..sigma_{i-1}
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t si = order[i];
    if (!std::isfinite(pb.upper[si])) {
      exit_case = i;
      break;
    }
    const double mu = key[si];
    trace.push_back(mu);
    double total = fixed_prefix + pb.upper[si];
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::size_t sj = order[j];
      total += std::max(objs[sj].inverse_rate(mu), pb.lower[sj]);
    }
    if (total >= work.budget) {
      exit_case = i;
      break;
    }
    fixed_prefix += pb.upper[si];
  }
  if (exit_case == n) {
    // every case under-allocates: only possible when sum tau <= budget
    std::vector<double> p = pb.upper;
    Allocation a = detail::finish_box(pb, std::move(p), "ordered", static_cast<int>(n), std::move(trace));
    a.status = Status::Feasible;
    return a;
  }

  std::vector<double> p = work.powers;
  for (std::size_t i = 0; i < exit_case; ++i) p[order[i]] = pb.upper[order[i]];
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(exit_case), order.end());
  auto fill = detail::lower_bounded_fill(objs, rest, pb.lower, work.budget - fixed_prefix,
                                         cfg.outer_cap(pb.size()));
  for (auto k : rest) p[k] = fill.powers[k];
  for (double mu : fill.trace) trace.push_back(mu);
  return detail::finish_box(pb, std::move(p), "ordered", static_cast<int>(exit_case) + 1, std::move(trace));
}

/// Dispatches on cfg.box_strategy.
inline Allocation solve_box(BoxProblem pb, const SolverConfig& cfg = {}) {
  switch (cfg.box_strategy) {
    case BoxStrategy::SetBasedA: return solve_box_setA(std::move(pb), cfg);
    case BoxStrategy::SetBasedB: return solve_box_setB(std::move(pb), cfg);
    case BoxStrategy::Bisection: return solve_box_bisect(std::move(pb), cfg);
    case BoxStrategy::OrderBased: return solve_box_ordered(std::move(pb), cfg);
  }
  throw Error(ErrorKind::InvalidProblem, "unknown box strategy");
}

inline KktReport kkt_residual_box(BoxProblem pb, const Allocation& allocation,
                                  double tolerance = detail::kDefaultConditionTolerance) {
  pb.validate();
  if (allocation.powers.size() != pb.size()) {
    throw Error(ErrorKind::InvalidProblem, "allocation length does not match problem");
  }
  return detail::single_constraint_report(pb.objectives, pb.lower, pb.upper, pb.budget, allocation.powers,
                                          tolerance);
}

}  // namespace waterline
