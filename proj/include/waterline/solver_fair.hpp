#pragma once

// Group-coupled problems.
//
//   maxmin          max t  s.t. U_j(p_j) >= t for every group, sum of all
//                   powers <= P, optional boxes per channel
//   cluster         max sum_j U_j(p_j; P_j) where every utility in group j
//                   also depends on the group total P_j
//   cluster_maxmin  the max-min version of the cluster problem
//
// Max-min modes bisect on t.  For a given t every group needs a minimum
// power D_j(t); the total demand is increasing in t and the answer is the
// t at which it meets the budget.  Without boxes D_j(t) comes from the
// same deactivation loop as the single-group solver, only the water level
// is solved from a utility target instead of a power target.  With boxes
// the water level is bisected with clamped demands.
//
// The cluster mode bisects on a common outer rate lambda: each group takes
// the P_j at which the derivative of its best value V_j(P_j) equals lambda.
// That derivative is the group's water level plus the partial derivatives
// of its utilities with respect to P_j.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "waterline/conditions.hpp"
#include "waterline/error.hpp"
#include "waterline/objective.hpp"
#include "waterline/problem.hpp"
#include "waterline/solver_box.hpp"
#include "waterline/solver_core.hpp"

namespace waterline {

namespace detail {

/// Best allocation of a group for a fixed group budget.
inline Allocation group_best(const Group& g, double budget, bool cluster, const SolverConfig& cfg) {
  std::vector<Objective> objs;
  objs.reserve(g.size());
  for (const auto& f : g.objectives) objs.push_back(cluster ? f.at_cluster_power(budget) : f);
  const double floor = detail::sum(g.lower);
  if (budget - floor <= 1e-15 * std::max(1.0, budget)) {
    Allocation a;
    a.powers = g.lower;
    a.objective_value = total_utility(objs, a.powers);
    for (std::size_t k = 0; k < g.size(); ++k) a.lower_set.push_back(k);
    return a;
  }
  if (g.has_boxes()) {
    return solve_box(BoxProblem{std::move(objs), budget, g.lower, g.upper}, cfg);
  }
  return solve_p1(SimplexProblem{std::move(objs), budget, {}}, cfg);
}

inline double group_value(const Group& g, double budget, bool cluster, const SolverConfig& cfg) {
  return group_best(g, budget, cluster, cfg).objective_value;
}

/// Water level at which the active channels reach `target` total utility,
/// using the continued utility so the map is strictly decreasing.
inline double level_for_utility(std::span<const Objective> objs, std::span<const std::size_t> active,
                                double target) {
  switch (shared_closed_form(objs, active)) {
    case ClosedForm::Log: {
      double wsum = 0.0;
      double num = -target;
      for (auto k : active) {
        const auto& f = std::get<LogCapacity>(objs[k].family());
        wsum += f.w;
        num += f.w * std::log(f.a * f.w);
      }
      return std::exp(num / wsum);
    }
    case ClosedForm::InverseMse: {
      double root_sum = 0.0;
      for (auto k : active) {
        const auto& f = std::get<InverseMse>(objs[k].family());
        root_sum += std::sqrt(f.w / f.a);
      }
      const double r = -target / root_sum;
      if (!(r > 0.0)) throw Error(ErrorKind::InfeasibleTarget, "utility target at or above the supremum");
      return r * r;
    }
    case ClosedForm::None:
      break;
  }
  auto excess = [&](double mu) {
    double s = 0.0;
    for (auto k : active) s += objs[k].utility_at_level(mu);
    return s - target;
  };
  double lo = objs[active.front()].rate(1.0);
  double hi = lo;
  int expansions = 0;
  while (excess(lo) < 0.0) {
    lo *= 0.5;
    if (++expansions > 1100) throw Error(ErrorKind::InfeasibleTarget, "utility target not reachable");
  }
  while (excess(hi) > 0.0) {
    hi *= 2.0;
    if (++expansions > 2200) throw Error(ErrorKind::BracketFailure, "no upper bracket for utility level");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    const double e = excess(mid);
    if (e == 0.0) return mid;
    if (e > 0.0) lo = mid;
    else hi = mid;
    if (hi / lo - 1.0 <= 1e-15) break;
  }
  return std::sqrt(lo * hi);
}

struct GroupDemand {
  double power = 0.0;
  double water_level = 0.0;
  std::vector<double> powers;
  int rounds = 0;
};

/// Least power with which an unboxed group reaches utility t, assuming
/// U(0) < t <= U(budget).
inline GroupDemand unboxed_demand(std::span<const Objective> objs, double t) {
  GroupDemand d;
  d.powers.assign(objs.size(), 0.0);
  std::vector<std::size_t> active(objs.size());
  std::iota(active.begin(), active.end(), std::size_t{0});
  double fixed_utility = 0.0;
  while (true) {
    const double mu = level_for_utility(objs, active, t - fixed_utility);
    d.water_level = mu;
    std::vector<std::size_t> keep;
    std::vector<std::size_t> drop;
    for (auto k : active) {
      const double p = objs[k].inverse_rate(mu);
      d.powers[k] = p;
      (p <= 0.0 ? drop : keep).push_back(k);
    }
    if (drop.empty() || keep.empty()) break;
    ++d.rounds;
    for (auto k : drop) {
      d.powers[k] = 0.0;
      fixed_utility += objs[k].eval(0.0);
    }
    active = std::move(keep);
  }
  for (auto& p : d.powers) p = std::max(p, 0.0);
  d.power = detail::sum(d.powers);
  return d;
}

/// Least power with which a boxed group reaches utility t, assuming
/// U(lower) < t <= best utility within the budget.
inline GroupDemand boxed_demand(const Group& g, double t, double budget) {
  const auto& objs = g.objectives;
  GroupDemand d;
  d.powers.assign(g.size(), 0.0);
  auto clamp_at = [&](double mu) {
    double u = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (g.upper[k] <= g.lower[k]) {
        d.powers[k] = g.lower[k];
      } else {
        const double x = objs[k].inverse_rate(mu);
        d.powers[k] = x >= g.upper[k] ? g.upper[k] : (x <= g.lower[k] ? g.lower[k] : x);
      }
      u += objs[k].eval(d.powers[k]);
    }
    return u;
  };
  double hi = 0.0;
  double lo = kInf;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.upper[k] <= g.lower[k]) continue;
    double r = objs[k].rate(g.lower[k]);
    if (!std::isfinite(r)) r = objs[k].rate(g.lower[k] + 1e-12);
    hi = std::max(hi, r);
    lo = std::min(lo, objs[k].rate(std::min(g.upper[k], budget)));
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    const double u = clamp_at(mid);
    if (u >= t) lo = mid;
    else hi = mid;
    if (hi / lo - 1.0 <= 1e-15) break;
    ++d.rounds;
  }
  clamp_at(lo);
  d.water_level = lo;
  d.power = detail::sum(d.powers);
  return d;
}

struct MaxMinGroup {
  const Group* group;
  double floor_value;    // utility at the lower bounds
  double best_value;     // best utility with the whole spare budget
  double spare_budget;   // budget minus the other groups' lower bounds
};

inline double group_power_floor(const Group& g) { return detail::sum(g.lower); }

/// Utility at the lower bounds; -inf when a bound sits on a domain edge.
inline double floor_utility(const Group& g) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!std::isfinite(g.objectives[k].rate(g.lower[k]))) return -kInf;
  }
  return total_utility(g.objectives, g.lower);
}

}  // namespace detail

/// Max-min allocation over groups (boxes allowed).
inline FairSolution solve_maxmin(FairProblem problem, const SolverConfig& cfg = {}) {
  problem.validate();
  cfg.validate();
  if (problem.mode != FairMode::MaxMin) throw Error(ErrorKind::InvalidProblem, "solve_maxmin expects maxmin mode");
  const std::size_t J = problem.size();
  const double P = problem.budget;
  double floor_total = 0.0;
  for (const auto& g : problem.groups) floor_total += detail::group_power_floor(g);
  const double spare = P - floor_total;

  FairSolution sol;
  sol.powers.resize(J);
  sol.water_levels.assign(J, 0.0);
  sol.group_totals.assign(J, 0.0);
  sol.group_utilities.assign(J, 0.0);
  sol.indicators.resize(J);

  std::vector<detail::MaxMinGroup> info;
  for (const auto& g : problem.groups) {
    const double own_floor = detail::group_power_floor(g);
    const double reach = own_floor + spare;
    info.push_back({&g, detail::floor_utility(g), detail::group_value(g, reach, false, cfg), reach});
  }

  // demand of group j at level t; +inf when the group cannot reach t
  auto demand = [&](std::size_t j, double t, detail::GroupDemand* out) {
    const auto& gi = info[j];
    const Group& g = *gi.group;
    if (t <= gi.floor_value) {
      if (out) {
        out->powers = g.lower;
        out->power = detail::sum(g.lower);
        out->water_level = 0.0;
      }
      return detail::group_power_floor(g);
    }
    if (t > gi.best_value) return kInf;
    auto d = g.has_boxes() ? detail::boxed_demand(g, t, gi.spare_budget) : detail::unboxed_demand(g.objectives, t);
    const double power = d.power;
    if (out) *out = std::move(d);
    return power;
  };
  auto total_demand = [&](double t) {
    double s = 0.0;
    for (std::size_t j = 0; j < J && s <= P * (1.0 + 1e-9); ++j) s += demand(j, t, nullptr);
    return s;
  };

  double t_lo = kInf;
  double t_hi = kInf;
  if (spare <= 1e-15 * P) {
    t_lo = t_hi = kInf;
    for (const auto& gi : info) t_lo = std::min(t_lo, gi.floor_value);
    t_hi = t_lo;
  } else {
    const double share = spare / static_cast<double>(J);
    for (const auto& gi : info) {
      const Group& g = *gi.group;
      t_lo = std::min(t_lo, detail::group_value(g, detail::group_power_floor(g) + share, false, cfg));
      t_hi = std::min(t_hi, gi.best_value);
    }
  }
  if (!std::isfinite(t_lo) || !std::isfinite(t_hi)) {
    throw Error(ErrorKind::InfeasibleTarget, "group utilities are unbounded below at the bracket");
  }
  if (total_demand(t_lo) > P * (1.0 + 1e-9)) {
    throw Error(ErrorKind::InfeasibleTarget, "lower utility bracket already exceeds the budget");
  }

  double t = t_lo;
  const double d_hi = total_demand(t_hi);
  sol.trace.emplace_back(t_lo, total_demand(t_lo));
  sol.trace.emplace_back(t_hi, d_hi);
  if (d_hi <= P) {
    // a group saturates its boxes (or the bracket is degenerate) before the budget binds
    t = t_hi;
  } else {
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      if (!(mid > t_lo && mid < t_hi)) break;
      const double d = total_demand(mid);
      sol.trace.emplace_back(mid, d);
      ++sol.iterations;
      if (d <= P) t_lo = mid;
      else t_hi = mid;
      if (std::abs(d - P) <= 1e-13 * P) break;
      if (t_hi - t_lo <= 1e-14 * (1.0 + std::abs(t_lo))) break;
    }
    t = t_lo;
  }

  sol.t = t;
  for (std::size_t j = 0; j < J; ++j) {
    detail::GroupDemand d;
    const double power = demand(j, t, &d);
    if (!std::isfinite(power)) throw Error(ErrorKind::InfeasibleTarget, "group cannot reach the common level");
    const Group& g = problem.groups[j];
    sol.powers[j] = std::move(d.powers);
    sol.group_totals[j] = power;
    sol.water_levels[j] = d.water_level;
    sol.group_utilities[j] = total_utility(g.objectives, sol.powers[j]);
    sol.indicators[j].resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) sol.indicators[j][k] = sol.powers[j][k] > g.lower[k] ? 1 : 0;
  }
  sol.objective_value = *std::min_element(sol.group_utilities.begin(), sol.group_utilities.end());
  return sol;
}

namespace detail {

/// d V_j / d P_j: group water level plus the explicit dependence of every
/// utility on the group total.
inline double cluster_outer_rate(const Group& g, double budget, const SolverConfig& cfg, Allocation* best = nullptr) {
  if (budget <= 0.0) {
    double r = 0.0;
    for (const auto& f : g.objectives) r = std::max(r, f.rate_at_zero(0.0));
    return r;
  }
  Allocation a = group_best(g, budget, true, cfg);
  double r = a.water_level;
  for (std::size_t k = 0; k < g.size(); ++k) r += g.objectives[k].cluster_partial(a.powers[k], budget);
  if (best) *best = std::move(a);
  return r;
}

/// Group total at which the outer rate falls to lambda, capped at `cap`.
inline double cluster_share(const Group& g, double lambda, double cap, const SolverConfig& cfg) {
  if (cluster_outer_rate(g, 0.0, cfg) <= lambda) return 0.0;
  if (cluster_outer_rate(g, cap, cfg) >= lambda) return cap;
  double lo = 0.0;
  double hi = cap;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (cluster_outer_rate(g, mid, cfg) > lambda) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-14 * cap) break;
  }
  return 0.5 * (lo + hi);
}

inline void fill_group_results(const FairProblem& problem, FairSolution& sol, const SolverConfig& cfg) {
  const std::size_t J = problem.size();
  sol.powers.assign(J, {});
  sol.water_levels.assign(J, 0.0);
  sol.group_utilities.assign(J, 0.0);
  sol.indicators.assign(J, {});
  for (std::size_t j = 0; j < J; ++j) {
    const Group& g = problem.groups[j];
    const double pj = sol.group_totals[j];
    if (pj > 0.0) {
      Allocation a = group_best(g, pj, true, cfg);
      sol.powers[j] = a.powers;
      sol.water_levels[j] = a.water_level;
    } else {
      sol.powers[j].assign(g.size(), 0.0);
    }
    sol.group_utilities[j] = total_utility(g.objectives, sol.powers[j], pj);
    sol.indicators[j].resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) sol.indicators[j][k] = sol.powers[j][k] > 0.0 ? 1 : 0;
  }
}

}  // namespace detail

/// Clustered sum-utility allocation.
inline FairSolution solve_cluster(FairProblem problem, const SolverConfig& cfg = {}) {
  problem.validate();
  cfg.validate();
  if (problem.mode != FairMode::Cluster) throw Error(ErrorKind::InvalidProblem, "solve_cluster expects cluster mode");
  const std::size_t J = problem.size();
  const double P = problem.budget;
  FairSolution sol;
  sol.group_totals.assign(J, 0.0);

  if (J == 1) {
    sol.group_totals[0] = P;
    sol.outer_rate = detail::cluster_outer_rate(problem.groups[0], P, cfg);
  } else {
    auto shares = [&](double lambda) {
      std::vector<double> s(J);
      for (std::size_t j = 0; j < J; ++j) s[j] = detail::cluster_share(problem.groups[j], lambda, P, cfg);
      return s;
    };
    double hi = 0.0;
    double lo = kInf;
    for (const auto& g : problem.groups) {
      hi = std::max(hi, detail::cluster_outer_rate(g, 0.0, cfg));
      lo = std::min(lo, detail::cluster_outer_rate(g, P, cfg));
    }
    lo = std::max(lo, 0.0);
    std::vector<double> best = shares(lo);
    double best_total = detail::sum(best);
    sol.trace.emplace_back(lo, best_total);
    if (best_total <= P) {
      // more power stops paying off before the budget binds
      sol.group_totals = best;
      sol.outer_rate = lo;
      sol.status = Status::Feasible;
    } else {
      std::vector<double> under = shares(hi);
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        auto s = shares(mid);
        const double total = detail::sum(s);
        sol.trace.emplace_back(mid, total);
        ++sol.iterations;
        if (total > P) lo = mid;
        else {
          hi = mid;
          under = std::move(s);
        }
        if (std::abs(total - P) <= 1e-13 * P) break;
        if (hi - lo <= 1e-15 * hi) break;
      }
      // hand the last sliver of budget to the largest group
      const double gap = P - detail::sum(under);
      *std::max_element(under.begin(), under.end()) += gap;
      sol.group_totals = std::move(under);
      sol.outer_rate = hi;
    }
  }
  detail::fill_group_results(problem, sol, cfg);
  sol.objective_value = detail::sum(sol.group_utilities);
  return sol;
}

/// Clustered max-min allocation.
inline FairSolution solve_cluster_maxmin(FairProblem problem, const SolverConfig& cfg = {}) {
  problem.validate();
  cfg.validate();
  if (problem.mode != FairMode::ClusterMaxMin) {
    throw Error(ErrorKind::InvalidProblem, "solve_cluster_maxmin expects cluster_maxmin mode");
  }
  const std::size_t J = problem.size();
  const double P = problem.budget;
  std::vector<double> zero_value(J), full_value(J);
  for (std::size_t j = 0; j < J; ++j) {
    const Group& g = problem.groups[j];
    zero_value[j] = total_utility(g.objectives, std::vector<double>(g.size(), 0.0), 0.0);
    full_value[j] = detail::group_value(g, P, true, cfg);
  }
  auto demand = [&](std::size_t j, double t) {
    if (t <= zero_value[j]) return 0.0;
    if (t > full_value[j]) return kInf;
    double lo = 0.0;
    double hi = P;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      if (detail::group_value(problem.groups[j], mid, true, cfg) >= t) hi = mid;
      else lo = mid;
      if (hi - lo <= 1e-14 * P) break;
    }
    return hi;
  };
  auto total_demand = [&](double t) {
    double s = 0.0;
    for (std::size_t j = 0; j < J && s <= P * (1.0 + 1e-9); ++j) s += demand(j, t);
    return s;
  };

  double t_lo = kInf;
  double t_hi = kInf;
  for (std::size_t j = 0; j < J; ++j) {
    t_lo = std::min(t_lo, detail::group_value(problem.groups[j], P / static_cast<double>(J), true, cfg));
    t_hi = std::min(t_hi, full_value[j]);
  }
  FairSolution sol;
  sol.trace.emplace_back(t_lo, total_demand(t_lo));
  if (sol.trace.back().second > P * (1.0 + 1e-9)) {
    throw Error(ErrorKind::InfeasibleTarget, "lower utility bracket already exceeds the budget");
  }
  const double d_hi = total_demand(t_hi);
  sol.trace.emplace_back(t_hi, d_hi);
  double t = t_hi;
  if (d_hi > P) {
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      if (!(mid > t_lo && mid < t_hi)) break;
      const double d = total_demand(mid);
      sol.trace.emplace_back(mid, d);
      ++sol.iterations;
      if (d <= P) t_lo = mid;
      else t_hi = mid;
      if (std::abs(d - P) <= 1e-13 * P) break;
      if (t_hi - t_lo <= 1e-14 * (1.0 + std::abs(t_lo))) break;
    }
    t = t_lo;
  }
  sol.t = t;
  sol.group_totals.assign(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) sol.group_totals[j] = demand(j, t);
  detail::fill_group_results(problem, sol, cfg);
  sol.objective_value = *std::min_element(sol.group_utilities.begin(), sol.group_utilities.end());
  return sol;
}

/// Dispatches on problem.mode.
inline FairSolution solve_fair(FairProblem problem, const SolverConfig& cfg = {}) {
  switch (problem.mode) {
    case FairMode::MaxMin: return solve_maxmin(std::move(problem), cfg);
    case FairMode::Cluster: return solve_cluster(std::move(problem), cfg);
    case FairMode::ClusterMaxMin: return solve_cluster_maxmin(std::move(problem), cfg);
  }
  throw Error(ErrorKind::InvalidProblem, "unknown fair mode");
}

/// Residuals for a fair solution: per-group box/water-filling conditions
/// at the group's own total, equal group utilities (max-min modes) or equal
/// outer rates (cluster mode), and a fully used budget.
inline KktReport kkt_residual_fair(FairProblem problem, const std::vector<std::vector<double>>& powers,
                                   double tolerance = detail::kDefaultConditionTolerance,
                                   double equalization_tolerance = 1e-6, const SolverConfig& cfg = {}) {
  problem.validate();
  const std::size_t J = problem.size();
  if (powers.size() != J) throw Error(ErrorKind::InvalidProblem, "one power vector per group required");
  const bool cluster = problem.mode != FairMode::MaxMin;
  KktReport report;
  report.water_levels.assign(J, 0.0);

  double spread = 0.0, lower_v = 0.0, upper_v = 0.0, violation = 0.0, total = 0.0;
  bool any_active = false;
  std::vector<double> totals(J), utilities(J);
  for (std::size_t j = 0; j < J; ++j) {
    const Group& g = problem.groups[j];
    if (powers[j].size() != g.size()) throw Error(ErrorKind::InvalidProblem, "group power length mismatch");
    totals[j] = detail::sum(powers[j]);
    total += totals[j];
    for (std::size_t k = 0; k < g.size(); ++k) {
      violation = std::max(violation, g.lower[k] - powers[j][k]);
      if (std::isfinite(g.upper[k])) violation = std::max(violation, powers[j][k] - g.upper[k]);
    }
    utilities[j] = total_utility(g.objectives, powers[j], cluster ? totals[j] : 0.0);
    if (totals[j] <= 0.0) continue;
    auto r = detail::single_constraint_report(g.objectives, g.lower, g.upper, totals[j], powers[j], tolerance,
                                              cluster ? totals[j] : 0.0);
    report.water_levels[j] = r.water_level;
    if (r.water_level > 0.0) {
      any_active = true;
      spread = std::max(spread, r.find("rate_spread")->residual);
      lower_v = std::max(lower_v, r.find("lower_rate")->residual);
      upper_v = std::max(upper_v, r.find("upper_rate")->residual);
    }
  }
  violation = std::max(violation, total - problem.budget);
  report.add("feasibility", std::max(violation, 0.0) / problem.budget, tolerance);
  report.add("rate_spread", spread, tolerance, any_active);
  report.add("lower_rate", lower_v, tolerance, any_active);
  report.add("upper_rate", upper_v, tolerance, any_active);

  if (problem.mode == FairMode::Cluster) {
    double lam = 0.0;
    std::size_t n = 0;
    double rmin = kInf, rmax = -kInf;
    for (std::size_t j = 0; j < J; ++j) {
      if (totals[j] <= 0.0) continue;
      const double r = detail::cluster_outer_rate(problem.groups[j], totals[j], cfg);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      lam += r;
      ++n;
    }
    lam = n ? lam / static_cast<double>(n) : 0.0;
    double idle = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      if (totals[j] > 0.0) continue;
      idle = std::max(idle, (detail::cluster_outer_rate(problem.groups[j], 0.0, cfg) - lam) / lam);
    }
    report.add("outer_rate_spread", n ? (rmax - rmin) / std::abs(lam) : 0.0, equalization_tolerance, n > 1);
    report.add("idle_group_rate", idle, equalization_tolerance, n > 0 && n < J);
    report.water_level = lam;
  } else {
    // groups held above the common level by their lower bounds or with no
    // power at all may exceed t; everyone else sits at t
    double t = kInf;
    for (double u : utilities) t = std::min(t, u);
    double eq = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const Group& g = problem.groups[j];
      bool at_floor = true;
      for (std::size_t k = 0; k < g.size(); ++k) at_floor = at_floor && powers[j][k] <= g.lower[k];
      if (at_floor) continue;
      eq = std::max(eq, std::abs(utilities[j] - t) / (1.0 + std::abs(t)));
    }
    report.add("equalization", eq, equalization_tolerance, J > 1);
  }

  double upper_total = 0.0;
  for (const auto& g : problem.groups) upper_total += detail::sum(g.upper);
  report.add("budget", std::abs(total - problem.budget) / problem.budget, tolerance,
             upper_total > problem.budget);
  return report;
}

}  // namespace waterline
