#pragma once

// Residuals of the optimality conditions for single-sum-constraint
// problems: equal marginal utility on the active set, lower-bound channels
// no more attractive than the water level, upper-bound channels no less
// attractive, and a fully used budget.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "waterline/problem.hpp"

namespace waterline::detail {

inline constexpr double kDefaultConditionTolerance = 1e-8;

struct ChannelClasses {
  std::vector<std::size_t> active, lower, upper, pinned;
};

inline ChannelClasses classify(std::span<const double> p, std::span<const double> lower,
                               std::span<const double> upper, double budget) {
  const double eps = 1e-12 * (1.0 + budget);
  ChannelClasses c;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (upper[k] - lower[k] <= eps) c.pinned.push_back(k);
    else if (p[k] <= lower[k] + eps) c.lower.push_back(k);
    else if (std::isfinite(upper[k]) && p[k] >= upper[k] - eps) c.upper.push_back(k);
    else c.active.push_back(k);
  }
  return c;
}

/// Feasibility violation relative to the budget: bound violations and the
/// amount by which the sum exceeds the budget.
inline double box_violation(std::span<const double> p, std::span<const double> lower,
                            std::span<const double> upper, double budget) {
  double v = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    v = std::max(v, lower[k] - p[k]);
    if (std::isfinite(upper[k])) v = std::max(v, p[k] - upper[k]);
  }
  double total = 0.0;
  for (double x : p) total += x;
  v = std::max(v, total - budget);
  return std::max(v, 0.0) / budget;
}

/// Full report for max sum f_k(p_k) s.t. sum p_k <= budget, lower <= p <= upper.
inline KktReport single_constraint_report(std::span<const Objective> objs, std::span<const double> lower,
                                          std::span<const double> upper, double budget,
                                          std::span<const double> p,
                                          double tol = kDefaultConditionTolerance,
                                          double cluster_power = 0.0) {
  KktReport report;
  const auto cls = classify(p, lower, upper, budget);

  double mu = 0.0;
  double rmin = kInf;
  double rmax = 0.0;
  for (auto k : cls.active) {
    const double r = objs[k].rate(p[k], cluster_power);
    mu += r;
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  const bool have_active = !cls.active.empty();
  if (have_active) mu /= static_cast<double>(cls.active.size());
  report.water_level = mu;

  report.add("rate_spread", have_active ? (rmax - rmin) / mu : 0.0, tol, have_active);

  double lower_violation = 0.0;
  for (auto k : cls.lower) {
    const double r = objs[k].rate(lower[k], cluster_power);
    lower_violation = std::max(lower_violation, (r - mu) / mu);
  }
  report.add("lower_rate", lower_violation, tol, have_active && !cls.lower.empty());

  double upper_violation = 0.0;
  for (auto k : cls.upper) {
    const double r = objs[k].rate(upper[k], cluster_power);
    upper_violation = std::max(upper_violation, (mu - r) / mu);
  }
  report.add("upper_rate", upper_violation, tol, have_active && !cls.upper.empty());

  double upper_total = 0.0;
  for (double t : upper) upper_total += t;
  double total = 0.0;
  for (double x : p) total += x;
  const bool budget_binds = upper_total > budget;
  report.add("budget", std::abs(total - budget) / budget, tol, budget_binds);
  report.add("feasibility", box_violation(p, lower, upper, budget), tol);
  return report;
}

}  // namespace waterline::detail
