#pragma once

// Reference solvers for testing and verification.  None of them is meant
// to be fast.
//
//   enumerate_p1         every nonempty active set (K <= 15)
//   enumerate_box        every lower/upper/active assignment (K <= 8)
//   enumerate_ascending  every set of binding prefix budgets, each segment
//                        solved by enumerate_box (K <= 8)
//   projected_gradient   ascent with projection onto boxes and prefix sums
//   grid_search          dense grid plus local refinement (<= 4 variables)
//   check_conditions     optimality-condition residuals for every class

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "waterline/conditions.hpp"
#include "waterline/error.hpp"
#include "waterline/objective.hpp"
#include "waterline/problem.hpp"
#include "waterline/solver_core.hpp"
#include "waterline/solver_fair.hpp"
#include "waterline/solver_nested.hpp"

namespace waterline {

struct OracleResult {
  std::vector<double> powers;
  std::vector<std::vector<double>> group_powers;  // fair classes
  double objective = -kInf;
  std::string method;
  long long count = 0;  // candidates examined or iterations run
  bool certified = false;
};

namespace detail {

inline double safe_utility(std::span<const Objective> objs, std::span<const double> p, double cp = 0.0) {
  try {
    const double v = total_utility(objs, p, cp);
    return std::isnan(v) ? -kInf : v;
  } catch (const Error&) {
    return -kInf;
  }
}

}  // namespace detail

inline OracleResult enumerate_p1(SimplexProblem pb) {
  pb.validate();
  const std::size_t K = pb.size();
  if (K > 15) throw Error(ErrorKind::SizeLimit, "enumerate_p1 supports K <= 15");
  OracleResult best;
  best.method = "enumerate_p1";
  best.certified = true;
  const double tol = 1e-12 * pb.budget;

  const double floor_total = detail::sum(pb.lower);
  if (pb.budget - floor_total <= tol) {
    best.powers = pb.lower;
    best.objective = detail::safe_utility(pb.objectives, best.powers);
    best.count = 1;
    return best;
  }
  std::vector<double> p(K);
  std::vector<std::size_t> active;
  for (std::uint32_t mask = 1; mask < (1u << K); ++mask) {
    ++best.count;
    active.clear();
    double fixed = 0.0;
    double active_floor = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (mask & (1u << k)) {
        active.push_back(k);
        active_floor += pb.lower[k];
      } else {
        p[k] = pb.lower[k];
        fixed += pb.lower[k];
      }
    }
    if (pb.budget - fixed - active_floor <= 0.0) continue;
    const double mu = solve_water_level(pb.objectives, active, fixed, pb.budget);
    bool ok = true;
    for (auto k : active) {
      p[k] = pb.objectives[k].inverse_rate(mu);
      if (p[k] < pb.lower[k] - tol) ok = false;
      p[k] = std::max(p[k], pb.lower[k]);
    }
    if (!ok) continue;
    const double v = detail::safe_utility(pb.objectives, p);
    if (v > best.objective) {
      best.objective = v;
      best.powers = p;
    }
  }
  return best;
}

inline OracleResult enumerate_box(BoxProblem pb) {
  pb.validate();
  const std::size_t K = pb.size();
  if (K > 8) throw Error(ErrorKind::SizeLimit, "enumerate_box supports K <= 8");
  OracleResult best;
  best.method = "enumerate_box";
  best.certified = true;
  const double tol = 1e-12 * pb.budget;

  std::size_t combos = 1;
  for (std::size_t k = 0; k < K; ++k) combos *= 3;
  std::vector<double> p(K);
  std::vector<std::size_t> active;
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t c = code;
    active.clear();
    double fixed = 0.0;
    double active_floor = 0.0;
    bool valid = true;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t state = c % 3;  // 0 lower, 1 upper, 2 active
      c /= 3;
      const bool pinned = pb.upper[k] <= pb.lower[k];
      if (pinned && state != 0) valid = false;
      if (state == 1 && !std::isfinite(pb.upper[k])) valid = false;
      if (state == 0) {
        p[k] = pb.lower[k];
        fixed += p[k];
      } else if (state == 1) {
        p[k] = pb.upper[k];
        fixed += p[k];
      } else {
        active.push_back(k);
        active_floor += pb.lower[k];
      }
    }
    if (!valid) continue;
    ++best.count;
    if (active.empty()) {
      if (fixed > pb.budget + tol) continue;
    } else {
      if (pb.budget - fixed - active_floor <= 0.0) continue;
      const double mu = solve_water_level(pb.objectives, active, fixed, pb.budget);
      bool ok = true;
      for (auto k : active) {
        p[k] = pb.objectives[k].inverse_rate(mu);
        if (p[k] < pb.lower[k] - tol || p[k] > pb.upper[k] + tol) ok = false;
        p[k] = std::clamp(p[k], pb.lower[k], pb.upper[k]);
      }
      if (!ok) continue;
    }
    const double v = detail::safe_utility(pb.objectives, p);
    if (v > best.objective) {
      best.objective = v;
      best.powers = p;
    }
  }
  if (best.powers.empty()) throw Error(ErrorKind::InfeasibleBudget, "no feasible bound assignment");
  return best;
}

/// Exhaustive over which prefix budgets bind.  Between two binding
/// budgets the channels form a segment with its own single budget; the
/// optimum is the best combination that satisfies every prefix budget.
inline OracleResult enumerate_ascending(AscendingProblem pb) {
  pb.validate();
  const std::size_t K = pb.size();
  if (K > 8) throw Error(ErrorKind::SizeLimit, "enumerate_ascending supports K <= 8");
  OracleResult best;
  best.method = "enumerate_ascending";
  best.certified = true;
  const double tol = 1e-10 * pb.budgets.back();

  std::vector<double> p(K);
  for (std::uint32_t mask = 0; mask < (1u << (K - 1)); ++mask) {
    ++best.count;
    bool ok = true;
    std::size_t lo = 0;
    double base = 0.0;
    for (std::size_t j = 0; j < K && ok; ++j) {
      const bool cut = j + 1 == K || (mask & (1u << j));
      if (!cut) continue;
      const double budget = pb.budgets[j] - base;
      double floor = 0.0;
      for (std::size_t k = lo; k <= j; ++k) floor += pb.lower[k];
      if (budget < floor - tol) {
        ok = false;
        break;
      }
      if (budget - floor <= tol) {
        for (std::size_t k = lo; k <= j; ++k) p[k] = pb.lower[k];
      } else {
        const auto first = static_cast<std::ptrdiff_t>(lo);
        const auto last = static_cast<std::ptrdiff_t>(j + 1);
        BoxProblem seg{{pb.objectives.begin() + first, pb.objectives.begin() + last},
                       budget,
                       {pb.lower.begin() + first, pb.lower.begin() + last},
                       {pb.upper.begin() + first, pb.upper.begin() + last}};
        const auto r = enumerate_box(seg);
        for (std::size_t k = lo; k <= j; ++k) p[k] = r.powers[k - lo];
      }
      for (std::size_t k = lo; k <= j; ++k) base += p[k];
      lo = j + 1;
    }
    if (!ok) continue;
    if (ascending_violation(pb, p) * pb.budgets.back() > tol) continue;
    const double v = detail::safe_utility(pb.objectives, p);
    if (v > best.objective) {
      best.objective = v;
      best.powers = p;
    }
  }
  if (best.powers.empty()) throw Error(ErrorKind::InfeasibleBudget, "no feasible binding pattern");
  return best;
}

// --- projected gradient --------------------------------------------------

/// Feasible set of every sum-utility class: boxes plus prefix budgets
/// (a single-constraint problem has only the last budget finite).
struct PolyhedralSet {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> prefix;  // +inf where no constraint

  static PolyhedralSet from(const SimplexProblem& pb) {
    PolyhedralSet s{pb.lower, std::vector<double>(pb.size(), kInf), std::vector<double>(pb.size(), kInf)};
    s.prefix.back() = pb.budget;
    return s;
  }
  static PolyhedralSet from(const BoxProblem& pb) {
    PolyhedralSet s{pb.lower, pb.upper, std::vector<double>(pb.size(), kInf)};
    s.prefix.back() = pb.budget;
    return s;
  }
  static PolyhedralSet from(const AscendingProblem& pb) { return {pb.lower, pb.upper, pb.budgets}; }

  std::size_t size() const { return lower.size(); }
  double scale() const { return prefix.back(); }
  bool single() const {
    return std::all_of(prefix.begin(), prefix.end() - 1, [](double b) { return !std::isfinite(b); });
  }

  std::vector<double> clamp(std::vector<double> x) const {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], lower[k], upper[k]);
    return x;
  }

  /// Exact projection onto {box, sum <= budget}: shift by nu >= 0 and clamp.
  std::vector<double> project_single(const std::vector<double>& x) const {
    auto shifted = [&](double nu) {
      std::vector<double> y(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) y[k] = std::clamp(x[k] - nu, lower[k], upper[k]);
      return y;
    };
    auto y = shifted(0.0);
    const double budget = prefix.back();
    if (detail::sum(y) <= budget) return y;
    double lo = 0.0;
    double hi = 1.0;
    while (detail::sum(shifted(hi)) > budget) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      if (detail::sum(shifted(mid)) > budget) lo = mid;
      else hi = mid;
    }
    return shifted(hi);
  }

  /// Restores feasibility after an approximate projection by shrinking the
  /// excess above the lower bounds on every violated prefix.
  std::vector<double> repair(std::vector<double> x) const {
    x = clamp(std::move(x));
    double prefix_sum = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      prefix_sum += x[j];
      if (!std::isfinite(prefix[j]) || prefix_sum <= prefix[j]) continue;
      double slack = 0.0;
      for (std::size_t k = 0; k <= j; ++k) slack += x[k] - lower[k];
      const double keep = slack > 0.0 ? std::max(0.0, (slack - (prefix_sum - prefix[j])) / slack) : 0.0;
      prefix_sum = 0.0;
      for (std::size_t k = 0; k <= j; ++k) {
        x[k] = lower[k] + (x[k] - lower[k]) * keep;
        prefix_sum += x[k];
      }
    }
    return x;
  }

  /// Projection onto the box and every prefix half-space by exact
  /// coordinate ascent on the prefix multipliers: with multipliers lambda_j
  /// the projection is y_k = clamp(x_k - sum_{j >= k} lambda_j), and each
  /// coordinate step solves its complementary-slackness equation by
  /// bisection.  The dual is smooth and concave, so the sweeps converge.
  std::vector<double> project(const std::vector<double>& x) const {
    if (single()) return project_single(x);
    const std::size_t n = x.size();
    std::vector<double> lambda(n, 0.0);
    auto tail = [&](std::size_t k) {
      double t = 0.0;
      for (std::size_t j = k; j < n; ++j) t += lambda[j];
      return t;
    };
    auto partial = [&](std::size_t j, const std::vector<double>& base, double t) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += std::clamp(x[k] - base[k] - t, lower[k], upper[k]);
      return s;
    };
    std::vector<double> base(n);
    for (int sweep = 0; sweep < 20000; ++sweep) {
      double change = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(prefix[j])) continue;
        for (std::size_t k = 0; k <= j; ++k) base[k] = tail(k) - lambda[j];
        double next = 0.0;
        if (partial(j, base, 0.0) > prefix[j]) {
          double lo = 0.0;
          double hi = 1.0;
          while (partial(j, base, hi) > prefix[j]) hi *= 2.0;
          for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (!(mid > lo && mid < hi)) break;
            if (partial(j, base, mid) > prefix[j]) lo = mid;
            else hi = mid;
          }
          next = hi;
        }
        change = std::max(change, std::abs(next - lambda[j]));
        lambda[j] = next;
      }
      if (change <= 1e-15 * (1.0 + scale())) break;
    }
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) y[k] = std::clamp(x[k] - tail(k), lower[k], upper[k]);
    return repair(std::move(y));
  }
};

struct ProjectedGradientOptions {
  double tolerance = 1e-8;  // gradient-mapping norm
  long long max_iterations = 100000;
};

inline OracleResult projected_gradient(std::span<const Objective> objs, const PolyhedralSet& set,
                                       const ProjectedGradientOptions& opt = {}) {
  const std::size_t n = objs.size();
  OracleResult res;
  res.method = "projected_gradient";
  auto value = [&](const std::vector<double>& p) { return detail::safe_utility(objs, p); };

  // start from an interior-ish point: lower bounds plus an equal share of
  // the first binding prefix slack
  std::vector<double> x = set.lower;
  {
    double room = kInf;
    double floor = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      floor += set.lower[j];
      if (std::isfinite(set.prefix[j])) room = std::min(room, (set.prefix[j] - floor) / static_cast<double>(n));
    }
    for (std::size_t k = 0; k < n; ++k) x[k] = std::min(set.upper[k], set.lower[k] + 0.5 * room);
    x = set.project(x);
  }
  double fx = value(x);
  double step = 1.0;
  const double edge = 1e-300;
  auto gradient = [&](const std::vector<double>& p) {
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) {
      double r = objs[k].rate(p[k]);
      if (!std::isfinite(r)) r = objs[k].rate(std::max(p[k], edge) + 1e-12 * set.scale());
      g[k] = r;
    }
    return g;
  };
  auto g = gradient(x);
  for (long long it = 0; it < opt.max_iterations; ++it) {
    res.count = it + 1;
    // gradient mapping at unit step measures stationarity
    std::vector<double> probe(n);
    for (std::size_t k = 0; k < n; ++k) probe[k] = x[k] + g[k];
    const auto px = set.project(probe);
    double mapping = 0.0;
    for (std::size_t k = 0; k < n; ++k) mapping = std::max(mapping, std::abs(px[k] - x[k]));
    if (mapping <= opt.tolerance) break;

    bool moved = false;
    for (int tries = 0; tries < 80; ++tries) {
      std::vector<double> y(n);
      for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + step * g[k];
      y = set.project(y);
      const double fy = value(y);
      if (fy >= fx && std::isfinite(fy)) {
        double delta = 0.0;
        for (std::size_t k = 0; k < n; ++k) delta = std::max(delta, std::abs(y[k] - x[k]));
        moved = delta > 0.0;
        x = std::move(y);
        fx = fy;
        step = std::min(step * 2.0, 1e12);
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    g = gradient(x);
  }
  res.powers = std::move(x);
  res.objective = fx;
  return res;
}

inline OracleResult projected_gradient(const SimplexProblem& pb, const ProjectedGradientOptions& opt = {}) {
  SimplexProblem q = pb;
  q.validate();
  return projected_gradient(q.objectives, PolyhedralSet::from(q), opt);
}
inline OracleResult projected_gradient(const BoxProblem& pb, const ProjectedGradientOptions& opt = {}) {
  BoxProblem q = pb;
  q.validate();
  return projected_gradient(q.objectives, PolyhedralSet::from(q), opt);
}
inline OracleResult projected_gradient(const AscendingProblem& pb, const ProjectedGradientOptions& opt = {}) {
  AscendingProblem q = pb;
  q.validate();
  return projected_gradient(q.objectives, PolyhedralSet::from(q), opt);
}

// --- grid search -----------------------------------------------------------

struct GridOptions {
  double resolution = 1e-3;  // fraction of the budget
  int refinement_rounds = 2;
  std::size_t max_points = 2000000;
};

namespace detail {

/// Maximizes `value` over points (x_1..x_d) in the given ranges on a grid,
/// then refines around the best point.  value returns -inf when infeasible.
template <class Value>
OracleResult grid_maximize(std::vector<double> lo, std::vector<double> hi, double scale, const GridOptions& opt,
                           Value&& value) {
  const std::size_t d = lo.size();
  OracleResult res;
  res.method = "grid_search";
  std::vector<double> best_x(d);
  if (d == 0) {
    res.objective = value(best_x);
    res.count = 1;
    return res;
  }
  double h = opt.resolution * scale;
  {
    double pts = 1.0;
    for (std::size_t i = 0; i < d; ++i) pts *= std::floor((hi[i] - lo[i]) / h) + 1.0;
    if (pts > static_cast<double>(opt.max_points)) {
      // coarsen uniformly so the grid stays within the point budget
      const double shrink = std::pow(pts / static_cast<double>(opt.max_points), 1.0 / static_cast<double>(d));
      h *= shrink;
    }
  }
  auto sweep = [&](const std::vector<double>& a, const std::vector<double>& b, double step) {
    std::vector<std::size_t> counts(d);
    for (std::size_t i = 0; i < d; ++i) {
      counts[i] = static_cast<std::size_t>(std::floor((b[i] - a[i]) / step + 1e-9)) + 1;
    }
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    while (true) {
      for (std::size_t i = 0; i < d; ++i) {
        // always include the upper edge of every range
        x[i] = idx[i] + 1 == counts[i] && counts[i] > 1 ? b[i] : a[i] + step * static_cast<double>(idx[i]);
        x[i] = std::min(x[i], b[i]);
      }
      ++res.count;
      const double v = value(x);
      if (v > res.objective) {
        res.objective = v;
        best_x = x;
      }
      std::size_t i = 0;
      while (i < d && ++idx[i] == counts[i]) idx[i++] = 0;
      if (i == d) break;
    }
  };
  sweep(lo, hi, h);
  for (int round = 0; round < opt.refinement_rounds; ++round) {
    if (!std::isfinite(res.objective)) break;
    std::vector<double> a(d), b(d);
    for (std::size_t i = 0; i < d; ++i) {
      a[i] = std::max(lo[i], best_x[i] - 10.0 * h);
      b[i] = std::min(hi[i], best_x[i] + 10.0 * h);
    }
    h /= 10.0;
    sweep(a, b, h);
  }
  res.powers = best_x;
  return res;
}

}  // namespace detail

/// Grid over the first K-1 powers of a sum-utility instance; the last
/// power takes whatever budget remains (capped at its upper bound).
inline OracleResult grid_search(std::span<const Objective> objs, const PolyhedralSet& set,
                                const GridOptions& opt = {}) {
  const std::size_t K = objs.size();
  if (K > 5) throw Error(ErrorKind::SizeLimit, "grid_search supports at most 4 free variables");
  const double scale = set.scale();
  std::vector<double> lo(K - 1), hi(K - 1);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    lo[k] = set.lower[k];
    hi[k] = std::min(set.upper[k], scale);
  }
  auto full = [&](const std::vector<double>& x) {
    std::vector<double> p(K);
    double prefix_sum = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      p[k] = x[k];
      prefix_sum += p[k];
      if (std::isfinite(set.prefix[k]) && prefix_sum > set.prefix[k] * (1.0 + 1e-15)) return std::vector<double>{};
    }
    const double last = std::min(set.upper[K - 1], set.prefix[K - 1] - prefix_sum);
    if (last < set.lower[K - 1]) return std::vector<double>{};
    p[K - 1] = last;
    return p;
  };
  auto res = detail::grid_maximize(lo, hi, scale, opt, [&](const std::vector<double>& x) {
    const auto p = full(x);
    return p.empty() ? -kInf : detail::safe_utility(objs, p);
  });
  res.powers = full(res.powers);
  return res;
}

inline OracleResult grid_search(const SimplexProblem& pb, const GridOptions& opt = {}) {
  SimplexProblem q = pb;
  q.validate();
  return grid_search(q.objectives, PolyhedralSet::from(q), opt);
}
inline OracleResult grid_search(const BoxProblem& pb, const GridOptions& opt = {}) {
  BoxProblem q = pb;
  q.validate();
  return grid_search(q.objectives, PolyhedralSet::from(q), opt);
}
inline OracleResult grid_search(const AscendingProblem& pb, const GridOptions& opt = {}) {
  AscendingProblem q = pb;
  q.validate();
  return grid_search(q.objectives, PolyhedralSet::from(q), opt);
}

/// Grid over group totals (the last group takes the remainder); each
/// group's best allocation at a given total comes from the exhaustive
/// oracles.  Max-min modes maximize the smallest group value, the cluster
/// mode the sum.
inline OracleResult grid_search(const FairProblem& problem, const GridOptions& opt = {}) {
  FairProblem pb = problem;
  pb.validate();
  const std::size_t J = pb.size();
  if (J > 5) throw Error(ErrorKind::SizeLimit, "grid_search supports at most 4 free group totals");
  const bool cluster = pb.mode != FairMode::MaxMin;
  const double P = pb.budget;

  auto group_opt = [&](std::size_t j, double total, std::vector<double>* out) {
    const Group& g = pb.groups[j];
    std::vector<Objective> objs;
    for (const auto& f : g.objectives) objs.push_back(cluster ? f.at_cluster_power(total) : f);
    const double floor = detail::sum(g.lower);
    if (total < floor - 1e-12 * P) return -kInf;
    std::vector<double> p;
    double v;
    if (total - floor <= 1e-15 * P) {
      p = g.lower;
      v = detail::safe_utility(objs, p);
    } else if (g.has_boxes()) {
      auto r = enumerate_box(BoxProblem{objs, total, g.lower, g.upper});
      p = std::move(r.powers);
      v = r.objective;
    } else {
      auto r = enumerate_p1(SimplexProblem{objs, total, {}});
      p = std::move(r.powers);
      v = r.objective;
    }
    if (out) *out = std::move(p);
    return v;
  };
  auto combine = [&](const std::vector<double>& totals, std::vector<std::vector<double>>* out) {
    double acc = pb.mode == FairMode::Cluster ? 0.0 : kInf;
    for (std::size_t j = 0; j < J; ++j) {
      std::vector<double> p;
      const double v = group_opt(j, totals[j], out ? &p : nullptr);
      if (!std::isfinite(v) && v < 0.0) return -kInf;
      acc = pb.mode == FairMode::Cluster ? acc + v : std::min(acc, v);
      if (out) out->push_back(std::move(p));
    }
    return acc;
  };
  auto totals_of = [&](const std::vector<double>& x) {
    std::vector<double> t(x);
    double used = 0.0;
    for (double v : x) used += v;
    t.push_back(P - used);
    return t;
  };
  std::vector<double> lo(J - 1, 0.0), hi(J - 1, P);
  auto res = detail::grid_maximize(lo, hi, P, opt, [&](const std::vector<double>& x) {
    const auto t = totals_of(x);
    if (t.back() < 0.0) return -kInf;
    return combine(t, nullptr);
  });
  const auto t = totals_of(res.powers);
  res.group_powers.clear();
  combine(t, &res.group_powers);
  res.powers = t;  // group totals
  return res;
}

// --- condition checks ------------------------------------------------------

inline KktReport check_conditions(const SimplexProblem& pb, std::span<const double> p,
                                  double tolerance = detail::kDefaultConditionTolerance) {
  Allocation a;
  a.powers.assign(p.begin(), p.end());
  return kkt_residual_p1(pb, a, tolerance);
}

inline KktReport check_conditions(const BoxProblem& pb, std::span<const double> p,
                                  double tolerance = detail::kDefaultConditionTolerance) {
  Allocation a;
  a.powers.assign(p.begin(), p.end());
  return kkt_residual_box(pb, a, tolerance);
}

inline KktReport check_conditions(const AscendingProblem& pb, std::span<const double> p,
                                  double tolerance = detail::kDefaultConditionTolerance) {
  return kkt_residual_ascending(pb, p, tolerance);
}

inline KktReport check_conditions(const FairProblem& pb, const std::vector<std::vector<double>>& powers,
                                  double tolerance = detail::kDefaultConditionTolerance,
                                  double equalization_tolerance = 1e-6) {
  return kkt_residual_fair(pb, powers, tolerance, equalization_tolerance);
}

}  // namespace waterline
