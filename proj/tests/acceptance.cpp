// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support/random_instances.hpp"
#include "waterline/cli.hpp"
#include "waterline/waterline.hpp"

using namespace waterline;
using waterline::testing::Rng;
using waterline::testing::TestFamily;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double rel_gap(double a, double b, double scale) { return std::abs(a - b) / std::max(scale, 1e-12); }

// Shared between criteria 1, 3 and 4.
struct SimplexRun {
  SimplexProblem problem;
  Allocation allocation;
};
std::vector<SimplexRun> g_simplex_runs;
std::vector<std::pair<BoxProblem, Allocation>> g_box_runs;

Outcome criterion1() {
  Outcome o;
  double worst = 0.0;
  int failures = 0, count = 0;
  const auto start = std::chrono::steady_clock::now();
  for (auto fam : waterline::testing::kSumFormFamilies) {
    Rng rng(1000 + static_cast<int>(fam));
    for (int i = 0; i < 500; ++i) {
      for (bool lower : {false, true}) {
        const auto K = static_cast<std::size_t>(rng.integer(2, 6));
        auto pb = waterline::testing::random_simplex(rng, fam, K, lower);
        const auto a = lower ? solve_p1_lower(pb) : solve_p1(pb);
        const auto ref = enumerate_p1(pb);
        const double gap = rel_gap(a.objective_value, ref.objective,
                                   waterline::testing::utility_scale(pb.objectives, ref.powers));
        worst = std::max(worst, gap);
        if (!(gap <= 1e-8)) ++failures;
        ++count;
        g_simplex_runs.push_back({std::move(pb), a});
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.pass = failures == 0 && secs < 30.0;
  o.detail = std::to_string(count) + " instances (5 families x 500 x {P1, lower-bounded}), worst relative gap " +
             num(worst) + " (tol 1e-8), failures " + std::to_string(failures) + ", " + num(secs) + " s (limit 30 s)";
  return o;
}

Outcome criterion2() {
  Outcome o;
  Rng rng(2024);
  double worst_linf = 0.0, worst_gap = 0.0, worst_oracle = 0.0;
  int failures = 0, oracle_checked = 0, fallbacks = 0;
  const BoxStrategy strategies[] = {BoxStrategy::SetBasedA, BoxStrategy::SetBasedB, BoxStrategy::Bisection,
                                    BoxStrategy::OrderBased};
  for (int i = 0; i < 500; ++i) {
    const auto K = static_cast<std::size_t>(rng.integer(2, 8));
    const auto pb = waterline::testing::random_box(rng, K);
    std::vector<Allocation> runs;
    for (auto s : strategies) {
      SolverConfig cfg;
      cfg.box_strategy = s;
      runs.push_back(solve_box(pb, cfg));
      if (runs.back().algorithm == "set_b_fallback_set_a") ++fallbacks;
    }
    const double scale = waterline::testing::utility_scale(pb.objectives, runs.back().powers);
    bool ok = true;
    for (std::size_t x = 0; x < runs.size(); ++x) {
      for (std::size_t y = x + 1; y < runs.size(); ++y) {
        const double d = waterline::testing::linf(runs[x].powers, runs[y].powers);
        const double g = rel_gap(runs[x].objective_value, runs[y].objective_value, scale);
        worst_linf = std::max(worst_linf, d);
        worst_gap = std::max(worst_gap, g);
        ok = ok && d <= 1e-6 && g <= 1e-8;
      }
    }
    if (K <= 6) {
      ++oracle_checked;
      const auto ref = enumerate_box(pb);
      for (const auto& r : runs) {
        const double g = rel_gap(r.objective_value, ref.objective, scale);
        worst_oracle = std::max(worst_oracle, g);
        ok = ok && g <= 1e-8;
      }
    }
    if (!ok) ++failures;
    for (auto& r : runs) g_box_runs.emplace_back(pb, std::move(r));
  }
  o.pass = failures == 0;
  o.detail = "500 instances, worst pairwise Linf " + num(worst_linf) + " (tol 1e-6), worst objective gap " +
             num(worst_gap) + " (tol 1e-8), worst gap to enumeration " + num(worst_oracle) + " on " +
             std::to_string(oracle_checked) + " instances with K <= 6, set_b fallbacks " + std::to_string(fallbacks) +
             ", failures " + std::to_string(failures);
  return o;
}

Outcome criterion3() {
  Outcome o;
  int max_excess = -1000, violations = 0;
  for (const auto& run : g_simplex_runs) {
    const int K = static_cast<int>(run.problem.size());
    const auto& a = run.allocation;
    bool ok = a.iterations <= K - 1;
    max_excess = std::max(max_excess, a.iterations - (K - 1));
    for (std::size_t i = 1; i < a.water_level_trace.size(); ++i) {
      ok = ok && a.water_level_trace[i] > a.water_level_trace[i - 1];
    }
    if (!ok) ++violations;
  }
  o.pass = !g_simplex_runs.empty() && violations == 0;
  o.detail = std::to_string(g_simplex_runs.size()) + " runs, max(iterations - (K-1)) = " + std::to_string(max_excess) +
             ", runs with a loop-count or monotonicity violation: " + std::to_string(violations);
  return o;
}

Outcome criterion4() {
  Outcome o;
  int checked = 0, failures = 0;
  double worst = 0.0;
  for (const auto& run : g_simplex_runs) {
    if (run.allocation.status != Status::Optimal) continue;
    const auto rep = check_conditions(run.problem, run.allocation.powers, 1e-8);
    ++checked;
    worst = std::max(worst, rep.max_residual());
    if (!rep.pass()) ++failures;
  }
  for (const auto& [pb, a] : g_box_runs) {
    if (a.status != Status::Optimal) continue;
    const auto rep = check_conditions(pb, a.powers, 1e-8);
    ++checked;
    worst = std::max(worst, rep.max_residual());
    if (!rep.pass()) ++failures;
  }
  o.pass = checked > 0 && failures == 0;
  o.detail = std::to_string(checked) + " optimal allocations (criteria 1 and 2), worst residual " + num(worst) +
             " (tol 1e-8), failures " + std::to_string(failures);
  return o;
}

Outcome criterion5() {
  Outcome o;
  Rng rng(5005);
  int infeasible = 0, one_split = 0, split_failures = 0;
  int split_hist[8] = {0};
  double worst_violation = 0.0, worst_gap = 0.0, worst_pg = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto K = static_cast<std::size_t>(rng.integer(2, 6));
    const auto pb = waterline::testing::random_ascending(rng, K);
    const auto a = solve_ascending(pb);
    const double v = ascending_violation(pb, a.powers);
    worst_violation = std::max(worst_violation, v);
    if (v > 1e-9) ++infeasible;
    split_hist[std::min(a.iterations, 7)]++;
    if (a.iterations == 1) {
      ++one_split;
      const auto pg = projected_gradient(pb);
      const auto en = enumerate_ascending(pb);
      const double ref = std::max(pg.objective, en.objective);
      const double scale = std::max(1.0, std::abs(ref));
      const double gap = std::abs(a.objective_value - ref) / scale;
      worst_gap = std::max(worst_gap, gap);
      worst_pg = std::max(worst_pg, std::abs(a.objective_value - pg.objective) / scale);
      if (gap > 1e-6) ++split_failures;
    }
  }
  o.pass = infeasible == 0 && one_split > 0 && split_failures == 0;
  std::string hist;
  for (int s = 0; s < 8; ++s) {
    if (split_hist[s]) hist += (hist.empty() ? "" : " ") + std::to_string(s) + ":" + std::to_string(split_hist[s]);
  }
  o.detail = "500 instances, worst constraint violation " + num(worst_violation) + ", infeasible " +
             std::to_string(infeasible) + "; splits histogram {" + hist + "}; one-split subset " +
             std::to_string(one_split) + ", worst objective gap to the best oracle " + num(worst_gap) + " (tol 1e-6), to projected gradient alone " +
             num(worst_pg);
  return o;
}

Outcome criterion6() {
  Outcome o;
  Rng rng(6006);
  double worst_eq = 0.0, worst_gap = 0.0;
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const auto fp = waterline::testing::random_micro_maxmin(rng);
    const auto s = solve_maxmin(fp);
    // a group left at zero power may sit above the common level; only
    // groups that received power must be equalized
    const double lo = *std::min_element(s.group_utilities.begin(), s.group_utilities.end());
    double hi = lo;
    for (std::size_t j = 0; j < fp.size(); ++j) {
      if (s.group_totals[j] > 1e-12 * fp.budget) hi = std::max(hi, s.group_utilities[j]);
    }
    const double eq = hi - lo;
    GridOptions gopt;
    gopt.refinement_rounds = 3;
    const auto g = grid_search(fp, gopt);
    const double gap = std::abs(lo - g.objective);
    worst_eq = std::max(worst_eq, eq);
    worst_gap = std::max(worst_gap, gap);
    if (eq > 1e-6 || gap > 1e-5) ++failures;
  }
  FairProblem closed;
  closed.budget = 3.0;
  closed.groups = {Group{{Objective::log_capacity(1, 2, 1)}, {}, {}}, Group{{Objective::log_capacity(1, 1, 1)}, {}, {}}};
  const auto cs = solve_maxmin(closed);
  const double t_err = std::abs(cs.t - std::log(3.0));
  const auto cg = grid_search(closed);
  const double grid_err = std::abs(cg.objective - std::log(3.0));
  o.pass = failures == 0 && t_err <= 1e-8 && grid_err <= 1e-5;
  o.detail = "100 micro instances, worst utility spread " + num(worst_eq) + " (tol 1e-6), worst gap to grid " +
             num(worst_gap) + " (tol 1e-5), failures " + std::to_string(failures) + "; log(1+2p)/log(1+p), P=3: |t - log 3| = " +
             num(t_err) + " (tol 1e-8), grid |t - log 3| = " + num(grid_err);
  return o;
}

Outcome criterion7() {
  Outcome o;
  Rng rng(7007);
  double worst_zero = 0.0, worst_single = 0.0;
  for (int i = 0; i < 100; ++i) {
    // sigma_e^2 = 0: groups decouple into one plain sum-capacity problem
    FairProblem fp;
    fp.mode = FairMode::Cluster;
    fp.budget = rng.uniform(0.5, 6.0);
    SimplexProblem flat;
    flat.budget = fp.budget;
    const int J = rng.integer(1, 3);
    for (int j = 0; j < J; ++j) {
      Group g;
      const int n = rng.integer(1, 3);
      for (int k = 0; k < n; ++k) {
        const double w = rng.uniform(0.5, 2.0), a = rng.uniform(0.2, 5.0), s2 = rng.uniform(0.2, 2.0);
        g.objectives.push_back(Objective::cluster_log_capacity(w, a, 0.0, s2));
        flat.objectives.push_back(Objective::log_capacity(w, a / s2, 1.0));
      }
      fp.groups.push_back(std::move(g));
    }
    const auto s = solve_cluster(fp);
    const auto ref = solve_p1(flat);
    std::size_t idx = 0;
    for (const auto& gp : s.powers) {
      for (double p : gp) worst_zero = std::max(worst_zero, std::abs(p - ref.powers[idx++]));
    }

    // one cluster: its total power is the whole budget, so the interference
    // term is a constant and the problem is again a plain sum-capacity one
    FairProblem one;
    one.mode = FairMode::Cluster;
    one.budget = rng.uniform(0.5, 6.0);
    SimplexProblem single;
    single.budget = one.budget;
    Group g;
    const int n = rng.integer(1, 4);
    for (int k = 0; k < n; ++k) {
      const double w = rng.uniform(0.5, 2.0), a = rng.uniform(0.2, 5.0), e2 = rng.uniform(0.0, 0.5),
                   s2 = rng.uniform(0.2, 2.0);
      g.objectives.push_back(Objective::cluster_log_capacity(w, a, e2, s2));
      single.objectives.push_back(Objective::log_capacity(w, a / (e2 * one.budget + s2), 1.0));
    }
    one.groups.push_back(std::move(g));
    const auto s1 = solve_cluster(one);
    const auto r1 = solve_p1(single);
    for (std::size_t k = 0; k < r1.powers.size(); ++k) {
      worst_single = std::max(worst_single, std::abs(s1.powers[0][k] - r1.powers[k]));
    }
  }
  o.pass = worst_zero <= 1e-8 && worst_single <= 1e-8;
  o.detail = "100 instances each; sigma_e^2 = 0 worst Linf to the flat solve " + num(worst_zero) +
             ", single cluster worst Linf " + num(worst_single) + " (tol 1e-8)";
  return o;
}

struct SweepRow {
  double snr = 0.0, mse = 0.0, active = 0.0;
  int solved = 0, failures = 0;
};

std::vector<SweepRow> run_sweep(const std::vector<std::string>& extra, int& exit_code) {
  std::vector<std::string> args = {"sweep", "--antennas", "4", "--taps", "7", "--decay", "0.5", "--subcarriers",
                                   "32", "--realizations", "100", "--seed", "1", "--snr-list", "0,5,10,15,20"};
  args.insert(args.end(), extra.begin(), extra.end());
  std::ostringstream out, err;
  exit_code = cli::run(args, out, err);
  std::vector<SweepRow> rows;
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (cells.size() != 7) continue;
    rows.push_back({std::stod(cells[0]), std::stod(cells[3]), std::stod(cells[6]), std::stoi(cells[4]),
                    std::stoi(cells[5])});
  }
  return rows;
}

Outcome criterion8() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  int code_tight = 0, code_loose = 0;
  const auto tight = run_sweep({"--gamma", "0.4", "--tau", "1.6"}, code_tight);
  const auto loose = run_sweep({"--gamma", "0.1", "--tau", "4"}, code_loose);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool ok = code_tight == 0 && code_loose == 0 && tight.size() == 5 && loose.size() == 5;
  std::string series;
  for (std::size_t i = 0; ok && i < 5; ++i) {
    if (i > 0) ok = ok && tight[i].mse < tight[i - 1].mse && loose[i].mse < loose[i - 1].mse;
    ok = ok && loose[i].mse <= tight[i].mse && tight[i].failures == 0 && loose[i].failures == 0;
    series += (i ? "; " : "") + num(tight[i].snr) + " dB " + num(tight[i].mse) + "/" + num(loose[i].mse);
  }
  o.pass = ok && secs < 120.0;
  o.detail = "mean MSE tight/loose: " + series + "; " + num(secs) + " s (limit 120 s)";
  return o;
}

Outcome criterion9() {
  Outcome o;
  ScenarioSpec spec;
  spec.subcarriers = 32;
  spec.realizations = 100;
  spec.snr_db = 20.0;
  spec.gamma = 0.4;
  spec.tau = 1.6;
  SolverConfig cfg;
  const auto pt = cli::sweep_point(spec, cfg, 1);
  int both = 0;
  for (int r = 0; r < spec.realizations; ++r) {
    const auto inst = generate_one(spec, r);
    const auto a = solve_box(inst.problem, cfg);
    if (!a.lower_set.empty() && !a.upper_set.empty()) ++both;
  }
  spec.normalization = BoundNormalization::Literal;
  const auto lit = cli::sweep_point(spec, cfg, 1);
  o.pass = pt.failures == 0 && pt.bound_active_fraction >= 0.5;
  o.detail = "20 dB, gamma 0.4, tau 1.6, 100 realizations: a bound is active in " + num(100 * pt.bound_active_fraction) +
             "% (need >= 50%), both bounds active in " + std::to_string(both) +
             "%; with the 1/(4N) bound unit the fraction is " + num(100 * lit.bound_active_fraction) + "%";
  return o;
}

Outcome criterion10() {
  Outcome o;
  Rng rng(10010);
  std::string worst;
  int failures = 0;
  for (auto fam : waterline::testing::kAllFamilies) {
    double rt = 0.0, fd = 0.0;
    int mono = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto f = waterline::testing::random_objective(rng, fam);
      const double cp = fam == TestFamily::ClusterLogCapacity ? rng.uniform(0.0, 5.0) : 0.0;
      const double p = rng.log_uniform(1e-3, 1e2);
      const double p2 = p * (1.0 + rng.log_uniform(1e-4, 1.0));
      const double r = f.rate(p, cp);
      rt = std::max(rt, std::abs(f.inverse_rate(r, cp) - p) / (1.0 + p));
      if (!(f.rate(p2, cp) < r) || !(f.eval(p2, cp) > f.eval(p, cp))) ++mono;
      const double h = 1e-6 * (1.0 + p);
      const double lo = std::max(p - h, 0.0);
      const double diff = (f.eval(p + h, cp) - f.eval(lo, cp)) / (p + h - lo);
      fd = std::max(fd, std::abs(diff - r) / std::abs(r));
    }
    const bool ok = rt <= 1e-8 && fd <= 1e-5 && mono == 0;
    if (!ok) ++failures;
    worst += (worst.empty() ? "" : "; ") + waterline::testing::family_label(fam) + " rt " + num(rt) + " fd " + num(fd) +
             (mono ? " mono-fail " + std::to_string(mono) : "");
  }
  o.pass = failures == 0;
  o.detail = "1000 points per family, round-trip tol 1e-8 (1+p), FD tol 1e-5: " + worst;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"oracle equivalence, single budget and lower bounds", criterion1},
      {"four-way box strategy agreement", criterion2},
      {"deactivation loop bound and rising water level", criterion3},
      {"condition residuals of optimal allocations", criterion4},
      {"ascending budgets feasibility and one-split optimality", criterion5},
      {"max-min equalization", criterion6},
      {"cluster degeneracies", criterion7},
      {"MIMO-OFDM sweep trend", criterion8},
      {"box bound activity at 20 dB", criterion9},
      {"objective contract", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%zu] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
