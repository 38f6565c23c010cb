#pragma once

// Command-line front end.  `run` is the whole program minus process setup so
// tests can drive it with in-memory streams.
//
// Exit codes: 0 success, 1 input error (schema, file, mismatch), 2 solver
// error or failed conditions.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "waterline/io.hpp"
#include "waterline/oracle.hpp"
#include "waterline/scenario.hpp"
#include "waterline/solver_box.hpp"
#include "waterline/solver_core.hpp"
#include "waterline/solver_fair.hpp"
#include "waterline/solver_nested.hpp"

namespace waterline::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitSolver = 2;

struct SolveOutcome {
  Json result;
  KktReport report;
  Status status = Status::Optimal;
};

inline bool is_input_error(ErrorKind k) {
  return k == ErrorKind::Schema || k == ErrorKind::InvalidProblem || k == ErrorKind::InfeasibleBudget;
}

/// Solves a loaded instance and assembles the result document.
inline SolveOutcome solve_instance(const Instance& inst, const SolverConfig& cfg, double tol) {
  SolveOutcome out;
  const auto start = std::chrono::steady_clock::now();
  Json r;
  std::visit(
      [&](const auto& pb) {
        using T = std::decay_t<decltype(pb)>;
        if constexpr (std::is_same_v<T, FairProblem>) {
          const auto s = solve_fair(pb, cfg);
          r = fair_solution_to_json(s);
          out.report = check_conditions(pb, s.powers, tol);
          out.status = s.status;
        } else {
          Allocation a;
          if constexpr (std::is_same_v<T, SimplexProblem>) {
            a = inst.problem_class == ProblemClass::P1 ? solve_p1(pb, cfg) : solve_p1_lower(pb, cfg);
          } else if constexpr (std::is_same_v<T, BoxProblem>) {
            a = solve_box(pb, cfg);
          } else {
            a = solve_ascending(pb, cfg);
          }
          r = allocation_to_json(a);
          out.report = check_conditions(pb, a.powers, tol);
          out.status = a.status;
        }
      },
      inst.problem);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json doc;
  doc["problem_class"] = std::string(to_string(inst.problem_class));
  for (auto& [k, v] : r.items()) doc[k] = v;
  doc["conditions"] = report_to_json(out.report);
  doc["conditions_pass"] = out.report.pass();
  doc["strategy"] = std::string(to_string(cfg.box_strategy));
  doc["config"] = config_to_json(cfg);
  doc["config"]["condition_tolerance"] = tol;
  doc["wall_time_s"] = elapsed;
  out.result = std::move(doc);
  return out;
}

inline void print_report(std::ostream& os, const KktReport& report) {
  for (const auto& c : report.conditions) {
    os << std::left << std::setw(20) << c.name << ' ';
    if (!c.applicable) {
      os << "n/a\n";
      continue;
    }
    os << std::scientific << std::setprecision(3) << c.residual << " <= " << c.tolerance << "  "
       << (c.pass ? "PASS" : "FAIL") << '\n';
    os << std::defaultfloat;
  }
  os << (report.pass() ? "PASS" : "FAIL") << '\n';
}

inline KktReport verify_result(const Instance& inst, const Json& result, double tol) {
  if (result.contains("problem_class") && result.at("problem_class") != std::string(to_string(inst.problem_class))) {
    throw Error(ErrorKind::Schema, "field 'problem_class': result class differs from instance class");
  }
  return std::visit(
      [&](const auto& pb) -> KktReport {
        using T = std::decay_t<decltype(pb)>;
        if constexpr (std::is_same_v<T, FairProblem>) {
          const auto gp = result_group_powers(result);
          if (gp.size() != pb.groups.size()) {
            throw Error(ErrorKind::Schema, "field 'group_powers': expected " + std::to_string(pb.groups.size()) + " groups");
          }
          for (std::size_t g = 0; g < gp.size(); ++g) {
            if (gp[g].size() != pb.groups[g].size()) {
              throw Error(ErrorKind::Schema, "field 'group_powers[" + std::to_string(g) + "]': expected " +
                                                 std::to_string(pb.groups[g].size()) + " entries");
            }
          }
          return check_conditions(pb, gp, tol);
        } else {
          const auto p = result_powers(result);
          if (p.size() != pb.size()) {
            throw Error(ErrorKind::Schema, "field 'powers': expected " + std::to_string(pb.size()) + " entries");
          }
          return check_conditions(pb, p, tol);
        }
      },
      inst.problem);
}

// --- compare ------------------------------------------------------------------

struct CompareRow {
  std::string strategy;
  bool ok = false;
  std::string error;
  Allocation allocation;
  double seconds = 0.0;
};

inline std::vector<CompareRow> compare_strategies(const BoxProblem& pb, const SolverConfig& base) {
  std::vector<CompareRow> rows;
  for (auto s : {BoxStrategy::Bisection, BoxStrategy::OrderBased, BoxStrategy::SetBasedA, BoxStrategy::SetBasedB}) {
    CompareRow row;
    row.strategy = std::string(to_string(s));
    SolverConfig cfg = base;
    cfg.box_strategy = s;
    const auto start = std::chrono::steady_clock::now();
    try {
      row.allocation = solve_box(pb, cfg);
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.strategy < b.strategy; });
  return rows;
}

inline double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Shortest representation that reads back to the same double.
inline std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// --- sweep --------------------------------------------------------------------

struct SweepPoint {
  double snr_db = 0.0;
  double mean_mse = 0.0;
  int solved = 0;
  int failures = 0;
  double bound_active_fraction = 0.0;
  int resamples = 0;
  ScenarioInstance dump_instance;
  Allocation dump_allocation;
};

/// Solves every realization of `spec` at one SNR.  Realizations are spread
/// over `jobs` threads; results are reduced in realization order so the
/// output does not depend on the thread count.
inline SweepPoint sweep_point(ScenarioSpec spec, const SolverConfig& cfg, int jobs) {
  spec.validate();
  SweepPoint pt;
  pt.snr_db = spec.snr_db;
  const int R = spec.realizations;
  std::vector<double> mse(static_cast<std::size_t>(R), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(R), 0), active(static_cast<std::size_t>(R), 0);
  std::vector<int> resamples(static_cast<std::size_t>(R), 0);
  ScenarioInstance first;
  Allocation first_alloc;
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < R; r = next++) {
      const auto i = static_cast<std::size_t>(r);
      try {
        auto inst = generate_one(spec, r);
        resamples[i] = inst.resamples;
        auto a = solve_box(inst.problem, cfg);
        mse[i] = mean_mse(inst.problem, a.powers);
        ok[i] = 1;
        active[i] = !a.upper_set.empty() || (spec.gamma > 0.0 && !a.lower_set.empty());
        if (r == 0) {
          first = std::move(inst);
          first_alloc = std::move(a);
        }
      } catch (const Error&) {
        ok[i] = 0;
      }
    }
  };
  const int n = std::clamp(jobs, 1, R);
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  double sum = 0.0;
  int act = 0;
  for (int r = 0; r < R; ++r) {
    const auto i = static_cast<std::size_t>(r);
    pt.resamples += resamples[i];
    if (!ok[i]) {
      ++pt.failures;
      continue;
    }
    ++pt.solved;
    sum += mse[i];
    act += active[i];
  }
  pt.mean_mse = pt.solved > 0 ? sum / pt.solved : std::numeric_limits<double>::quiet_NaN();
  pt.bound_active_fraction = pt.solved > 0 ? static_cast<double>(act) / pt.solved : 0.0;
  pt.dump_instance = std::move(first);
  pt.dump_allocation = std::move(first_alloc);
  return pt;
}

inline std::vector<double> parse_number_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Schema, "option '" + flag + "': '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw Error(ErrorKind::Schema, "option '" + flag + "': empty list");
  return out;
}

// --- scenario options shared by generate and sweep ------------------------------

struct ScenarioOptions {
  ScenarioSpec spec;
  std::string normalization = "uniform";
  std::string objective = "inverse_mse";
  std::string spec_file;
  std::string tau = "inf";

  void attach(CLI::App* cmd, bool with_objective) {
    cmd->add_option("--spec", spec_file, "JSON file with scenario fields (flags override it)");
    cmd->add_option("--antennas", spec.antennas, "antennas N")->capture_default_str();
    cmd->add_option("--taps", spec.taps, "channel taps L")->capture_default_str();
    cmd->add_option("--decay", spec.decay, "tap variance decay factor")->capture_default_str();
    cmd->add_option("--subcarriers", spec.subcarriers, "subcarriers J")->capture_default_str();
    cmd->add_option("--gamma", spec.gamma, "lower box multiplier")->capture_default_str();
    cmd->add_option("--tau", tau, "upper box multiplier (inf for none)")->capture_default_str();
    cmd->add_option("--realizations", spec.realizations, "channel realizations")->capture_default_str();
    cmd->add_option("--seed", spec.seed, "base seed (WATERLINE_SEED overrides)")->capture_default_str();
    cmd->add_option("--normalization", normalization, "box unit: uniform = 1/N, literal = 1/(4N)")
        ->check(CLI::IsMember({"uniform", "literal"}))
        ->capture_default_str();
    if (with_objective) {
      cmd->add_option("--objective", objective, "per-eigenchannel objective")
          ->check(CLI::IsMember({"inverse_mse", "log_capacity"}))
          ->capture_default_str();
    }
  }

  /// Applies the spec file (flags given on the command line win) and the
  /// seed override from the environment.
  ScenarioSpec resolve(const CLI::App* cmd) {
    ScenarioSpec s = spec;
    if (!spec_file.empty()) {
      const Json j = read_json_file(spec_file);
      detail::reject_unknown(j, "", {"antennas", "taps", "decay", "subcarriers", "snr_db", "gamma", "tau",
                                     "realizations", "seed", "normalization", "objective"});
      auto from_file = [&](const char* key, const char* flag) {
        const auto* opt = cmd->get_option_no_throw(flag);
        return j.contains(key) && (opt == nullptr || opt->count() == 0);
      };
      auto int_field = [&](const char* key) {
        const double v = detail::number(j.at(key), key);
        if (v != std::floor(v)) detail::schema_error(key, "expected an integer");
        return static_cast<int>(v);
      };
      if (from_file("antennas", "--antennas")) s.antennas = int_field("antennas");
      if (from_file("taps", "--taps")) s.taps = int_field("taps");
      if (from_file("subcarriers", "--subcarriers")) s.subcarriers = int_field("subcarriers");
      if (from_file("realizations", "--realizations")) s.realizations = int_field("realizations");
      if (from_file("decay", "--decay")) s.decay = detail::number(j.at("decay"), "decay");
      if (from_file("snr_db", "--snr-db")) s.snr_db = detail::number(j.at("snr_db"), "snr_db");
      if (from_file("gamma", "--gamma")) s.gamma = detail::number(j.at("gamma"), "gamma");
      if (from_file("tau", "--tau")) tau = j.at("tau").is_null() ? "inf" : fmt(detail::number(j.at("tau"), "tau"));
      if (from_file("seed", "--seed")) s.seed = static_cast<std::uint64_t>(int_field("seed"));
      if (from_file("normalization", "--normalization")) normalization = j.at("normalization").get<std::string>();
      if (from_file("objective", "--objective")) objective = j.at("objective").get<std::string>();
    }
    if (tau == "inf") {
      s.tau = kInf;
    } else {
      s.tau = parse_number_list(tau, "--tau").at(0);
    }
    if (normalization == "uniform") s.normalization = BoundNormalization::Uniform;
    else if (normalization == "literal") s.normalization = BoundNormalization::Literal;
    else throw Error(ErrorKind::Schema, "field 'normalization': expected uniform or literal");
    if (objective == "inverse_mse") s.objective = ScenarioObjective::InverseMse;
    else if (objective == "log_capacity") s.objective = ScenarioObjective::LogCapacity;
    else throw Error(ErrorKind::Schema, "field 'objective': expected inverse_mse or log_capacity");
    if (const char* env = std::getenv("WATERLINE_SEED"); env != nullptr && *env != '\0') {
      try {
        s.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Schema, std::string("WATERLINE_SEED is not an unsigned integer: ") + env);
      }
    }
    s.validate();
    return s;
  }
};

inline Json scenario_metadata(const ScenarioSpec& spec, const ScenarioInstance& inst) {
  return {{"generator", "mimo_ofdm"},
          {"antennas", spec.antennas},
          {"taps", spec.taps},
          {"decay", spec.decay},
          {"subcarriers", spec.subcarriers},
          {"snr_db", spec.snr_db},
          {"gamma", spec.gamma},
          {"tau", detail::number_or_null(spec.tau)},
          {"seed", spec.seed},
          {"realization", inst.realization},
          {"sub_seed", inst.sub_seed},
          {"resamples", inst.resamples},
          {"normalization", std::string(to_string(spec.normalization))},
          {"objective", std::string(to_string(spec.objective))},
          {"noise_variance", inst.noise_variance},
          {"bound_unit", spec.bound_unit()},
          {"channel_order", "index = subcarrier * antennas + eigenmode"},
          {"objective_mapping", spec.objective == ScenarioObjective::InverseMse
                                    ? "maximize -sigma2 / (sigma2 + lambda p): inverse_mse(w=sigma2, a=lambda, b=sigma2)"
                                    : "maximize log(1 + lambda p / sigma2): log_capacity(w=1, a=lambda/sigma2, b=1)"},
          {"snr_definition", "budget per subcarrier 1, sigma2 = 1 / (antennas * 10^(snr_db/10))"}};
}

// --- entry point --------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Water-filling power allocation solvers", "waterline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // solve
  std::string instance_path, result_path, out_path, strategy = "ordered";
  double tol = detail::kDefaultConditionTolerance;
  auto* solve = app.add_subcommand("solve", "solve an instance file and write the result document");
  solve->add_option("instance", instance_path, "instance JSON")->required();
  solve->add_option("--strategy", strategy, "box strategy")
      ->check(CLI::IsMember({"bisection", "ordered", "set_a", "set_b"}))
      ->capture_default_str();
  solve->add_option("--tol", tol, "condition residual tolerance")->capture_default_str();
  solve->add_option("--out", out_path, "result file (default: stdout)");

  // verify
  std::string report_path;
  auto* verify = app.add_subcommand("verify", "check optimality conditions of a result against its instance");
  verify->add_option("instance", instance_path, "instance JSON")->required();
  verify->add_option("result", result_path, "result JSON")->required();
  verify->add_option("--tol", tol, "condition residual tolerance")->capture_default_str();
  verify->add_option("--json", report_path, "also write the report as JSON");

  // generate
  ScenarioOptions gen_opts;
  std::string out_dir;
  auto* generate_cmd = app.add_subcommand("generate", "write random MIMO-OFDM box instances");
  gen_opts.attach(generate_cmd, true);
  generate_cmd->add_option("--snr-db", gen_opts.spec.snr_db, "SNR in dB")->capture_default_str();
  generate_cmd->add_option("--out-dir", out_dir, "output directory")->required();

  // compare
  std::string csv_path;
  auto* compare = app.add_subcommand("compare", "run every box strategy and the oracle on one instance");
  compare->add_option("instance", instance_path, "box instance JSON")->required();
  compare->add_option("--strategies", strategy, "only 'all' is supported")->check(CLI::IsMember({"all"}));
  compare->add_option("--out", csv_path, "CSV file (default: stdout)");

  // sweep
  ScenarioOptions sweep_opts;
  std::string snr_list = "0,5,10,15,20", dump_path;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* sweep = app.add_subcommand("sweep", "mean MSE of random instances versus SNR");
  sweep_opts.attach(sweep, false);
  sweep->add_option("--snr-list", snr_list, "comma-separated SNR points in dB")->capture_default_str();
  sweep->add_option("--strategy", strategy, "box strategy")
      ->check(CLI::IsMember({"bisection", "ordered", "set_a", "set_b"}))
      ->capture_default_str();
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", csv_path, "CSV file (default: stdout)");
  sweep->add_option("--dump", dump_path, "JSON dump of realization 0 at every SNR point");

  std::vector<const char*> argv{"waterline"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  SolverConfig cfg;
  cfg.box_strategy = *parse_box_strategy(strategy == "all" ? "ordered" : strategy);

  auto emit = [&](const std::string& path, const std::string& text) {
    if (path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::Schema, "cannot write '" + path + "'");
    f << text;
  };

  try {
    if (*solve) {
      const auto inst = load_instance(instance_path);
      SolveOutcome res;
      try {
        res = solve_instance(inst, cfg, tol);
      } catch (const Error& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitSolver;
      }
      if (!inst.metadata.empty()) res.result["metadata"] = inst.metadata;
      emit(out_path, res.result.dump(2) + "\n");
      if (res.status == Status::IterationCap) {
        err << "solver stopped at its iteration cap\n";
        return kExitSolver;
      }
      return kExitOk;
    }

    if (*verify) {
      const auto inst = load_instance(instance_path);
      const auto result = read_json_file(result_path);
      const auto report = verify_result(inst, result, tol);
      print_report(out, report);
      if (!report_path.empty()) {
        write_json_file(report_path, {{"conditions", report_to_json(report)}, {"pass", report.pass()}});
      }
      return report.pass() ? kExitOk : kExitSolver;
    }

    if (*generate_cmd) {
      const auto spec = gen_opts.resolve(generate_cmd);
      std::filesystem::create_directories(out_dir);
      for (int r = 0; r < spec.realizations; ++r) {
        const auto g = generate_one(spec, r);
        Instance inst;
        inst.problem_class = ProblemClass::Box;
        inst.problem = g.problem;
        inst.metadata = scenario_metadata(spec, g);
        inst.metadata["eigenvalues"] = g.eigenvalues;
        std::ostringstream name;
        name << "instance_" << std::setw(4) << std::setfill('0') << r << ".json";
        const auto path = (std::filesystem::path(out_dir) / name.str()).string();
        write_json_file(path, instance_to_json(inst));
        out << path << '\n';
      }
      return kExitOk;
    }

    if (*compare) {
      const auto inst = load_instance(instance_path);
      if (inst.problem_class != ProblemClass::Box) {
        throw Error(ErrorKind::Schema, "field 'problem_class': compare needs a box instance");
      }
      const auto& pb = std::get<BoxProblem>(inst.problem);
      const auto rows = compare_strategies(pb, cfg);
      std::optional<OracleResult> oracle;
      if (pb.size() <= 8) oracle = enumerate_box(pb);
      double best = -kInf;
      for (const auto& r : rows) {
        if (r.ok) best = std::max(best, r.allocation.objective_value);
      }
      std::ostringstream csv;
      csv << "strategy,status,iterations,time_s,objective,objective_gap,max_linf,oracle_linf,oracle_gap\n";
      bool failed = false;
      for (const auto& r : rows) {
        if (!r.ok) {
          failed = true;
          csv << r.strategy << ",error,,,,,,,\n";
          err << r.strategy << ": " << r.error << '\n';
          continue;
        }
        double spread = 0.0;
        for (const auto& o : rows) {
          if (o.ok) spread = std::max(spread, linf(r.allocation.powers, o.allocation.powers));
        }
        csv << r.strategy << ',' << to_string(r.allocation.status) << ',' << r.allocation.iterations << ','
            << fmt(r.seconds) << ',' << fmt(r.allocation.objective_value) << ','
            << fmt(best - r.allocation.objective_value) << ',' << fmt(spread) << ',';
        if (oracle) {
          csv << fmt(linf(r.allocation.powers, oracle->powers)) << ','
              << fmt(oracle->objective - r.allocation.objective_value) << '\n';
        } else {
          csv << "out-of-range,out-of-range\n";
        }
      }
      emit(csv_path, csv.str());
      return failed ? kExitSolver : kExitOk;
    }

    if (*sweep) {
      auto spec = sweep_opts.resolve(sweep);
      const auto snrs = parse_number_list(snr_list, "--snr-list");
      std::ostringstream csv;
      csv << "snr_db,gamma,tau,mean_mse,realizations,failures,bound_active_fraction\n";
      Json dump = Json::array();
      int failures = 0;
      for (double snr : snrs) {
        spec.snr_db = snr;
        const auto pt = sweep_point(spec, cfg, jobs);
        failures += pt.failures;
        csv << fmt(snr) << ',' << fmt(spec.gamma) << ',' << (std::isfinite(spec.tau) ? fmt(spec.tau) : "inf") << ','
            << fmt(pt.mean_mse) << ',' << pt.solved << ',' << pt.failures << ',' << fmt(pt.bound_active_fraction)
            << '\n';
        if (!dump_path.empty() && !pt.dump_instance.eigenvalues.empty()) {
          const auto& di = pt.dump_instance;
          dump.push_back({{"snr_db", snr},
                          {"metadata", scenario_metadata(spec, di)},
                          {"eigenvalues", di.eigenvalues},
                          {"lower", di.problem.lower},
                          {"upper", detail::array_or_null(di.problem.upper)},
                          {"powers", pt.dump_allocation.powers},
                          {"water_level", pt.dump_allocation.water_level},
                          {"at_lower", pt.dump_allocation.lower_set},
                          {"at_upper", pt.dump_allocation.upper_set}});
        }
      }
      emit(csv_path, csv.str());
      if (!dump_path.empty()) write_json_file(dump_path, dump);
      if (failures > 0) err << failures << " realization(s) failed and were excluded from the means\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.kind()) ? kExitInput : kExitSolver;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace waterline::cli
