#include "qmdp/experiment.hpp"

#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "qmdp/dp.hpp"
#include "qmdp/format.hpp"
#include "qmdp/mdp_io.hpp"
#include "qmdp/oracle.hpp"
#include "qmdp/policy_exec.hpp"
#include "qmdp/qlearn.hpp"
#include "qmdp/rng.hpp"

namespace qmdp {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // run parameters
      "domain", "csv", "alpha0", "s0", "T", "gamma", "J", "kappa", "seed",
      "episodes", "sweeps", "time_free", "out", "kinds", "policies",
      // domain parameters
      "rows", "cols", "slip", "capital_max", "win_prob", "capacity",
      "demand_mean", "revenue", "cost", "holding", "S", "A", "branching",
      "reward_lo", "reward_hi"};
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw missing_required("config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw type_mismatch("config line `" + line + "`");
    }
    std::string key = trim(line.substr(0, eq));
    if (!known_keys().count(key)) throw unknown_key(key);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

double as_double(const std::map<std::string, std::string>& kv,
                 const std::string& key, double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  double v;
  if (!parse_double(it->second, v)) {
    throw type_mismatch(key + "=" + it->second);
  }
  return v;
}

long long as_int(const std::map<std::string, std::string>& kv,
                 const std::string& key, long long fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  long long v;
  if (!parse_int(it->second, v)) {
    throw type_mismatch(key + "=" + it->second);
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

experiment_config parse_config(const std::vector<std::string>& args) {
  std::map<std::string, std::string> flags;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg.rfind("--", 0) != 0) {
      throw type_mismatch("expected --flag, got `" + arg + "`");
    }
    std::string key = arg.substr(2);
    if (i + 1 >= args.size()) throw missing_required("value for --" + key);
    const std::string& value = args[++i];
    if (key == "config") {
      config_path = value;
      continue;
    }
    if (!known_keys().count(key)) throw unknown_key(key);
    flags[key] = value;
  }

  std::map<std::string, std::string> kv;
  if (!config_path.empty()) kv = read_config_file(config_path);
  for (const auto& [k, v] : flags) kv[k] = v;  // flags win

  experiment_config cfg;
  if (kv.count("csv")) {
    cfg.domain.kind = "csv";
    cfg.domain.parameters["path"] = kv["csv"];
    if (!std::filesystem::exists(kv["csv"])) {
      throw missing_required("csv file " + kv["csv"]);
    }
  } else if (kv.count("domain")) {
    cfg.domain.kind = kv["domain"];
  } else {
    throw missing_required("--domain or --csv");
  }
  for (const char* pkey :
       {"rows", "cols", "slip", "capital_max", "win_prob", "capacity",
        "demand_mean", "revenue", "cost", "holding", "S", "A", "branching",
        "reward_lo", "reward_hi"}) {
    auto it = kv.find(pkey);
    if (it != kv.end()) cfg.domain.parameters[pkey] = it->second;
  }

  cfg.alpha0 = as_double(kv, "alpha0", cfg.alpha0);
  if (!(cfg.alpha0 > 0.0 && cfg.alpha0 < 1.0)) {
    throw type_mismatch("alpha0 must lie in (0,1)");
  }
  cfg.s0 = static_cast<int>(as_int(kv, "s0", cfg.s0));
  cfg.T = static_cast<int>(as_int(kv, "T", cfg.T));
  if (cfg.T < 1) throw type_mismatch("T must be >= 1");
  if (kv.count("gamma")) {
    cfg.gamma = as_double(kv, "gamma", 0.9);
    if (!(*cfg.gamma >= 0.0 && *cfg.gamma <= 1.0)) {
      throw type_mismatch("gamma must lie in [0,1]");
    }
  }
  cfg.J = static_cast<int>(as_int(kv, "J", cfg.J));
  if (cfg.J < 2) throw type_mismatch("J must be >= 2");
  cfg.kappa = as_double(kv, "kappa", cfg.kappa);
  if (!(cfg.kappa >= 0.0 && cfg.kappa <= 1.0)) {
    throw type_mismatch("kappa must lie in [0,1]");
  }
  cfg.seed = static_cast<std::uint64_t>(as_int(kv, "seed", cfg.seed));
  cfg.domain.seed = cfg.seed;
  cfg.episodes = static_cast<int>(as_int(kv, "episodes", cfg.episodes));
  cfg.sweeps = static_cast<int>(as_int(kv, "sweeps", cfg.sweeps));
  if (kv.count("time_free")) {
    const std::string& v = kv["time_free"];
    if (v == "true" || v == "1") {
      cfg.time_free = true;
    } else if (v == "false" || v == "0") {
      cfg.time_free = false;
    } else {
      throw type_mismatch("time_free=" + v);
    }
  }
  if (kv.count("out")) cfg.out_dir = kv["out"];
  if (kv.count("kinds")) cfg.kinds = split_list(kv["kinds"]);
  for (const std::string& k : cfg.kinds) {
    if (k != "lower" && k != "upper" && k != "soft") {
      throw type_mismatch("kinds entry " + k);
    }
  }
  if (kv.count("policies")) cfg.policies = split_list(kv["policies"]);
  for (const std::string& p : cfg.policies) {
    if (p != "var" && p != "e" && p != "nvar" && p != "dvar") {
      throw type_mismatch("policies entry " + p);
    }
  }
  return cfg;
}

mdp build_mdp(const experiment_config& cfg) {
  mdp m = make_domain(cfg.domain);
  if (cfg.gamma) return m.with_discount(*cfg.gamma);
  return m;
}

int initial_state(const experiment_config& cfg) {
  return cfg.s0 >= 0 ? cfg.s0 : default_initial_state(cfg.domain);
}

void write_report(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << row[i];
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw io_error("write failed: " + path);
}

namespace {

std::string out_path(const experiment_config& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void cmd_solve(const experiment_config& cfg) {
  mdp m = build_mdp(cfg);
  risk_grid grid(cfg.J);
  for (const std::string& kind : cfg.kinds) {
    bound_kind bk = bound_kind_from_name(kind);
    qtensor q = solve_var_dp(m, grid, cfg.T, bk,
                             bk == bound_kind::soft ? cfg.kappa : 0.0);
    q.save(out_path(cfg, "q_" + kind + ".csv"),
           out_path(cfg, "q_" + kind + ".meta"));
  }
}

void cmd_train(const experiment_config& cfg) {
  mdp m = build_mdp(cfg);
  train_config tc;
  tc.J = cfg.J;
  if (!cfg.time_free) tc.T = cfg.T;
  tc.kappa = cfg.kappa;
  tc.sweeps = cfg.sweeps;
  tc.seed = cfg.seed;
  tc.s0 = initial_state(cfg);

  qtensor target =
      cfg.time_free
          ? solve_soft_stationary(m, risk_grid(cfg.J),
                                  cfg.kappa > 0.0 ? cfg.kappa : 1e-8)
          : solve_var_dp(m, risk_grid(cfg.J), cfg.T,
                         cfg.kappa > 0.0 ? bound_kind::soft
                                         : bound_kind::lower,
                         cfg.kappa);
  train_result result = train(m, tc, &target);
  result.tensor.save(out_path(cfg, "q_trained.csv"),
                     out_path(cfg, "q_trained.meta"));
  std::vector<std::vector<std::string>> rows;
  for (const auto& [sweep, w1] : result.diagnostics) {
    rows.push_back({std::to_string(sweep), format_double(w1)});
  }
  write_report({"sweep", "w1"}, rows, out_path(cfg, "train_w1.csv"));
}

std::vector<std::vector<std::string>> report_rows(const eval_report& report) {
  std::vector<std::vector<std::string>> rows;
  for (const eval_row& r : report) {
    rows.push_back({format_double(r.alpha), format_double(r.point),
                    format_double(r.ci_lo), format_double(r.ci_hi),
                    std::to_string(r.n), std::to_string(r.seed)});
  }
  return rows;
}

void cmd_eval(const experiment_config& cfg) {
  mdp m = build_mdp(cfg);
  int s0 = initial_state(cfg);
  std::vector<double> sweep;
  for (int i = 0; i < 10; ++i) sweep.push_back(0.05 + 0.1 * i);
  const std::vector<std::string> header = {"alpha", "point", "ci_lo",
                                           "ci_hi", "n",     "seed"};
  risk_grid grid(cfg.J);

  for (const std::string& policy : cfg.policies) {
    eval_report report;
    if (policy == "var") {
      qtensor lower = solve_var_dp(m, grid, cfg.T, bound_kind::lower);
      report = evaluate_var_policy(m, lower, s0, cfg.T, sweep, cfg.episodes,
                                   cfg.seed);
    } else if (policy == "e") {
      markov_policy pol = neutral_policy(m, solve_neutral_dp(m, cfg.T), cfg.T);
      report =
          evaluate_markov_policy(m, pol, s0, cfg.T, sweep, cfg.episodes,
                                 cfg.seed);
    } else {
      // nVaR and dVaR re-solve per evaluated level: their tables depend on
      // alpha0.
      std::uint64_t counter = 0;
      for (double alpha : sweep) {
        markov_policy pol;
        if (policy == "nvar") {
          pol = nvar_policy(solve_nvar_dp(m, cfg.T, alpha), m, cfg.T);
        } else {
          pol = dvar_policy(solve_dvar_dp(m, grid, cfg.T, alpha), m, cfg.T);
        }
        eval_report one = evaluate_markov_policy(
            m, pol, s0, cfg.T, {alpha}, cfg.episodes,
            derive_seed(cfg.seed, counter++));
        report.insert(report.end(), one.begin(), one.end());
      }
    }
    write_report(header, report_rows(report),
                 out_path(cfg, "eval_" + policy + ".csv"));
  }
}

void cmd_oracle(const experiment_config& cfg) {
  mdp m = build_mdp(cfg);
  int s0 = initial_state(cfg);
  std::vector<double> alphas;
  for (int i = 1; i <= 19; ++i) alphas.push_back(0.05 * i);
  std::vector<double> qstar = brute_force_qstar(m, cfg.T, s0, 0, alphas);

  risk_grid grid(cfg.J);
  qtensor lower = solve_var_dp(m, grid, cfg.T, bound_kind::lower);
  qtensor upper = solve_var_dp(m, grid, cfg.T, bound_kind::upper);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    int j = grid.lower_index(alphas[i]);
    double lo = lower.at(cfg.T, s0, j, 0);
    double hi = upper.at(cfg.T, s0, j, 0);
    bool pass = lo <= qstar[i] + 1e-9 && qstar[i] <= hi + 1e-9;
    rows.push_back({format_double(alphas[i]), format_double(qstar[i]),
                    format_double(lo), format_double(hi),
                    pass ? "PASS" : "FAIL"});
  }
  write_report({"alpha", "qstar", "lower", "upper", "verdict"}, rows,
               out_path(cfg, "oracle.csv"));
}

void cmd_gap(const experiment_config& cfg) {
  mdp m = build_mdp(cfg);
  int s0 = initial_state(cfg);
  const int base = 16;
  for (int J : {16, 256, 4096}) {
    risk_grid grid(J);
    qtensor lower = solve_var_dp(m, grid, cfg.T, bound_kind::lower);
    qtensor upper = solve_var_dp(m, grid, cfg.T, bound_kind::upper);
    std::vector<std::vector<std::string>> rows;
    for (int jb = 0; jb < base; ++jb) {
      double alpha = static_cast<double>(jb) / base;
      int j = jb * (J / base);
      double lo = -std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < m.n_actions(); ++a) {
        lo = std::max(lo, lower.at(cfg.T, s0, j, a));
        hi = std::max(hi, upper.at(cfg.T, s0, j, a));
      }
      rows.push_back({format_double(alpha), format_double(lo),
                      format_double(hi), format_double(hi - lo)});
    }
    write_report({"alpha", "lower", "upper", "gap"}, rows,
                 out_path(cfg, "gap_J" + std::to_string(J) + ".csv"));
  }
}

}  // namespace

void run_command(const std::string& cmd, const experiment_config& cfg) {
  if (cmd == "solve") return cmd_solve(cfg);
  if (cmd == "train") return cmd_train(cfg);
  if (cmd == "eval") return cmd_eval(cfg);
  if (cmd == "oracle") return cmd_oracle(cfg);
  if (cmd == "gap") return cmd_gap(cfg);
  throw unknown_key("subcommand " + cmd);
}

int exit_code_for(const error& e) {
  switch (e.kind()) {
    case error_kind::config: return 1;
    case error_kind::data: return 2;
    case error_kind::numerical: return 3;
  }
  return 3;
}

int cli_main(int argc, const char* const* argv) {
  if (argc < 2) {
    std::cerr << "usage: qmdp <solve|train|eval|oracle|gap> [--flag value ...]\n";
    return 1;
  }
  try {
    std::vector<std::string> args(argv + 2, argv + argc);
    run_command(argv[1], parse_config(args));
    return 0;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace qmdp
