#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmdp/domains.hpp"
#include "qmdp/errors.hpp"
#include "qmdp/mdp.hpp"

namespace qmdp {

// Single source of run parameters for the batch front-end. Values come from
// an optional flat key=value file, overridden by --key value flags.
struct experiment_config {
  domain_spec domain;
  double alpha0 = 0.25;
  int s0 = -1;  // -1: the domain's conventional initial state
  int T = 100;
  std::optional<double> gamma;  // discount override
  int J = 256;
  double kappa = 1e-4;
  std::uint64_t seed = 1;
  int episodes = 10000;
  int sweeps = 20000;
  bool time_free = false;
  std::string out_dir = ".";
  std::vector<std::string> kinds = {"lower", "upper"};
  std::vector<std::string> policies = {"var", "e", "nvar", "dvar"};
};

// args are everything after the subcommand. `--config path` loads the file
// first; flags win over file entries.
experiment_config parse_config(const std::vector<std::string>& args);

mdp build_mdp(const experiment_config& cfg);
int initial_state(const experiment_config& cfg);

// Deterministic CSV emission: header row, caller-ordered rows, shortest
// round-trip float formatting upstream.
void write_report(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows,
                  const std::string& path);

// Runs one subcommand (solve, train, eval, oracle, gap), writing artifact
// files under cfg.out_dir. Throws qmdp::error on failure.
void run_command(const std::string& cmd, const experiment_config& cfg);

// 1 = config, 2 = data, 3 = numerical.
int exit_code_for(const error& e);

// Full dispatch: argv[1] is the subcommand; maps errors to exit codes.
int cli_main(int argc, const char* const* argv);

}  // namespace qmdp
