#pragma once

#include "dtn/clusters.hpp"
#include "dtn/invariants.hpp"

#include <nlohmann/json.hpp>

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtn {

// Schema violation; path is a JSON pointer such as /conventions/phi_arg.
struct ConfigError : std::runtime_error {
  std::string path;
  ConfigError(std::string p, const std::string& msg) : std::runtime_error(p + ": " + msg), path(std::move(p)) {}
};

struct ExperimentConfig {
  std::vector<Monomial> potential;
  int L_max = 40;
  int J = 3;
  double neumann_tol = 0;  // > 0: adaptive depth with J as maximum
  int k_min = 5;
  int k_max = -1;          // -1: floor(0.8 L_max)
  std::vector<std::string> test_functions{"id"};
  // one entry each unless the switch is "scan"
  std::vector<double> kappas{0.5};
  std::vector<PhiArg> phi_args{PhiArg::Q0};
  std::vector<int> delta_signs{-1};
  int jet_L = -1;          // -1: max(8, 2 lmax + 4)
  WOptions w;
  int orbit_grid = 50;
  int moment_fit_order = 2;
  int symbol_fit_order = 3;
  std::vector<double> verify_tol{1e-3, 1e-2, 0.1};
  bool export_matrix = false;
  int threads = 0;
  std::string output_dir = "out";

  nlohmann::ordered_json canonical() const;  // normalized form, without threads and output_dir
  std::string hash() const;
  std::vector<Conventions> convention_grid() const;
  bool scanning() const { return kappas.size() * phi_args.size() * delta_signs.size() > 1; }
  int resolved_jet_L(const Potential& q) const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Command-line overrides applied after parsing; they enter the hash except
// threads and the output directory.
struct Overrides {
  std::string out;
  int threads = -1;
  int k_min = -1, k_max = -2;
  bool scan_conventions = false;
};
void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

enum ExitCode { kPass = 0, kVerifyFail = 1, kConfigError = 2, kNumericalGuard = 3 };

// Runs spectrum, invariants, verify, berezin or starcheck and returns the exit code.
int run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& log);
int run_command_file(const std::string& command, const std::string& config_path, const Overrides& o,
                     std::ostream& log);

}  // namespace dtn
