#include "dtn/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet-to-Neumann cluster spectra on the unit ball"};
  app.require_subcommand(1);
  std::string config;
  dtn::Overrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "experiment configuration (JSON)")->required();
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--threads", ov.threads, "worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
    sub->add_option("--k-min", ov.k_min, "first cluster index of the window")->check(CLI::PositiveNumber);
    sub->add_option("--k-max", ov.k_max, "last cluster index of the window (-1: floor(0.8 L_max))");
    sub->add_flag("--scan-conventions", ov.scan_conventions, "evaluate all eight convention tuples");
  };
  const char* names[] = {"spectrum", "invariants", "verify", "berezin", "starcheck"};
  const char* help[] = {"DtN matrix sidecar, cluster spectra and the bound check",
                        "symbol jets on the orbit grid and predicted invariants",
                        "measured moment fits against predictions",
                        "symbol expansion fits of the DtN map",
                        "exact composition and Berezin kernel identities"};
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(names[i], help[i]));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dtn::kConfigError;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  return dtn::run_command_file(cmd, config, ov, std::cerr);
}
