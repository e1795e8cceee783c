#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "twisttube/commands.hpp"
#include "twisttube/config.hpp"
#include "twisttube/errors.hpp"

int main(int argc, char** argv) {
  using namespace twisttube;

  CLI::App app{"Lieb-Thirring bounds for twisted-tube Dirichlet Laplacians"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  long long seed = -1;
  bool verbose = false;
  std::string axis;
  std::vector<double> values;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--workers", workers, "worker threads (TWISTTUBE_WORKERS overrides)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "eigensolver seed")->check(CLI::NonNegativeNumber);
    sub->add_flag("--verbose", verbose, "progress output");
  };

  add_common(app.add_subcommand("cross-section", "ground state of the cross-section operator"));
  add_common(app.add_subcommand("bound", "Lieb-Thirring-type bound and per-s table"));
  auto* sweep = app.add_subcommand("sweep", "one bound per value along an axis");
  add_common(sweep);
  sweep->add_option("--axis", axis, "ellipse-eps | ribbon-k | resolution | amplitude");
  sweep->add_option("--values", values, "axis values")->delimiter(',');
  add_common(app.add_subcommand("verify", "bound against the direct 3D spectrum"));
  add_common(app.add_subcommand("direct", "spectrum of the truncated 3D operator"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig config;
  try {
    config = load_config(config_path);
    if (!axis.empty()) {
      config.sweep_axis = parse_sweep_axis(axis);
      if (!config.sweep_axis) throw ConfigError("--axis must be ellipse-eps, ribbon-k, resolution or amplitude");
    }
    if (!values.empty()) config.sweep_values = values;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (workers > 0) config.workers = workers;
  if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
  if (verbose) config.verbosity = std::max(config.verbosity, 1);

  return run_command(command, config, std::cout, std::cerr);
}
