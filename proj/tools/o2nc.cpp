// o2nc — exponentiated online-to-non-convex conversion toolkit.
//
//   o2nc run     --config PATH [--out DIR] [--grid log|full]
//   o2nc compare --config PATH [--out DIR] [--seeds K]
//   o2nc verify  [--suite NAME]
//   o2nc certify TRAJECTORY_CSV [--c VALUE] [--grid log|full]
//
// Exit codes: 0 success, 1 usage/config error, 2 numeric failure,
// 3 verification failure.  O2NC_OUT sets the default output root.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "o2nc/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"exponentiated online-to-non-convex conversion toolkit"};
  app.require_subcommand(1);

  o2nc::harness_options opts;
  double c_flag = 0.0;

  CLI::App* run = app.add_subcommand("run", "run one algorithm from a config file");
  run->add_option("--config", opts.config_path, "flat key=value config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", opts.out_root, "output root directory (default: $O2NC_OUT or out)");
  run->add_option("--grid", opts.grid, "certificate index grid (default log)")
      ->check(CLI::IsMember({"log", "full"}));

  CLI::App* compare = app.add_subcommand("compare", "run two algorithms over paired seeds");
  compare->add_option("--config", opts.config_path, "config with algorithm=<id>,<id>")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--out", opts.out_root, "output root directory (default: $O2NC_OUT or out)");
  compare->add_option("--seeds", opts.seeds, "number of paired trials (default 5)")
      ->check(CLI::PositiveNumber);

  CLI::App* verify = app.add_subcommand("verify", "run a named property suite");
  verify->add_option("--suite", opts.suite,
                     "regret|exp_scaling|variance|lambda|weights|equivalence|clipping|"
                     "reduction|all (default all)");

  CLI::App* certify = app.add_subcommand("certify", "recompute certificates for a finished run");
  certify->add_option("trajectory", opts.trajectory_path, "trajectory.csv written by `o2nc run`")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* c_opt =
      certify->add_option("--c", c_flag, "certificate scale (default: the run's config c)")
          ->check(CLI::PositiveNumber);
  certify->add_option("--grid", opts.grid, "certificate index grid (default log)")
      ->check(CLI::IsMember({"log", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (c_opt->count() > 0) opts.c_override = c_flag;

  try {
    if (run->parsed()) return o2nc::cmd_run(opts, std::cout, std::cerr);
    if (compare->parsed()) return o2nc::cmd_compare(opts, std::cout, std::cerr);
    if (verify->parsed()) return o2nc::cmd_verify(opts, std::cout, std::cerr);
    if (certify->parsed()) return o2nc::cmd_certify(opts, std::cout, std::cerr);
  } catch (const o2nc::numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
