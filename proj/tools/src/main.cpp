#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "poscon/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = poscon::cli;

  CLI::App app{"Positive leader-following consensus over switching graphs"};
  app.require_subcommand(1);

  std::string file;
  std::string out;

  auto* check = app.add_subcommand("check", "Check model, graph, mu, regulator and gain requirements");
  check->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);

  cli::RunOptions run_opts;
  std::string mode;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write trace.csv, summary.json and plot data");
  run->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--mode", mode, "Feedback mode")->check(CLI::IsMember({"state", "output", "observer"}));
  run->add_option("--horizon", run_opts.horizon, "Number of steps");
  run->add_option("--seed", run_opts.seed, "Seed for random initial conditions");
  run->add_flag("--override-assumptions", run_opts.override_assumptions,
                "Simulate even when a requirement fails (results are flagged)");

  auto* synth = app.add_subcommand("synthesize", "Fill in missing gains and write a complete scenario");
  synth->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out, "Output scenario file")->required();

  auto* paper = app.add_subcommand("paper-example", "Run the bundled scenario in all three modes");
  paper->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitOther;
  }

  if (*check) return cli::cmd_check(file, std::cout, std::cerr);
  if (*run) {
    if (!mode.empty()) run_opts.mode = poscon::mode_from_string(mode);
    run_opts.out_dir = out;
    return cli::cmd_run(file, run_opts, std::cout, std::cerr);
  }
  if (*synth) return cli::cmd_synthesize(file, out, std::cout, std::cerr);
  if (*paper) return cli::cmd_paper_example(out, std::cout, std::cerr);
  return cli::kExitOther;
}
