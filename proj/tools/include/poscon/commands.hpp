#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "poscon/sim.hpp"

namespace poscon::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitValidation = 2,
  kExitInvariant = 3,
};

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<Mode> mode;
  std::optional<std::size_t> horizon;
  std::optional<std::uint64_t> seed;
  bool override_assumptions = false;
};

int cmd_check(const std::filesystem::path& file, std::ostream& out, std::ostream& err);

/// Writes trace.csv, summary.json and plot data into opts.out_dir.
int cmd_run(const std::filesystem::path& file, const RunOptions& opts, std::ostream& out, std::ostream& err);

int cmd_synthesize(const std::filesystem::path& file, const std::filesystem::path& out_file, std::ostream& out,
                   std::ostream& err);

/// Runs the bundled scenario in state, output and observer mode, one
/// subdirectory each, plus the scenario file and its check report.
int cmd_paper_example(const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

}  // namespace poscon::cli
