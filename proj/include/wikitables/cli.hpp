#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "wikitables/crawl.hpp"

namespace wikitables {

/// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `wikitables` tool: crawl, stats, search, refilter,
/// serve. Output goes to `out`, diagnostics and progress to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One-line progress bar: pages done/total, pages left, average time per
/// page and ETA.
std::string render_progress(const JobState& state, int width = 30);

}  // namespace wikitables
