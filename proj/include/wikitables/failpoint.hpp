#pragma once

#include <string_view>

namespace wikitables::failpoint {

/// Crash injection for resume testing. With WIKITABLES_FAILPOINT=<name>:<n>
/// in the environment, the n-th call to triggered(<name>) returns true and
/// hit(<name>) kills the process with SIGKILL. Unset, both are no-ops.
bool triggered(std::string_view name);

void hit(std::string_view name);

[[noreturn]] void kill_self();

}  // namespace wikitables::failpoint
