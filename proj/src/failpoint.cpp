#include "wikitables/failpoint.hpp"

#include <signal.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>

namespace wikitables::failpoint {

namespace {

struct Trigger {
  std::string name;
  long count = 0;
};

const Trigger& configured() {
  static const Trigger parsed = [] {
    Trigger s;
    const char* env = std::getenv("WIKITABLES_FAILPOINT");
    if (env == nullptr) return s;
    const std::string value(env);
    const auto colon = value.rfind(':');
    if (colon == std::string::npos) {
      s.name = value;
      s.count = 1;
    } else {
      s.name = value.substr(0, colon);
      s.count = std::strtol(value.c_str() + colon + 1, nullptr, 10);
    }
    return s;
  }();
  return parsed;
}

std::atomic<long> hits{0};

}  // namespace

bool triggered(std::string_view name) {
  const Trigger& s = configured();
  if (s.name.empty() || s.name != name) return false;
  return hits.fetch_add(1) + 1 == s.count;
}

void hit(std::string_view name) {
  if (triggered(name)) kill_self();
}

void kill_self() {
  ::kill(::getpid(), SIGKILL);
  std::_Exit(137);
}

}  // namespace wikitables::failpoint
