#include "kbte/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace kbte {
namespace {
std::atomic<int> g_default_workers{0};
}

int resolve_workers(std::optional<int> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("KINETIC_BTE_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void set_default_workers(int workers) { g_default_workers = std::max(1, workers); }

int default_workers() {
  const int n = g_default_workers.load();
  return n > 0 ? n : resolve_workers(std::nullopt);
}

}  // namespace kbte
