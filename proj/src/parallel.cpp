#include "qls/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace qls {

namespace {
std::atomic<int> g_threads{0};
}

int default_threads() {
  if (int n = g_threads.load(); n > 0) return n;
  if (const char* env = std::getenv("QLS_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(int n) { g_threads.store(n > 0 ? n : 0); }

}  // namespace qls
