#include "strataflow/parallel.hpp"

#include <atomic>
#include <thread>

namespace strataflow {

namespace {
std::atomic<int> g_threads{1};
}

void set_default_threads(int n) {
    if (n <= 0) n = int(std::thread::hardware_concurrency());
    g_threads = std::max(1, n);
}
int default_threads() { return g_threads; }

}  // namespace strataflow
