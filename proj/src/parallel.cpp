#include "annulus/parallel.hpp"

#include <atomic>

namespace annulus {

namespace {
std::atomic<unsigned> g_workers{1};
}

void set_worker_count(unsigned n) {
    g_workers = n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n;
}

unsigned worker_count() { return g_workers; }

}  // namespace annulus
