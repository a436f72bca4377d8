#include "hkflow/numeric.hpp"

#include <atomic>

namespace hkflow {
namespace {
std::atomic<unsigned> g_threads{1};
}

unsigned default_threads() noexcept { return g_threads.load(std::memory_order_relaxed); }
void set_default_threads(unsigned n) noexcept { g_threads.store(n == 0 ? 1 : n, std::memory_order_relaxed); }

}  // namespace hkflow
