#include "strapsim/util/parallel.hpp"

namespace strapsim::util {
namespace {
std::atomic<std::size_t> g_threads{0};
}

std::size_t default_threads() noexcept {
  const std::size_t configured = g_threads.load(std::memory_order_relaxed);
  if (configured != 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void set_default_threads(std::size_t threads) noexcept {
  g_threads.store(threads, std::memory_order_relaxed);
}

}  // namespace strapsim::util
