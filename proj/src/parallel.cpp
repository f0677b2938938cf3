#include "occ/parallel.hpp"

#include <atomic>

namespace occ {

namespace {

unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> threads{default_threads()};
  return threads;
}

}  // namespace

void set_num_threads(unsigned threads) { thread_setting().store(threads == 0 ? default_threads() : threads); }

unsigned num_threads() { return thread_setting().load(); }

}  // namespace occ
