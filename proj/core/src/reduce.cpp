#include "hypf/reduce.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace hypf {

namespace {

int initial_thread_count() {
  if (const char* env = std::getenv("HYPF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) {
      return n;
    }
  }
  return 1;
}

std::atomic<int>& thread_setting() {
  static std::atomic<int> n{initial_thread_count()};
  return n;
}

}  // namespace

int thread_count() { return thread_setting().load(); }

void set_thread_count(int n) { thread_setting().store(std::max(1, n)); }

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  const auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * kReductionChunk;
    body(begin, std::min(n, begin + kReductionChunk));
  };
  const int workers = std::min<int>(thread_count(), static_cast<int>(chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      run_chunk(c);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        run_chunk(c);
      }
    });
  }
}

double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      s += term(i);
    }
    partial[begin / kReductionChunk] = s;
  });
  double total = 0.0;
  for (double s : partial) {
    total += s;
  }
  return total;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      body(i);
    }
  });
}

}  // namespace hypf
