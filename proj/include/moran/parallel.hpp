#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace moran {

// Static block partition of [0, n) into at most `threads` chunks; depends
// only on (n, threads). Reduce per-chunk results in chunk order.
struct Chunk {
  std::size_t index;
  std::size_t begin;
  std::size_t end;
};

inline std::vector<Chunk> make_chunks(std::size_t n, unsigned threads) {
  const std::size_t t = std::max<std::size_t>(1, std::min<std::size_t>(threads, n == 0 ? 1 : n));
  std::vector<Chunk> out;
  for (std::size_t i = 0; i < t; ++i) out.push_back({i, i * n / t, (i + 1) * n / t});
  return out;
}

template <class F>
void parallel_chunks(std::size_t n, unsigned threads, F&& f) {
  const auto chunks = make_chunks(n, threads);
  if (chunks.size() == 1) {
    f(chunks[0]);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks.size());
  std::vector<std::thread> pool;
  pool.reserve(chunks.size());
  for (const auto& c : chunks) {
    pool.emplace_back([&, c] {
      try {
        f(c);
      } catch (...) {
        errors[c.index] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  parallel_chunks(n, threads, [&](const Chunk& c) {
    for (std::size_t i = c.begin; i < c.end; ++i) f(i);
  });
}

}  // namespace moran
