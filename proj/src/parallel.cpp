#include "pml/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pml {

namespace {

constexpr std::size_t kPairwiseLeaf = 128;

// Subtree roots at a fixed depth of the pairwise tree, left to right.
void collect_subtrees(std::span<const double> v, int depth,
                      std::vector<std::span<const double>>& out) {
  if (depth == 0 || v.size() <= kPairwiseLeaf) {
    out.push_back(v);
    return;
  }
  const std::size_t half = v.size() / 2;
  collect_subtrees(v.first(half), depth - 1, out);
  collect_subtrees(v.subspan(half), depth - 1, out);
}

// Recombines subtree sums produced by collect_subtrees in the same shape.
double combine_subtrees(std::span<const double> v, int depth,
                        const std::vector<double>& sums, std::size_t& next) {
  if (depth == 0 || v.size() <= kPairwiseLeaf) return sums[next++];
  const std::size_t half = v.size() / 2;
  const double left = combine_subtrees(v.first(half), depth - 1, sums, next);
  const double right = combine_subtrees(v.subspan(half), depth - 1, sums, next);
  return left + right;
}

}  // namespace

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PML_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
      // fall through to hardware concurrency
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n_chunks, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, threads), n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        body(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= kPairwiseLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double parallel_pairwise_sum(std::span<const double> values, unsigned threads) {
  if (threads <= 1 || values.size() < 64 * kPairwiseLeaf) {
    return pairwise_sum(values);
  }
  constexpr int depth = 6;  // up to 64 subtrees
  std::vector<std::span<const double>> parts;
  collect_subtrees(values, depth, parts);
  std::vector<double> sums(parts.size());
  parallel_for(parts.size(), threads,
               [&](std::size_t i) { sums[i] = pairwise_sum(parts[i]); });
  std::size_t next = 0;
  return combine_subtrees(values, depth, sums, next);
}

}  // namespace pml
