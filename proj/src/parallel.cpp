#include "lbs/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace lbs {

namespace {
std::atomic<int> g_max_threads{0};

int resolved_threads() {
    int cap = g_max_threads.load(std::memory_order_relaxed);
    if (cap > 0) return cap;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

void set_max_threads(int n) {
    g_max_threads.store(n < 0 ? 0 : n, std::memory_order_relaxed);
}

int max_threads() { return resolved_threads(); }

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t workers = std::min<std::size_t>(resolved_threads(), count);
    if (workers <= 1) {
        fn(0, count);
        return;
    }
    std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

void parallel_for_blocks(std::size_t count, std::size_t block,
                         const std::function<void(std::size_t, std::size_t,
                                                  std::size_t)>& fn) {
    if (count == 0) return;
    if (block == 0) block = 1;
    std::size_t nblocks = (count + block - 1) / block;
    std::atomic<std::size_t> next{0};
    std::size_t workers =
        std::min<std::size_t>(resolved_threads(), nblocks);
    auto drain = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= nblocks) return;
            std::size_t begin = b * block;
            fn(b, begin, std::min(count, begin + block));
        }
    };
    if (workers <= 1) {
        drain();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
}

}  // namespace lbs
