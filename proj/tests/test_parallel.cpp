#include "lbs/parallel.hpp"

#include <doctest.h>

#include <atomic>
#include <mutex>
#include <numeric>
#include <vector>

namespace {

// Restores the global thread cap when a test section ends.
struct ThreadCapGuard {
    ~ThreadCapGuard() { lbs::set_max_threads(0); }
};

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("parallel_for visits every index exactly once") {
    ThreadCapGuard guard;
    for (int threads : {1, 2, 3, 7}) {
        lbs::set_max_threads(threads);
        for (std::size_t count : {0u, 1u, 5u, 64u, 1001u}) {
            std::vector<std::atomic<int>> hits(count);
            for (auto& h : hits) h.store(0);
            lbs::parallel_for(count, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    hits[i].fetch_add(1);
                }
            });
            for (std::size_t i = 0; i < count; ++i) {
                REQUIRE(hits[i].load() == 1);
            }
        }
    }
}

TEST_CASE("parallel_for_blocks hands out fixed-size blocks in order") {
    ThreadCapGuard guard;
    lbs::set_max_threads(3);
    const std::size_t count = 103;
    const std::size_t block = 10;

    std::mutex mutex;
    std::vector<std::pair<std::size_t, std::size_t>> seen(11);
    lbs::parallel_for_blocks(
        count, block,
        [&](std::size_t block_idx, std::size_t begin, std::size_t end) {
            std::lock_guard<std::mutex> lock(mutex);
            seen[block_idx] = {begin, end};
        });
    for (std::size_t b = 0; b < seen.size(); ++b) {
        REQUIRE(seen[b].first == b * block);
        REQUIRE(seen[b].second == std::min(count, (b + 1) * block));
    }
}

TEST_CASE("a capped run computes the same reduction as a serial run") {
    ThreadCapGuard guard;
    const std::size_t count = 1000;
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        values[i] = 1.0 / static_cast<double>(i + 1);
    }

    // Deterministic pattern: per-block partials combined in block order.
    const auto blocked_sum = [&values, count]() {
        const std::size_t block = 64;
        std::vector<double> partial((count + block - 1) / block, 0.0);
        lbs::parallel_for_blocks(
            count, block,
            [&](std::size_t block_idx, std::size_t begin, std::size_t end) {
                double acc = 0.0;
                for (std::size_t i = begin; i < end; ++i) acc += values[i];
                partial[block_idx] = acc;
            });
        double total = 0.0;
        for (double p : partial) total += p;
        return total;
    };

    lbs::set_max_threads(1);
    const double serial = blocked_sum();
    lbs::set_max_threads(5);
    const double parallel = blocked_sum();
    REQUIRE(serial == parallel);  // bitwise: same additions, same order
}

TEST_CASE("set_max_threads zero restores the hardware default") {
    lbs::set_max_threads(4);
    REQUIRE(lbs::max_threads() == 4);
    lbs::set_max_threads(0);
    REQUIRE(lbs::max_threads() >= 1);
}

}  // TEST_SUITE
