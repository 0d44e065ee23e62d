#include "lbs/knn.hpp"

#include "lbs/parallel.hpp"
#include "oracle_helpers.hpp"

#include <doctest.h>

#include <stdexcept>

namespace {

lbs::Matrix line_points() {
    lbs::Matrix points(4, 1);
    points << 0, 1, 2, 4;
    return points;
}

}  // namespace

TEST_SUITE("knn") {

TEST_CASE("line example: nearest neighbor with index tie-break") {
    const lbs::NeighborGraph graph = lbs::build_knn(line_points(), 1);
    REQUIRE(graph.n == 4);
    REQUIRE(graph.k == 1);
    // Point 1 is equidistant from 0 and 2; the lower index wins.
    CHECK(graph.neighbors[0][0].index == 1);
    CHECK(graph.neighbors[1][0].index == 0);
    CHECK(graph.neighbors[2][0].index == 1);
    CHECK(graph.neighbors[3][0].index == 2);
    CHECK(graph.neighbors[3][0].sq_dist == 4.0);
    CHECK_NOTHROW(lbs::validate_graph(graph));
}

TEST_CASE("symmetric adjacency: either direction suffices") {
    const lbs::NeighborGraph graph = lbs::build_knn(line_points(), 1);
    CHECK(graph.neighbor_of(1, 2));  // 2 lists 1 even though 1 lists 0
    CHECK(graph.neighbor_of(2, 1));
    CHECK(!graph.neighbor_of(0, 3));
    CHECK(!graph.neighbor_of(1, 1));  // no self-loops
    CHECK_THROWS_AS(graph.neighbor_of(0, 4), std::out_of_range);

    const auto adjacency = lbs::symmetric_adjacency(graph);
    CHECK(adjacency[0] == std::vector<lbs::Index>{1});
    CHECK(adjacency[1] == std::vector<lbs::Index>{0, 2});
    CHECK(adjacency[2] == std::vector<lbs::Index>{1, 3});
    CHECK(adjacency[3] == std::vector<lbs::Index>{2});
}

TEST_CASE("k = n-1 produces the complete graph") {
    oracle::TestRng rng(101);
    const lbs::Matrix points = oracle::random_points(rng, 7, 3);
    const lbs::NeighborGraph graph = lbs::build_knn(points, 6);
    for (lbs::Index i = 0; i < 7; ++i) {
        REQUIRE(graph.neighbors[static_cast<std::size_t>(i)].size() == 6);
        for (lbs::Index j = 0; j < 7; ++j) {
            if (i != j) CHECK(graph.neighbor_of(i, j));
        }
    }
}

TEST_CASE("parameter validation") {
    const lbs::Matrix points = line_points();
    CHECK_THROWS_AS(lbs::build_knn(points, 0), std::invalid_argument);
    CHECK_THROWS_AS(lbs::build_knn(points, 4), std::invalid_argument);
    lbs::Matrix single(1, 2);
    single << 0, 0;
    CHECK_THROWS_AS(lbs::build_knn(single, 1), std::invalid_argument);
}

TEST_CASE("lists are sorted by squared distance, then index") {
    oracle::TestRng rng(77);
    const lbs::Matrix points = oracle::random_points(rng, 60, 4);
    const lbs::NeighborGraph graph = lbs::build_knn(points, 12);
    for (const auto& list : graph.neighbors) {
        for (std::size_t e = 1; e < list.size(); ++e) {
            const bool ordered =
                list[e - 1].sq_dist < list[e].sq_dist ||
                (list[e - 1].sq_dist == list[e].sq_dist &&
                 list[e - 1].index < list[e].index);
            REQUIRE(ordered);
        }
    }
}

TEST_CASE("matches the brute-force oracle, duplicates included") {
    oracle::TestRng rng(4242);
    for (const auto& [n, d, k] : {std::tuple<lbs::Index, lbs::Index,
                                             lbs::Index>{120, 5, 7},
                                  {500, 3, 4},
                                  {40, 10, 39}}) {
        lbs::Matrix points = oracle::random_points(rng, n, d);
        // Inject exact duplicates to exercise zero distances and ties.
        points.row(1) = points.row(0);
        if (n > 10) points.row(10) = points.row(0);

        const auto expected = oracle::brute_force_knn(points, k);
        const lbs::NeighborGraph graph = lbs::build_knn(points, k);
        for (lbs::Index i = 0; i < n; ++i) {
            const auto& got = graph.neighbors[static_cast<std::size_t>(i)];
            const auto& want = expected[static_cast<std::size_t>(i)];
            REQUIRE(got.size() == want.size());
            for (std::size_t e = 0; e < got.size(); ++e) {
                CHECK(got[e].index == want[e].index);
                CHECK(got[e].sq_dist == doctest::Approx(want[e].sq_dist)
                                            .epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("result does not depend on the thread count") {
    oracle::TestRng rng(9);
    const lbs::Matrix points = oracle::random_points(rng, 150, 6);

    lbs::set_max_threads(1);
    const lbs::NeighborGraph serial = lbs::build_knn(points, 8);
    lbs::set_max_threads(5);
    const lbs::NeighborGraph threaded = lbs::build_knn(points, 8);
    lbs::set_max_threads(0);

    for (lbs::Index i = 0; i < 150; ++i) {
        const auto& a = serial.neighbors[static_cast<std::size_t>(i)];
        const auto& b = threaded.neighbors[static_cast<std::size_t>(i)];
        REQUIRE(a.size() == b.size());
        for (std::size_t e = 0; e < a.size(); ++e) {
            CHECK(a[e].index == b[e].index);
            CHECK(a[e].sq_dist == b[e].sq_dist);  // bitwise
        }
    }
}

TEST_CASE("connected_components numbers components by smallest vertex") {
    // Two clusters far apart, k=1: each cluster pairs internally.
    lbs::Matrix points(4, 1);
    points << 0.0, 0.1, 100.0, 100.1;
    const lbs::NeighborGraph graph = lbs::build_knn(points, 1);
    lbs::Index count = 0;
    const auto component =
        lbs::connected_components(lbs::symmetric_adjacency(graph), count);
    REQUIRE(count == 2);
    CHECK(component == std::vector<lbs::Index>{0, 0, 1, 1});
}

}  // TEST_SUITE
