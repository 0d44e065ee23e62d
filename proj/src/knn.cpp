#include "lbs/knn.hpp"

#include "lbs/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace lbs {

namespace {

void check_knn_args(Index n, Index k) {
    if (n < 2) throw std::invalid_argument("need at least 2 points");
    if (k < 1) throw std::invalid_argument("neighbor count must be >= 1");
    if (k > n - 1) {
        throw std::invalid_argument(
            "neighbor count must be smaller than the point count");
    }
}

}  // namespace

bool NeighborGraph::neighbor_of(Index i, Index j) const {
    if (i < 0 || i >= n || j < 0 || j >= n) {
        throw std::out_of_range("vertex index out of range");
    }
    if (i == j) return false;
    for (const auto& e : neighbors[static_cast<std::size_t>(i)]) {
        if (e.index == j) return true;
    }
    for (const auto& e : neighbors[static_cast<std::size_t>(j)]) {
        if (e.index == i) return true;
    }
    return false;
}

void validate_graph(const NeighborGraph& graph) {
    if (graph.n < 2 || graph.k < 1 || graph.k > graph.n - 1) {
        throw std::invalid_argument("invalid graph shape");
    }
    if (static_cast<Index>(graph.neighbors.size()) != graph.n) {
        throw std::invalid_argument("neighbor list count must equal n");
    }
    for (Index i = 0; i < graph.n; ++i) {
        const auto& list = graph.neighbors[static_cast<std::size_t>(i)];
        if (static_cast<Index>(list.size()) != graph.k) {
            throw std::invalid_argument("every neighbor list must have k entries");
        }
        for (std::size_t e = 0; e < list.size(); ++e) {
            if (list[e].index == i) {
                throw std::invalid_argument("self-loop at vertex " +
                                            std::to_string(i));
            }
            if (list[e].index < 0 || list[e].index >= graph.n) {
                throw std::invalid_argument("neighbor index out of range");
            }
            if (e > 0) {
                const auto& prev = list[e - 1];
                const bool ordered =
                    prev.sq_dist < list[e].sq_dist ||
                    (prev.sq_dist == list[e].sq_dist &&
                     prev.index < list[e].index);
                if (!ordered) {
                    throw std::invalid_argument(
                        "neighbor lists must be sorted by (distance, index)");
                }
            }
        }
    }
}

NeighborGraph build_knn(const Matrix& points, Index k) {
    const Index n = points.rows();
    check_knn_args(n, k);

    NeighborGraph graph;
    graph.n = n;
    graph.k = k;
    graph.neighbors.assign(static_cast<std::size_t>(n), {});

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin,
                                                  std::size_t end) {
        std::vector<std::pair<double, Index>> dist;
        for (std::size_t q = begin; q < end; ++q) {
            const Index i = static_cast<Index>(q);
            dist.clear();
            dist.reserve(static_cast<std::size_t>(n - 1));
            for (Index j = 0; j < n; ++j) {
                if (j == i) continue;
                dist.emplace_back((points.row(i) - points.row(j)).squaredNorm(),
                                  j);
            }
            // pair's lexicographic order gives distance-then-index ties.
            auto mid = dist.begin() + k;
            std::nth_element(dist.begin(), mid - 1, dist.end());
            std::sort(dist.begin(), mid);
            auto& out = graph.neighbors[q];
            out.reserve(static_cast<std::size_t>(k));
            for (auto it = dist.begin(); it != mid; ++it) {
                out.push_back({it->second, it->first});
            }
        }
    });
    return graph;
}

std::vector<std::vector<Index>> symmetric_adjacency(
    const NeighborGraph& graph) {
    std::vector<std::vector<Index>> adjacency(
        static_cast<std::size_t>(graph.n));
    for (Index i = 0; i < graph.n; ++i) {
        for (const auto& e : graph.neighbors[static_cast<std::size_t>(i)]) {
            adjacency[static_cast<std::size_t>(i)].push_back(e.index);
            adjacency[static_cast<std::size_t>(e.index)].push_back(i);
        }
    }
    for (auto& list : adjacency) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return adjacency;
}

std::vector<Index> connected_components(
    const std::vector<std::vector<Index>>& adjacency, Index& count) {
    const Index n = static_cast<Index>(adjacency.size());
    std::vector<Index> component(static_cast<std::size_t>(n), -1);
    count = 0;
    std::vector<Index> stack;
    for (Index start = 0; start < n; ++start) {
        if (component[static_cast<std::size_t>(start)] != -1) continue;
        stack.push_back(start);
        component[static_cast<std::size_t>(start)] = count;
        while (!stack.empty()) {
            const Index v = stack.back();
            stack.pop_back();
            for (Index u : adjacency[static_cast<std::size_t>(v)]) {
                if (component[static_cast<std::size_t>(u)] == -1) {
                    component[static_cast<std::size_t>(u)] = count;
                    stack.push_back(u);
                }
            }
        }
        ++count;
    }
    return component;
}

void dump_edges(const NeighborGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << "i,j,squared_distance\n";
    for (Index i = 0; i < graph.n; ++i) {
        for (const auto& e : graph.neighbors[static_cast<std::size_t>(i)]) {
            out << i << ',' << e.index << ',' << format_double(e.sq_dist)
                << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lbs
