#pragma once

#include "lbs/dataset.hpp"

#include <string>
#include <vector>

namespace lbs {

struct NeighborEntry {
    Index index = 0;      // the neighboring point
    double sq_dist = 0.0; // squared Euclidean distance to it
};

// Exact k-nearest-neighbor lists: neighbors[i] holds i's k nearest other
// points sorted by ascending squared distance, ties broken by ascending
// index. Lists are directed; adjacency queries symmetrize (see neighbor_of).
struct NeighborGraph {
    Index n = 0;
    Index k = 0;
    std::vector<std::vector<NeighborEntry>> neighbors;

    // True iff j appears in neighbors[i] or i appears in neighbors[j].
    // This symmetric ("either lists the other") adjacency is what the
    // Laplacian weights and feature neighborhoods are built on.
    bool neighbor_of(Index i, Index j) const;
};

void validate_graph(const NeighborGraph& graph);

// Exact brute-force search. Requires 1 <= k <= n-1.
NeighborGraph build_knn(const Matrix& points, Index k);

// Symmetric adjacency as index lists, sorted ascending per vertex:
// adjacency[i] = { j : neighbor_of(i, j) }. Derived view used wherever a
// whole neighborhood is traversed (Laplacian assembly, feature detection).
std::vector<std::vector<Index>> symmetric_adjacency(const NeighborGraph& graph);

// Component ids in [0, count), numbered by each component's smallest vertex.
std::vector<Index> connected_components(
    const std::vector<std::vector<Index>>& adjacency, Index& count);

// Debug dump: one "i,j,squared_distance" line per directed edge.
void dump_edges(const NeighborGraph& graph, const std::string& path);

}  // namespace lbs
