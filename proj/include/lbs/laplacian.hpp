#pragma once

#include "lbs/dataset.hpp"
#include "lbs/knn.hpp"

#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace lbs {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Graph Laplacian with heat-kernel weights and its diagonal mass matrix.
// Invariants (all enforced by construction, re-checkable via validate):
//   - W is exactly symmetric with off-diagonal entries <= 0
//   - each diagonal entry is the positive sum of its row's off-diagonal
//     magnitudes, so every row sums to 0 (within roundoff)
//   - A[i] == W[i][i] > 0
struct LaplacianPair {
    SparseMatrix w;
    Eigen::VectorXd a;  // diagonal mass entries, a[i] == w(i, i)
    double t = 0.0;     // bandwidth, in squared-distance units

    // Connectivity metadata captured at assembly time. A disconnected
    // graph is legal; it makes the zero eigenvalue multiplicity equal to
    // component_count, so downstream code wants to know.
    Index component_count = 0;
    std::vector<Index> component;  // component id per vertex
    std::vector<std::string> warnings;

    Index size() const { return a.size(); }
};

// Throws std::runtime_error naming the first violated property.
void validate_laplacian(const LaplacianPair& pair);

// Median over all points of the squared distance to the k-th (farthest)
// neighbor. Errors on duplicate-only data where that median is zero.
double choose_bandwidth(const NeighborGraph& graph);

// Heat-kernel weights w_ij = exp(-||v_i - v_j||^2 / t) on symmetric
// adjacency; W[i][j] = -w_ij off-diagonal, W[i][i] = sum of row weights.
// Edges whose weight underflows to zero are dropped from the sparsity
// pattern; if that isolates a vertex the data/bandwidth combination is
// rejected. A disconnected graph records a warning instead of failing.
LaplacianPair build_laplacian(const Matrix& points, const NeighborGraph& graph,
                              double t);

// Debug dump in coordinate text format: one "i,j,value" line per stored
// entry, for cross-checking against external tools.
void dump_matrix(const SparseMatrix& m, const std::string& path);

}  // namespace lbs
