#include "lbs/laplacian.hpp"

#include "lbs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace lbs {

namespace {

// exp(-x) underflows to +0.0 a little past 745; such weights would store
// structural zeros, so the edge is dropped instead.
constexpr double kUnderflowExponent = 745.0;

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    if (m % 2 == 1) return values[m / 2];
    return 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

}  // namespace

void validate_laplacian(const LaplacianPair& pair) {
    const Index n = pair.size();
    if (n < 2) throw std::runtime_error("Laplacian must have size >= 2");
    if (pair.w.rows() != n || pair.w.cols() != n) {
        throw std::runtime_error("W shape does not match A");
    }
    if (!(pair.t > 0.0)) throw std::runtime_error("bandwidth must be positive");

    SparseMatrix wt = SparseMatrix(pair.w.transpose());
    for (Index i = 0; i < n; ++i) {
        double diag = 0.0;
        double offdiag_sum = 0.0;
        SparseMatrix::InnerIterator it(pair.w, i);
        SparseMatrix::InnerIterator jt(wt, i);
        for (; it; ++it, ++jt) {
            if (!jt || jt.col() != it.col() || jt.value() != it.value()) {
                throw std::runtime_error("W is not exactly symmetric");
            }
            if (it.col() == i) {
                diag = it.value();
                if (!(diag > 0.0)) {
                    throw std::runtime_error("diagonal entries must be > 0");
                }
            } else {
                if (it.value() > 0.0) {
                    throw std::runtime_error(
                        "off-diagonal entries must be <= 0");
                }
                offdiag_sum += it.value();
            }
        }
        if (jt) throw std::runtime_error("W is not exactly symmetric");
        if (std::abs(diag + offdiag_sum) > 1e-12 * diag) {
            throw std::runtime_error("row " + std::to_string(i) +
                                     " does not sum to zero");
        }
        if (pair.a[i] != diag) {
            throw std::runtime_error("A[i] must equal W[i][i]");
        }
    }
}

double choose_bandwidth(const NeighborGraph& graph) {
    validate_graph(graph);
    std::vector<double> kth(static_cast<std::size_t>(graph.n));
    for (Index i = 0; i < graph.n; ++i) {
        kth[static_cast<std::size_t>(i)] =
            graph.neighbors[static_cast<std::size_t>(i)].back().sq_dist;
    }
    const double t = median(std::move(kth));
    if (!(t > 0.0)) {
        throw std::runtime_error(
            "degenerate geometry: median neighbor distance is zero");
    }
    return t;
}

LaplacianPair build_laplacian(const Matrix& points, const NeighborGraph& graph,
                              double t) {
    if (points.rows() != graph.n) {
        throw std::invalid_argument("graph was not built from this dataset");
    }
    if (!(t > 0.0)) throw std::invalid_argument("bandwidth must be positive");

    const Index n = graph.n;
    const auto adjacency = symmetric_adjacency(graph);

    // Off-diagonal weights, one row at a time. Each row is computed
    // independently, so the values (and the ordered row sums below) are
    // identical for any thread count.
    std::vector<std::vector<std::pair<Index, double>>> rows(
        static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin,
                                                  std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Index vi = static_cast<Index>(i);
            auto& row = rows[i];
            row.reserve(adjacency[i].size());
            for (Index vj : adjacency[i]) {
                const double sq =
                    (points.row(vi) - points.row(vj)).squaredNorm();
                const double expo = sq / t;
                if (expo > kUnderflowExponent) continue;  // weight == +0.0
                row.emplace_back(vj, std::exp(-expo));
            }
        }
    });

    LaplacianPair pair;
    pair.t = t;
    pair.a.resize(n);

    std::vector<Eigen::Triplet<double>> triplets;
    for (Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (row.empty()) {
            throw std::runtime_error(
                "vertex " + std::to_string(i) +
                " lost all edges to weight underflow; bandwidth is too small "
                "for the data scale");
        }
        // Diagonal = sum of the row's weights, accumulated in storage
        // order so the stored row sums back to zero within roundoff.
        double diag = 0.0;
        for (const auto& [j, wgt] : row) {
            diag += wgt;
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                  -wgt);
        }
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
        pair.a[i] = diag;
    }
    pair.w.resize(n, n);
    pair.w.setFromTriplets(triplets.begin(), triplets.end());

    // Components are computed on the kept edges: underflow could in
    // principle split the graph even when the adjacency is connected.
    std::vector<std::vector<Index>> kept(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        for (const auto& [j, wgt] : rows[static_cast<std::size_t>(i)]) {
            kept[static_cast<std::size_t>(i)].push_back(j);
        }
    }
    pair.component = connected_components(kept, pair.component_count);
    if (pair.component_count > 1) {
        pair.warnings.push_back(
            "graph is disconnected: " + std::to_string(pair.component_count) +
            " components; the zero eigenvalue has multiplicity " +
            std::to_string(pair.component_count));
    }
    return pair;
}

void dump_matrix(const SparseMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << "i,j,value\n";
    for (Index r = 0; r < m.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
            out << it.row() << ',' << it.col() << ','
                << format_double(it.value()) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lbs
