#include "lbs/feature.hpp"

#include "lbs/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace lbs {

namespace {

enum class PointClass : unsigned char { None, Maximum, Minimum };

// Per-point strict-extremum classification over symmetric neighborhoods.
std::vector<PointClass> classify_extrema(
    const ScalarField& field, const std::vector<std::vector<Index>>& adjacency) {
    const Index n = static_cast<Index>(adjacency.size());
    std::vector<PointClass> result(static_cast<std::size_t>(n),
                                   PointClass::None);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin,
                                                  std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double center = field.values[static_cast<Index>(i)];
            bool is_max = true;
            bool is_min = true;
            for (Index j : adjacency[i]) {
                const double other = field.values[j];
                if (other >= center) is_max = false;
                if (other <= center) is_min = false;
                if (!is_max && !is_min) break;
            }
            if (is_max) {
                result[i] = PointClass::Maximum;
            } else if (is_min) {
                result[i] = PointClass::Minimum;
            }
        }
    });
    return result;
}

IndexSubset collect(const std::vector<PointClass>& classes, PointClass want) {
    IndexSubset subset;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] == want) {
            subset.indices.push_back(static_cast<Index>(i));
        }
    }
    return subset;
}

IndexSubset saddles_impl(const ScalarField& field,
                         const std::vector<std::vector<Index>>& adjacency,
                         const std::vector<PointClass>& extrema,
                         const PlanarCoords& coords, Index& dropped_total) {
    const Index n = static_cast<Index>(adjacency.size());
    std::vector<unsigned char> is_saddle(static_cast<std::size_t>(n), 0);
    std::atomic<Index> dropped{0};

    struct RingEntry {
        double angle;
        double sq_dist;
        Index index;
        bool low;  // value(center) >= value(neighbor)
    };

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin,
                                                  std::size_t end) {
        std::vector<RingEntry> ring;
        Index local_dropped = 0;
        for (std::size_t i = begin; i < end; ++i) {
            if (extrema[i] != PointClass::None) continue;
            const Index x = static_cast<Index>(i);
            const double cx = coords.coords(x, 0);
            const double cy = coords.coords(x, 1);
            const double center = field.values[x];

            ring.clear();
            for (Index r : adjacency[i]) {
                const double dx = coords.coords(r, 0) - cx;
                const double dy = coords.coords(r, 1) - cy;
                if (dx == 0.0 && dy == 0.0) {
                    ++local_dropped;  // angle undefined: drop from the ring
                    continue;
                }
                ring.push_back({std::atan2(dy, dx), dx * dx + dy * dy, r,
                                center >= field.values[r]});
            }
            if (ring.size() < 4) continue;  // fewer labels cannot change 4x

            std::sort(ring.begin(), ring.end(),
                      [](const RingEntry& a, const RingEntry& b) {
                          if (a.angle != b.angle) return a.angle < b.angle;
                          if (a.sq_dist != b.sq_dist) {
                              return a.sq_dist < b.sq_dist;
                          }
                          return a.index < b.index;
                      });

            int changes = 0;
            for (std::size_t r = 0; r < ring.size(); ++r) {
                const std::size_t next = (r + 1) % ring.size();
                if (ring[r].low != ring[next].low) ++changes;
            }
            if (changes >= 4) is_saddle[i] = 1;
        }
        dropped.fetch_add(local_dropped, std::memory_order_relaxed);
    });

    dropped_total = dropped.load();
    IndexSubset subset;
    for (std::size_t i = 0; i < is_saddle.size(); ++i) {
        if (is_saddle[i]) subset.indices.push_back(static_cast<Index>(i));
    }
    return subset;
}

void check_shapes(const ScalarField& field, const NeighborGraph& graph) {
    if (field.size() != graph.n) {
        throw std::invalid_argument(
            "field length does not match the graph's point count");
    }
    validate_field(field, graph.n);
}

}  // namespace

void validate_field(const ScalarField& field, Index n) {
    if (field.size() != n) {
        throw std::invalid_argument("field length must match the point count");
    }
    for (Index i = 0; i < n; ++i) {
        if (!std::isfinite(field.values[i])) {
            throw std::invalid_argument("field value at " + std::to_string(i) +
                                        " is not finite");
        }
    }
}

ExtremaResult detect_extrema(const ScalarField& field,
                             const NeighborGraph& graph) {
    check_shapes(field, graph);
    const auto adjacency = symmetric_adjacency(graph);
    const auto classes = classify_extrema(field, adjacency);
    return {collect(classes, PointClass::Maximum),
            collect(classes, PointClass::Minimum)};
}

PlanarCoords embed_2d(const Spectrum& spectrum) {
    if (spectrum.size() < 3) {
        throw std::invalid_argument(
            "planar embedding needs at least 3 eigenpairs, got " +
            std::to_string(spectrum.size()));
    }
    PlanarCoords coords;
    coords.coords.resize(spectrum.eigenvectors.rows(), 2);
    coords.coords.col(0) = spectrum.eigenvectors.col(1);
    coords.coords.col(1) = spectrum.eigenvectors.col(2);
    return coords;
}

IndexSubset detect_saddles(const ScalarField& field, const NeighborGraph& graph,
                           const PlanarCoords& coords,
                           Index* dropped_ring_neighbors) {
    check_shapes(field, graph);
    if (coords.size() != graph.n) {
        throw std::invalid_argument(
            "coords length does not match the graph's point count");
    }
    if (graph.k < 4) {
        throw std::invalid_argument(
            "saddle detection requires at least 4 neighbors per point");
    }
    const auto adjacency = symmetric_adjacency(graph);
    const auto extrema = classify_extrema(field, adjacency);
    Index dropped = 0;
    IndexSubset saddles =
        saddles_impl(field, adjacency, extrema, coords, dropped);
    if (dropped_ring_neighbors) *dropped_ring_neighbors = dropped;
    return saddles;
}

FeatureClassification classify_field(const ScalarField& field,
                                     const NeighborGraph& graph,
                                     const PlanarCoords& coords) {
    check_shapes(field, graph);
    if (coords.size() != graph.n) {
        throw std::invalid_argument(
            "coords length does not match the graph's point count");
    }
    if (graph.k < 4) {
        throw std::invalid_argument(
            "saddle detection requires at least 4 neighbors per point");
    }
    const auto adjacency = symmetric_adjacency(graph);
    const auto classes = classify_extrema(field, adjacency);
    FeatureClassification result;
    result.maxima = collect(classes, PointClass::Maximum);
    result.minima = collect(classes, PointClass::Minimum);
    result.saddles = saddles_impl(field, adjacency, classes, coords,
                                  result.dropped_ring_neighbors);
    return result;
}

}  // namespace lbs
