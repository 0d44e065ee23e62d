#pragma once

#include "lbs/knn.hpp"
#include "lbs/spectrum.hpp"

#include <Eigen/Core>

namespace lbs {

// A scalar value per point of the referenced dataset; all finite.
struct ScalarField {
    Eigen::VectorXd values;

    Index size() const { return values.size(); }
};

void validate_field(const ScalarField& field, Index n);

// 2D coordinates per point, used to order a point's neighbors by angle.
struct PlanarCoords {
    Eigen::Matrix<double, Eigen::Dynamic, 2> coords;

    Index size() const { return coords.rows(); }
};

// Per-field feature points. The three sets are pairwise disjoint.
struct FeatureClassification {
    IndexSubset maxima;
    IndexSubset minima;
    IndexSubset saddles;

    // Neighbors dropped from saddle rings because they project onto the
    // exact same 2D coordinates as the center (angle undefined).
    Index dropped_ring_neighbors = 0;
};

struct ExtremaResult {
    IndexSubset maxima;
    IndexSubset minima;
};

// Strict local extrema over the symmetric neighborhood: x is a maximum iff
// every symmetric neighbor has a strictly smaller value (minimum: strictly
// larger). Ties disqualify, so constant regions produce no extrema.
ExtremaResult detect_extrema(const ScalarField& field,
                             const NeighborGraph& graph);

// The plane the one-rings are ordered in: columns 2 and 3 of the spectrum
// (the first two non-constant eigenvectors). Requires >= 3 eigenpairs.
PlanarCoords embed_2d(const Spectrum& spectrum);

// One-ring sign-change test. For each point, its symmetric neighbors are
// ordered counter-clockwise by atan2 around the point's 2D coordinates
// (ties: ascending squared planar distance, then index; coincident
// projections are dropped and counted). Each ring neighbor r is labeled
// "low" when value(x) >= value(r), else "high"; a point is a saddle iff
// the cyclic label sequence changes at least 4 times and the point is not
// itself a strict extremum. Requires k >= 4.
IndexSubset detect_saddles(const ScalarField& field, const NeighborGraph& graph,
                           const PlanarCoords& coords,
                           Index* dropped_ring_neighbors = nullptr);

// Extrema plus saddles in one pass over shared intermediates.
FeatureClassification classify_field(const ScalarField& field,
                                     const NeighborGraph& graph,
                                     const PlanarCoords& coords);

}  // namespace lbs
