#pragma once

#include "lbs/dataset.hpp"

#include <Eigen/Core>

#include <vector>

namespace lbs {

// Linear DR model: orthonormal components of the mean-centered data,
// strongest direction first. Sign convention matches the eigensolver:
// each component's largest-magnitude loading is positive.
struct PcaModel {
    Eigen::VectorXd mean;        // d
    Eigen::MatrixXd components;  // d x p, orthonormal columns
    Eigen::VectorXd explained;   // p variances, descending, >= 0
};

// Throws std::runtime_error when orthonormality (1e-10) or the explained-
// variance ordering is violated.
void validate_model(const PcaModel& model);

// Principal components via an eigendecomposition of whichever symmetric
// matrix is smaller: the d x d covariance when d <= n, else the n x n
// Gram matrix of the centered rows (identical spectra; the Gram route
// recovers components as X' u / sqrt(n mu)). Population normalization
// (divisor n) throughout. Requires 1 <= p <= min(n-1, d). Directions
// beyond the data's rank get zero variance and arbitrary-but-orthonormal
// components.
PcaModel pca_fit(const Matrix& points, Index p);

// (points - mean) * components. The same linear map serves in-sample and
// out-of-sample points. Parallelizes across rows; requires matching d.
Matrix pca_project(const PcaModel& model, const Matrix& points);

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    Index count = 0;
};

struct CorrespondenceResult {
    std::vector<double> distances;  // per row, after alignment
    std::vector<HistogramBin> histogram;
};

// Per-row Euclidean distance between two coordinate sets after aligning b
// onto a with the best orthogonal transform (rotation or reflection --
// orthogonal Procrustes on the centered coordinates). Centering absorbs
// translations; the transform absorbs basis sign/rotation ambiguity, so
// the distances measure structural disagreement only.
CorrespondenceResult correspondence_error(const Matrix& a, const Matrix& b,
                                          Index bins = 50);

}  // namespace lbs
