#pragma once

#include "lbs/dataset.hpp"
#include "lbs/feature.hpp"
#include "lbs/metrics.hpp"
#include "lbs/spectrum.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lbs {

// When to stop consuming eigenvectors. Budget means "use all of them".
struct StopRule {
    enum class Kind { Budget, Rate, DKl, DH };
    Kind kind = Kind::Budget;
    double threshold = 0.0;  // meaning depends on kind; must be > 0
};

struct SimplificationConfig {
    Index k = 10;             // neighbor count (>= 4: saddle test needs it)
    double bandwidth = 0.0;   // > 0 explicit; <= 0 selects automatically
    Index max_eigenvectors = 30;  // non-constant eigenvectors to consume
    StopRule stop;
    Index kl_bins = 100;
};

void validate_config(const SimplificationConfig& config);

// One pipeline step: the feature points of eigenvector phi_i merged into
// everything collected so far. Metrics appear once the cumulative subset
// has at least 2 points (the covariance metric needs that many).
struct SimplificationStep {
    Index eigenvector_index = 0;  // 1-based; phi_1 is the skipped constant
    IndexSubset cumulative;
    std::optional<MetricReport> metrics;
};

struct StageTimings {
    double knn_seconds = 0.0;
    double eigen_seconds = 0.0;
    double simplification_seconds = 0.0;
};

struct SimplificationResult {
    std::vector<SimplificationStep> steps;
    std::vector<double> eigenvalues;  // spectrum actually used
    std::vector<std::string> warnings;
    bool budget_exhausted = false;  // threshold stop never triggered
    StageTimings timings;
};

// Full pipeline: neighbor graph, bandwidth, Laplacian, spectrum, then one
// step per eigenvector phi_2..phi_(m+1): strict extrema and saddles of the
// eigenvector join the cumulative subset, metrics are evaluated, and the
// stop rule is consulted. phi_1 is constant on each component and is
// skipped -- a constant field has no strict extrema. The 2D plane for
// saddle rings comes from (phi_2, phi_3) once and is reused for all steps.
// Requires n >= k+1.
SimplificationResult simplify(const DataSet& data,
                              const SimplificationConfig& config);

// Heat-trace diagonal truncated to the available eigenpairs:
// value[x] = sum_i exp(-lambda_i * t) * phi_i(x)^2. Requires t > 0.
ScalarField hks_diag(const Spectrum& spectrum, double t);

}  // namespace lbs
