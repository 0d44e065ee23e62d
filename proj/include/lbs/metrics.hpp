#pragma once

#include "lbs/dataset.hpp"

#include <json.hpp>

#include <vector>

namespace lbs {

// Fidelity of a subset S against its source set H. The headline metrics
// (d_kl, d_h, d_cov, rate) are always finite; the log-magnitude
// determinant diagnostics are -infinity when a covariance is singular.
struct MetricReport {
    double d_kl = 0.0;
    double d_h = 0.0;
    double d_cov = 0.0;
    double log_det_h = 0.0;
    double log_det_s = 0.0;
    double rate = 0.0;  // |S| / |H|, in (0, 1]
};

// Throws std::runtime_error when a headline field is non-finite or the
// rate leaves (0, 1].
void validate_report(const MetricReport& report);

nlohmann::json report_to_json(const MetricReport& report);

// Root-sum-square over columns of histogram KL divergences. Per column:
// H's values are mapped to [0, 1] (min -> 0, max -> 1), S's values get the
// same affine map and are clamped; both are histogrammed into `bins` equal
// subintervals; counts become probabilities with additive smoothing
// alpha = 1/(bins * count) per bin (count = that set's own size); the
// divergence uses the natural log. Zero exactly when S == H.
double kl_metric(const DataSet& h, const IndexSubset& s_rows, Index bins = 100);

// One-sided Hausdorff distance: max over H of the Euclidean distance to
// the nearest retained point. One-sided suffices because S is a subset of
// H, so the reverse direction is identically zero. Exact brute force with
// early-termination pruning; parallel over H.
double hausdorff(const DataSet& h, const IndexSubset& s_rows);

struct CovDetResult {
    double d_cov = 0.0;      // |det Cov(H) - det Cov(S)|
    double log_det_h = 0.0;  // log |det Cov(H)|, -inf when singular
    double log_det_s = 0.0;
};

// Population covariance (divisor = point count) of both sets; the
// determinant difference is evaluated through sign/log-magnitude pieces
// of an LU factorization so high-dimensional near-zero determinants do
// not underflow inside the computation. Requires |S| >= 2.
CovDetResult cov_det_metric(const DataSet& h, const IndexSubset& s_rows);

double simplification_rate(const DataSet& h, const IndexSubset& s_rows);

// Divides by the maximum absolute value; an all-zero series is returned
// unchanged. Used to overlay metric curves on a common [0, 1] scale.
std::vector<double> normalize_series(const std::vector<double>& values);

// All metrics in one report. Requires |S| >= 2 (covariance needs it).
MetricReport compute_metrics(const DataSet& h, const IndexSubset& s_rows,
                             Index bins = 100);

}  // namespace lbs
