#include "lbs/simplify.hpp"

#include "lbs/knn.hpp"
#include "lbs/laplacian.hpp"
#include "metrics_internal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace lbs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Per-step metric evaluation with the H-side work (column normalization,
// H histograms, H covariance determinant) hoisted out of the loop. The
// per-call operations are the same ones compute_metrics performs, so the
// reports are identical to calling it step by step.
class CachedMetrics {
  public:
    CachedMetrics(const DataSet& h, Index bins)
        : h_(h), bins_(bins), normalized_(normalize_columns(h)) {
        const Index d = h.dim();
        h_hist_.resize(static_cast<std::size_t>(d));
        std::vector<double> column(static_cast<std::size_t>(h.size()));
        for (Index c = 0; c < d; ++c) {
            for (Index r = 0; r < h.size(); ++r) {
                column[static_cast<std::size_t>(r)] =
                    normalized_.data.points(r, c);
            }
            h_hist_[static_cast<std::size_t>(c)] =
                detail::smoothed_histogram(column, bins_);
        }
        h_log_det_ = detail::cov_log_det(h.points);
    }

    MetricReport evaluate(const IndexSubset& s_rows) const {
        Matrix s_norm = apply_column_ranges(select_rows(h_.points, s_rows),
                                            normalized_.ranges);
        s_norm = s_norm.cwiseMax(0.0).cwiseMin(1.0);

        double sum_sq = 0.0;
        std::vector<double> s_col(static_cast<std::size_t>(s_rows.size()));
        for (Index c = 0; c < h_.dim(); ++c) {
            for (Index r = 0; r < s_rows.size(); ++r) {
                s_col[static_cast<std::size_t>(r)] = s_norm(r, c);
            }
            const double div = detail::kl_divergence(
                h_hist_[static_cast<std::size_t>(c)],
                detail::smoothed_histogram(s_col, bins_));
            sum_sq += div * div;
        }

        MetricReport report;
        report.d_kl = std::sqrt(sum_sq);
        report.d_h = hausdorff(h_, s_rows);
        const auto [sign_s, log_s] =
            detail::cov_log_det(select_rows(h_.points, s_rows));
        report.d_cov = detail::stable_abs_diff(h_log_det_.first,
                                               h_log_det_.second, sign_s,
                                               log_s);
        report.log_det_h = h_log_det_.second;
        report.log_det_s = log_s;
        report.rate = simplification_rate(h_, s_rows);
        validate_report(report);
        return report;
    }

  private:
    const DataSet& h_;
    Index bins_;
    NormalizedData normalized_;
    std::vector<std::vector<double>> h_hist_;
    std::pair<double, double> h_log_det_;
};

bool stop_satisfied(const StopRule& stop, const SimplificationStep& step) {
    switch (stop.kind) {
        case StopRule::Kind::Budget:
            return false;  // runs to the eigenvector budget
        case StopRule::Kind::Rate:
            return static_cast<bool>(step.metrics) &&
                   step.metrics->rate >= stop.threshold;
        case StopRule::Kind::DKl:
            return static_cast<bool>(step.metrics) &&
                   step.metrics->d_kl <= stop.threshold;
        case StopRule::Kind::DH:
            return static_cast<bool>(step.metrics) &&
                   step.metrics->d_h <= stop.threshold;
    }
    return false;
}

}  // namespace

void validate_config(const SimplificationConfig& config) {
    if (config.k < 4) {
        throw std::invalid_argument(
            "neighbor count must be >= 4 (the saddle test needs 4 ring "
            "labels)");
    }
    if (config.max_eigenvectors < 1) {
        throw std::invalid_argument("eigenvector budget must be >= 1");
    }
    if (config.stop.kind != StopRule::Kind::Budget &&
        !(config.stop.threshold > 0.0)) {
        throw std::invalid_argument("stop threshold must be positive");
    }
    if (config.kl_bins < 1) {
        throw std::invalid_argument("histogram bin count must be >= 1");
    }
}

SimplificationResult simplify(const DataSet& data,
                              const SimplificationConfig& config) {
    validate_dataset(data);
    validate_config(config);
    if (data.size() < config.k + 1) {
        throw std::invalid_argument(
            "need at least k+1 points, got " + std::to_string(data.size()) +
            " for k = " + std::to_string(config.k));
    }

    SimplificationResult result;

    auto stage_start = Clock::now();
    const NeighborGraph graph = build_knn(data.points, config.k);
    result.timings.knn_seconds = seconds_since(stage_start);

    stage_start = Clock::now();
    const double t = config.bandwidth > 0.0 ? config.bandwidth
                                            : choose_bandwidth(graph);
    const LaplacianPair pair = build_laplacian(data.points, graph, t);
    for (const auto& w : pair.warnings) result.warnings.push_back(w);

    // One extra pair covers the skipped constant phi_1; the floor of 3
    // guarantees the (phi_2, phi_3) plane for saddle rings exists.
    Index budget = config.max_eigenvectors;
    if (budget + 1 > data.size()) {
        budget = data.size() - 1;
        result.warnings.push_back(
            "eigenvector budget clipped to " + std::to_string(budget) +
            " (dataset has only " + std::to_string(data.size()) + " points)");
    }
    const Index m_solve = std::max<Index>(budget + 1, 3);
    const Spectrum spectrum = solve_spectrum(pair, m_solve);
    result.eigenvalues = spectrum.eigenvalues;
    result.timings.eigen_seconds = seconds_since(stage_start);

    stage_start = Clock::now();
    const PlanarCoords plane = embed_2d(spectrum);
    const CachedMetrics metrics(data, config.kl_bins);

    std::vector<unsigned char> member(static_cast<std::size_t>(data.size()),
                                      0);
    IndexSubset cumulative;
    Index dropped_ring_total = 0;
    bool stopped = false;

    for (Index i = 2; i <= budget + 1; ++i) {
        ScalarField field{spectrum.eigenvectors.col(i - 1)};
        FeatureClassification features = classify_field(field, graph, plane);
        dropped_ring_total += features.dropped_ring_neighbors;

        for (const IndexSubset* part :
             {&features.maxima, &features.minima, &features.saddles}) {
            for (Index idx : part->indices) {
                if (!member[static_cast<std::size_t>(idx)]) {
                    member[static_cast<std::size_t>(idx)] = 1;
                    cumulative.indices.push_back(idx);
                }
            }
        }
        std::sort(cumulative.indices.begin(), cumulative.indices.end());

        SimplificationStep step;
        step.eigenvector_index = i;
        step.cumulative = cumulative;
        if (cumulative.size() >= 2) {
            step.metrics = metrics.evaluate(cumulative);
        }
        result.steps.push_back(std::move(step));

        if (stop_satisfied(config.stop, result.steps.back())) {
            stopped = true;
            break;
        }
    }
    result.timings.simplification_seconds = seconds_since(stage_start);

    if (dropped_ring_total > 0) {
        result.warnings.push_back(
            std::to_string(dropped_ring_total) +
            " ring neighbors dropped (coincident planar coordinates)");
    }
    result.budget_exhausted =
        !stopped && config.stop.kind != StopRule::Kind::Budget;
    return result;
}

ScalarField hks_diag(const Spectrum& spectrum, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("time must be positive");
    const Index n = spectrum.eigenvectors.rows();
    ScalarField field;
    field.values = Eigen::VectorXd::Zero(n);
    for (Index i = 0; i < spectrum.size(); ++i) {
        const double decay =
            std::exp(-spectrum.eigenvalues[static_cast<std::size_t>(i)] * t);
        field.values.array() +=
            decay * spectrum.eigenvectors.col(i).array().square();
    }
    return field;
}

}  // namespace lbs
