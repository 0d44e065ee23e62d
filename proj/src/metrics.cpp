#include "lbs/metrics.hpp"

#include "lbs/parallel.hpp"
#include "metrics_internal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace lbs {

namespace detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::vector<double> smoothed_histogram(const std::vector<double>& values,
                                       Index bins) {
    std::vector<double> prob(static_cast<std::size_t>(bins), 0.0);
    for (double v : values) {
        Index b = static_cast<Index>(v * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        if (b < 0) b = 0;
        prob[static_cast<std::size_t>(b)] += 1.0;
    }
    const double count = static_cast<double>(values.size());
    const double alpha = 1.0 / (static_cast<double>(bins) * count);
    const double total = count + static_cast<double>(bins) * alpha;
    for (double& p : prob) p = (p + alpha) / total;
    return prob;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sum += p[i] * std::log(p[i] / q[i]);
    }
    return sum;
}

std::pair<double, double> cov_log_det(const Matrix& points) {
    const Index n = points.rows();
    const Index d = points.cols();
    const Eigen::RowVectorXd mean = points.colwise().mean();
    const Matrix centered = points.rowwise() - mean;
    Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(n);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(cov);
    double sign = lu.permutationP().determinant() > 0 ? 1.0 : -1.0;
    double log_mag = 0.0;
    for (Index i = 0; i < d; ++i) {
        const double u = lu.matrixLU()(i, i);
        if (u == 0.0) return {0.0, -kInf};
        if (u < 0.0) sign = -sign;
        log_mag += std::log(std::abs(u));
    }
    return {sign, log_mag};
}

double stable_abs_diff(double s1, double l1, double s2, double l2) {
    if (s1 == 0.0 && s2 == 0.0) return 0.0;
    if (s1 == 0.0) return std::exp(l2);
    if (s2 == 0.0) return std::exp(l1);
    const double top = std::max(l1, l2);
    return std::exp(top) *
           std::abs(s1 * std::exp(l1 - top) - s2 * std::exp(l2 - top));
}

}  // namespace detail

namespace {

using detail::kl_divergence;
using detail::smoothed_histogram;

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_subset_arg(const DataSet& h, const IndexSubset& s_rows,
                      Index min_size) {
    validate_dataset(h);
    validate_subset(s_rows, h.size());
    if (s_rows.size() < min_size) {
        throw std::invalid_argument("subset must contain at least " +
                                    std::to_string(min_size) + " points");
    }
}

}  // namespace

void validate_report(const MetricReport& report) {
    const auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
    if (bad(report.d_kl)) throw std::runtime_error("d_kl must be finite, >= 0");
    if (bad(report.d_h)) throw std::runtime_error("d_h must be finite, >= 0");
    if (bad(report.d_cov)) {
        throw std::runtime_error("d_cov must be finite, >= 0");
    }
    if (!(report.rate > 0.0) || report.rate > 1.0) {
        throw std::runtime_error("rate must lie in (0, 1]");
    }
    if (std::isnan(report.log_det_h) || std::isnan(report.log_det_s)) {
        throw std::runtime_error("log determinants must not be NaN");
    }
}

nlohmann::json report_to_json(const MetricReport& report) {
    const auto log_field = [](double v) -> nlohmann::json {
        // JSON has no infinity literal; singular covariances serialize as
        // a string sentinel.
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return v;
    };
    return nlohmann::json{{"d_kl", report.d_kl},
                          {"d_h", report.d_h},
                          {"d_cov", report.d_cov},
                          {"log_det_h", log_field(report.log_det_h)},
                          {"log_det_s", log_field(report.log_det_s)},
                          {"rate", report.rate}};
}

double kl_metric(const DataSet& h, const IndexSubset& s_rows, Index bins) {
    check_subset_arg(h, s_rows, 1);
    if (bins < 1) throw std::invalid_argument("bin count must be >= 1");

    const Index d = h.dim();
    const NormalizedData normalized = normalize_columns(h);
    Matrix s_norm = apply_column_ranges(select_rows(h.points, s_rows),
                                        normalized.ranges);
    // S is a subset of H so clamping is a no-op here; it keeps the
    // operation well-defined for general second arguments.
    s_norm = s_norm.cwiseMax(0.0).cwiseMin(1.0);

    std::vector<double> per_column(static_cast<std::size_t>(d), 0.0);
    parallel_for(static_cast<std::size_t>(d), [&](std::size_t begin,
                                                  std::size_t end) {
        std::vector<double> h_col(static_cast<std::size_t>(h.size()));
        std::vector<double> s_col(static_cast<std::size_t>(s_rows.size()));
        for (std::size_t c = begin; c < end; ++c) {
            const Index col = static_cast<Index>(c);
            for (Index r = 0; r < h.size(); ++r) {
                h_col[static_cast<std::size_t>(r)] =
                    normalized.data.points(r, col);
            }
            for (Index r = 0; r < s_rows.size(); ++r) {
                s_col[static_cast<std::size_t>(r)] = s_norm(r, col);
            }
            per_column[c] = kl_divergence(smoothed_histogram(h_col, bins),
                                          smoothed_histogram(s_col, bins));
        }
    });

    double sum_sq = 0.0;
    for (double v : per_column) sum_sq += v * v;
    return std::sqrt(sum_sq);
}

double hausdorff(const DataSet& h, const IndexSubset& s_rows) {
    check_subset_arg(h, s_rows, 1);
    const Index n = h.size();
    const Matrix s_points = select_rows(h.points, s_rows);

    std::vector<unsigned char> in_subset(static_cast<std::size_t>(n), 0);
    for (Index i : s_rows.indices) in_subset[static_cast<std::size_t>(i)] = 1;

    std::atomic<double> max_sq{0.0};
    const auto raise_to = [&max_sq](double candidate) {
        double seen = max_sq.load(std::memory_order_relaxed);
        while (candidate > seen &&
               !max_sq.compare_exchange_weak(seen, candidate)) {
        }
    };

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin,
                                                  std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (in_subset[i]) continue;  // distance 0, cannot raise the max
            const auto row = h.points.row(static_cast<Index>(i));
            double best = kInf;
            bool pruned = false;
            for (Index j = 0; j < s_points.rows(); ++j) {
                const double sq = (row - s_points.row(j)).squaredNorm();
                if (sq < best) {
                    best = sq;
                    // Once this point's nearest distance falls under the
                    // current maximum it can no longer define the result.
                    if (best <= max_sq.load(std::memory_order_relaxed)) {
                        pruned = true;
                        break;
                    }
                }
            }
            if (!pruned) raise_to(best);
        }
    });
    return std::sqrt(max_sq.load());
}

CovDetResult cov_det_metric(const DataSet& h, const IndexSubset& s_rows) {
    check_subset_arg(h, s_rows, 2);
    const auto [sign_h, log_h] = detail::cov_log_det(h.points);
    const auto [sign_s, log_s] =
        detail::cov_log_det(select_rows(h.points, s_rows));
    CovDetResult result;
    result.d_cov = detail::stable_abs_diff(sign_h, log_h, sign_s, log_s);
    result.log_det_h = log_h;
    result.log_det_s = log_s;
    return result;
}

double simplification_rate(const DataSet& h, const IndexSubset& s_rows) {
    validate_dataset(h);
    validate_subset(s_rows, h.size());
    return static_cast<double>(s_rows.size()) /
           static_cast<double>(h.size());
}

std::vector<double> normalize_series(const std::vector<double>& values) {
    if (values.empty()) {
        throw std::invalid_argument("series must be non-empty");
    }
    double max_abs = 0.0;
    for (double v : values) max_abs = std::max(max_abs, std::abs(v));
    std::vector<double> result(values.size(), 0.0);
    if (max_abs == 0.0) return result;
    for (std::size_t i = 0; i < values.size(); ++i) {
        result[i] = values[i] / max_abs;
    }
    return result;
}

MetricReport compute_metrics(const DataSet& h, const IndexSubset& s_rows,
                             Index bins) {
    MetricReport report;
    report.d_kl = kl_metric(h, s_rows, bins);
    report.d_h = hausdorff(h, s_rows);
    const CovDetResult cov = cov_det_metric(h, s_rows);
    report.d_cov = cov.d_cov;
    report.log_det_h = cov.log_det_h;
    report.log_det_s = cov.log_det_s;
    report.rate = simplification_rate(h, s_rows);
    validate_report(report);
    return report;
}

}  // namespace lbs
