#pragma once

// Shared between metrics.cpp and the simplifier's cached evaluator, which
// reuses the H-side intermediates across pipeline steps. Not installed.

#include "lbs/dataset.hpp"

#include <utility>
#include <vector>

namespace lbs::detail {

// Histogram over [0, 1] (values exactly 1 land in the last bin), counts
// smoothed by alpha = 1/(bins * count) per bin, then renormalized.
std::vector<double> smoothed_histogram(const std::vector<double>& values,
                                       Index bins);

// Natural-log KL divergence of two strictly positive distributions.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);

// Signed log-magnitude of det(Cov(points)), population normalization.
// Returns (sign in {-1, 0, +1}, log |det|); log is -inf when sign is 0.
std::pair<double, double> cov_log_det(const Matrix& points);

// |s1 * exp(l1) - s2 * exp(l2)| without materializing the exponents.
double stable_abs_diff(double s1, double l1, double s2, double l2);

}  // namespace lbs::detail
