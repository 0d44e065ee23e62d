#include "lbs/pca.hpp"

#include "lbs/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lbs {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void fix_sign(Eigen::Ref<VectorXd> v) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    if (v[best] < 0.0) v = -v;
}

// Replaces near-null columns (rank-deficient directions) with vectors
// completing an orthonormal set, so the model's orthonormality invariant
// holds even when p exceeds the data's rank.
void complete_basis(MatrixXd& components, Index first_bad) {
    const Index d = components.rows();
    Index next_axis = 0;
    for (Index c = first_bad; c < components.cols(); ++c) {
        while (true) {
            if (next_axis >= d) {
                throw std::runtime_error(
                    "cannot complete an orthonormal basis");
            }
            VectorXd candidate = VectorXd::Zero(d);
            candidate[next_axis++] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                candidate.noalias() -=
                    components.leftCols(c) *
                    (components.leftCols(c).transpose() * candidate);
            }
            const double norm = candidate.norm();
            if (norm > 1e-6) {
                components.col(c) = candidate / norm;
                break;
            }
        }
    }
}

}  // namespace

void validate_model(const PcaModel& model) {
    const Index p = model.components.cols();
    if (p < 1 || model.mean.size() != model.components.rows() ||
        model.explained.size() != p) {
        throw std::runtime_error("model shape mismatch");
    }
    const MatrixXd gram =
        model.components.transpose() * model.components;
    if ((gram - MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::runtime_error("components are not orthonormal");
    }
    for (Index i = 0; i < p; ++i) {
        if (model.explained[i] < 0.0) {
            throw std::runtime_error("explained variances must be >= 0");
        }
        if (i > 0 && model.explained[i] > model.explained[i - 1]) {
            throw std::runtime_error(
                "explained variances must be descending");
        }
    }
}

PcaModel pca_fit(const Matrix& points, Index p) {
    const Index n = points.rows();
    const Index d = points.cols();
    if (n < 2) throw std::invalid_argument("need at least 2 points");
    if (p < 1 || p > std::min(n - 1, d)) {
        throw std::invalid_argument(
            "component count must be between 1 and min(n-1, d)");
    }

    PcaModel model;
    model.mean = points.colwise().mean().transpose();
    const Matrix centered = points.rowwise() - model.mean.transpose();

    model.components.resize(d, p);
    model.explained.resize(p);
    Index rank_limit = p;  // first column that fell below the rank

    if (d <= n) {
        MatrixXd cov = MatrixXd::Zero(d, d);
        cov.selfadjointView<Eigen::Lower>().rankUpdate(
            centered.transpose(), 1.0 / static_cast<double>(n));
        Eigen::SelfAdjointEigenSolver<MatrixXd> solver(cov);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("covariance eigendecomposition failed");
        }
        for (Index i = 0; i < p; ++i) {
            // Eigen returns ascending order; take from the top.
            model.explained[i] =
                std::max(0.0, solver.eigenvalues()[d - 1 - i]);
            model.components.col(i) = solver.eigenvectors().col(d - 1 - i);
        }
    } else {
        // Gram route: the n x n matrix has the same nonzero spectrum, and
        // X' u / sqrt(n mu) maps its eigenvectors to unit components.
        MatrixXd gram = MatrixXd::Zero(n, n);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(
            centered, 1.0 / static_cast<double>(n));
        Eigen::SelfAdjointEigenSolver<MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("gram eigendecomposition failed");
        }
        const double mu_max = std::max(0.0, solver.eigenvalues()[n - 1]);
        const double null_cutoff = 1e-12 * std::max(1.0, mu_max);
        for (Index i = 0; i < p; ++i) {
            const double mu = std::max(0.0, solver.eigenvalues()[n - 1 - i]);
            model.explained[i] = mu;
            if (mu <= null_cutoff) {
                rank_limit = std::min(rank_limit, i);
                model.explained[i] = 0.0;
                continue;
            }
            model.components.col(i) =
                centered.transpose() * solver.eigenvectors().col(n - 1 - i) /
                std::sqrt(static_cast<double>(n) * mu);
        }
        // The mapped vectors are orthonormal only up to roundoff amplified
        // by mu_max/mu; one Gram-Schmidt sweep restores machine-precision
        // orthonormality without visibly moving well-conditioned columns.
        for (Index c = 0; c < rank_limit; ++c) {
            VectorXd v = model.components.col(c);
            for (int pass = 0; pass < 2; ++pass) {
                if (c > 0) {
                    v.noalias() -= model.components.leftCols(c) *
                                   (model.components.leftCols(c).transpose() *
                                    v);
                }
            }
            const double norm = v.norm();
            if (norm < 1e-8) {
                // Numerically dependent on earlier columns: rank ends here.
                for (Index z = c; z < p; ++z) model.explained[z] = 0.0;
                rank_limit = c;
                break;
            }
            model.components.col(c) = v / norm;
        }
        if (rank_limit < p) complete_basis(model.components, rank_limit);
    }

    for (Index i = 0; i < p; ++i) fix_sign(model.components.col(i));
    return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& points) {
    if (points.cols() != model.components.rows()) {
        throw std::invalid_argument(
            "points have dimension " + std::to_string(points.cols()) +
            " but the model was fit on dimension " +
            std::to_string(model.components.rows()));
    }
    const Index n = points.rows();
    const Index p = model.components.cols();
    Matrix out(n, p);
    const Eigen::RowVectorXd mean = model.mean.transpose();
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin,
                                                  std::size_t end) {
        const Index lo = static_cast<Index>(begin);
        const Index count = static_cast<Index>(end - begin);
        out.middleRows(lo, count).noalias() =
            (points.middleRows(lo, count).rowwise() - mean) *
            model.components;
    });
    return out;
}

CorrespondenceResult correspondence_error(const Matrix& a, const Matrix& b,
                                          Index bins) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("coordinate sets must have equal shapes");
    }
    if (a.rows() == 0) throw std::invalid_argument("empty coordinates");
    if (bins < 1) throw std::invalid_argument("bin count must be >= 1");

    const Eigen::RowVectorXd mean_a = a.colwise().mean();
    const Eigen::RowVectorXd mean_b = b.colwise().mean();
    const Matrix ca = a.rowwise() - mean_a;
    const Matrix cb = b.rowwise() - mean_b;

    // Best orthogonal Q (reflections allowed) minimizing ||ca - cb Q||_F.
    const MatrixXd cross = cb.transpose() * ca;
    Eigen::JacobiSVD<MatrixXd> svd(cross,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
    const Matrix aligned = cb * q;

    CorrespondenceResult result;
    result.distances.resize(static_cast<std::size_t>(a.rows()));
    double max_dist = 0.0;
    for (Index i = 0; i < a.rows(); ++i) {
        const double dist = (ca.row(i) - aligned.row(i)).norm();
        result.distances[static_cast<std::size_t>(i)] = dist;
        max_dist = std::max(max_dist, dist);
    }

    const double width =
        max_dist > 0.0 ? max_dist / static_cast<double>(bins) : 1.0;
    result.histogram.resize(static_cast<std::size_t>(bins));
    for (Index b_i = 0; b_i < bins; ++b_i) {
        auto& bin = result.histogram[static_cast<std::size_t>(b_i)];
        bin.low = static_cast<double>(b_i) * width;
        bin.high = static_cast<double>(b_i + 1) * width;
        bin.count = 0;
    }
    for (double dist : result.distances) {
        Index b_i = static_cast<Index>(dist / width);
        if (b_i >= bins) b_i = bins - 1;
        ++result.histogram[static_cast<std::size_t>(b_i)].count;
    }
    return result;
}

}  // namespace lbs
