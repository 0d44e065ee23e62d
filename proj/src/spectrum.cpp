#include "lbs/spectrum.hpp"

#include "lbs/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace lbs {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Ref that also binds columns of row-major matrices (inner stride != 1).
using ColumnRef = Eigen::Ref<VectorXd, 0, Eigen::InnerStride<>>;

// Makes the entry of largest absolute value positive (ties: lowest index).
void fix_sign(ColumnRef v) {
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

// y -> A^(-1/2) W A^(-1/2) y, row-parallel and deterministic: each output
// entry is one ordered sparse dot product regardless of thread count.
class SymmetricOperator {
  public:
    explicit SymmetricOperator(const LaplacianPair& pair)
        : w_(pair.w), inv_sqrt_a_(pair.a.array().rsqrt()) {}

    VectorXd apply(const VectorXd& y) const {
        VectorXd scaled = inv_sqrt_a_.cwiseProduct(y);
        VectorXd out(y.size());
        parallel_for(static_cast<std::size_t>(y.size()),
                     [&](std::size_t begin, std::size_t end) {
                         for (std::size_t r = begin; r < end; ++r) {
                             double acc = 0.0;
                             for (SparseMatrix::InnerIterator it(
                                      w_, static_cast<Index>(r));
                                  it; ++it) {
                                 acc += it.value() * scaled[it.col()];
                             }
                             out[static_cast<Index>(r)] = acc;
                         }
                     });
        return inv_sqrt_a_.cwiseProduct(out);
    }

  private:
    const SparseMatrix& w_;
    VectorXd inv_sqrt_a_;
};

// Unit-norm basis of C's kernel: per component, sqrt(a_i) on the component
// and 0 elsewhere. Columns are exactly orthonormal (disjoint supports).
MatrixXd kernel_basis(const LaplacianPair& pair) {
    const Index n = pair.size();
    MatrixXd basis = MatrixXd::Zero(n, pair.component_count);
    VectorXd mass = VectorXd::Zero(pair.component_count);
    for (Index i = 0; i < n; ++i) {
        mass[pair.component[static_cast<std::size_t>(i)]] += pair.a[i];
    }
    for (Index i = 0; i < n; ++i) {
        const Index c = pair.component[static_cast<std::size_t>(i)];
        basis(i, c) = std::sqrt(pair.a[i] / mass[c]);
    }
    return basis;
}

// Two-pass classical Gram-Schmidt of v against the columns of each basis
// block; returns the final norm of v.
double orthogonalize(VectorXd& v, const MatrixXd& kernel,
                     const MatrixXd& basis, Index basis_cols) {
    for (int pass = 0; pass < 2; ++pass) {
        if (kernel.cols() > 0) {
            v.noalias() -= kernel * (kernel.transpose() * v);
        }
        if (basis_cols > 0) {
            auto used = basis.leftCols(basis_cols);
            v.noalias() -= used * (used.transpose() * v);
        }
    }
    return v.norm();
}

struct RitzPair {
    double value = 0.0;
    double residual = 0.0;  // |beta_p| * |last component|
    VectorXd coeffs;        // in the Lanczos basis
};

// Eigen-decomposes the tridiagonal built so far and returns all Ritz pairs,
// values ascending.
std::vector<RitzPair> ritz_pairs(const std::vector<double>& alpha,
                                 const std::vector<double>& beta,
                                 double next_beta) {
    const Index p = static_cast<Index>(alpha.size());
    MatrixXd t = MatrixXd::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < p) {
            t(i, i + 1) = beta[static_cast<std::size_t>(i)];
            t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(t);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("tridiagonal eigendecomposition failed");
    }
    std::vector<RitzPair> pairs(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) {
        auto& pr = pairs[static_cast<std::size_t>(i)];
        pr.value = solver.eigenvalues()[i];
        pr.coeffs = solver.eigenvectors().col(i);
        pr.residual = std::abs(next_beta) * std::abs(pr.coeffs[p - 1]);
    }
    return pairs;
}

Spectrum assemble(const LaplacianPair& pair, Index m, const MatrixXd& kernel,
                  const std::vector<double>& nonzero_values,
                  const MatrixXd& nonzero_vectors_y) {
    const Index n = pair.size();
    const Index c = std::min<Index>(m, kernel.cols());

    // Candidate list: exact zeros for the kernel, then the computed
    // nonzero pairs. A final stable sort guarantees ascending order even
    // if roundoff nudged a computed value a hair below zero.
    std::vector<double> values(static_cast<std::size_t>(c), 0.0);
    for (double v : nonzero_values) values.push_back(v);
    MatrixXd vectors_phi(n, m);
    const VectorXd inv_sqrt_a = pair.a.array().rsqrt();

    // Kernel columns analytically: the pencil eigenvector of component c is
    // the constant 1/sqrt(mass(c)) on the component and 0 elsewhere. Going
    // through A^(-1/2) per entry instead would smear the constant by a few
    // ulps, and downstream feature detection is strict enough to notice.
    VectorXd mass = VectorXd::Zero(pair.component_count);
    for (Index i = 0; i < n; ++i) {
        mass[pair.component[static_cast<std::size_t>(i)]] += pair.a[i];
    }
    for (Index col = 0; col < c; ++col) {
        const double level = 1.0 / std::sqrt(mass[col]);
        for (Index i = 0; i < n; ++i) {
            vectors_phi(i, col) =
                pair.component[static_cast<std::size_t>(i)] == col ? level
                                                                   : 0.0;
        }
    }
    for (Index i = 0; i < nonzero_vectors_y.cols(); ++i) {
        vectors_phi.col(c + i) =
            inv_sqrt_a.cwiseProduct(nonzero_vectors_y.col(i));
    }

    std::vector<Index> order(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return values[static_cast<std::size_t>(a)] <
               values[static_cast<std::size_t>(b)];
    });

    Spectrum spectrum;
    spectrum.kernel_dim = c;
    spectrum.eigenvalues.resize(static_cast<std::size_t>(m));
    spectrum.eigenvectors.resize(n, m);
    for (Index i = 0; i < m; ++i) {
        const Index src = order[static_cast<std::size_t>(i)];
        spectrum.eigenvalues[static_cast<std::size_t>(i)] =
            values[static_cast<std::size_t>(src)];
        spectrum.eigenvectors.col(i) = vectors_phi.col(src);
        fix_sign(spectrum.eigenvectors.col(i));
    }
    return spectrum;
}

// Largest residual ratio ||W phi - lambda A phi|| / ||A phi|| over columns.
double worst_pencil_residual(const LaplacianPair& pair,
                             const Spectrum& spectrum) {
    double worst = 0.0;
    for (Index i = 0; i < spectrum.size(); ++i) {
        const VectorXd phi = spectrum.eigenvectors.col(i);
        const VectorXd a_phi = pair.a.cwiseProduct(phi);
        const double num =
            (pair.w * phi -
             spectrum.eigenvalues[static_cast<std::size_t>(i)] * a_phi)
                .norm();
        const double den = a_phi.norm();
        worst = std::max(worst, num / den);
    }
    return worst;
}

Spectrum dense_solve(const LaplacianPair& pair, Index m) {
    const Index n = pair.size();
    if (n > 2000) {
        throw std::runtime_error(
            "dense eigendecomposition limited to 2000 points, got " +
            std::to_string(n));
    }
    const VectorXd inv_sqrt_a = pair.a.array().rsqrt();
    MatrixXd c_dense = MatrixXd::Zero(n, n);
    for (Index r = 0; r < n; ++r) {
        for (SparseMatrix::InnerIterator it(pair.w, r); it; ++it) {
            c_dense(it.row(), it.col()) =
                it.value() * inv_sqrt_a[it.row()] * inv_sqrt_a[it.col()];
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(c_dense);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("dense eigendecomposition failed");
    }
    Spectrum spectrum;
    spectrum.eigenvalues.assign(solver.eigenvalues().data(),
                                solver.eigenvalues().data() + m);
    spectrum.eigenvectors.resize(n, m);
    for (Index i = 0; i < m; ++i) {
        spectrum.eigenvectors.col(i) =
            inv_sqrt_a.cwiseProduct(solver.eigenvectors().col(i));
        fix_sign(spectrum.eigenvectors.col(i));
    }
    // Eigenvalues within roundoff of zero ARE the kernel; count them so
    // callers see the same diagnostics on both solve paths.
    const double snap = 1e-12 * std::max(1.0, std::abs(spectrum.eigenvalues.back()));
    Index kd = 0;
    while (kd < m &&
           std::abs(spectrum.eigenvalues[static_cast<std::size_t>(kd)]) <= snap) {
        ++kd;
    }
    spectrum.kernel_dim = kd;
    spectrum.dense_fallback = true;
    return spectrum;
}

}  // namespace

void validate_spectrum(const LaplacianPair& pair, const Spectrum& spectrum) {
    const Index m = spectrum.size();
    if (m == 0) throw std::runtime_error("spectrum is empty");
    if (spectrum.eigenvectors.rows() != pair.size() ||
        spectrum.eigenvectors.cols() != m) {
        throw std::runtime_error("eigenvector shape mismatch");
    }
    const double scale =
        std::max(1e-300, std::abs(spectrum.eigenvalues.back()));
    for (Index i = 0; i < m; ++i) {
        const double v = spectrum.eigenvalues[static_cast<std::size_t>(i)];
        if (v < -1e-10 * scale) {
            throw std::runtime_error("eigenvalue " + std::to_string(i) +
                                     " is negative beyond tolerance");
        }
        if (i > 0 && v < spectrum.eigenvalues[static_cast<std::size_t>(i - 1)]) {
            throw std::runtime_error("eigenvalues are not ascending");
        }
    }
    for (Index i = 0; i < m; ++i) {
        const VectorXd a_phi_i =
            pair.a.cwiseProduct(spectrum.eigenvectors.col(i));
        for (Index j = i; j < m; ++j) {
            const double dot = spectrum.eigenvectors.col(j).dot(a_phi_i);
            const double want = (i == j) ? 1.0 : 0.0;
            if (std::abs(dot - want) > 1e-8) {
                throw std::runtime_error(
                    "eigenvectors are not A-orthonormal at (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
    if (worst_pencil_residual(pair, spectrum) > 1e-8) {
        throw std::runtime_error("pencil residual exceeds tolerance");
    }
}

Spectrum solve_spectrum(const LaplacianPair& pair, Index m,
                        const SolveOptions& options) {
    const Index n = pair.size();
    if (m < 1 || m > n) {
        throw std::invalid_argument(
            "eigenpair count must be between 1 and the point count");
    }

    const MatrixXd kernel = kernel_basis(pair);
    const Index c = kernel.cols();
    const Index want = m - std::min<Index>(m, c);  // nonzero pairs needed

    if (want == 0) {
        return assemble(pair, m, kernel, {}, MatrixXd(n, 0));
    }

    const Index free_dim = n - c;  // dimension orthogonal to the kernel
    Index cap = options.max_basis > 0 ? std::min(options.max_basis, free_dim)
                                      : free_dim;
    if (options.max_basis == 0 && n > 2400) {
        // Larger problems pack the low end of the spectrum tighter, so the
        // automatic budget grows with both the request and the matrix size.
        const Index floor_cap = std::max<Index>(600, n / 4);
        cap = std::min<Index>(free_dim,
                              std::max<Index>(10 * want + 200, floor_cap));
    }
    if (cap < want) cap = std::min(free_dim, want);

    SymmetricOperator op(pair);
    std::mt19937_64 engine(options.seed);
    auto random_vector = [&engine, n]() {
        VectorXd v(n);
        for (Index i = 0; i < n; ++i) {
            // 53-bit uniform in [-1, 1), explicit transform for stability
            // across standard libraries.
            v[i] = 2.0 * (static_cast<double>(engine() >> 11) * 0x1.0p-53) -
                   1.0;
        }
        return v;
    };

    MatrixXd basis(n, cap);  // Lanczos vectors, grown column by column
    std::vector<double> alpha, beta;
    alpha.reserve(static_cast<std::size_t>(cap));
    beta.reserve(static_cast<std::size_t>(cap));

    // Start vector: random, orthogonal to the kernel.
    {
        VectorXd v = random_vector();
        double norm = orthogonalize(v, kernel, basis, 0);
        int attempts = 0;
        while (norm < 1e-8 && ++attempts < 64) {
            v = random_vector();
            norm = orthogonalize(v, kernel, basis, 0);
        }
        if (norm < 1e-8) {
            throw std::runtime_error("cannot find a start vector outside the "
                                     "kernel");
        }
        basis.col(0) = v / norm;
    }

    Index built = 1;          // Lanczos vectors available
    double pending_beta = 0;  // beta connecting to the (unbuilt) next vector
    Index target = std::min<Index>(cap, std::max<Index>(2 * want + 16, 40));

    while (true) {
        // Extend the factorization up to the current target size.
        while (built <= target) {
            const Index j = built - 1;  // index of the newest basis vector
            VectorXd u = op.apply(basis.col(j));
            if (j > 0) u.noalias() -= beta.back() * basis.col(j - 1);
            const double a_j = basis.col(j).dot(u);
            u.noalias() -= a_j * basis.col(j);
            alpha.push_back(a_j);
            double norm = orthogonalize(u, kernel, basis, built);
            if (built == cap) {
                pending_beta = norm;  // residual link past the cap
                ++built;              // mark factorization complete
                break;
            }
            if (norm < 1e-13) {
                // Invariant subspace found; continue in a fresh direction.
                VectorXd v = random_vector();
                norm = orthogonalize(v, kernel, basis, built);
                int attempts = 0;
                while (norm < 1e-8 && ++attempts < 64) {
                    v = random_vector();
                    norm = orthogonalize(v, kernel, basis, built);
                }
                if (norm < 1e-8) {
                    // Space exhausted: the factorization is exact.
                    pending_beta = 0.0;
                    ++built;
                    break;
                }
                beta.push_back(0.0);
                basis.col(built) = v / norm;
            } else {
                beta.push_back(norm);
                basis.col(built) = u / norm;
            }
            ++built;
            pending_beta = -1.0;  // factorization still open
        }

        const Index p = static_cast<Index>(alpha.size());
        const bool complete = p == cap || pending_beta == 0.0;
        const double link = complete ? (p == cap ? pending_beta : 0.0)
                                     : beta.back();
        // When the factorization is open, the last computed beta links
        // basis vector p-1 to p; Ritz residuals use it. To test at size p
        // we drop the trailing beta from the tridiagonal.
        std::vector<double> beta_view = beta;
        if (!complete) beta_view.resize(static_cast<std::size_t>(p - 1));
        auto pairs = ritz_pairs(alpha, beta_view, link);
        const Index avail =
            std::min<Index>(want, static_cast<Index>(pairs.size()));

        bool converged = avail == want;
        for (Index i = 0; i < avail && converged; ++i) {
            const auto& pr = pairs[static_cast<std::size_t>(i)];
            if (pr.residual >
                options.ritz_tol * std::max(1.0, std::abs(pr.value))) {
                converged = false;
            }
        }

        if (converged) {
            MatrixXd vectors_y(n, want);
            std::vector<double> values(static_cast<std::size_t>(want));
            for (Index i = 0; i < want; ++i) {
                const auto& pr = pairs[static_cast<std::size_t>(i)];
                values[static_cast<std::size_t>(i)] = pr.value;
                VectorXd y = basis.leftCols(p) * pr.coeffs;
                y /= y.norm();
                vectors_y.col(i) = y;
            }
            Spectrum spectrum =
                assemble(pair, m, kernel, values, vectors_y);
            spectrum.basis_size = p;
            // The Ritz test bounds the residual in the transformed space;
            // confirm the pencil-space requirement directly.
            if (worst_pencil_residual(pair, spectrum) <= 1e-8) {
                return spectrum;
            }
            converged = false;  // keep iterating with a larger basis
        }

        if (!converged && complete) {
            // Cap reached without meeting tolerance.
            if (n <= 2000) {
                Spectrum spectrum = dense_solve(pair, m);
                spectrum.basis_size = p;
                return spectrum;
            }
            Index stalled = c + avail;
            for (Index i = 0; i < avail; ++i) {
                const auto& pr = pairs[static_cast<std::size_t>(i)];
                if (pr.residual >
                    options.ritz_tol * std::max(1.0, std::abs(pr.value))) {
                    stalled = c + i;
                    break;
                }
            }
            throw std::runtime_error(
                "eigensolver did not converge for eigenpair " +
                std::to_string(stalled + 1) + " after a basis of " +
                std::to_string(p) + " vectors");
        }

        target = std::min<Index>(
            cap, static_cast<Index>(static_cast<double>(target) * 1.6) + 8);
    }
}

Spectrum dense_oracle(const LaplacianPair& pair) {
    return dense_solve(pair, pair.size());
}

}  // namespace lbs
