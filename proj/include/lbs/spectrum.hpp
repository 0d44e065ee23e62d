#pragma once

#include "lbs/laplacian.hpp"

#include <cstdint>
#include <string>

namespace lbs {

// Eigenpairs of the pencil W phi = lambda A phi, smallest first.
// Columns of eigenvectors are A-orthonormal: phi_i' A phi_j = delta_ij.
// Sign convention: each column's largest-magnitude entry is positive.
// Indexing convention: 1-based in all user-facing output, lambda_1 = 0.
struct Spectrum {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // n x m, column i pairs with value i
    std::string normalization = "A-orthonormal";

    // Diagnostics.
    Index kernel_dim = 0;      // eigenvalues reported as exactly 0
    bool dense_fallback = false;
    Index basis_size = 0;      // Krylov basis actually built (0 for dense)

    Index size() const { return static_cast<Index>(eigenvalues.size()); }
};

// Throws std::runtime_error naming the first violated property
// (ordering, A-orthonormality within 1e-8, residual within 1e-8).
void validate_spectrum(const LaplacianPair& pair, const Spectrum& spectrum);

struct SolveOptions {
    // Hard cap on the Krylov basis; 0 picks an automatic cap. When the cap
    // is hit without convergence the solver falls back to the dense path
    // (n <= 2000) or reports which eigenpair stalled.
    Index max_basis = 0;
    double ritz_tol = 1e-11;      // relative Ritz residual target
    std::uint64_t seed = 12345;   // start-vector seed (fixed for determinism)
};

// Lanczos with full reorthogonalization on the symmetric similarity
// C = A^(-1/2) W A^(-1/2). The zero eigenspace (one constant vector per
// connected component) is known analytically and deflated up front, so
// multiplicities at zero come out exact. Requires 1 <= m <= n.
Spectrum solve_spectrum(const LaplacianPair& pair, Index m,
                        const SolveOptions& options = {});

// Full dense eigendecomposition of C, back-mapped to the pencil. Exact
// reference for tests and the fallback path. Requires n <= 2000.
Spectrum dense_oracle(const LaplacianPair& pair);

}  // namespace lbs
