#pragma once

#include <cstddef>
#include <optional>

#include "specstream/tensor.hpp"

namespace specstream {

// Full symmetric eigendecomposition, eigenvalues descending.
struct EigenDecomp {
    Vector values;   // descending
    Matrix vectors;  // dim x dim, column j pairs with values[j]

    Vector vector(std::size_t j) const { return vectors.column(j); }
};

// Cyclic Jacobi sweeps until the off-diagonal Frobenius mass drops below
// tol * max(1, ||M||_F); capped at 100 sweeps, after which a
// ConvergenceError carrying the residual is thrown. Eigenvector sign
// convention: the largest-magnitude entry of each column is positive.
EigenDecomp sym_eig(const SymMatrix& m, double tol = 1e-12);

// Whitening map built from the top-K eigenpairs of a second-moment matrix:
// w = u * diag(a)^(-1/2), so that w^T M2 w = I_K when M2 has rank >= K.
struct Whitener {
    Matrix w;  // d x K
    Matrix u;  // d x K orthonormal columns
    Vector a;  // K positive eigenvalues, descending

    std::size_t vocab_dim() const { return w.rows(); }
    std::size_t rank() const { return w.cols(); }

    // w^T e_word, i.e. word's row of w. The whitened embedding of a word is
    // a row lookup, never a matrix product.
    std::span<const double> whitened_word(std::size_t word) const { return w.row(word); }
};

// eps_rank is the absolute eigenvalue threshold separating signal from
// floating-point noise; when omitted it defaults to 1e-9 * (largest
// eigenvalue). Fewer than k eigenvalues above the threshold raises
// RankDeficiencyError carrying the usable count.
//
// Caveat: when m2 has (near-)repeated eigenvalues the eigenvector basis of
// the tied block is not unique, so the whitener is only determined up to a
// rotation of that block; downstream recovery is unaffected on exact
// moments but tied priors make per-run whiteners differ.
Whitener build_whitener(const SymMatrix& m2, std::size_t k,
                        std::optional<double> eps_rank = std::nullopt);

// lambda * (w^T)^+ v. Since u has orthonormal columns, the pseudoinverse is
// exact: (w^T)^+ = u * diag(a)^(1/2), and w^T (w^T)^+ = I_K.
Vector unwhiten(const Whitener& wh, std::span<const double> v, double lambda);

}  // namespace specstream
