#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>

namespace tensorreg {

/// Eigenpairs sorted by descending eigenvalue; column j of `vectors`
/// belongs to values(j). The largest-magnitude entry of every column is
/// positive (first such entry on ties).
struct SymEigResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    /// Requested count exceeded the available dimension and was reduced.
    bool clamped = false;
};

class NotPositiveDefinite : public std::runtime_error {
public:
    explicit NotPositiveDefinite(std::size_t pivot);
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

/// Lower Cholesky factor. A pivot must exceed rel_pivot_tol * max|diag(A)|.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a, double rel_pivot_tol = 0.0);

/// Solves A X = B for symmetric positive-definite A.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

SymEigResult sym_eig(const Eigen::MatrixXd& s);
SymEigResult sym_eig_top(const Eigen::MatrixXd& s, std::size_t count);

/// Top pencil eigenpairs of S v = lambda M v (S symmetric, M positive
/// definite) by Cholesky whitening. Vectors are M-orthonormal.
SymEigResult gen_sym_eig_top(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m, std::size_t count);

/// Same pencil for positive semi-definite M: solves pinv(M) S v = lambda v
/// restricted to range(M). Directions with eigenvalue below
/// rel_tol * max eig(M) are discarded, and `count` is clamped to the
/// remaining rank.
SymEigResult gen_sym_eig_top_semidefinite(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m,
                                          std::size_t count, double rel_tol = 1e-12);

inline constexpr double kDefaultPinvTolerance = 1e-10;

/// Moore-Penrose pseudo-inverse; singular values below tol * sigma_max are dropped.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& a, double tol = kDefaultPinvTolerance);

/// Flips column signs so the largest-magnitude entry of each column is positive.
void canonicalize_signs(Eigen::Ref<Eigen::MatrixXd> vectors);

/// Orthonormal basis of span(V) via thin Householder QR, sign-canonicalized.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& v);

/// Symmetric part, after checking asymmetry is within rel_tol * ||S||_max.
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& s, double rel_tol = 1e-8);

}  // namespace tensorreg
