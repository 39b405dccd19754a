#include "tensorreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace tensorreg {

namespace {

void require_square(const Eigen::MatrixXd& a, const char* what) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(what) + ": matrix must be square, got " + std::to_string(a.rows()) +
                                    "x" + std::to_string(a.cols()));
}

// Reorders ascending eigenpairs (as returned by Eigen) to descending and keeps `count`.
SymEigResult take_top_descending(const Eigen::VectorXd& ascending_values, const Eigen::MatrixXd& ascending_vectors,
                                 std::size_t count) {
    const auto n = static_cast<std::size_t>(ascending_values.size());
    SymEigResult out;
    if (count > n) {
        out.clamped = true;
        count = n;
    }
    const auto k = static_cast<Eigen::Index>(count);
    out.values.resize(k);
    out.vectors.resize(ascending_vectors.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index src = static_cast<Eigen::Index>(n) - 1 - j;
        out.values(j) = ascending_values(src);
        out.vectors.col(j) = ascending_vectors.col(src);
    }
    return out;
}

}  // namespace

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot)
    : std::runtime_error("matrix is not positive definite (non-positive pivot at index " + std::to_string(pivot) +
                         ")"),
      pivot_(pivot) {}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a, double rel_pivot_tol) {
    require_square(a, "cholesky_lower");
    const Eigen::Index n = a.rows();
    const double scale = n > 0 ? a.diagonal().cwiseAbs().maxCoeff() : 0.0;
    const double floor = rel_pivot_tol * scale;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > floor) || !std::isfinite(d)) throw NotPositiveDefinite(static_cast<std::size_t>(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        const Eigen::Index rest = n - j - 1;
        if (rest > 0) {
            l.col(j).tail(rest) =
                (a.col(j).tail(rest) - l.bottomLeftCorner(rest, j) * l.row(j).head(j).transpose()) / ljj;
        }
    }
    return l;
}

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    require_square(a, "spd_solve");
    if (b.rows() != a.rows()) throw std::invalid_argument("spd_solve: right-hand side has wrong row count");
    const Eigen::MatrixXd l = cholesky_lower(a);
    Eigen::MatrixXd x = l.triangularView<Eigen::Lower>().solve(b);
    l.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& s, double rel_tol) {
    require_square(s, "symmetrized");
    if (s.size() == 0) return s;
    const double scale = s.cwiseAbs().maxCoeff();
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > rel_tol * std::max(scale, 1e-300) && asym > 0)
        throw std::invalid_argument("matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    return 0.5 * (s + s.transpose());
}

SymEigResult sym_eig(const Eigen::MatrixXd& s) { return sym_eig_top(s, static_cast<std::size_t>(s.rows())); }

SymEigResult sym_eig_top(const Eigen::MatrixXd& s, std::size_t count) {
    const Eigen::MatrixXd sym = symmetrized(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver did not converge");
    SymEigResult out = take_top_descending(es.eigenvalues(), es.eigenvectors(), count);
    canonicalize_signs(out.vectors);
    return out;
}

SymEigResult gen_sym_eig_top(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m, std::size_t count) {
    require_square(m, "gen_sym_eig_top");
    if (s.rows() != m.rows() || s.cols() != m.cols())
        throw std::invalid_argument("gen_sym_eig_top: S and M must have the same size");
    const Eigen::MatrixXd l = cholesky_lower(symmetrized(m));
    // C = L^{-1} S L^{-T}
    Eigen::MatrixXd c = l.triangularView<Eigen::Lower>().solve(symmetrized(s));
    c = l.triangularView<Eigen::Lower>().solve(c.transpose()).eval();
    c = 0.5 * (c + c.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver did not converge");
    SymEigResult out = take_top_descending(es.eigenvalues(), es.eigenvectors(), count);
    // v = L^{-T} w
    l.transpose().triangularView<Eigen::Upper>().solveInPlace(out.vectors);
    canonicalize_signs(out.vectors);
    return out;
}

SymEigResult gen_sym_eig_top_semidefinite(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m, std::size_t count,
                                          double rel_tol) {
    require_square(m, "gen_sym_eig_top_semidefinite");
    if (s.rows() != m.rows() || s.cols() != m.cols())
        throw std::invalid_argument("gen_sym_eig_top_semidefinite: S and M must have the same size");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> me(symmetrized(m));
    if (me.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver did not converge");
    const Eigen::VectorXd& lam = me.eigenvalues();
    const double top = lam.size() > 0 ? lam.maxCoeff() : 0.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (top > 0 && lam(i) > rel_tol * top) keep.push_back(i);
    const auto r = static_cast<Eigen::Index>(keep.size());
    // T = Q_r diag(lambda_r)^{-1/2}
    Eigen::MatrixXd whiten(m.rows(), r);
    for (Eigen::Index j = 0; j < r; ++j) whiten.col(j) = me.eigenvectors().col(keep[j]) / std::sqrt(lam(keep[j]));
    Eigen::MatrixXd c = whiten.transpose() * symmetrized(s) * whiten;
    c = 0.5 * (c + c.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver did not converge");
    SymEigResult out = take_top_descending(es.eigenvalues(), es.eigenvectors(), count);
    out.vectors = (whiten * out.vectors).eval();
    canonicalize_signs(out.vectors);
    return out;
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& a, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("pinv: tolerance must be positive");
    if (a.size() == 0) return Eigen::MatrixXd(a.cols(), a.rows());
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cut = sv.size() > 0 ? tol * sv(0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut && sv(i) > 0) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

void canonicalize_signs(Eigen::Ref<Eigen::MatrixXd> vectors) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double v = std::abs(vectors(i, j));
            if (v > best_abs) {
                best_abs = v;
                best = i;
            }
        }
        if (vectors.rows() > 0 && vectors(best, j) < 0) vectors.col(j) *= -1.0;
    }
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& v) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), v.cols());
    canonicalize_signs(q);
    return q;
}

}  // namespace tensorreg
