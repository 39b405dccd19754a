#include "tensorreg/regress.hpp"

#include "regress_detail.hpp"

#include <algorithm>
#include <cmath>

namespace tensorreg {

namespace {

constexpr double kGramRankTolerance = 1e-12;

// Eigendecomposition of a PSD Gram matrix with slightly negative eigenvalues
// clipped to zero; `rank` counts eigenvalues above tol * max.
struct GramSpectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    std::size_t rank = 0;
};

GramSpectrum gram_spectrum(const Eigen::MatrixXd& k) {
    const SymEigResult eig = sym_eig(k);
    GramSpectrum g{eig.values.cwiseMax(0.0), eig.vectors, 0};
    const double top = g.values.size() > 0 ? g.values(0) : 0.0;
    for (Eigen::Index i = 0; i < g.values.size(); ++i)
        if (top > 0 && g.values(i) > kGramRankTolerance * top) ++g.rank;
    return g;
}

void check_gram(const Eigen::MatrixXd& k, Eigen::Index n) {
    if (k.rows() != k.cols()) throw std::invalid_argument("Gram matrix must be square");
    if (k.rows() != n)
        throw std::invalid_argument("Gram matrix is " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                                    " but there are " + std::to_string(n) + " outputs");
}

}  // namespace

Shape KernelHolrrModel::output_shape() const { return Shape(coeff.shape().begin() + 1, coeff.shape().end()); }

KernelHolrrPath::KernelHolrrPath(const Eigen::MatrixXd& k, const DenseTensor& y, double gamma) : gamma_(gamma) {
    if (!(gamma >= 0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and >= 0");
    n_ = y.order() >= 1 ? y.dim(0) : 0;
    detail::check_outputs(y, n_);
    check_gram(k, static_cast<Eigen::Index>(n_));
    output_shape_.assign(y.shape().begin() + 1, y.shape().end());
    k_ = symmetrized(k);
    y0_ = outputs_as_matrix(y);

    // With K = Q L Q^T, the eigenproblem of (K + gI)^{-1} Y Y^T K is similar
    // to the symmetric D Q^T Y Y^T Q D, D = L^{1/2} (L + gI)^{-1/2}; an
    // eigenvector w maps back to alpha = Q T w, T = L^{-1/2} (L + gI)^{-1/2}
    // (pseudo-inverse on the null space of K).
    const GramSpectrum spec = gram_spectrum(k_);
    gram_rank_ = spec.rank;
    if (gram_rank_ < n_) {
        if (gamma == 0.0)
            warnings_.push_back("Gram matrix has rank " + std::to_string(gram_rank_) + " < " + std::to_string(n_) +
                                " at gamma = 0; using pseudo-inverse");
    }
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < gram_rank_; ++i) {
        const double lam = spec.values(static_cast<Eigen::Index>(i));
        d(static_cast<Eigen::Index>(i)) = std::sqrt(lam / (lam + gamma));
        t(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(lam * (lam + gamma));
    }
    const Eigen::MatrixXd c = d.asDiagonal() * (spec.vectors.transpose() * y0_);
    Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(c.rows(), c.rows());
    sym.selfadjointView<Eigen::Lower>().rankUpdate(c);
    sym.triangularView<Eigen::StrictlyUpper>() = sym.transpose();
    SymEigResult eig = sym_eig_top(sym, std::max<std::size_t>(gram_rank_, 1));
    Eigen::MatrixXd alpha = spec.vectors * (t.asDiagonal() * eig.vectors);
    for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
        const double norm = alpha.col(j).norm();
        if (norm > 0) alpha.col(j) /= norm;
    }
    canonicalize_signs(alpha);
    dual_eig_.values = eig.values;
    dual_eig_.vectors = std::move(alpha);
    mode_eig_ = detail::output_mode_spectra(y);
}

KernelHolrrModel KernelHolrrPath::fit(std::span<const std::size_t> ranks, const Eigen::MatrixXd& train_inputs,
                                      const KernelSpec& kernel) const {
    const std::size_t p = output_shape_.size();
    if (ranks.size() != p + 1)
        throw std::invalid_argument("expected " + std::to_string(p + 1) + " ranks (R0..Rp), got " +
                                    std::to_string(ranks.size()));
    if (static_cast<std::size_t>(train_inputs.rows()) != n_)
        throw std::invalid_argument("training inputs do not match the Gram matrix size");
    KernelHolrrModel model;
    model.train_inputs = train_inputs;
    model.kernel = kernel;
    model.gamma = gamma_;
    model.warnings = warnings_;

    const std::size_t r0 = detail::clamp_rank(ranks[0], std::max<std::size_t>(gram_rank_, 1), "rank R0", model.warnings);
    model.ranks.push_back(r0);
    std::vector<Eigen::MatrixXd> out_factors;
    for (std::size_t i = 0; i < p; ++i) {
        const std::size_t ri =
            detail::clamp_rank(ranks[i + 1], output_shape_[i], "rank R" + std::to_string(i + 1), model.warnings);
        model.ranks.push_back(ri);
        out_factors.push_back(mode_eig_[i].vectors.leftCols(static_cast<Eigen::Index>(ri)));
    }

    const Eigen::Index r0i = std::min<Eigen::Index>(static_cast<Eigen::Index>(r0), dual_eig_.vectors.cols());
    model.dual_basis = dual_eig_.vectors.leftCols(r0i);
    model.eigenvalues = dual_eig_.values.head(r0i);
    const Eigen::MatrixXd& a = model.dual_basis;

    // M = (A^T K (K + gI) A)^{-1} A^T K, applied to Y_(0).
    const Eigen::MatrixXd ka = k_ * a;
    Eigen::MatrixXd reduced = ka.transpose() * ka + gamma_ * (ka.transpose() * a);
    reduced = 0.5 * (reduced + reduced.transpose()).eval();
    const Eigen::MatrixXd rhs = ka.transpose() * y0_;
    Eigen::MatrixXd core0;
    try {
        core0 = spd_solve(reduced, rhs);
    } catch (const NotPositiveDefinite&) {
        model.warnings.push_back("singular A^T K (K + gamma I) A; using pseudo-inverse");
        core0 = pinv(reduced) * rhs;
    }

    Shape core_shape{static_cast<std::size_t>(r0i)};
    core_shape.insert(core_shape.end(), output_shape_.begin(), output_shape_.end());
    DenseTensor g(core_shape, std::vector<double>(core0.data(), core0.data() + core0.size()));
    g = detail::apply_output_factors(std::move(g), out_factors, true);
    DenseTensor c = mode_product(g, a, 0);
    model.coeff = detail::apply_output_factors(std::move(c), out_factors, false);
    return model;
}

KernelHolrrModel kholrr_fit(const Eigen::MatrixXd& k, const DenseTensor& y, std::span<const std::size_t> ranks,
                            double gamma, const Eigen::MatrixXd& train_inputs, const KernelSpec& kernel) {
    return KernelHolrrPath(k, y, gamma).fit(ranks, train_inputs, kernel);
}

DenseTensor kholrr_predict(const KernelHolrrModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.train_inputs.cols())
        throw std::invalid_argument("kholrr_predict: input has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(model.train_inputs.cols()));
    return mode_vector_product(model.coeff, kernel_vec(model.kernel, model.train_inputs, x), 0);
}

DenseTensor kholrr_predict(const KernelHolrrModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.train_inputs.cols())
        throw std::invalid_argument("kholrr_predict: inputs have dimension " + std::to_string(x.cols()) +
                                    ", expected " + std::to_string(model.train_inputs.cols()));
    return mode_product(model.coeff, cross_gram(model.kernel, x, model.train_inputs), 0);
}

DualFit krls_fit(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double gamma) {
    if (!(gamma >= 0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and >= 0");
    check_gram(k, y.rows());
    DualFit fit;
    Eigen::MatrixXd reg = symmetrized(k);
    reg.diagonal().array() += gamma;
    try {
        const Eigen::MatrixXd l = cholesky_lower(reg, gamma > 0 ? 0.0 : kSingularPivotTolerance);
        fit.coeff = l.triangularView<Eigen::Lower>().solve(y);
        l.transpose().triangularView<Eigen::Upper>().solveInPlace(fit.coeff);
    } catch (const NotPositiveDefinite&) {
        if (gamma > 0) throw;
        fit.warnings.push_back("singular Gram matrix at gamma = 0; using pseudo-inverse");
        fit.coeff = pinv(reg) * y;
    }
    return fit;
}

DualFit klrr_fit(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, std::size_t rank, double gamma,
                 LrrSolver solver) {
    if (rank < 1) throw std::invalid_argument("LRR rank must be at least 1");
    DualFit fit = krls_fit(k, y, gamma);
    if (rank >= static_cast<std::size_t>(y.cols())) return fit;
    Eigen::MatrixXd v;
    if (solver == LrrSolver::DenseEigen) {
        const Eigen::MatrixXd b = y.transpose() * (k * fit.coeff);
        v = sym_eig_top(b, rank).vectors;
    } else {
        // Y^T K (K + gI)^{-1} Y = C^T C with C = diag(sqrt(l / (l + g))) Q^T Y.
        const GramSpectrum spec = gram_spectrum(symmetrized(k));
        Eigen::VectorXd d = Eigen::VectorXd::Zero(spec.values.size());
        for (std::size_t i = 0; i < spec.rank; ++i) {
            const double lam = spec.values(static_cast<Eigen::Index>(i));
            d(static_cast<Eigen::Index>(i)) = std::sqrt(lam / (lam + gamma));
        }
        const Eigen::MatrixXd c = d.asDiagonal() * (spec.vectors.transpose() * y);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinV);
        v = svd.matrixV().leftCols(std::min<Eigen::Index>(static_cast<Eigen::Index>(rank), svd.matrixV().cols()));
        canonicalize_signs(v);
    }
    fit.coeff = (fit.coeff * v) * v.transpose();
    return fit;
}

}  // namespace tensorreg
