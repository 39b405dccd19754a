#include "tensorreg/regress.hpp"

#include "regress_detail.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace tensorreg {

namespace {

void check_gamma(double gamma) {
    if (!(gamma >= 0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and >= 0");
}

void check_rows(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (x.rows() != y.rows())
        throw std::invalid_argument("inputs have " + std::to_string(x.rows()) + " rows, outputs have " +
                                    std::to_string(y.rows()));
    if (x.rows() == 0) throw std::invalid_argument("empty training set");
}

// Lower Cholesky factor of X^T X + gamma I, or empty when gamma = 0 and the
// normal matrix is numerically singular.
std::optional<Eigen::MatrixXd> normal_factor(const Eigen::MatrixXd& normal, double gamma) {
    try {
        return cholesky_lower(normal, gamma > 0 ? 0.0 : kSingularPivotTolerance);
    } catch (const NotPositiveDefinite&) {
        if (gamma > 0) throw;
        return std::nullopt;
    }
}

Eigen::MatrixXd normal_matrix(const Eigen::MatrixXd& x, double gamma) {
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    normal.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
    normal.diagonal().array() += gamma;
    return normal;
}

Eigen::MatrixXd cholesky_solve(const Eigen::MatrixXd& l, Eigen::MatrixXd b) {
    l.triangularView<Eigen::Lower>().solveInPlace(b);
    l.transpose().triangularView<Eigen::Upper>().solveInPlace(b);
    return b;
}

// Top right singular vectors of C, i.e. top eigenvectors of C^T C.
Eigen::MatrixXd top_right_singular_vectors(const Eigen::MatrixXd& c, std::size_t rank) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinV);
    const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(rank), svd.matrixV().cols());
    Eigen::MatrixXd v = svd.matrixV().leftCols(k);
    canonicalize_signs(v);
    return v;
}

}  // namespace

Eigen::MatrixXd outputs_as_matrix(const DenseTensor& y) {
    const std::size_t n = y.dim(0);
    return Eigen::Map<const Eigen::MatrixXd>(y.data().data(), static_cast<Eigen::Index>(n),
                                             static_cast<Eigen::Index>(y.size() / n));
}

MatrixFit rls_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double gamma) {
    check_gamma(gamma);
    check_rows(x, y);
    MatrixFit fit;
    const Eigen::MatrixXd normal = normal_matrix(x, gamma);
    if (auto l = normal_factor(normal, gamma)) {
        fit.w = cholesky_solve(*l, x.transpose() * y);
    } else {
        fit.warnings.push_back("singular normal matrix at gamma = 0; using pseudo-inverse");
        fit.w = pinv(x) * y;
    }
    return fit;
}

MatrixFit lrr_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::size_t rank, double gamma,
                  LrrSolver solver) {
    check_gamma(gamma);
    check_rows(x, y);
    if (rank < 1) throw std::invalid_argument("LRR rank must be at least 1");
    MatrixFit fit = rls_fit(x, y, gamma);
    if (rank >= static_cast<std::size_t>(y.cols())) return fit;

    Eigen::MatrixXd v;
    if (solver == LrrSolver::DenseEigen) {
        // P Y = X W_RLS for the ridge-hat matrix and for the projector alike.
        const Eigen::MatrixXd yp_y = y.transpose() * (x * fit.w);
        v = sym_eig_top(yp_y, rank).vectors;
    } else {
        const Eigen::MatrixXd normal = normal_matrix(x, gamma);
        Eigen::MatrixXd c;
        if (auto l = normal_factor(normal, gamma)) {
            c = l->triangularView<Eigen::Lower>().solve(x.transpose() * y);
        } else {
            c = x * fit.w;  // P is an orthogonal projector: Y^T P Y = (PY)^T (PY)
        }
        v = top_right_singular_vectors(c, rank);
    }
    fit.w = (fit.w * v) * v.transpose();
    return fit;
}

std::size_t HolrrModel::input_dim() const { return static_cast<std::size_t>(factors.factors.at(0).rows()); }

Shape HolrrModel::output_shape() const {
    Shape s;
    for (std::size_t i = 1; i < factors.factors.size(); ++i) s.push_back(static_cast<std::size_t>(factors.factors[i].rows()));
    return s;
}

HolrrPath::HolrrPath(const Eigen::MatrixXd& x, const DenseTensor& y, double gamma) : gamma_(gamma) {
    check_gamma(gamma);
    n_ = static_cast<std::size_t>(x.rows());
    if (n_ == 0) throw std::invalid_argument("empty training set");
    detail::check_outputs(y, n_);
    output_shape_.assign(y.shape().begin() + 1, y.shape().end());

    normal_ = normal_matrix(x, gamma);
    xty_ = x.transpose() * outputs_as_matrix(y);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    s.selfadjointView<Eigen::Lower>().rankUpdate(xty_);
    s.triangularView<Eigen::StrictlyUpper>() = s.transpose();

    const auto d0 = static_cast<std::size_t>(x.cols());
    if (normal_factor(normal_, gamma)) {
        input_eig_ = gen_sym_eig_top(s, normal_, d0);
    } else {
        warnings_.push_back("singular X^T X at gamma = 0; input factor restricted to the row space of X");
        input_eig_ = gen_sym_eig_top_semidefinite(s, normal_, d0);
    }
    mode_eig_ = detail::output_mode_spectra(y);
}

HolrrModel HolrrPath::fit(std::span<const std::size_t> ranks) const {
    const std::size_t p = output_shape_.size();
    if (ranks.size() != p + 1)
        throw std::invalid_argument("expected " + std::to_string(p + 1) + " ranks (R0..Rp), got " +
                                    std::to_string(ranks.size()));
    HolrrModel model;
    model.gamma = gamma_;
    model.warnings = warnings_;

    const auto d0 = static_cast<std::size_t>(normal_.rows());
    const std::size_t r0_limit = std::min({d0, n_, static_cast<std::size_t>(input_eig_.vectors.cols())});
    const std::size_t r0 = detail::clamp_rank(ranks[0], r0_limit, "rank R0", model.warnings);
    model.ranks.push_back(r0);

    std::vector<Eigen::MatrixXd> out_factors;
    for (std::size_t i = 0; i < p; ++i) {
        const std::size_t ri =
            detail::clamp_rank(ranks[i + 1], output_shape_[i], "rank R" + std::to_string(i + 1), model.warnings);
        model.ranks.push_back(ri);
        out_factors.push_back(mode_eig_[i].vectors.leftCols(static_cast<Eigen::Index>(ri)));
    }

    // Pencil eigenvectors are M-orthonormal; the Tucker factor must be
    // orthonormal. The core below depends on U0 only through its span.
    const Eigen::MatrixXd u0 = orthonormalize(input_eig_.vectors.leftCols(static_cast<Eigen::Index>(r0)));
    const Eigen::MatrixXd reduced = u0.transpose() * normal_ * u0;
    const Eigen::MatrixXd rhs = u0.transpose() * xty_;
    Eigen::MatrixXd core0;
    try {
        core0 = spd_solve(0.5 * (reduced + reduced.transpose()), rhs);
    } catch (const NotPositiveDefinite&) {
        model.warnings.push_back("singular U0^T (X^T X + gamma I) U0; using pseudo-inverse");
        core0 = pinv(reduced) * rhs;
    }

    Shape core_shape{r0};
    core_shape.insert(core_shape.end(), output_shape_.begin(), output_shape_.end());
    DenseTensor core(core_shape, std::vector<double>(core0.data(), core0.data() + core0.size()));
    core = detail::apply_output_factors(std::move(core), out_factors, true);

    model.factors.core = std::move(core);
    model.factors.factors.push_back(u0);
    for (auto& u : out_factors) model.factors.factors.push_back(std::move(u));
    return model;
}

HolrrModel holrr_fit(const RegressionProblem& problem) {
    return HolrrPath(problem.x, problem.y, problem.gamma).fit(problem.ranks);
}

DenseTensor holrr_predict(const HolrrModel& model, const Eigen::VectorXd& x) {
    const auto& u0 = model.factors.factors.at(0);
    if (x.size() != u0.rows())
        throw std::invalid_argument("holrr_predict: input has dimension " + std::to_string(x.size()) + ", expected " +
                                    std::to_string(u0.rows()));
    DenseTensor t = mode_vector_product(model.factors.core, u0.transpose() * x, 0);
    for (std::size_t i = 1; i < model.factors.factors.size(); ++i) t = mode_product(t, model.factors.factors[i], i - 1);
    return t;
}

DenseTensor holrr_predict(const HolrrModel& model, const Eigen::MatrixXd& x) {
    const auto& u0 = model.factors.factors.at(0);
    if (x.cols() != u0.rows())
        throw std::invalid_argument("holrr_predict: inputs have dimension " + std::to_string(x.cols()) +
                                    ", expected " + std::to_string(u0.rows()));
    DenseTensor t = mode_product(model.factors.core, x * u0, 0);
    std::vector<Eigen::MatrixXd> out(model.factors.factors.begin() + 1, model.factors.factors.end());
    return detail::apply_output_factors(std::move(t), out, false);
}

double regression_objective(const DenseTensor& w, const Eigen::MatrixXd& x, const DenseTensor& y, double gamma) {
    const DenseTensor residual = mode_product(w, x, 0) - y;
    const double fit = residual.vec().squaredNorm();
    return fit + gamma * w.vec().squaredNorm();
}

}  // namespace tensorreg
