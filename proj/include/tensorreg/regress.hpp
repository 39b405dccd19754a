#pragma once

#include "tensorreg/kernel.hpp"
#include "tensorreg/linalg.hpp"
#include "tensorreg/tensor.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace tensorreg {

inline constexpr double kDefaultGamma = 1e-3;

/// Relative Cholesky pivot below which an unregularized normal matrix is
/// treated as singular and the pseudo-inverse route is taken.
inline constexpr double kSingularPivotTolerance = 1e-12;

using Warnings = std::vector<std::string>;

/// Inputs X (N x d0), outputs Y (N x d1 x ... x dp, samples stacked along
/// mode 0), ridge weight and target multilinear rank (R0, ..., Rp).
struct RegressionProblem {
    Eigen::MatrixXd x;
    DenseTensor y;
    double gamma = kDefaultGamma;
    Shape ranks;
};

/// N x (d1...dp) matrix whose row n is vec(Y^(n)).
Eigen::MatrixXd outputs_as_matrix(const DenseTensor& y);

// ---------------------------------------------------------------------------
// Vector-output baselines on flattened outputs.

struct MatrixFit {
    Eigen::MatrixXd w;
    Warnings warnings;
};

/// W = (X^T X + gamma I)^{-1} X^T Y. At gamma = 0 a singular normal matrix
/// falls back to pinv(X) Y.
MatrixFit rls_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double gamma);

enum class LrrSolver {
    /// Eigendecomposition of the p x p matrix Y^T P Y.
    DenseEigen,
    /// Same eigenvectors from the thin SVD of a factor C with C^T C = Y^T P Y.
    Factored,
};

/// W = W_RLS V V^T with V the top-R eigenvectors of Y^T P Y, P the ridge-hat
/// matrix X (X^T X + gamma I)^{-1} X^T (the orthogonal projector at gamma = 0).
MatrixFit lrr_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::size_t rank, double gamma,
                  LrrSolver solver = LrrSolver::DenseEigen);

// ---------------------------------------------------------------------------
// Higher-order low-rank regression.

struct HolrrModel {
    /// W = core x_0 U0 x_1 U1 ... x_p Up, all factors orthonormal.
    TuckerFactors factors;
    double gamma = 0.0;
    /// Effective ranks after clamping.
    Shape ranks;
    Warnings warnings;

    std::size_t input_dim() const;
    Shape output_shape() const;
    DenseTensor weights() const { return tucker_reconstruct(factors); }
};

/// Spectral quantities of one (X, Y, gamma) triple; fits for any rank tuple
/// reuse them, so sweeping ranks costs only the core computation.
class HolrrPath {
public:
    HolrrPath(const Eigen::MatrixXd& x, const DenseTensor& y, double gamma);

    HolrrModel fit(std::span<const std::size_t> ranks) const;

    std::size_t sample_count() const { return n_; }
    const Eigen::VectorXd& input_eigenvalues() const { return input_eig_.values; }

private:
    std::size_t n_ = 0;
    double gamma_ = 0.0;
    Shape output_shape_;
    Eigen::MatrixXd normal_;  // X^T X + gamma I
    Eigen::MatrixXd xty_;     // X^T Y_(0)
    SymEigResult input_eig_;  // pencil (X^T Y Y^T X, X^T X + gamma I)
    std::vector<SymEigResult> mode_eig_;
    Warnings warnings_;
};

HolrrModel holrr_fit(const RegressionProblem& problem);

DenseTensor holrr_predict(const HolrrModel& model, const Eigen::VectorXd& x);
/// Row-wise predictions stacked along mode 0.
DenseTensor holrr_predict(const HolrrModel& model, const Eigen::MatrixXd& x);

/// ||W x_0 X - Y||_F^2 + gamma ||W||_F^2.
double regression_objective(const DenseTensor& w, const Eigen::MatrixXd& x, const DenseTensor& y, double gamma);

// ---------------------------------------------------------------------------
// Kernel methods.

struct KernelHolrrModel {
    /// C (N x d1 x ... x dp); predictions are C x_0 k_x.
    DenseTensor coeff;
    Eigen::MatrixXd train_inputs;
    KernelSpec kernel;
    double gamma = 0.0;
    Shape ranks;
    /// Unit-norm eigenvectors A of (K + gamma I)^{-1} Y_(0) Y_(0)^T K and their eigenvalues.
    Eigen::MatrixXd dual_basis;
    Eigen::VectorXd eigenvalues;
    Warnings warnings;

    Shape output_shape() const;
};

class KernelHolrrPath {
public:
    KernelHolrrPath(const Eigen::MatrixXd& k, const DenseTensor& y, double gamma);

    KernelHolrrModel fit(std::span<const std::size_t> ranks, const Eigen::MatrixXd& train_inputs,
                         const KernelSpec& kernel) const;

private:
    std::size_t n_ = 0;
    double gamma_ = 0.0;
    Shape output_shape_;
    Eigen::MatrixXd k_;
    Eigen::MatrixXd y0_;  // Y_(0), N x P
    SymEigResult dual_eig_;
    std::size_t gram_rank_ = 0;
    std::vector<SymEigResult> mode_eig_;
    Warnings warnings_;
};

KernelHolrrModel kholrr_fit(const Eigen::MatrixXd& k, const DenseTensor& y, std::span<const std::size_t> ranks,
                            double gamma, const Eigen::MatrixXd& train_inputs, const KernelSpec& kernel);

DenseTensor kholrr_predict(const KernelHolrrModel& model, const Eigen::VectorXd& x);
DenseTensor kholrr_predict(const KernelHolrrModel& model, const Eigen::MatrixXd& x);

struct DualFit {
    Eigen::MatrixXd coeff;
    Warnings warnings;
};

/// (K + gamma I)^{-1} Y.
DualFit krls_fit(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double gamma);

/// Kernel RLS coefficients post-multiplied by V V^T, V the top-R
/// eigenvectors of Y^T K (K + gamma I)^{-1} Y.
DualFit klrr_fit(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, std::size_t rank, double gamma,
                 LrrSolver solver = LrrSolver::DenseEigen);

}  // namespace tensorreg
