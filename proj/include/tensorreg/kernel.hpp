#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace tensorreg {

/// k(x, y) for one of three families:
///   linear      x.y
///   rbf         exp(-|x - y|^2 / (2 sigma^2))
///   polynomial  (x.y + offset)^degree
struct KernelSpec {
    enum class Kind { Linear, Rbf, Polynomial };

    Kind kind = Kind::Linear;
    double sigma = 1.0;
    int degree = 2;
    double offset = 0.0;

    static KernelSpec linear() { return {}; }
    static KernelSpec rbf(double sigma) { return {Kind::Rbf, sigma, 2, 0.0}; }
    static KernelSpec polynomial(int degree, double offset) { return {Kind::Polynomial, 1.0, degree, offset}; }

    /// "linear", "rbf:<sigma>", "poly:<degree>,<offset>". A bare "rbf"
    /// yields sigma = 0, which callers resolve with a bandwidth heuristic.
    static KernelSpec parse(std::string_view text);
    std::string to_string() const;

    /// Throws std::invalid_argument on out-of-range hyperparameters.
    void validate() const;

    double operator()(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) const;

    bool operator==(const KernelSpec&) const = default;
};

/// Gram matrix K_mn = k(x_m, x_n) over the rows of X.
Eigen::MatrixXd gram(const Eigen::MatrixXd& x, const KernelSpec& k);

/// Rows of A against rows of B: out(i, j) = k(a_i, b_j).
Eigen::MatrixXd cross_gram(const KernelSpec& k, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// (k_x)_n = k(x_n, x).
Eigen::VectorXd kernel_vec(const KernelSpec& k, const Eigen::MatrixXd& x_train, const Eigen::VectorXd& x);

/// Median pairwise distance between rows (1 if degenerate).
double median_heuristic_sigma(const Eigen::MatrixXd& x);

}  // namespace tensorreg
