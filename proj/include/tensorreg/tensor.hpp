#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tensorreg {

using Shape = std::vector<std::size_t>;

/// Dense order-p tensor of doubles.
///
/// Storage is column-major in the multi-index: the first index varies
/// fastest, so the flat buffer is exactly vec(T) = vec(T_(1)) and the
/// mode-1 unfolding is a reinterpretation of memory. Modes are 0-based
/// throughout the API.
class DenseTensor {
public:
    /// Order-1 tensor holding a single zero.
    DenseTensor();
    /// Zero tensor of the given shape.
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> data);

    static DenseTensor from_matrix(const Eigen::MatrixXd& m);
    static DenseTensor from_vector(const Eigen::VectorXd& v);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t mode) const { return shape_.at(mode); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    double operator[](std::size_t flat) const { return data_[flat]; }
    double& operator[](std::size_t flat) { return data_[flat]; }

    double& at(std::span<const std::size_t> index);
    double at(std::span<const std::size_t> index) const;
    double& at(std::initializer_list<std::size_t> index) { return at(std::span(index.begin(), index.size())); }
    double at(std::initializer_list<std::size_t> index) const { return at(std::span(index.begin(), index.size())); }

    std::size_t flat_index(std::span<const std::size_t> index) const;

    /// Zero-copy view of vec(T).
    Eigen::Map<const Eigen::VectorXd> vec() const;
    Eigen::Map<Eigen::VectorXd> vec();

    /// Order-2 tensor as a matrix (rows = dim 0).
    Eigen::MatrixXd to_matrix() const;

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(double s);

    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
    friend DenseTensor operator*(DenseTensor a, double s) { return a *= s; }
    friend DenseTensor operator*(double s, DenseTensor a) { return a *= s; }

    bool operator==(const DenseTensor&) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

std::size_t shape_product(std::span<const std::size_t> shape);
std::string shape_to_string(std::span<const std::size_t> shape);

/// Core tensor plus one factor per mode: T = G x_1 U_1 ... x_p U_p.
struct TuckerFactors {
    DenseTensor core;
    std::vector<Eigen::MatrixXd> factors;

    Shape ranks() const { return core.shape(); }
    Shape dims() const;
};

struct HosvdResult {
    TuckerFactors tucker;
    /// Set when a requested rank exceeded its dimension and was clamped.
    bool clamped = false;
    std::vector<std::string> warnings;
};

/// Mode-n unfolding, Kolda-Bader column order (lower modes vary fastest).
Eigen::MatrixXd matricize(const DenseTensor& t, std::size_t mode);

/// Inverse of matricize for a tensor of the given shape.
DenseTensor fold(const Eigen::MatrixXd& m, std::size_t mode, Shape shape);

Eigen::VectorXd vectorize(const DenseTensor& t);

/// T x_n M, defined by (T x_n M)_(n) = M T_(n).
DenseTensor mode_product(const DenseTensor& t, const Eigen::MatrixXd& m, std::size_t mode);

/// T x_n v^T with the singleton mode dropped. An order-1 input yields shape {1}.
DenseTensor mode_vector_product(const DenseTensor& t, const Eigen::VectorXd& v, std::size_t mode);

/// T_(n) T_(n)^T without materializing the unfolding.
Eigen::MatrixXd mode_gram(const DenseTensor& t, std::size_t mode);

double inner(const DenseTensor& s, const DenseTensor& t);
double frobenius_norm(const DenseTensor& t);

DenseTensor tucker_reconstruct(const TuckerFactors& f);

inline constexpr double kDefaultRankTolerance = 1e-9;

/// Number of singular values of each unfolding above tol * largest.
Shape multilinear_rank(const DenseTensor& t, double tol = kDefaultRankTolerance);

HosvdResult hosvd_truncated(const DenseTensor& t, std::span<const std::size_t> ranks);

/// Axis permutation: result mode k is input mode order[k].
DenseTensor permute(const DenseTensor& t, std::span<const std::size_t> order);

/// Sub-tensor made of the given indices along mode 0, in that order.
DenseTensor take_rows(const DenseTensor& t, std::span<const std::size_t> rows);

/// Same shape with dim 0 replaced by `rows`, from a rows x prod(rest) matrix.
DenseTensor stack_rows(const Eigen::MatrixXd& flat, std::span<const std::size_t> trailing_shape);

}  // namespace tensorreg
