#include "tensorreg/tensor.hpp"

#include "tensorreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tensorreg {

namespace {

void check_shape(const Shape& shape) {
    if (shape.empty()) throw std::invalid_argument("tensor order must be at least 1");
    for (std::size_t d : shape)
        if (d == 0) throw std::invalid_argument("tensor dimensions must be positive, got " + shape_to_string(shape));
}

void check_mode(const DenseTensor& t, std::size_t mode) {
    if (mode >= t.order())
        throw std::invalid_argument("mode " + std::to_string(mode) + " out of range for tensor of order " +
                                    std::to_string(t.order()));
}

// A tensor viewed around one mode as (left, d_n, right) with left = prod_{k<n} d_k.
struct ModeSplit {
    std::size_t left = 1;
    std::size_t dim = 1;
    std::size_t right = 1;
};

ModeSplit split(const Shape& shape, std::size_t mode) {
    ModeSplit s;
    for (std::size_t k = 0; k < mode; ++k) s.left *= shape[k];
    s.dim = shape[mode];
    for (std::size_t k = mode + 1; k < shape.size(); ++k) s.right *= shape[k];
    return s;
}

using ConstBlock = Eigen::Map<const Eigen::MatrixXd>;
using Block = Eigen::Map<Eigen::MatrixXd>;

}  // namespace

std::size_t shape_product(std::span<const std::size_t> shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(std::span<const std::size_t> shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ')';
    return os.str();
}

DenseTensor::DenseTensor() : shape_{1}, data_(1, 0.0) {}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_product(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_product(shape_))
        throw std::invalid_argument("data length " + std::to_string(data_.size()) + " does not match shape " +
                                    shape_to_string(shape_));
}

DenseTensor DenseTensor::from_matrix(const Eigen::MatrixXd& m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    Block(t.data_.data(), m.rows(), m.cols()) = m;
    return t;
}

DenseTensor DenseTensor::from_vector(const Eigen::VectorXd& v) {
    DenseTensor t({static_cast<std::size_t>(v.size())});
    t.vec() = v;
    return t;
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size())
        throw std::invalid_argument("index has " + std::to_string(index.size()) + " entries, tensor order is " +
                                    std::to_string(shape_.size()));
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        if (index[k] >= shape_[k]) throw std::out_of_range("tensor index out of range");
        flat += index[k] * stride;
        stride *= shape_[k];
    }
    return flat;
}

double& DenseTensor::at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }
double DenseTensor::at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

Eigen::Map<const Eigen::VectorXd> DenseTensor::vec() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
}

Eigen::Map<Eigen::VectorXd> DenseTensor::vec() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }

Eigen::MatrixXd DenseTensor::to_matrix() const {
    if (order() != 2) throw std::invalid_argument("to_matrix requires an order-2 tensor, got " + shape_to_string(shape_));
    return ConstBlock(data_.data(), shape_[0], shape_[1]);
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (shape_ != other.shape_) throw std::invalid_argument("shape mismatch in tensor addition");
    vec() += other.vec();
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    if (shape_ != other.shape_) throw std::invalid_argument("shape mismatch in tensor subtraction");
    vec() -= other.vec();
    return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
    vec() *= s;
    return *this;
}

Shape TuckerFactors::dims() const {
    Shape d;
    d.reserve(factors.size());
    for (const auto& u : factors) d.push_back(static_cast<std::size_t>(u.rows()));
    return d;
}

Eigen::MatrixXd matricize(const DenseTensor& t, std::size_t mode) {
    check_mode(t, mode);
    const auto s = split(t.shape(), mode);
    Eigen::MatrixXd out(s.dim, s.left * s.right);
    const double* base = t.data().data();
    for (std::size_t r = 0; r < s.right; ++r) {
        ConstBlock slab(base + r * s.left * s.dim, s.left, s.dim);
        out.middleCols(r * s.left, s.left) = slab.transpose();
    }
    return out;
}

DenseTensor fold(const Eigen::MatrixXd& m, std::size_t mode, Shape shape) {
    DenseTensor t(std::move(shape));
    check_mode(t, mode);
    const auto s = split(t.shape(), mode);
    if (static_cast<std::size_t>(m.rows()) != s.dim || static_cast<std::size_t>(m.cols()) != s.left * s.right)
        throw std::invalid_argument("fold: matrix does not match shape " + shape_to_string(t.shape()));
    double* base = t.data().data();
    for (std::size_t r = 0; r < s.right; ++r) {
        Block slab(base + r * s.left * s.dim, s.left, s.dim);
        slab = m.middleCols(r * s.left, s.left).transpose();
    }
    return t;
}

Eigen::VectorXd vectorize(const DenseTensor& t) { return t.vec(); }

DenseTensor mode_product(const DenseTensor& t, const Eigen::MatrixXd& m, std::size_t mode) {
    check_mode(t, mode);
    const auto s = split(t.shape(), mode);
    if (static_cast<std::size_t>(m.cols()) != s.dim)
        throw std::invalid_argument("mode_product: matrix has " + std::to_string(m.cols()) + " columns, mode " +
                                    std::to_string(mode) + " has dimension " + std::to_string(s.dim));
    Shape out_shape = t.shape();
    out_shape[mode] = static_cast<std::size_t>(m.rows());
    DenseTensor out(out_shape);
    const std::size_t rows = out_shape[mode];
    const double* in = t.data().data();
    double* dst = out.data().data();
    if (s.left == 1) {
        Block(dst, rows, s.right).noalias() = m * ConstBlock(in, s.dim, s.right);
        return out;
    }
    for (std::size_t r = 0; r < s.right; ++r) {
        Block(dst + r * s.left * rows, s.left, rows).noalias() =
            ConstBlock(in + r * s.left * s.dim, s.left, s.dim) * m.transpose();
    }
    return out;
}

DenseTensor mode_vector_product(const DenseTensor& t, const Eigen::VectorXd& v, std::size_t mode) {
    check_mode(t, mode);
    if (static_cast<std::size_t>(v.size()) != t.dim(mode))
        throw std::invalid_argument("mode_vector_product: vector length " + std::to_string(v.size()) +
                                    " does not match mode dimension " + std::to_string(t.dim(mode)));
    DenseTensor p = mode_product(t, v.transpose(), mode);
    Shape shape = t.shape();
    shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(mode));
    if (shape.empty()) shape.push_back(1);
    std::vector<double> data(p.data().begin(), p.data().end());
    return DenseTensor(std::move(shape), std::move(data));
}

Eigen::MatrixXd mode_gram(const DenseTensor& t, std::size_t mode) {
    check_mode(t, mode);
    const auto s = split(t.shape(), mode);
    const double* base = t.data().data();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(s.dim, s.dim);
    if (s.left == 1) {
        ConstBlock a(base, s.dim, s.right);
        g.selfadjointView<Eigen::Lower>().rankUpdate(a);
    } else {
        for (std::size_t r = 0; r < s.right; ++r) {
            ConstBlock slab(base + r * s.left * s.dim, s.left, s.dim);
            g.selfadjointView<Eigen::Lower>().rankUpdate(slab.transpose());
        }
    }
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

double inner(const DenseTensor& s, const DenseTensor& t) {
    if (s.shape() != t.shape())
        throw std::invalid_argument("inner: shape mismatch " + shape_to_string(s.shape()) + " vs " +
                                    shape_to_string(t.shape()));
    return s.vec().dot(t.vec());
}

double frobenius_norm(const DenseTensor& t) { return t.vec().norm(); }

DenseTensor tucker_reconstruct(const TuckerFactors& f) {
    if (f.factors.size() != f.core.order())
        throw std::invalid_argument("tucker_reconstruct: " + std::to_string(f.factors.size()) +
                                    " factors for a core of order " + std::to_string(f.core.order()));
    DenseTensor out = f.core;
    for (std::size_t n = 0; n < f.factors.size(); ++n) {
        if (static_cast<std::size_t>(f.factors[n].cols()) != f.core.dim(n))
            throw std::invalid_argument("tucker_reconstruct: factor " + std::to_string(n) + " has " +
                                        std::to_string(f.factors[n].cols()) + " columns, core dimension is " +
                                        std::to_string(f.core.dim(n)));
        out = mode_product(out, f.factors[n], n);
    }
    return out;
}

Shape multilinear_rank(const DenseTensor& t, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("multilinear_rank: tolerance must be positive");
    Shape ranks(t.order(), 0);
    for (std::size_t n = 0; n < t.order(); ++n) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(matricize(t, n));
        const auto& sv = svd.singularValues();
        if (sv.size() == 0 || sv(0) <= 0) continue;
        const double cut = tol * sv(0);
        ranks[n] = static_cast<std::size_t>((sv.array() > cut).count());
    }
    return ranks;
}

HosvdResult hosvd_truncated(const DenseTensor& t, std::span<const std::size_t> ranks) {
    if (ranks.size() != t.order())
        throw std::invalid_argument("hosvd_truncated: expected " + std::to_string(t.order()) + " ranks, got " +
                                    std::to_string(ranks.size()));
    HosvdResult result;
    DenseTensor core = t;
    for (std::size_t n = 0; n < t.order(); ++n) {
        std::size_t r = ranks[n];
        if (r < 1) throw std::invalid_argument("hosvd_truncated: ranks must be at least 1");
        if (r > t.dim(n)) {
            result.clamped = true;
            result.warnings.push_back("rank " + std::to_string(r) + " for mode " + std::to_string(n) +
                                      " clamped to dimension " + std::to_string(t.dim(n)));
            r = t.dim(n);
        }
        // Full U: the unfolding may have fewer columns than r.
        Eigen::BDCSVD<Eigen::MatrixXd> svd(matricize(t, n), Eigen::ComputeFullU);
        Eigen::MatrixXd u = svd.matrixU().leftCols(static_cast<Eigen::Index>(r));
        canonicalize_signs(u);
        result.tucker.factors.push_back(std::move(u));
    }
    for (std::size_t n = 0; n < t.order(); ++n) core = mode_product(core, result.tucker.factors[n].transpose(), n);
    result.tucker.core = std::move(core);
    return result;
}

DenseTensor permute(const DenseTensor& t, std::span<const std::size_t> order) {
    const std::size_t p = t.order();
    if (order.size() != p) throw std::invalid_argument("permute: order has wrong length");
    std::vector<bool> seen(p, false);
    for (std::size_t k : order) {
        if (k >= p || seen[k]) throw std::invalid_argument("permute: not a permutation");
        seen[k] = true;
    }
    Shape out_shape(p);
    for (std::size_t k = 0; k < p; ++k) out_shape[k] = t.dim(order[k]);
    DenseTensor out(out_shape);

    // Stride in the input buffer of each output mode.
    std::vector<std::size_t> in_stride(p, 1);
    for (std::size_t k = 1; k < p; ++k) in_stride[k] = in_stride[k - 1] * t.dim(k - 1);
    std::vector<std::size_t> stride(p);
    for (std::size_t k = 0; k < p; ++k) stride[k] = in_stride[order[k]];

    std::vector<std::size_t> idx(p, 0);
    std::size_t src = 0;
    auto dst = out.data();
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        dst[flat] = t[src];
        for (std::size_t k = 0; k < p; ++k) {
            if (++idx[k] < out_shape[k]) {
                src += stride[k];
                break;
            }
            src -= stride[k] * (out_shape[k] - 1);
            idx[k] = 0;
        }
    }
    return out;
}

DenseTensor take_rows(const DenseTensor& t, std::span<const std::size_t> rows) {
    if (rows.empty()) throw std::invalid_argument("take_rows: empty row selection");
    const std::size_t n = t.dim(0);
    const std::size_t rest = t.size() / n;
    Shape shape = t.shape();
    shape[0] = rows.size();
    DenseTensor out(shape);
    ConstBlock src(t.data().data(), n, rest);
    Block dst(out.data().data(), rows.size(), rest);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= n) throw std::out_of_range("take_rows: row index out of range");
        dst.row(i) = src.row(rows[i]);
    }
    return out;
}

DenseTensor stack_rows(const Eigen::MatrixXd& flat, std::span<const std::size_t> trailing_shape) {
    Shape shape{static_cast<std::size_t>(flat.rows())};
    shape.insert(shape.end(), trailing_shape.begin(), trailing_shape.end());
    if (shape_product(trailing_shape) != static_cast<std::size_t>(flat.cols()))
        throw std::invalid_argument("stack_rows: column count does not match trailing shape " +
                                    shape_to_string(trailing_shape));
    DenseTensor out(shape);
    Block(out.data().data(), flat.rows(), flat.cols()) = flat;
    return out;
}

}  // namespace tensorreg
