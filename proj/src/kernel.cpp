#include "tensorreg/kernel.hpp"

#include "tensorreg/tensor_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tensorreg {

namespace {

double parse_number(std::string_view s, std::string_view context) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("bad number '" + std::string(s) + "' in kernel spec '" + std::string(context) + "'");
    return v;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::VectorXd na = a.rowwise().squaredNorm();
    const Eigen::VectorXd nb = b.rowwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * a * b.transpose();
    d.colwise() += na;
    d.rowwise() += nb.transpose();
    return d.cwiseMax(0.0);
}

Eigen::MatrixXd apply_kernel(const KernelSpec& k, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    k.validate();
    if (a.cols() != b.cols())
        throw std::invalid_argument("kernel inputs have different dimensions (" + std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.cols()) + ")");
    switch (k.kind) {
        case KernelSpec::Kind::Linear:
            return a * b.transpose();
        case KernelSpec::Kind::Rbf:
            return (squared_distances(a, b) * (-0.5 / (k.sigma * k.sigma))).array().exp().matrix();
        case KernelSpec::Kind::Polynomial:
            return ((a * b.transpose()).array() + k.offset).pow(static_cast<double>(k.degree)).matrix();
    }
    throw std::logic_error("unknown kernel kind");
}

}  // namespace

KernelSpec KernelSpec::parse(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    if (name == "linear") {
        if (!args.empty()) throw std::invalid_argument("linear kernel takes no parameters");
        return linear();
    }
    if (name == "rbf") {
        KernelSpec k = rbf(args.empty() ? 0.0 : parse_number(args, text));
        if (!args.empty() && !(k.sigma > 0)) throw std::invalid_argument("rbf bandwidth must be positive");
        return k;
    }
    if (name == "poly" || name == "polynomial") {
        int degree = 2;
        double offset = 0.0;
        if (!args.empty()) {
            const auto comma = args.find(',');
            const double d = parse_number(args.substr(0, comma), text);
            if (d != std::floor(d)) throw std::invalid_argument("polynomial degree must be an integer");
            degree = static_cast<int>(d);
            if (comma != std::string_view::npos) offset = parse_number(args.substr(comma + 1), text);
        }
        KernelSpec k = polynomial(degree, offset);
        k.validate();
        return k;
    }
    throw std::invalid_argument("unknown kernel '" + std::string(text) + "' (expected linear, rbf:<sigma>, poly:<d>,<c>)");
}

std::string KernelSpec::to_string() const {
    switch (kind) {
        case Kind::Linear:
            return "linear";
        case Kind::Rbf:
            return sigma > 0 ? "rbf:" + format_double(sigma) : "rbf";
        case Kind::Polynomial:
            return "poly:" + std::to_string(degree) + "," + format_double(offset);
    }
    return "unknown";
}

void KernelSpec::validate() const {
    if (kind == Kind::Rbf && !(sigma > 0)) throw std::invalid_argument("rbf kernel requires sigma > 0");
    if (kind == Kind::Polynomial) {
        if (degree < 1) throw std::invalid_argument("polynomial kernel requires degree >= 1");
        if (offset < 0) throw std::invalid_argument("polynomial kernel requires offset >= 0");
    }
}

double KernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y) const {
    validate();
    if (x.size() != y.size()) throw std::invalid_argument("kernel arguments have different dimensions");
    switch (kind) {
        case Kind::Linear:
            return x.dot(y);
        case Kind::Rbf:
            return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
        case Kind::Polynomial:
            return std::pow(x.dot(y) + offset, degree);
    }
    throw std::logic_error("unknown kernel kind");
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& x, const KernelSpec& k) {
    Eigen::MatrixXd g = apply_kernel(k, x, x);
    // Exact symmetry; rbf diagonal is exactly exp(0).
    g = 0.5 * (g + g.transpose()).eval();
    if (k.kind == KernelSpec::Kind::Rbf) g.diagonal().setOnes();
    return g;
}

Eigen::MatrixXd cross_gram(const KernelSpec& k, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return apply_kernel(k, a, b);
}

Eigen::VectorXd kernel_vec(const KernelSpec& k, const Eigen::MatrixXd& x_train, const Eigen::VectorXd& x) {
    if (x.size() != x_train.cols())
        throw std::invalid_argument("kernel_vec: input has dimension " + std::to_string(x.size()) + ", expected " +
                                    std::to_string(x_train.cols()));
    return apply_kernel(k, x_train, x.transpose());
}

double median_heuristic_sigma(const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd d2 = squared_distances(x, x);
    std::vector<double> d;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = i + 1; j < x.rows(); ++j) d.push_back(std::sqrt(d2(i, j)));
    if (d.empty()) return 1.0;
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid > 0 ? *mid : 1.0;
}

}  // namespace tensorreg
