#include "tensorreg/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace tensorreg {

namespace {

std::size_t single_rank(const Hyper& h) {
    if (h.ranks.size() != 1) throw std::invalid_argument("LRR takes exactly one rank");
    return h.ranks[0];
}

DenseTensor predict_linear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w, const Shape& out) {
    return stack_rows(x * w, out);
}

}  // namespace

std::string MethodSpec::name() const {
    const char* base = method == Method::Rls ? "RLS" : method == Method::Lrr ? "LRR" : "HOLRR";
    return kernel ? std::string("K-") + base : std::string(base);
}

std::string MethodSpec::kernel_name() const { return kernel ? kernel->to_string() : "none"; }

std::size_t MethodSpec::rank_arity(std::size_t p) const {
    switch (method) {
        case Method::Rls:
            return 0;
        case Method::Lrr:
            return 1;
        case Method::Holrr:
            return p + 1;
    }
    return 0;
}

MethodSpec MethodSpec::parse(std::string_view text) {
    const auto at = text.find('@');
    const std::string_view base = text.substr(0, at);
    MethodSpec s;
    if (base == "rls") s.method = Method::Rls;
    else if (base == "lrr") s.method = Method::Lrr;
    else if (base == "holrr") s.method = Method::Holrr;
    else throw std::invalid_argument("unknown method '" + std::string(text) + "' (expected rls, lrr or holrr)");
    if (at != std::string_view::npos) s.kernel = KernelSpec::parse(text.substr(at + 1));
    return s;
}

KernelSpec resolve_kernel(const KernelSpec& k, const Eigen::MatrixXd& x) {
    if (k.kind == KernelSpec::Kind::Rbf && k.sigma == 0.0) return KernelSpec::rbf(median_heuristic_sigma(x));
    return k;
}

DenseTensor Fitted::predict(const Eigen::MatrixXd& x) const {
    return std::visit(
        [&](const auto& m) -> DenseTensor {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Linear>) {
                return predict_linear(x, m.w, output_shape);
            } else if constexpr (std::is_same_v<T, Dual>) {
                return predict_linear(cross_gram(m.kernel, x, m.train_inputs), m.coeff, output_shape);
            } else if constexpr (std::is_same_v<T, HolrrModel>) {
                return holrr_predict(m, x);
            } else {
                return kholrr_predict(m, x);
            }
        },
        model);
}

Fitted fit(const MethodSpec& spec, const Hyper& hyper, const Eigen::MatrixXd& x, const DenseTensor& y,
           LrrSolver lrr_solver) {
    if (y.order() < 2 || y.dim(0) != static_cast<std::size_t>(x.rows()))
        throw std::invalid_argument("outputs " + shape_to_string(y.shape()) + " do not match " +
                                    std::to_string(x.rows()) + " input rows");
    Fitted f;
    f.spec = spec;
    f.hyper = hyper;
    f.output_shape.assign(y.shape().begin() + 1, y.shape().end());
    if (hyper.ranks.size() != spec.rank_arity(f.output_shape.size()))
        throw std::invalid_argument(spec.name() + " expects " +
                                    std::to_string(spec.rank_arity(f.output_shape.size())) + " ranks, got " +
                                    std::to_string(hyper.ranks.size()));
    if (!spec.kernel) {
        if (spec.method == Method::Holrr) {
            HolrrModel m = HolrrPath(x, y, hyper.gamma).fit(hyper.ranks);
            f.warnings = m.warnings;
            f.model = std::move(m);
            return f;
        }
        const Eigen::MatrixXd y0 = outputs_as_matrix(y);
        MatrixFit mf = spec.method == Method::Rls ? rls_fit(x, y0, hyper.gamma)
                                                  : lrr_fit(x, y0, single_rank(hyper), hyper.gamma, lrr_solver);
        f.warnings = std::move(mf.warnings);
        f.model = Fitted::Linear{std::move(mf.w)};
        return f;
    }
    const KernelSpec kernel = resolve_kernel(*spec.kernel, x);
    f.spec.kernel = kernel;
    const Eigen::MatrixXd k = gram(x, kernel);
    if (spec.method == Method::Holrr) {
        KernelHolrrModel m = KernelHolrrPath(k, y, hyper.gamma).fit(hyper.ranks, x, kernel);
        f.warnings = m.warnings;
        f.model = std::move(m);
        return f;
    }
    const Eigen::MatrixXd y0 = outputs_as_matrix(y);
    DualFit df = spec.method == Method::Rls ? krls_fit(k, y0, hyper.gamma)
                                            : klrr_fit(k, y0, single_rank(hyper), hyper.gamma, lrr_solver);
    f.warnings = std::move(df.warnings);
    f.model = Fitted::Dual{std::move(df.coeff), x, kernel};
    return f;
}

double rmse(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument("rmse: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                                    shape_to_string(b.shape()));
    return std::sqrt((a.vec() - b.vec()).squaredNorm() / static_cast<double>(a.size()));
}

std::vector<double> evaluate_grid(const MethodSpec& spec, const Eigen::MatrixXd& x_train, const DenseTensor& y_train,
                                  const Eigen::MatrixXd& x_val, const DenseTensor& y_val,
                                  const std::vector<double>& gammas, const std::vector<Shape>& ranks) {
    std::vector<double> out;
    out.reserve(gammas.size() * ranks.size());
    if (spec.method != Method::Holrr) {
        for (double g : gammas)
            for (const Shape& r : ranks) out.push_back(rmse(fit(spec, {g, r}, x_train, y_train).predict(x_val), y_val));
        return out;
    }
    if (!spec.kernel) {
        for (double g : gammas) {
            const HolrrPath path(x_train, y_train, g);
            for (const Shape& r : ranks) out.push_back(rmse(holrr_predict(path.fit(r), x_val), y_val));
        }
        return out;
    }
    const KernelSpec kernel = resolve_kernel(*spec.kernel, x_train);
    const Eigen::MatrixXd k = gram(x_train, kernel);
    for (double g : gammas) {
        const KernelHolrrPath path(k, y_train, g);
        for (const Shape& r : ranks)
            out.push_back(rmse(kholrr_predict(path.fit(r, x_train, kernel), x_val), y_val));
    }
    return out;
}

}  // namespace tensorreg
