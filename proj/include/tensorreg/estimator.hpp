#pragma once

#include "tensorreg/regress.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tensorreg {

enum class Method { Rls, Lrr, Holrr };

/// A method and, for the kernelized variants, its kernel.
struct MethodSpec {
    Method method = Method::Holrr;
    std::optional<KernelSpec> kernel;

    /// "RLS", "LRR", "HOLRR", or "K-RLS" etc. for kernel variants.
    std::string name() const;
    /// Kernel column of the reports: "none" for primal methods.
    std::string kernel_name() const;
    /// Number of entries in a rank tuple for this method with p output modes.
    std::size_t rank_arity(std::size_t p) const;

    /// "rls", "lrr", "holrr", optionally followed by "@<kernel>", e.g. "holrr@rbf:1.5".
    static MethodSpec parse(std::string_view text);
};

struct Hyper {
    double gamma = kDefaultGamma;
    /// Empty for RLS, (R) for LRR, (R0, ..., Rp) for HOLRR.
    Shape ranks;
};

/// A fitted model of any method; predictions are stacked along mode 0.
struct Fitted {
    struct Linear {
        Eigen::MatrixXd w;
    };
    struct Dual {
        Eigen::MatrixXd coeff;
        Eigen::MatrixXd train_inputs;
        KernelSpec kernel;
    };
    MethodSpec spec;
    Hyper hyper;
    Shape output_shape;
    std::variant<Linear, Dual, HolrrModel, KernelHolrrModel> model;
    Warnings warnings;

    DenseTensor predict(const Eigen::MatrixXd& x) const;
};

/// Bare "rbf" kernels get their bandwidth from the median heuristic on x.
KernelSpec resolve_kernel(const KernelSpec& k, const Eigen::MatrixXd& x);

/// LRR inside `fit` uses the factored solver unless told otherwise.
Fitted fit(const MethodSpec& spec, const Hyper& hyper, const Eigen::MatrixXd& x, const DenseTensor& y,
           LrrSolver lrr_solver = LrrSolver::Factored);

/// sqrt(||a - b||_F^2 / entries).
double rmse(const DenseTensor& a, const DenseTensor& b);

/// Validation RMSE of every (gamma, ranks) pair, index g * ranks.size() + r.
/// Spectral work is shared across ranks for one gamma.
std::vector<double> evaluate_grid(const MethodSpec& spec, const Eigen::MatrixXd& x_train, const DenseTensor& y_train,
                                  const Eigen::MatrixXd& x_val, const DenseTensor& y_val,
                                  const std::vector<double>& gammas, const std::vector<Shape>& ranks);

}  // namespace tensorreg
