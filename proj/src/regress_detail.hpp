#pragma once

#include "tensorreg/regress.hpp"

#include <string>

namespace tensorreg::detail {

inline void check_outputs(const DenseTensor& y, std::size_t n) {
    if (y.order() < 2)
        throw std::invalid_argument("output tensor must have order >= 2 (samples x output modes), got " +
                                    shape_to_string(y.shape()));
    if (y.dim(0) != n)
        throw std::invalid_argument("output tensor has " + std::to_string(y.dim(0)) + " samples, inputs have " +
                                    std::to_string(n));
}

/// Full descending eigendecompositions of Y_(i) Y_(i)^T for the output modes.
inline std::vector<SymEigResult> output_mode_spectra(const DenseTensor& y) {
    std::vector<SymEigResult> out;
    for (std::size_t mode = 1; mode < y.order(); ++mode) out.push_back(sym_eig(mode_gram(y, mode)));
    return out;
}

inline std::size_t clamp_rank(std::size_t requested, std::size_t limit, const std::string& what, Warnings& warnings) {
    if (requested < 1) throw std::invalid_argument(what + " must be at least 1");
    if (requested > limit) {
        warnings.push_back(what + " " + std::to_string(requested) + " clamped to " + std::to_string(limit));
        return limit;
    }
    return requested;
}

/// Applies U_i^T (transpose = true) or U_i along modes 1..p.
inline DenseTensor apply_output_factors(DenseTensor t, const std::vector<Eigen::MatrixXd>& factors, bool transpose) {
    for (std::size_t i = 0; i < factors.size(); ++i)
        t = transpose ? mode_product(t, factors[i].transpose(), i + 1) : mode_product(t, factors[i], i + 1);
    return t;
}

}  // namespace tensorreg::detail
