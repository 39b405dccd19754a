#pragma once

#include "tensorreg/regress.hpp"

#include <filesystem>
#include <iosfwd>
#include <variant>

namespace tensorreg {

using AnyModel = std::variant<HolrrModel, KernelHolrrModel>;

// HOLRR v1 model file:
//   line 1  "HOLRR 1"
//   line 2  one-line JSON header: kind ("primal" | "kernel"), gamma, ranks,
//           output_shape, warnings, kernel (kernel models), and "blocks",
//           the names of the DTEN blocks that follow in order
//   rest    DTEN blocks; primal: core, U0..Up; kernel: coeff, train_inputs,
//           dual_basis, eigenvalues
// Doubles survive a save/load round trip bit for bit.
void write_model(std::ostream& os, const AnyModel& model);
AnyModel read_model(std::istream& is);

void save_model(const std::filesystem::path& path, const AnyModel& model);
AnyModel load_model(const std::filesystem::path& path);

/// Predictions for the rows of x, stacked along mode 0.
DenseTensor predict(const AnyModel& model, const Eigen::MatrixXd& x);
std::size_t model_input_dim(const AnyModel& model);

}  // namespace tensorreg
