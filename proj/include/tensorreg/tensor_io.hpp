#pragma once

#include "tensorreg/tensor.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace tensorreg {

/// Malformed or unreadable input files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// DTEN v1: one ASCII line "DTEN 1 <p> <d_1> ... <d_p>\n" followed by the
// little-endian IEEE-754 doubles in storage order (first index fastest).
void write_dten(std::ostream& os, const DenseTensor& t);
DenseTensor read_dten(std::istream& is);

/// Comma-separated rows, values printed in shortest round-trip form.
void write_csv(std::ostream& os, const Eigen::MatrixXd& m);
/// Accepts ',' or whitespace separators; blank lines and '#' comments are skipped.
Eigen::MatrixXd read_csv(std::istream& is);

/// Writes through a temporary sibling file and renames it into place.
void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

void save_dten(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor load_dten(const std::filesystem::path& path);

/// DTEN or CSV, detected from the file's leading bytes.
DenseTensor load_tensor(const std::filesystem::path& path);

/// Order-2 DTEN or CSV as a matrix; an order-1 DTEN becomes a single row.
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);
void save_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

std::string format_double(double v);

}  // namespace tensorreg
