#pragma once

#include "tensorreg/tensor.hpp"

#include <filesystem>
#include <iosfwd>

namespace tensorreg {

/// 8-bit PPM (P3 or P6) as an h x w x 3 tensor with values in [0, 1].
DenseTensor read_ppm(std::istream& is);
DenseTensor load_ppm(const std::filesystem::path& path);

/// Binary P6; values are clamped to [0, 1] and rounded to 8 bits.
void write_ppm(std::ostream& os, const DenseTensor& image);
void save_ppm(const std::filesystem::path& path, const DenseTensor& image);

}  // namespace tensorreg
