#pragma once

#include "tensorreg/tensor.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

namespace tensorreg {

/// Tucker tensor with a standard-normal core and factors obtained by QR of
/// standard-normal matrices. Fully determined by (dims, ranks, seed).
DenseTensor random_lowrank_tensor(const Shape& dims, const Shape& ranks, std::uint64_t seed);

struct SynthSpec {
    std::size_t input_dim = 10;
    Shape output_shape{10, 10, 10};
    /// (R0, R1, ..., Rp) of the generating tensor. For the nonlinear model R0
    /// refers to the input_dim^2 feature mode.
    Shape ranks{6, 4, 4, 8};
    double noise_std = 0.1;
    std::size_t n_train = 100;
    std::size_t n_test = 100;
    std::uint64_t seed = 0;

    static SynthSpec linear_defaults();
    static SynthSpec nonlinear_defaults();

    /// Throws std::invalid_argument; feature_dim is d0 or d0^2.
    void validate(std::size_t feature_dim) const;
};

struct SynthData {
    Eigen::MatrixXd x_train;
    DenseTensor y_train;
    Eigen::MatrixXd x_test;
    DenseTensor y_test;
    DenseTensor w_true;
};

/// Y^(n) = W x_0 x_n + E^(n), x_n ~ N(0, I), E entries ~ N(0, noise_std^2).
/// Substreams "W", "X", "E" of spec.seed drive the three sources.
SynthData gen_linear_synthetic(const SynthSpec& spec);

/// Row n of the result is x_n (x) x_n, entry i * d + j = x_i x_j.
Eigen::MatrixXd kron_square_rows(const Eigen::MatrixXd& x);

/// Y^(n) = W x_0 (x_n (x) x_n) + E^(n); the returned inputs are the raw x_n.
SynthData gen_nonlinear_synthetic(const SynthSpec& spec);

/// Which image axis plays the role of the input mode.
enum class ImageTask {
    /// W is 3 x h x w, x in R^3.
    Channels,
    /// W is h x w x 3, x in R^h.
    Height,
};

ImageTask parse_image_task(std::string_view name);

/// Regression tensor for `image` (h x w x 3) under `task`.
DenseTensor image_weight_tensor(const DenseTensor& image, ImageTask task);
/// Inverse of image_weight_tensor.
DenseTensor weight_tensor_image(const DenseTensor& w, ImageTask task);

struct ImageData {
    Eigen::MatrixXd x;
    DenseTensor y;
    DenseTensor w;
};

/// Y^(n) = W x_0 x_n + E^(n), x and E entries ~ N(0, 1) scaled by noise_std for E.
ImageData gen_image_measurements(const DenseTensor& image, ImageTask task, std::size_t n, double noise_std,
                                 std::uint64_t seed);

/// size x size x 3 white image with a centred green cross.
DenseTensor green_cross_image(std::size_t size = 50);

}  // namespace tensorreg
