#include "tensorreg/datagen.hpp"

#include "tensorreg/linalg.hpp"
#include "tensorreg/rng.hpp"

#include <stdexcept>
#include <string>

namespace tensorreg {

namespace {

DenseTensor noisy_outputs(const DenseTensor& w, const Eigen::MatrixXd& features, Rng& noise, double stddev) {
    DenseTensor y = mode_product(w, features, 0);
    if (stddev > 0)
        for (double& v : y.data()) v += stddev * noise.normal();
    return y;
}

SynthData generate(const SynthSpec& spec, bool nonlinear) {
    const std::size_t feature_dim = nonlinear ? spec.input_dim * spec.input_dim : spec.input_dim;
    spec.validate(feature_dim);
    Shape dims{feature_dim};
    dims.insert(dims.end(), spec.output_shape.begin(), spec.output_shape.end());

    SynthData out;
    out.w_true = random_lowrank_tensor(dims, spec.ranks, derive_seed(spec.seed, "W"));
    Rng xs(spec.seed, "X");
    Rng es(spec.seed, "E");
    const auto d0 = static_cast<Eigen::Index>(spec.input_dim);
    out.x_train = xs.normal_matrix(static_cast<Eigen::Index>(spec.n_train), d0);
    out.x_test = xs.normal_matrix(static_cast<Eigen::Index>(spec.n_test), d0);
    const auto features = [&](const Eigen::MatrixXd& x) { return nonlinear ? kron_square_rows(x) : x; };
    out.y_train = noisy_outputs(out.w_true, features(out.x_train), es, spec.noise_std);
    out.y_test = noisy_outputs(out.w_true, features(out.x_test), es, spec.noise_std);
    return out;
}

}  // namespace

DenseTensor random_lowrank_tensor(const Shape& dims, const Shape& ranks, std::uint64_t seed) {
    if (dims.size() != ranks.size())
        throw std::invalid_argument("random_lowrank_tensor: " + std::to_string(ranks.size()) + " ranks for " +
                                    std::to_string(dims.size()) + " modes");
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (ranks[i] < 1 || ranks[i] > dims[i])
            throw std::invalid_argument("random_lowrank_tensor: rank " + std::to_string(ranks[i]) + " of mode " +
                                        std::to_string(i) + " outside [1, " + std::to_string(dims[i]) + "]");
    Rng rng(seed);
    TuckerFactors t;
    t.core = DenseTensor(ranks, rng.normal_vector(shape_product(ranks)));
    for (std::size_t i = 0; i < dims.size(); ++i)
        t.factors.push_back(orthonormalize(
            rng.normal_matrix(static_cast<Eigen::Index>(dims[i]), static_cast<Eigen::Index>(ranks[i]))));
    return tucker_reconstruct(t);
}

SynthSpec SynthSpec::linear_defaults() { return {}; }

SynthSpec SynthSpec::nonlinear_defaults() {
    SynthSpec s;
    s.input_dim = 5;
    s.ranks = {5, 6, 4, 2};
    return s;
}

void SynthSpec::validate(std::size_t feature_dim) const {
    if (input_dim < 1) throw std::invalid_argument("input dimension must be at least 1");
    if (output_shape.empty()) throw std::invalid_argument("output shape must have at least one mode");
    if (ranks.size() != output_shape.size() + 1)
        throw std::invalid_argument("expected " + std::to_string(output_shape.size() + 1) + " ranks, got " +
                                    std::to_string(ranks.size()));
    if (!(noise_std >= 0)) throw std::invalid_argument("noise_std must be >= 0");
    if (n_train < 1) throw std::invalid_argument("training size must be at least 1");
    if (ranks[0] < 1 || ranks[0] > feature_dim)
        throw std::invalid_argument("rank R0 = " + std::to_string(ranks[0]) + " outside [1, " +
                                    std::to_string(feature_dim) + "]");
    for (std::size_t i = 0; i < output_shape.size(); ++i)
        if (ranks[i + 1] < 1 || ranks[i + 1] > output_shape[i])
            throw std::invalid_argument("rank R" + std::to_string(i + 1) + " = " + std::to_string(ranks[i + 1]) +
                                        " outside [1, " + std::to_string(output_shape[i]) + "]");
}

SynthData gen_linear_synthetic(const SynthSpec& spec) { return generate(spec, false); }

SynthData gen_nonlinear_synthetic(const SynthSpec& spec) { return generate(spec, true); }

Eigen::MatrixXd kron_square_rows(const Eigen::MatrixXd& x) {
    const Eigen::Index d = x.cols();
    Eigen::MatrixXd out(x.rows(), d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) out.col(i * d + j) = x.col(i).cwiseProduct(x.col(j));
    return out;
}

ImageTask parse_image_task(std::string_view name) {
    if (name == "channels") return ImageTask::Channels;
    if (name == "height") return ImageTask::Height;
    throw std::invalid_argument("unknown image task '" + std::string(name) + "' (expected channels or height)");
}

DenseTensor image_weight_tensor(const DenseTensor& image, ImageTask task) {
    if (image.order() != 3 || image.dim(2) != 3)
        throw std::invalid_argument("expected an h x w x 3 image, got " + shape_to_string(image.shape()));
    if (task == ImageTask::Height) return image;
    const std::size_t order[] = {2, 0, 1};
    return permute(image, order);
}

DenseTensor weight_tensor_image(const DenseTensor& w, ImageTask task) {
    if (task == ImageTask::Height) return w;
    const std::size_t order[] = {1, 2, 0};
    return permute(w, order);
}

ImageData gen_image_measurements(const DenseTensor& image, ImageTask task, std::size_t n, double noise_std,
                                 std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("measurement count must be at least 1");
    if (!(noise_std >= 0)) throw std::invalid_argument("noise_std must be >= 0");
    ImageData out;
    out.w = image_weight_tensor(image, task);
    Rng xs(seed, "X");
    Rng es(seed, "E");
    out.x = xs.normal_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out.w.dim(0)));
    out.y = noisy_outputs(out.w, out.x, es, noise_std);
    return out;
}

DenseTensor green_cross_image(std::size_t size) {
    if (size < 5) throw std::invalid_argument("cross image needs size >= 5");
    DenseTensor img({size, size, 3});
    const std::size_t lo = 2 * size / 5;
    const std::size_t hi = size - lo;
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            const bool arm = (r >= lo && r < hi) || (c >= lo && c < hi);
            const bool border = r < size / 10 || c < size / 10 || r >= size - size / 10 || c >= size - size / 10;
            const bool green = arm && !border;
            img.at({r, c, 0}) = green ? 0.0 : 1.0;
            img.at({r, c, 1}) = green ? 0.6 : 1.0;
            img.at({r, c, 2}) = green ? 0.0 : 1.0;
        }
    return img;
}

}  // namespace tensorreg
