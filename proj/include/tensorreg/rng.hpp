#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace tensorreg {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the substream `purpose` (e.g. "W", "X", "E") under `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

/// Portable random stream: std::mt19937_64 is bit-specified by the standard;
/// the floating-point transforms are done here rather than by <random>
/// distributions, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}
    Rng(std::uint64_t seed, std::string_view purpose) : Rng(derive_seed(seed, purpose)) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Standard normal, Marsaglia polar method.
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
    std::vector<double> normal_vector(std::size_t n, double stddev = 1.0);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace tensorreg
