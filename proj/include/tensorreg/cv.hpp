#pragma once

#include "tensorreg/estimator.hpp"

#include <cstdint>
#include <vector>

namespace tensorreg {

struct GridSpec {
    std::vector<double> gammas = default_gammas();
    /// Candidate rank tuples; for RLS a single empty tuple.
    std::vector<Shape> ranks{Shape{}};
    std::size_t folds = 3;
    std::uint64_t seed = 0;

    /// 1e-4, 1e-3, ..., 1e2.
    static std::vector<double> default_gammas();
    void validate() const;
};

/// Cartesian product of per-mode candidate lists, in lexicographic order.
std::vector<Shape> rank_product(const std::vector<std::vector<std::size_t>>& per_mode);

/// {r - step, r, r + step} per mode, clipped to [1, dims[i]] and deduplicated.
std::vector<Shape> ranks_around(const Shape& center, const Shape& dims, std::size_t step);

/// Validation index sets of a seeded shuffle dealt round-robin into `folds` sets.
std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds, std::uint64_t seed);

struct CvEntry {
    double gamma = 0.0;
    Shape ranks;
    double score = 0.0;
};

struct CvResult {
    Hyper best;
    double best_score = 0.0;
    /// Every grid point, gammas ascending, ranks lexicographic.
    std::vector<CvEntry> table;
};

/// k-fold cross-validation; minimizes mean validation RMSE with ties going
/// to the smallest gamma, then the lexicographically smallest rank tuple.
CvResult grid_search_cv(const MethodSpec& spec, const Eigen::MatrixXd& x, const DenseTensor& y, const GridSpec& grid);

/// Same selection rule on a single held-out validation set.
CvResult select_on_validation(const MethodSpec& spec, const Eigen::MatrixXd& x_train, const DenseTensor& y_train,
                              const Eigen::MatrixXd& x_val, const DenseTensor& y_val, const GridSpec& grid);

/// Rows of x in the given order.
Eigen::MatrixXd take_matrix_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows);

}  // namespace tensorreg
