#include "tensorreg/cv.hpp"

#include "tensorreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tensorreg {

namespace {

struct SortedGrid {
    std::vector<double> gammas;
    std::vector<Shape> ranks;
};

SortedGrid sorted(const GridSpec& grid) {
    SortedGrid s{grid.gammas, grid.ranks};
    std::sort(s.gammas.begin(), s.gammas.end());
    s.gammas.erase(std::unique(s.gammas.begin(), s.gammas.end()), s.gammas.end());
    std::sort(s.ranks.begin(), s.ranks.end());
    s.ranks.erase(std::unique(s.ranks.begin(), s.ranks.end()), s.ranks.end());
    return s;
}

CvResult select(const SortedGrid& g, const std::vector<double>& scores) {
    CvResult res;
    std::size_t best = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        res.table.push_back({g.gammas[i / g.ranks.size()], g.ranks[i % g.ranks.size()], scores[i]});
        // Strict improvement only: the sorted order implements the tie-break.
        if (scores[i] < scores[best] || (std::isnan(scores[best]) && !std::isnan(scores[i]))) best = i;
    }
    res.best = {res.table[best].gamma, res.table[best].ranks};
    res.best_score = res.table[best].score;
    return res;
}

}  // namespace

std::vector<double> GridSpec::default_gammas() { return {1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2}; }

void GridSpec::validate() const {
    if (gammas.empty()) throw std::invalid_argument("empty gamma grid");
    if (ranks.empty()) throw std::invalid_argument("empty rank grid");
    if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
    for (double g : gammas)
        if (!(g >= 0) || !std::isfinite(g)) throw std::invalid_argument("gamma grid values must be finite and >= 0");
}

std::vector<Shape> rank_product(const std::vector<std::vector<std::size_t>>& per_mode) {
    std::vector<Shape> out{Shape{}};
    for (const auto& cands : per_mode) {
        std::vector<Shape> next;
        for (const Shape& prefix : out)
            for (std::size_t r : cands) {
                Shape s = prefix;
                s.push_back(r);
                next.push_back(std::move(s));
            }
        out = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Shape> ranks_around(const Shape& center, const Shape& dims, std::size_t step) {
    if (center.size() != dims.size()) throw std::invalid_argument("ranks_around: size mismatch");
    std::vector<std::vector<std::size_t>> per_mode;
    for (std::size_t i = 0; i < center.size(); ++i) {
        std::vector<std::size_t> c;
        for (long off : {-static_cast<long>(step), 0L, static_cast<long>(step)}) {
            const long r = std::clamp(static_cast<long>(center[i]) + off, 1L, static_cast<long>(dims[i]));
            c.push_back(static_cast<std::size_t>(r));
        }
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        per_mode.push_back(std::move(c));
    }
    return rank_product(per_mode);
}

std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
    if (n < folds)
        throw std::invalid_argument("cannot split " + std::to_string(n) + " samples into " + std::to_string(folds) +
                                    " folds");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed, "folds");
    rng.shuffle(perm);
    std::vector<std::vector<std::size_t>> out(folds);
    for (std::size_t i = 0; i < n; ++i) out[i % folds].push_back(perm[i]);
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

Eigen::MatrixXd take_matrix_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

CvResult grid_search_cv(const MethodSpec& spec, const Eigen::MatrixXd& x, const DenseTensor& y, const GridSpec& grid) {
    grid.validate();
    const SortedGrid g = sorted(grid);
    const auto n = static_cast<std::size_t>(x.rows());
    const auto folds = fold_partition(n, grid.folds, grid.seed);
    std::vector<double> mean(g.gammas.size() * g.ranks.size(), 0.0);
    for (const auto& val : folds) {
        std::vector<char> in_val(n, 0);
        for (std::size_t i : val) in_val[i] = 1;
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_val[i]) train.push_back(i);
        const auto scores = evaluate_grid(spec, take_matrix_rows(x, train), take_rows(y, train),
                                          take_matrix_rows(x, val), take_rows(y, val), g.gammas, g.ranks);
        for (std::size_t i = 0; i < scores.size(); ++i) mean[i] += scores[i] / static_cast<double>(folds.size());
    }
    return select(g, mean);
}

CvResult select_on_validation(const MethodSpec& spec, const Eigen::MatrixXd& x_train, const DenseTensor& y_train,
                              const Eigen::MatrixXd& x_val, const DenseTensor& y_val, const GridSpec& grid) {
    if (grid.gammas.empty()) throw std::invalid_argument("empty gamma grid");
    if (grid.ranks.empty()) throw std::invalid_argument("empty rank grid");
    const SortedGrid g = sorted(grid);
    return select(g, evaluate_grid(spec, x_train, y_train, x_val, y_val, g.gammas, g.ranks));
}

}  // namespace tensorreg
