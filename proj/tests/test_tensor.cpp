#include "oracle.hpp"

#include "tensorreg/tensor.hpp"

#include "doctest.h"

#include <cmath>

using namespace tensorreg;

namespace {

// T[i,j,k] = i + 2(j-1) + 4(k-1) in 1-based indices, i.e. 1..8 in storage order.
DenseTensor counting_cube() { return DenseTensor({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8}); }

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("mode-0 unfolding of the 2x2x2 counting tensor") {
    const DenseTensor t = counting_cube();
    CHECK(t.at({1, 0, 1}) == 6.0);
    Eigen::MatrixXd expected(2, 4);
    expected << 1, 3, 5, 7, 2, 4, 6, 8;
    CHECK(matricize(t, 0) == expected);
    Eigen::MatrixXd m1(2, 4), m2(2, 4);
    m1 << 1, 2, 5, 6, 3, 4, 7, 8;
    m2 << 1, 2, 3, 4, 5, 6, 7, 8;
    CHECK(matricize(t, 1) == m1);
    CHECK(matricize(t, 2) == m2);
}

TEST_CASE("vectorize stacks the mode-0 unfolding") {
    const Eigen::VectorXd v = vectorize(counting_cube());
    for (int i = 0; i < 8; ++i) CHECK(v(i) == i + 1);
    CHECK(vectorize(DenseTensor({1, 1, 1}, {3.5}))(0) == 3.5);
    CHECK(vectorize(DenseTensor({2, 3})).isZero());
}

TEST_CASE("matrix tensors unfold to themselves and their transpose") {
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const DenseTensor t = DenseTensor::from_matrix(m);
    CHECK(matricize(t, 0) == m);
    CHECK(matricize(t, 1) == m.transpose());
    CHECK(t.to_matrix() == m);
}

TEST_CASE("unfolding matches the index-formula oracle and folds back") {
    oracle::Gen g(11);
    for (int rep = 0; rep < 40; ++rep) {
        const DenseTensor t = g.tensor(g.shape(g.between(1, 4), 4));
        for (std::size_t n = 0; n < t.order(); ++n) {
            const Eigen::MatrixXd m = matricize(t, n);
            CHECK(m == oracle::matricize(t, n));
            CHECK(fold(m, n, t.shape()) == t);
        }
    }
}

TEST_CASE("mode product: identity, row swap and oracle agreement") {
    Eigen::MatrixXd m(2, 2), swap(2, 2), expected(2, 2);
    m << 1, 2, 3, 4;
    swap << 0, 1, 1, 0;
    expected << 3, 4, 1, 2;
    CHECK(mode_product(DenseTensor::from_matrix(m), swap, 0).to_matrix() == expected);

    oracle::Gen g(12);
    for (int rep = 0; rep < 30; ++rep) {
        const DenseTensor t = g.tensor(g.shape(g.between(1, 4), 4));
        const std::size_t n = g.between(0, t.order() - 1);
        CHECK(mode_product(t, Eigen::MatrixXd::Identity(t.dim(n), t.dim(n)), n) == t);
        const Eigen::MatrixXd a = g.matrix(static_cast<Eigen::Index>(g.between(1, 5)), static_cast<Eigen::Index>(t.dim(n)));
        const DenseTensor got = mode_product(t, a, n);
        CHECK(oracle::max_abs_diff(got, oracle::mode_product(t, a, n)) <= 1e-12);
        CHECK((matricize(got, n) - a * matricize(t, n)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK_THROWS_AS(mode_product(counting_cube(), Eigen::MatrixXd::Ones(2, 3), 1), std::invalid_argument);
    CHECK_THROWS_AS(mode_product(counting_cube(), Eigen::MatrixXd::Ones(2, 2), 3), std::invalid_argument);
}

TEST_CASE("products along distinct modes commute; same-mode products compose") {
    oracle::Gen g(13);
    for (int rep = 0; rep < 20; ++rep) {
        const DenseTensor t = g.tensor(g.shape(3, 4));
        const Eigen::MatrixXd a = g.matrix(3, static_cast<Eigen::Index>(t.dim(0)));
        const Eigen::MatrixXd b = g.matrix(2, static_cast<Eigen::Index>(t.dim(2)));
        CHECK(oracle::max_abs_diff(mode_product(mode_product(t, a, 0), b, 2),
                                   mode_product(mode_product(t, b, 2), a, 0)) <= 1e-12);
        const Eigen::MatrixXd c = g.matrix(4, 3);
        CHECK(oracle::max_abs_diff(mode_product(mode_product(t, a, 0), c, 0), mode_product(t, c * a, 0)) <= 1e-12);
    }
}

TEST_CASE("mode-vector product slices and drops the mode") {
    const DenseTensor t = counting_cube();
    const DenseTensor s = mode_vector_product(t, Eigen::Vector2d(0, 1), 1);
    CHECK(s.shape() == Shape{2, 2});
    CHECK(s.at({0, 0}) == 3.0);
    CHECK(s.at({1, 1}) == 8.0);
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const DenseTensor vt = mode_vector_product(DenseTensor::from_matrix(m), Eigen::Vector2d(1, -1), 0);
    CHECK(vt.vec() == Eigen::Vector3d(-3, -3, -3));
    CHECK(mode_vector_product(DenseTensor({3}, {1, 2, 3}), Eigen::Vector3d(1, 1, 1), 0).shape() == Shape{1});
    CHECK_THROWS_AS(mode_vector_product(t, Eigen::Vector3d(1, 1, 1), 0), std::invalid_argument);
}

TEST_CASE("inner product and Frobenius norm") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 3, 4;
    const DenseTensor t = DenseTensor::from_matrix(m);
    CHECK(frobenius_norm(t) == doctest::Approx(std::sqrt(30.0)).epsilon(1e-15));
    CHECK(inner(t, DenseTensor({2, 2})) == 0.0);
    CHECK_THROWS_AS(inner(t, DenseTensor({4})), std::invalid_argument);

    oracle::Gen g(14);
    for (int rep = 0; rep < 20; ++rep) {
        const Shape s = g.shape(3, 4);
        const DenseTensor a = g.tensor(s), b = g.tensor(s);
        CHECK(inner(a, a) == doctest::Approx(frobenius_norm(a) * frobenius_norm(a)).epsilon(1e-12));
        CHECK(frobenius_norm(a + b) <= frobenius_norm(a) + frobenius_norm(b) + 1e-12);
        CHECK(frobenius_norm(-2.5 * a) == doctest::Approx(2.5 * frobenius_norm(a)).epsilon(1e-14));
        // Adjoint: <T x_n X, S> = <T, S x_n X^T>.
        const std::size_t n = g.between(0, 2);
        const Eigen::MatrixXd x = g.matrix(3, static_cast<Eigen::Index>(s[n]));
        const DenseTensor sn = g.tensor(mode_product(a, x, n).shape());
        const double lhs = inner(mode_product(a, x, n), sn), rhs = inner(a, mode_product(sn, x.transpose(), n));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("mode gram equals the unfolding times its transpose") {
    oracle::Gen g(15);
    for (int rep = 0; rep < 20; ++rep) {
        const DenseTensor t = g.tensor(g.shape(g.between(1, 4), 5));
        for (std::size_t n = 0; n < t.order(); ++n) {
            const Eigen::MatrixXd m = oracle::matricize(t, n);
            CHECK((mode_gram(t, n) - m * m.transpose()).cwiseAbs().maxCoeff() <= 1e-11);
        }
    }
}

TEST_CASE("tucker reconstruction: rank-one, identity factors and the Kronecker identity") {
    TuckerFactors rank1{DenseTensor({1, 1}, {1.0}), {Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(4, 5)}};
    CHECK(tucker_reconstruct(rank1).to_matrix() == Eigen::Vector3d(1, 2, 3) * Eigen::RowVector2d(4, 5));

    const DenseTensor t = counting_cube();
    TuckerFactors ident{t, {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)}};
    CHECK(tucker_reconstruct(ident) == t);

    oracle::Gen g(16);
    for (int rep = 0; rep < 20; ++rep) {
        const Shape dims = {g.between(2, 5), g.between(2, 5), g.between(2, 5)};
        const Shape ranks = {g.between(1, dims[0]), g.between(1, dims[1]), g.between(1, dims[2])};
        TuckerFactors f{g.tensor(ranks), {}};
        for (std::size_t i = 0; i < 3; ++i)
            f.factors.push_back(oracle::orthonormal(g, static_cast<Eigen::Index>(dims[i]), static_cast<Eigen::Index>(ranks[i])));
        const DenseTensor w = tucker_reconstruct(f);
        const Eigen::VectorXd kv = oracle::kron(oracle::kron(f.factors[2], f.factors[1]), f.factors[0]) * f.core.vec();
        CHECK((w.vec() - kv).cwiseAbs().maxCoeff() <= 1e-10);
        const Eigen::MatrixXd m1 = f.factors[1] * oracle::matricize(f.core, 1) *
                                   oracle::kron(f.factors[2], f.factors[0]).transpose();
        CHECK((matricize(w, 1) - m1).cwiseAbs().maxCoeff() <= 1e-10);
    }
    TuckerFactors bad{DenseTensor({2, 2}), {Eigen::MatrixXd::Identity(2, 2)}};
    CHECK_THROWS_AS(tucker_reconstruct(bad), std::invalid_argument);
}

TEST_CASE("multilinear rank") {
    CHECK(multilinear_rank(DenseTensor({3, 4, 2})) == Shape{0, 0, 0});
    TuckerFactors rank1{DenseTensor({1, 1, 1}, {2.0}), {Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(4, 5), Eigen::Vector2d(1, -1)}};
    CHECK(multilinear_rank(tucker_reconstruct(rank1)) == Shape{1, 1, 1});
    oracle::Gen g(17);
    for (int rep = 0; rep < 10; ++rep) CHECK(multilinear_rank(oracle::lowrank(g, {5, 6, 4}, {2, 3, 2})) == Shape{2, 3, 2});
    CHECK_THROWS_AS(multilinear_rank(counting_cube(), 0.0), std::invalid_argument);
}

TEST_CASE("truncated HOSVD recovers low-rank tensors and is monotone in the ranks") {
    oracle::Gen g(18);
    for (int rep = 0; rep < 10; ++rep) {
        const DenseTensor t = oracle::lowrank(g, {4, 5, 3}, {2, 2, 2});
        const Shape r{2, 2, 2};
        const HosvdResult h = hosvd_truncated(t, r);
        CHECK_FALSE(h.clamped);
        CHECK(oracle::rel_diff(tucker_reconstruct(h.tucker), t) <= 1e-9);
        for (const auto& u : h.tucker.factors)
            CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff() <= 1e-12);
    }
    const DenseTensor t = g.tensor({4, 4, 4});
    const Shape full{4, 4, 4};
    CHECK(oracle::rel_diff(tucker_reconstruct(hosvd_truncated(t, full).tucker), t) <= 1e-10);
    double prev = 1e300;
    for (std::size_t r = 1; r <= 4; ++r) {
        const Shape ranks{r, 2, 3};
        const double err = frobenius_norm(tucker_reconstruct(hosvd_truncated(t, ranks).tucker) - t);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
    // Mode-0 unfolding is 5 x 2, so three factor columns exceed its thin SVD.
    const DenseTensor narrow = g.tensor({5, 2, 1});
    const Shape wide_rank{3, 1, 1};
    const HosvdResult nh = hosvd_truncated(narrow, wide_rank);
    CHECK(nh.tucker.factors[0].cols() == 3);
    const Eigen::MatrixXd& u0 = nh.tucker.factors[0];
    CHECK((u0.transpose() * u0 - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
    const Shape exact_rank{3, 2, 1};
    CHECK(oracle::rel_diff(tucker_reconstruct(hosvd_truncated(narrow, exact_rank).tucker), narrow) <= 1e-12);
    const Shape too_big{9, 4, 4};
    const HosvdResult clamped = hosvd_truncated(t, too_big);
    CHECK(clamped.clamped);
    CHECK(clamped.tucker.ranks() == Shape{4, 4, 4});
    CHECK_FALSE(clamped.warnings.empty());
}

TEST_CASE("construction and indexing errors") {
    CHECK_THROWS_AS(DenseTensor(Shape{}), std::invalid_argument);
    CHECK_THROWS_AS(DenseTensor(Shape{2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(DenseTensor(Shape{2, 2}, {1, 2, 3}), std::invalid_argument);
    DenseTensor t = counting_cube();
    CHECK_THROWS_AS(t.at({2, 0, 0}), std::out_of_range);
    CHECK_THROWS_AS(t.at({0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(matricize(t, 3), std::invalid_argument);
}

TEST_CASE("permute, take_rows and stack_rows") {
    const DenseTensor t = counting_cube();
    const std::size_t order[] = {2, 0, 1};
    const DenseTensor p = permute(t, order);
    for (const Shape& idx : oracle::indices(t.shape())) CHECK(p.at({idx[2], idx[0], idx[1]}) == t.at(idx));
    const std::size_t rows[] = {1, 1, 0};
    const DenseTensor r = take_rows(t, rows);
    CHECK(r.shape() == Shape{3, 2, 2});
    CHECK(r.at({0, 1, 1}) == t.at({1, 1, 1}));
    CHECK(r.at({2, 0, 1}) == t.at({0, 0, 1}));
    const std::size_t trailing[] = {2, 2};
    CHECK(stack_rows(matricize(t, 0), trailing) == t);
    const std::size_t bad_order[] = {0, 0, 1};
    CHECK_THROWS_AS(permute(t, bad_order), std::invalid_argument);
}

}  // TEST_SUITE
