#include "oracle.hpp"

#include "tensorreg/kernel.hpp"
#include "tensorreg/linalg.hpp"

#include "doctest.h"

#include <cmath>

using namespace tensorreg;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Eigen::MatrixXd random_spd(oracle::Gen& g, Eigen::Index n) {
    const Eigen::MatrixXd a = g.matrix(n, n);
    return a * a.transpose() + Eigen::MatrixXd::Identity(n, n);
}

// Largest principal angle sine between two column spans.
double span_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::MatrixXd qa = orthonormalize(a), qb = orthonormalize(b);
    return max_abs(qa * qa.transpose() - qb * qb.transpose());
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("spd_solve on a diagonal system") {
    const Eigen::MatrixXd a = Eigen::Vector2d(2, 4).asDiagonal();
    const Eigen::MatrixXd x = spd_solve(a, Eigen::Vector2d(2, 8));
    CHECK(max_abs(x - Eigen::Vector2d(1, 2)) <= 1e-15);
}

TEST_CASE("spd_solve agrees with a residual check on random systems") {
    oracle::Gen g(21);
    for (int rep = 0; rep < 20; ++rep) {
        const auto n = static_cast<Eigen::Index>(g.between(1, 12));
        const Eigen::MatrixXd a = random_spd(g, n), b = g.matrix(n, 3);
        CHECK(max_abs(a * spd_solve(a, b) - b) <= 1e-9 * std::max(1.0, max_abs(b)));
        const Eigen::MatrixXd l = cholesky_lower(a);
        CHECK(max_abs(l * l.transpose() - a) <= 1e-10 * max_abs(a));
        CHECK(max_abs(l.triangularView<Eigen::StrictlyUpper>().toDenseMatrix()) == 0.0);
    }
}

TEST_CASE("Cholesky reports the failing pivot") {
    Eigen::Matrix3d a;
    a << 4, 2, 0, 2, 1, 0, 0, 0, 1;  // second pivot is exactly zero
    try {
        cholesky_lower(a);
        FAIL("expected NotPositiveDefinite");
    } catch (const NotPositiveDefinite& e) {
        CHECK(e.pivot() == 1);
    }
    CHECK_THROWS_AS(spd_solve(-Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 1)), NotPositiveDefinite);
    Eigen::Matrix2d tiny;
    tiny << 1, 0, 0, 1e-14;
    CHECK_NOTHROW(cholesky_lower(tiny));
    CHECK_THROWS_AS(cholesky_lower(tiny, 1e-12), NotPositiveDefinite);
}

TEST_CASE("sym_eig_top sorts descending with canonical signs") {
    const Eigen::MatrixXd s = Eigen::Vector3d(3, 1, 2).asDiagonal();
    const SymEigResult r = sym_eig_top(s, 2);
    CHECK(r.values.size() == 2);
    CHECK(r.values(0) == doctest::Approx(3.0));
    CHECK(r.values(1) == doctest::Approx(2.0));
    CHECK(max_abs(r.vectors.col(0) - Eigen::Vector3d(1, 0, 0)) <= 1e-14);
    CHECK(max_abs(r.vectors.col(1) - Eigen::Vector3d(0, 0, 1)) <= 1e-14);
    CHECK_FALSE(r.clamped);
    CHECK(sym_eig_top(s, 5).clamped);
    Eigen::Matrix2d asym;
    asym << 1, 2, 0, 1;
    CHECK_THROWS_AS(sym_eig(asym), std::invalid_argument);
}

TEST_CASE("sym_eig recovers a planted spectrum") {
    oracle::Gen g(22);
    for (int rep = 0; rep < 20; ++rep) {
        const auto n = static_cast<Eigen::Index>(g.between(2, 10));
        const Eigen::MatrixXd q = oracle::orthonormal(g, n, n);
        Eigen::VectorXd lam(n);
        for (Eigen::Index i = 0; i < n; ++i) lam(i) = static_cast<double>(n - i) + 0.5 * g.uniform();
        const Eigen::MatrixXd s = q * lam.asDiagonal() * q.transpose();
        const SymEigResult r = sym_eig(s);
        CHECK(max_abs(r.values - lam) <= 1e-10 * lam(0));
        CHECK(max_abs(r.vectors.transpose() * r.vectors - Eigen::MatrixXd::Identity(n, n)) <= 1e-12);
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index k = [&] {
                Eigen::Index arg;
                r.vectors.col(j).cwiseAbs().maxCoeff(&arg);
                return arg;
            }();
            CHECK(r.vectors(k, j) > 0);
            CHECK(std::abs(std::abs(r.vectors.col(j).dot(q.col(j))) - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("generalized pencil: worked examples") {
    const Eigen::MatrixXd s1 = Eigen::Vector2d(4, 1).asDiagonal();
    const SymEigResult r1 = gen_sym_eig_top(s1, Eigen::MatrixXd::Identity(2, 2), 1);
    CHECK(r1.values(0) == doctest::Approx(4.0));
    CHECK(max_abs(r1.vectors.col(0) - Eigen::Vector2d(1, 0)) <= 1e-14);

    const Eigen::MatrixXd s2 = Eigen::Vector2d(2, 2).asDiagonal();
    const Eigen::MatrixXd m2 = Eigen::Vector2d(1, 2).asDiagonal();
    const SymEigResult r2 = gen_sym_eig_top(s2, m2, 2);
    CHECK(r2.values(0) == doctest::Approx(2.0));
    CHECK(r2.values(1) == doctest::Approx(1.0));
    CHECK(std::abs(r2.vectors(1, 0)) <= 1e-14);

    // S = M gives a unit spectrum.
    oracle::Gen g(23);
    const Eigen::MatrixXd m = random_spd(g, 5);
    const SymEigResult r3 = gen_sym_eig_top(m, m, 5);
    CHECK(max_abs(r3.values - Eigen::VectorXd::Ones(5)) <= 1e-10);
}

TEST_CASE("generalized pencil: residual and M-orthonormality") {
    oracle::Gen g(24);
    for (int rep = 0; rep < 20; ++rep) {
        const auto n = static_cast<Eigen::Index>(g.between(2, 10));
        const Eigen::MatrixXd b = g.matrix(n, n);
        const Eigen::MatrixXd s = b * b.transpose(), m = random_spd(g, n);
        const auto k = static_cast<std::size_t>(g.between(1, static_cast<std::size_t>(n)));
        const SymEigResult r = gen_sym_eig_top(s, m, k);
        const Eigen::MatrixXd& v = r.vectors;
        CHECK(max_abs(s * v - m * v * r.values.asDiagonal()) <= 1e-8 * max_abs(s));
        CHECK(max_abs(v.transpose() * m * v - Eigen::MatrixXd::Identity(v.cols(), v.cols())) <= 1e-9);
        for (Eigen::Index i = 1; i < r.values.size(); ++i) CHECK(r.values(i) <= r.values(i - 1));
    }
}

TEST_CASE("semidefinite pencil agrees with the definite solver on definite input") {
    oracle::Gen g(25);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXd b = g.matrix(6, 2);
        const Eigen::MatrixXd s = b * b.transpose(), m = random_spd(g, 6);
        const SymEigResult a = gen_sym_eig_top(s, m, 2), c = gen_sym_eig_top_semidefinite(s, m, 2);
        CHECK(max_abs(a.values - c.values) <= 1e-9 * a.values(0));
        CHECK(span_distance(a.vectors, c.vectors) <= 1e-8);
    }
    // Rank-deficient M clamps the count to rank(M).
    const Eigen::MatrixXd x = g.matrix(3, 5);
    const Eigen::MatrixXd m = x.transpose() * x;
    const SymEigResult r = gen_sym_eig_top_semidefinite(Eigen::MatrixXd::Identity(5, 5), m, 5);
    CHECK(r.vectors.cols() == 3);
    CHECK(r.clamped);
}

TEST_CASE("pseudo-inverse") {
    const Eigen::MatrixXd d = Eigen::Vector2d(2, 0).asDiagonal();
    CHECK(max_abs(pinv(d) - Eigen::MatrixXd(Eigen::Vector2d(0.5, 0).asDiagonal())) <= 1e-15);
    oracle::Gen g(26);
    for (int rep = 0; rep < 20; ++rep) {
        const auto r = static_cast<Eigen::Index>(g.between(1, 4));
        const Eigen::MatrixXd a = g.matrix(6, r) * g.matrix(r, 5);
        const Eigen::MatrixXd p = pinv(a);
        CHECK(max_abs(a * p * a - a) <= 1e-9 * max_abs(a));
        CHECK(max_abs(p * a * p - p) <= 1e-9 * max_abs(p));
        CHECK(max_abs((a * p).transpose() - a * p) <= 1e-10);
        CHECK(max_abs((p * a).transpose() - p * a) <= 1e-10);
    }
    const Eigen::MatrixXd sq = random_spd(g, 4);
    CHECK(max_abs(pinv(sq) * sq - Eigen::MatrixXd::Identity(4, 4)) <= 1e-10);
    CHECK(max_abs(pinv(Eigen::MatrixXd::Zero(3, 2))) == 0.0);
}

TEST_CASE("orthonormalize keeps the span") {
    oracle::Gen g(27);
    const Eigen::MatrixXd v = g.matrix(7, 3);
    const Eigen::MatrixXd q = orthonormalize(v);
    CHECK(max_abs(q.transpose() * q - Eigen::MatrixXd::Identity(3, 3)) <= 1e-13);
    CHECK(span_distance(q, oracle::orthonormal(g, 7, 3)) > 1e-3);
    CHECK(max_abs(q * (q.transpose() * v) - v) <= 1e-12 * max_abs(v));
}

}  // TEST_SUITE

TEST_SUITE("kernel") {

TEST_CASE("kernel values") {
    const Eigen::Vector2d x(1, 0), y(1, 1);
    CHECK(KernelSpec::polynomial(2, 1.0)(x, y) == doctest::Approx(4.0));
    CHECK(KernelSpec::polynomial(2, 0.0)(Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 0)) == doctest::Approx(4.0));
    CHECK(KernelSpec::linear()(x, y) == 1.0);
    CHECK(KernelSpec::rbf(1.0)(x, y) == doctest::Approx(std::exp(-0.5)));
    CHECK(KernelSpec::rbf(0.3)(y, y) == 1.0);
}

TEST_CASE("gram matrices") {
    oracle::Gen g(28);
    const Eigen::MatrixXd x = g.matrix(6, 3), z = g.matrix(4, 3);
    CHECK(max_abs(gram(x, KernelSpec::linear()) - x * x.transpose()) <= 1e-13);
    CHECK(gram(Eigen::MatrixXd::Identity(4, 4), KernelSpec::linear()) == Eigen::MatrixXd::Identity(4, 4));
    const Eigen::MatrixXd k = gram(x, KernelSpec::rbf(1.3));
    CHECK(max_abs(k.diagonal() - Eigen::VectorXd::Ones(6)) == 0.0);
    CHECK(max_abs(k - k.transpose()) == 0.0);
    CHECK(sym_eig(k).values.minCoeff() >= -1e-12);
    const KernelSpec poly = KernelSpec::polynomial(3, 0.5);
    const Eigen::MatrixXd c = cross_gram(poly, z, x);
    CHECK(c.rows() == 4);
    CHECK(c.cols() == 6);
    for (Eigen::Index i = 0; i < 4; ++i) {
        const Eigen::VectorXd zi = z.row(i).transpose();
        CHECK(max_abs(kernel_vec(poly, x, zi) - c.row(i).transpose()) <= 1e-13);
        CHECK(c(i, 2) == doctest::Approx(std::pow(zi.dot(x.row(2)) + 0.5, 3)));
    }
    CHECK_THROWS_AS(cross_gram(poly, z, g.matrix(2, 2)), std::invalid_argument);
}

TEST_CASE("kernel parsing") {
    CHECK(KernelSpec::parse("linear") == KernelSpec::linear());
    CHECK(KernelSpec::parse("rbf:2.5") == KernelSpec::rbf(2.5));
    CHECK(KernelSpec::parse("poly:2,1") == KernelSpec::polynomial(2, 1.0));
    CHECK(KernelSpec::parse("rbf").sigma == 0.0);
    for (const KernelSpec& k : {KernelSpec::linear(), KernelSpec::rbf(0.75), KernelSpec::polynomial(3, 0.25)})
        CHECK(KernelSpec::parse(k.to_string()) == k);
    CHECK_THROWS_AS(KernelSpec::parse("cubic"), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::parse("rbf:-1"), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::parse("poly:2.5,0"), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::parse("rbf:abc"), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::polynomial(0, 1).validate(), std::invalid_argument);
}

TEST_CASE("median heuristic") {
    Eigen::MatrixXd x(3, 1);
    x << 0, 1, 3;  // pairwise distances 1, 2, 3
    CHECK(median_heuristic_sigma(x) == doctest::Approx(2.0));
    CHECK(median_heuristic_sigma(Eigen::MatrixXd::Zero(4, 2)) == 1.0);
}

}  // TEST_SUITE
