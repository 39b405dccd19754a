#include "oracle.hpp"

#include "tensorreg/image.hpp"
#include "tensorreg/model_io.hpp"
#include "tensorreg/tensor_io.hpp"

#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace tensorreg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("tensorreg_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool bit_equal(const DenseTensor& a, const DenseTensor& b) {
    return a.shape() == b.shape() && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("DTEN header and round trip") {
    const DenseTensor t({2, 1, 3}, {1.5, -2, 0.1, 1e-300, 3, std::numeric_limits<double>::infinity()});
    std::ostringstream os(std::ios::binary);
    write_dten(os, t);
    const std::string bytes = os.str();
    CHECK(bytes.rfind("DTEN 1 3 2 1 3\n", 0) == 0);
    CHECK(bytes.size() == std::string("DTEN 1 3 2 1 3\n").size() + 6 * sizeof(double));
    std::istringstream is(bytes, std::ios::binary);
    CHECK(bit_equal(read_dten(is), t));

    oracle::Gen g(51);
    for (int rep = 0; rep < 10; ++rep) {
        const DenseTensor r = g.tensor(g.shape(g.between(1, 4), 4));
        std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
        write_dten(ss, r);
        CHECK(bit_equal(read_dten(ss), r));
    }
}

TEST_CASE("malformed DTEN input") {
    for (const char* text : {"", "DTEN 2 1 1\n", "DTEN 1 2 2\n", "DTEN 1 1 0\n", "XTEN 1 1 1\n", "DTEN 1 1 2\n\x01\x02"}) {
        std::istringstream is(std::string(text), std::ios::binary);
        CHECK_THROWS_AS(read_dten(is), IoError);
    }
}

TEST_CASE("CSV round trip and parsing") {
    oracle::Gen g(52);
    const Eigen::MatrixXd m = g.matrix(4, 3);
    std::stringstream ss;
    write_csv(ss, m);
    CHECK(bit_equal(read_csv(ss), m));

    std::istringstream mixed("# comment\n1, 2 3\n\n4 5,6\n");
    Eigen::MatrixXd expected(2, 3);
    expected << 1, 2, 3, 4, 5, 6;
    CHECK(read_csv(mixed) == expected);
    std::istringstream ragged("1,2\n3\n");
    CHECK_THROWS_AS(read_csv(ragged), IoError);
    std::istringstream junk("1,x\n");
    CHECK_THROWS_AS(read_csv(junk), IoError);
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("file helpers detect the format") {
    const fs::path dir = scratch_dir("files");
    oracle::Gen g(53);
    const Eigen::MatrixXd m = g.matrix(3, 2);
    save_csv(dir / "m.csv", m);
    save_dten(dir / "m.dten", DenseTensor::from_matrix(m));
    CHECK(bit_equal(load_matrix(dir / "m.csv"), m));
    CHECK(bit_equal(load_matrix(dir / "m.dten"), m));
    CHECK(load_tensor(dir / "m.csv").shape() == Shape{3, 2});
    save_dten(dir / "v.dten", DenseTensor({3}, {1, 2, 3}));
    CHECK(load_matrix(dir / "v.dten") == Eigen::RowVector3d(1, 2, 3));
    save_dten(dir / "c.dten", DenseTensor({2, 2, 2}));
    CHECK_THROWS_AS(load_matrix(dir / "c.dten"), IoError);
    CHECK_THROWS_AS(load_tensor(dir / "missing.dten"), IoError);
    CHECK_FALSE(fs::exists(dir / "m.dten.tmp"));
}

TEST_CASE("primal model files round-trip bit for bit") {
    oracle::Gen g(54);
    const Eigen::MatrixXd x = g.matrix(12, 4);
    const DenseTensor y = g.tensor({12, 3, 5});
    const HolrrModel m = holrr_fit({x, y, 0.01, {9, 2, 3}});
    REQUIRE_FALSE(m.warnings.empty());
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_model(ss, m);
    const std::string first = ss.str();
    CHECK(first.rfind("HOLRR 1\n", 0) == 0);
    const AnyModel back = read_model(ss);
    REQUIRE(std::holds_alternative<HolrrModel>(back));
    const auto& r = std::get<HolrrModel>(back);
    CHECK(bit_equal(r.factors.core, m.factors.core));
    for (std::size_t i = 0; i < m.factors.factors.size(); ++i) CHECK(bit_equal(r.factors.factors[i], m.factors.factors[i]));
    CHECK(r.gamma == m.gamma);
    CHECK(r.ranks == m.ranks);
    CHECK(r.warnings == m.warnings);
    std::ostringstream again(std::ios::binary);
    write_model(again, back);
    CHECK(again.str() == first);
    CHECK(bit_equal(predict(back, x), holrr_predict(m, x)));
    CHECK(model_input_dim(back) == 4);
}

TEST_CASE("kernel model files round-trip bit for bit") {
    oracle::Gen g(55);
    const Eigen::MatrixXd x = g.matrix(10, 3);
    const DenseTensor y = g.tensor({10, 2, 2});
    const KernelSpec k = KernelSpec::rbf(0.7);
    const KernelHolrrModel m = kholrr_fit(gram(x, k), y, Shape{3, 2, 1}, 0.1, x, k);
    const fs::path dir = scratch_dir("model");
    save_model(dir / "k.holrr", m);
    const AnyModel back = load_model(dir / "k.holrr");
    REQUIRE(std::holds_alternative<KernelHolrrModel>(back));
    const auto& r = std::get<KernelHolrrModel>(back);
    CHECK(bit_equal(r.coeff, m.coeff));
    CHECK(bit_equal(r.train_inputs, m.train_inputs));
    CHECK(bit_equal(r.dual_basis, m.dual_basis));
    CHECK(r.kernel == k);
    const Eigen::MatrixXd xs = g.matrix(4, 3);
    CHECK(bit_equal(predict(back, xs), kholrr_predict(m, xs)));
}

TEST_CASE("malformed model files") {
    for (const char* text : {"", "HOLRR 2\n{}\n", "HOLRR 1\nnot json\n", "HOLRR 1\n{\"kind\":\"primal\"}\n"}) {
        std::istringstream is(std::string(text), std::ios::binary);
        CHECK_THROWS_AS(read_model(is), IoError);
    }
}

TEST_CASE("PPM images") {
    std::istringstream p3("P3\n# tiny\n2 1\n255\n255 0 0  0 51 255\n");
    const DenseTensor img = read_ppm(p3);
    CHECK(img.shape() == Shape{1, 2, 3});
    CHECK(img.at({0, 0, 0}) == 1.0);
    CHECK(img.at({0, 1, 1}) == doctest::Approx(0.2));
    CHECK(img.at({0, 1, 2}) == 1.0);

    std::ostringstream os(std::ios::binary);
    write_ppm(os, img);
    CHECK(os.str().rfind("P6\n", 0) == 0);
    std::istringstream p6(os.str(), std::ios::binary);
    CHECK(read_ppm(p6) == img);

    DenseTensor out_of_range({1, 1, 3}, {-0.5, 0.5, 2.0});
    std::ostringstream clamped(std::ios::binary);
    write_ppm(clamped, out_of_range);
    std::istringstream back(clamped.str(), std::ios::binary);
    const DenseTensor c = read_ppm(back);
    CHECK(c.at({0, 0, 0}) == 0.0);
    CHECK(c.at({0, 0, 1}) == 128.0 / 255.0);
    CHECK(c.at({0, 0, 2}) == 1.0);

    std::istringstream bad("P3\n1 1\n65535\n0 0 0\n");
    CHECK_THROWS_AS(read_ppm(bad), IoError);
    std::istringstream truncated("P3\n2 2\n255\n0 0 0\n");
    CHECK_THROWS_AS(read_ppm(truncated), IoError);
}

}  // TEST_SUITE
