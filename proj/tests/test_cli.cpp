#include "tensorreg/cli.hpp"
#include "tensorreg/experiment.hpp"
#include "tensorreg/image.hpp"
#include "tensorreg/model_io.hpp"
#include "tensorreg/tensor_io.hpp"

#include "doctest.h"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tensorreg;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = TENSORREG_TEST_DATA;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("tensorreg_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fit interpolates the bundled noiseless fixture") {
    const fs::path dir = scratch("fit");
    const Run r = cli({"fit", "--x", (kData / "x.csv").string(), "--y", (kData / "y.dten").string(), "--ranks",
                       "2,2,2", "--gamma", "0", "--out", (dir / "m.holrr").string()});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("command") == "fit");
    CHECK(j.at("train_rmse").get<double>() <= 1e-7);
    CHECK(j.at("ranks") == json::array({2, 2, 2}));
    CHECK(j.at("fit_seconds").get<double>() >= 0);

    const Run again = cli({"fit", "--x", (kData / "x.csv").string(), "--y", (kData / "y.dten").string(), "--ranks",
                           "2,2,2", "--gamma", "0", "--out", (dir / "m2.holrr").string()});
    REQUIRE(again.code == 0);
    CHECK(slurp(dir / "m.holrr") == slurp(dir / "m2.holrr"));

    const Run kern = cli({"fit", "--x", (kData / "x.csv").string(), "--y", (kData / "y.dten").string(), "--ranks",
                          "2,2,2", "--gamma", "0", "--kernel", "linear", "--out", (dir / "k.holrr").string()});
    REQUIRE(kern.code == 0);
    CHECK(json::parse(kern.out).at("train_rmse").get<double>() <= 1e-7);
    CHECK(json::parse(kern.out).at("kernel") == "linear");
}

TEST_CASE("fit usage errors exit with 2") {
    const fs::path dir = scratch("fit_err");
    const std::string x = (kData / "x.csv").string(), y = (kData / "y.dten").string();
    CHECK(cli({"fit", "--x", x, "--y", y, "--out", (dir / "m.holrr").string()}).code == kExitUsage);
    CHECK(cli({"fit", "--x", x, "--y", y, "--ranks", "2,x,2", "--out", (dir / "m.holrr").string()}).code == kExitUsage);
    CHECK(cli({"fit", "--x", x, "--y", y, "--ranks", "2,2", "--out", (dir / "m.holrr").string()}).code == kExitUsage);
    CHECK(cli({"fit", "--x", (dir / "none.csv").string(), "--y", y, "--ranks", "2,2,2"}).code == kExitUsage);
    CHECK(cli({"fit", "--x", x, "--y", y, "--ranks", "2,2,2", "--kernel", "cubic",
               "--out", (dir / "m.holrr").string()}).code == kExitUsage);
    CHECK_FALSE(fs::exists(dir / "m.holrr"));
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"bogus"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("numerical failures exit with 3") {
    const fs::path dir = scratch("numeric");
    save_csv(dir / "x.csv", Eigen::MatrixXd::Ones(3, 2));
    DenseTensor y({3, 2, 2});
    y[0] = std::numeric_limits<double>::quiet_NaN();
    save_dten(dir / "y.dten", y);
    CHECK(cli({"fit", "--x", (dir / "x.csv").string(), "--y", (dir / "y.dten").string(), "--ranks", "1,1,1",
               "--out", (dir / "m.holrr").string()}).code == kExitNumerical);
}

TEST_CASE("predict on zero inputs writes a zero tensor") {
    const fs::path dir = scratch("predict");
    REQUIRE(cli({"fit", "--x", (kData / "x.csv").string(), "--y", (kData / "y.dten").string(), "--ranks", "2,2,2",
                 "--out", (dir / "m.holrr").string()}).code == 0);
    save_csv(dir / "zeros.csv", Eigen::MatrixXd::Zero(2, 4));
    const Run r = cli({"predict", "--model", (dir / "m.holrr").string(), "--x", (dir / "zeros.csv").string(),
                       "--out", (dir / "p.dten").string()});
    REQUIRE(r.code == 0);
    const DenseTensor p = load_dten(dir / "p.dten");
    CHECK(p.shape() == Shape{2, 3, 3});
    CHECK(frobenius_norm(p) == 0.0);
    save_csv(dir / "wide.csv", Eigen::MatrixXd::Zero(2, 5));
    CHECK(cli({"predict", "--model", (dir / "m.holrr").string(), "--x", (dir / "wide.csv").string(), "--out",
               (dir / "q.dten").string()}).code == kExitUsage);
    CHECK_FALSE(fs::exists(dir / "q.dten"));
}

TEST_CASE("tensor inspect and convert") {
    const fs::path dir = scratch("tensor");
    const Run info = cli({"tensor", "inspect", (kData / "y.dten").string()});
    REQUIRE(info.code == 0);
    const json j = json::parse(info.out);
    CHECK(j.at("shape") == json::array({20, 3, 3}));
    CHECK(j.at("multilinear_rank") == json::array({2, 2, 2}));
    REQUIRE(cli({"tensor", "convert", (kData / "x.csv").string(), (dir / "x.dten").string()}).code == 0);
    REQUIRE(cli({"tensor", "convert", (dir / "x.dten").string(), (dir / "x.csv").string()}).code == 0);
    CHECK(slurp(dir / "x.csv") == slurp(kData / "x.csv"));
    CHECK(cli({"tensor", "convert", (kData / "y.dten").string(), (dir / "y.csv").string()}).code == kExitUsage);
}

TEST_CASE("ingest-met builds forecast files") {
    const fs::path dir = scratch("ingest");
    const Run r = cli({"ingest-met", "--synthetic", "--seed", "5", "--horizon", "5", "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    const DenseTensor x = load_dten(dir / "x.dten"), y = load_dten(dir / "y.dten");
    CHECK(x.dim(1) == 160);
    CHECK(y.shape() == Shape{x.dim(0), 5, 16, 5});
    CHECK(fs::exists(dir / "months.csv"));
    const Run from_dir = cli({"ingest-met", "--dir", (dir / "stations").string(), "--horizon", "5", "--out-dir",
                              (dir / "again").string()});
    REQUIRE(from_dir.code == 0);
    CHECK(slurp(dir / "again" / "y.dten") == slurp(dir / "y.dten"));
    CHECK(cli({"ingest-met", "--dir", (dir / "nowhere").string()}).code == kExitUsage);
}

TEST_CASE("experiment image writes reconstructions") {
    const fs::path dir = scratch("image");
    const Run r = cli({"experiment", "image", "--task", "channels", "--out-dir", dir.string(), "--no-timing"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "channels_truth.ppm"));
    CHECK(fs::exists(dir / "channels_HOLRR_3-1-1.ppm"));
    const DenseTensor img = load_ppm(dir / "channels_truth.ppm");
    CHECK(img.dim(2) == 3);
    CHECK(cli({"experiment", "nonsense", "--out-dir", dir.string()}).code == kExitUsage);
}

TEST_CASE("experiment flags override the config file") {
    const fs::path dir = scratch("precedence");
    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << R"({"seed": 1, "sizes": [10], "trials": 1, "test_size": 5, "input_dim": 3, "output_shape": [2, 2],
                   "true_ranks": [1, 1, 1], "methods": ["rls"], "gammas": [0.1]})";
    }
    const Run r = cli({"experiment", "synth-linear", "--config", (dir / "cfg.json").string(), "--seed", "7",
                       "--no-timing", "--out-dir", (dir / "out").string()});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(dir / "out" / "report.csv");
    const json report = json::parse(slurp(dir / "out" / "report.json"));
    CHECK(report.at("seed") == 7);
    CHECK(report.at("sizes") == json::array({10}));
    CHECK(report.at("records") == 1);
    CHECK(fs::exists(dir / "out" / "plot_synth-linear.csv"));
    const Run rerun = cli({"experiment", "synth-linear", "--config", (dir / "cfg.json").string(), "--seed", "7",
                           "--no-timing", "--out-dir", (dir / "out2").string()});
    REQUIRE(rerun.code == 0);
    CHECK(slurp(dir / "out2" / "report.csv") == csv);
}

}  // TEST_SUITE
