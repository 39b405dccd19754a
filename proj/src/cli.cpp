#include "tensorreg/cli.hpp"

#include "tensorreg/estimator.hpp"
#include "tensorreg/experiment.hpp"
#include "tensorreg/metoffice.hpp"
#include "tensorreg/model_io.hpp"
#include "tensorreg/tensor_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tensorreg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Failures that map to exit code 3.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Shape parse_ranks(const std::string& text) {
    Shape out;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) {
        std::size_t pos = 0;
        long v = -1;
        try {
            v = std::stol(tok, &pos);
        } catch (...) {
            pos = 0;
        }
        if (pos != tok.size() || v < 1) throw std::invalid_argument("malformed ranks '" + text + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw std::invalid_argument("malformed ranks '" + text + "'");
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw IoError("cannot open " + p.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void check_finite(const DenseTensor& t, const char* what) {
    for (double v : t.data())
        if (!std::isfinite(v)) throw NumericalFailure(std::string(what) + " contains non-finite values");
}

void save_by_extension(const fs::path& p, const DenseTensor& t) {
    if (p.extension() == ".csv") {
        if (t.order() > 2) throw std::invalid_argument("CSV output needs an order-1 or order-2 tensor");
        const Eigen::MatrixXd m = t.order() == 2 ? t.to_matrix() : Eigen::MatrixXd(t.vec().transpose());
        save_csv(p, m);
    } else {
        save_dten(p, t);
    }
}

struct FitArgs {
    std::string x, y, ranks, kernel, out = "model.holrr";
    double gamma = kDefaultGamma;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const Eigen::MatrixXd x = load_matrix(a.x);
    const DenseTensor y = load_tensor(a.y);
    const Shape ranks = parse_ranks(a.ranks);
    if (y.order() < 2 || y.dim(0) != static_cast<std::size_t>(x.rows()))
        throw std::invalid_argument("--y has shape " + shape_to_string(y.shape()) + " but --x has " +
                                    std::to_string(x.rows()) + " rows");
    if (x.hasNaN() || !x.allFinite()) throw std::invalid_argument("--x contains non-finite values");
    check_finite(y, "--y");

    const auto t0 = std::chrono::steady_clock::now();
    AnyModel model;
    Warnings warnings;
    Shape effective;
    std::string kernel_name = "none";
    if (a.kernel.empty()) {
        HolrrModel m = holrr_fit({x, y, a.gamma, ranks});
        warnings = m.warnings;
        effective = m.ranks;
        model = std::move(m);
    } else {
        const KernelSpec k = resolve_kernel(KernelSpec::parse(a.kernel), x);
        KernelHolrrModel m = kholrr_fit(gram(x, k), y, ranks, a.gamma, x, k);
        kernel_name = k.to_string();
        warnings = m.warnings;
        effective = m.ranks;
        model = std::move(m);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const DenseTensor pred = predict(model, x);
    check_finite(pred, "training predictions");
    const double train_rmse = rmse(pred, y);
    save_model(a.out, model);
    out << json{{"command", "fit"},        {"model", a.out},         {"train_rmse", train_rmse},
                {"fit_seconds", seconds},  {"ranks", effective},     {"gamma", a.gamma},
                {"kernel", kernel_name},
                {"warnings", warnings}}
               .dump()
        << '\n';
    return 0;
}

struct PredictArgs {
    std::string model, x, out = "predictions.dten";
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    const AnyModel model = load_model(a.model);
    const Eigen::MatrixXd x = load_matrix(a.x);
    if (static_cast<std::size_t>(x.cols()) != model_input_dim(model))
        throw std::invalid_argument("--x has " + std::to_string(x.cols()) + " columns, the model expects " +
                                    std::to_string(model_input_dim(model)));
    const DenseTensor pred = predict(model, x);
    check_finite(pred, "predictions");
    save_dten(a.out, pred);
    out << json{{"command", "predict"}, {"output", a.out}, {"shape", pred.shape()}}.dump() << '\n';
    return 0;
}

struct ExperimentArgs {
    std::string name, config, out_dir, image, task, met_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    bool quick = false, no_timing = false;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg = ExperimentConfig::defaults(a.name, a.quick);
    if (const char* env = std::getenv("TENSORREG_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (...) {
            throw std::invalid_argument(std::string("TENSORREG_SEED is not an integer: '") + env + "'");
        }
    }
    if (!a.config.empty()) apply_config_json(cfg, read_file(a.config));
    if (a.seed) cfg.seed = *a.seed;
    if (a.jobs) cfg.jobs = *a.jobs;
    if (a.no_timing) cfg.timing = false;
    if (!a.image.empty()) cfg.image_path = a.image;
    if (!a.task.empty()) cfg.image_task = parse_image_task(a.task);
    if (!a.met_dir.empty()) cfg.met_dir = a.met_dir;
    const fs::path dir = a.out_dir.empty() ? fs::path("results") / a.name : fs::path(a.out_dir);

    err << "running " << a.name << " (seed " << cfg.seed << ", " << cfg.sizes.size() << " sizes x " << cfg.trials
        << " trials, " << cfg.methods.size() << " methods)\n";
    const ExperimentReport report = run_experiment(cfg, dir);
    for (const auto& g : report.aggregates()) {
        if (!std::isfinite(g.mean_rmse)) throw NumericalFailure(g.method + " produced a non-finite RMSE");
        out << json{{"command", "experiment"}, {"experiment", a.name}, {"method", g.method}, {"kernel", g.kernel},
                    {"N", g.n}, {"k", g.k}, {"trials", g.count}, {"mean_rmse", g.mean_rmse},
                    {"std_rmse", g.std_rmse}, {"mean_fit_seconds", g.mean_fit_seconds}}
                   .dump()
            << '\n';
    }
    out << json{{"command", "experiment"}, {"experiment", a.name}, {"output_dir", dir.string()},
                {"records", report.records.size()}}
               .dump()
        << '\n';
    return 0;
}

int cmd_tensor_inspect(const std::string& path, std::ostream& out) {
    const DenseTensor t = load_tensor(path);
    const auto [mn, mx] = std::minmax_element(t.data().begin(), t.data().end());
    out << json{{"command", "tensor inspect"}, {"file", path},          {"shape", t.shape()},
                {"size", t.size()},            {"norm", frobenius_norm(t)}, {"min", *mn},
                {"max", *mx},                  {"multilinear_rank", multilinear_rank(t)}}
               .dump()
        << '\n';
    return 0;
}

int cmd_tensor_convert(const std::string& in, const std::string& to, std::ostream& out) {
    const DenseTensor t = load_tensor(in);
    save_by_extension(to, t);
    out << json{{"command", "tensor convert"}, {"input", in}, {"output", to}, {"shape", t.shape()}}.dump() << '\n';
    return 0;
}

struct IngestArgs {
    std::string dir, stations, out_dir = "forecast";
    std::size_t horizon = 1, window = 2;
    bool synthetic = false;
    std::uint64_t seed = 0;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
    const fs::path out_dir = a.out_dir;
    fs::create_directories(out_dir);
    std::vector<StationSeries> series;
    if (a.synthetic) {
        series = synthetic_stations(16, 1960, 2000, a.seed);
        fs::create_directories(out_dir / "stations");
        for (const auto& s : series)
            atomic_write(out_dir / "stations" / (s.name + ".txt"), [&](std::ostream& os) { write_station_file(os, s); });
    } else {
        if (a.dir.empty()) throw std::invalid_argument("ingest-met needs --dir or --synthetic");
        std::vector<std::string> names;
        std::stringstream ss(a.stations);
        for (std::string tok; std::getline(ss, tok, ',');)
            if (!tok.empty()) names.push_back(tok);
        series = load_metoffice(a.dir, names);
    }
    const ForecastDataset d = build_forecast_dataset(series, a.window, a.horizon);
    save_dten(out_dir / "x.dten", DenseTensor::from_matrix(d.x));
    save_dten(out_dir / "y.dten", d.y);
    atomic_write(out_dir / "months.csv", [&](std::ostream& os) {
        os << "row,year,month\n";
        for (std::size_t i = 0; i < d.target_month.size(); ++i)
            os << i << ',' << d.target_month[i] / 12 << ',' << d.target_month[i] % 12 + 1 << '\n';
    });
    out << json{{"command", "ingest-met"}, {"stations", d.station_names}, {"samples", d.target_month.size()},
                {"x_shape", {d.x.rows(), d.x.cols()}}, {"y_shape", d.y.shape()}, {"output_dir", out_dir.string()}}
               .dump()
        << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tensor-response regression: HOLRR, LRR and RLS with kernels, generators and experiments",
                 "tensorreg"};
    app.require_subcommand(1);

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a HOLRR model and write it as a HOLRR v1 file");
    fit_cmd->add_option("--x", fa.x, "Input matrix (CSV or DTEN), N x d0")->required();
    fit_cmd->add_option("--y", fa.y, "Output tensor (DTEN or CSV), N x d1 x ... x dp")->required();
    fit_cmd->add_option("--ranks", fa.ranks, "Comma-separated R0,R1,...,Rp")->required();
    fit_cmd->add_option("--gamma", fa.gamma, "Ridge weight (>= 0)")->capture_default_str();
    fit_cmd->add_option("--kernel", fa.kernel, "linear | rbf[:sigma] | poly:d,c (enables kernel HOLRR)");
    fit_cmd->add_option("--out", fa.out, "Model file")->capture_default_str();

    PredictArgs pa;
    auto* predict_cmd = app.add_subcommand("predict", "Predict outputs for input rows");
    predict_cmd->add_option("--model", pa.model, "HOLRR v1 model file")->required();
    predict_cmd->add_option("--x", pa.x, "Input rows (CSV or DTEN)")->required();
    predict_cmd->add_option("--out", pa.out, "Prediction tensor (DTEN)")->capture_default_str();

    ExperimentArgs ea;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a seeded experiment and write reports");
    exp_cmd->add_option("name", ea.name, "synth-linear | synth-nonlinear | image | forecast")->required();
    exp_cmd->add_option("--config", ea.config, "JSON config file");
    exp_cmd->add_option("--out-dir", ea.out_dir, "Output directory (default results/<name>)");
    exp_cmd->add_option("--seed", ea.seed, "Seed (overrides config and TENSORREG_SEED)");
    exp_cmd->add_option("--jobs", ea.jobs, "Worker threads (default 1)");
    exp_cmd->add_flag("--quick", ea.quick, "Reduced sizes and trials");
    exp_cmd->add_flag("--no-timing", ea.no_timing, "Write fit_seconds = 0 for byte-stable reports");
    exp_cmd->add_option("--image", ea.image, "PPM image for the image experiment");
    exp_cmd->add_option("--task", ea.task, "channels | height (image experiment)");
    exp_cmd->add_option("--met-dir", ea.met_dir, "Met Office station directory (forecast experiment)");

    auto* tensor_cmd = app.add_subcommand("tensor", "Inspect or convert tensor files");
    tensor_cmd->require_subcommand(1);
    std::string inspect_path, convert_in, convert_out;
    auto* inspect_cmd = tensor_cmd->add_subcommand("inspect", "Print shape and summary statistics");
    inspect_cmd->add_option("file", inspect_path)->required();
    auto* convert_cmd = tensor_cmd->add_subcommand("convert", "Convert between DTEN and CSV by extension");
    convert_cmd->add_option("input", convert_in)->required();
    convert_cmd->add_option("output", convert_out)->required();

    IngestArgs ia;
    auto* ingest_cmd = app.add_subcommand("ingest-met", "Build forecast dataset files from station data");
    ingest_cmd->add_option("--dir", ia.dir, "Station directory");
    ingest_cmd->add_option("--stations", ia.stations, "Comma-separated station file names");
    ingest_cmd->add_option("--horizon", ia.horizon, "Months to predict (k)")->capture_default_str();
    ingest_cmd->add_option("--window", ia.window, "Covariate months")->capture_default_str();
    ingest_cmd->add_option("--out-dir", ia.out_dir, "Output directory")->capture_default_str();
    ingest_cmd->add_flag("--synthetic", ia.synthetic, "Generate 16 synthetic stations instead of reading --dir");
    ingest_cmd->add_option("--seed", ia.seed, "Seed for --synthetic");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fa, out);
        if (predict_cmd->parsed()) return cmd_predict(pa, out);
        if (exp_cmd->parsed()) return cmd_experiment(ea, out, err);
        if (inspect_cmd->parsed()) return cmd_tensor_inspect(inspect_path, out);
        if (convert_cmd->parsed()) return cmd_tensor_convert(convert_in, convert_out, out);
        if (ingest_cmd->parsed()) return cmd_ingest(ia, out);
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NotPositiveDefinite& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace tensorreg
