#include "tensorreg/experiment.hpp"

#include "tensorreg/image.hpp"
#include "tensorreg/metoffice.hpp"
#include "tensorreg/rng.hpp"
#include "tensorreg/tensor_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

namespace tensorreg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t unit_seed(std::uint64_t seed, const std::string& tag) { return derive_seed(seed, tag); }

/// Runs f(0..count-1) on up to `jobs` threads; the first exception wins.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& f) {
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Final fit on the full training set; with timing on, the median wall time of 3 repetitions.
Fitted timed_fit(const MethodSpec& spec, const Hyper& h, const Eigen::MatrixXd& x, const DenseTensor& y, bool timing,
                 double& seconds) {
    if (!timing) {
        seconds = 0.0;
        return fit(spec, h, x, y);
    }
    std::vector<double> times;
    Fitted out;
    for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        out = fit(spec, h, x, y);
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    seconds = times[1];
    return out;
}

std::vector<std::size_t> lrr_candidates(std::size_t limit) {
    static constexpr std::size_t ladder[] = {1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 25, 32, 40, 50, 64, 80};
    std::vector<std::size_t> out;
    for (std::size_t r : ladder)
        if (r <= limit) out.push_back(r);
    return out;
}

/// Candidate rank tuples for one method.
std::vector<Shape> rank_grid(const ExperimentConfig& cfg, const MethodSpec& m, const std::vector<Shape>& holrr_default,
                             std::size_t lrr_limit) {
    switch (m.method) {
        case Method::Rls:
            return {Shape{}};
        case Method::Lrr: {
            std::vector<Shape> out;
            for (std::size_t r : cfg.lrr_ranks.empty() ? lrr_candidates(lrr_limit) : cfg.lrr_ranks) out.push_back({r});
            return out;
        }
        case Method::Holrr:
            return cfg.holrr_ranks.empty() ? holrr_default : cfg.holrr_ranks;
    }
    return {};
}

TrialRecord make_record(const ExperimentConfig& cfg, const MethodSpec& m, std::size_t n, std::size_t k,
                        std::size_t trial, std::uint64_t seed, double rmse_value, double seconds) {
    return {cfg.name, m.name(), m.kernel_name(), n, k, trial, seed, rmse_value, seconds};
}

// ---------------------------------------------------------------------------

ExperimentReport run_synth(const ExperimentConfig& cfg) {
    const bool nonlinear = cfg.name == "synth-nonlinear";
    const std::size_t feature_dim = nonlinear ? cfg.synth.input_dim * cfg.synth.input_dim : cfg.synth.input_dim;
    cfg.synth.validate(feature_dim);
    Shape dims{feature_dim};
    dims.insert(dims.end(), cfg.synth.output_shape.begin(), cfg.synth.output_shape.end());
    const std::vector<Shape> holrr_default = ranks_around(cfg.synth.ranks, dims, 2);
    const std::size_t outputs = shape_product(cfg.synth.output_shape);

    struct Unit {
        std::size_t n, trial;
    };
    std::vector<Unit> units;
    for (std::size_t n : cfg.sizes)
        for (std::size_t t = 0; t < cfg.trials; ++t) units.push_back({n, t});
    std::vector<std::vector<TrialRecord>> results(units.size());

    parallel_for(units.size(), cfg.jobs, [&](std::size_t u) {
        const auto [n, trial] = units[u];
        SynthSpec spec = cfg.synth;
        spec.n_train = n;
        spec.n_test = cfg.test_size;
        spec.seed = unit_seed(cfg.seed, "synth/" + std::to_string(n) + "/" + std::to_string(trial));
        const SynthData data = nonlinear ? gen_nonlinear_synthetic(spec) : gen_linear_synthetic(spec);
        for (const MethodSpec& m : cfg.methods) {
            const std::size_t limit = std::min(m.kernel ? n : feature_dim, outputs);
            GridSpec grid{cfg.gammas, rank_grid(cfg, m, holrr_default, limit), cfg.folds, derive_seed(spec.seed, "cv")};
            const CvResult cv = grid_search_cv(m, data.x_train, data.y_train, grid);
            double seconds = 0;
            const Fitted f = timed_fit(m, cv.best, data.x_train, data.y_train, cfg.timing, seconds);
            results[u].push_back(make_record(cfg, m, n, 0, trial, spec.seed, rmse(f.predict(data.x_test), data.y_test),
                                             seconds));
        }
    });
    ExperimentReport r{cfg.name, {}};
    for (auto& v : results) r.records.insert(r.records.end(), v.begin(), v.end());
    return r;
}

// ---------------------------------------------------------------------------

std::string rank_label(const Shape& r) {
    std::string s;
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "-" : "") + std::to_string(r[i]);
    return s;
}

DenseTensor weight_estimate(const Fitted& f, std::size_t input_dim) {
    if (const auto* m = std::get_if<HolrrModel>(&f.model)) return m->weights();
    const auto& lin = std::get<Fitted::Linear>(f.model);
    Shape shape{input_dim};
    shape.insert(shape.end(), f.output_shape.begin(), f.output_shape.end());
    return DenseTensor(shape, std::vector<double>(lin.w.data(), lin.w.data() + lin.w.size()));
}

ExperimentReport run_image(const ExperimentConfig& cfg, const std::optional<fs::path>& out_dir) {
    const DenseTensor image = cfg.image_path ? load_ppm(*cfg.image_path) : green_cross_image(50);
    const std::size_t n = cfg.sizes.empty() ? 200 : cfg.sizes.front();
    const bool channels = cfg.image_task == ImageTask::Channels;
    const char* task = channels ? "channels" : "height";

    std::vector<Shape> holrr = cfg.holrr_ranks;
    std::vector<std::size_t> lrr = cfg.lrr_ranks;
    if (holrr.empty()) holrr = channels ? std::vector<Shape>{{3, 1, 1}, {3, 2, 2}, {3, 5, 5}} : std::vector<Shape>{{2, 2, 3}, {4, 4, 3}, {8, 8, 3}};
    if (lrr.empty()) lrr = channels ? std::vector<std::size_t>{1, 2} : std::vector<std::size_t>{2, 5, 10};

    struct Unit {
        MethodSpec m;
        Hyper h;
    };
    std::vector<Unit> units;
    for (const MethodSpec& m : cfg.methods) {
        if (m.kernel) throw std::invalid_argument("the image experiment supports primal methods only");
        if (m.method == Method::Lrr) {
            for (std::size_t r : lrr) units.push_back({m, {cfg.image_gamma, {r}}});
        } else {
            for (const Shape& r : rank_grid(cfg, m, holrr, 0)) units.push_back({m, {cfg.image_gamma, r}});
        }
    }

    std::vector<TrialRecord> records;
    const std::uint64_t seed = unit_seed(cfg.seed, std::string("image/") + task);
    for (std::size_t trial = 0; trial < std::max<std::size_t>(cfg.trials, 1); ++trial) {
        const std::uint64_t tseed = derive_seed(seed, std::to_string(trial));
        const ImageData data = gen_image_measurements(image, cfg.image_task, n, cfg.image_noise, tseed);
        std::vector<TrialRecord> rec(units.size());
        std::vector<DenseTensor> recon(units.size());
        parallel_for(units.size(), cfg.jobs, [&](std::size_t i) {
            double seconds = 0;
            const Fitted f = timed_fit(units[i].m, units[i].h, data.x, data.y, cfg.timing, seconds);
            const DenseTensor w = weight_estimate(f, data.w.dim(0));
            std::string label = units[i].m.name();
            if (!units[i].h.ranks.empty()) label += "(" + rank_label(units[i].h.ranks) + ")";
            rec[i] = {cfg.name, label, "none", n, 0, trial, tseed, rmse(w, data.w), seconds};
            recon[i] = weight_tensor_image(w, cfg.image_task);
        });
        records.insert(records.end(), rec.begin(), rec.end());
        if (out_dir && trial == 0) {
            save_ppm(*out_dir / (std::string(task) + "_truth.ppm"), image);
            for (std::size_t i = 0; i < units.size(); ++i) {
                std::string file = std::string(task) + "_" + units[i].m.name();
                if (!units[i].h.ranks.empty()) file += "_" + rank_label(units[i].h.ranks);
                save_ppm(*out_dir / (file + ".ppm"), recon[i]);
            }
        }
    }
    return {cfg.name, std::move(records)};
}

// ---------------------------------------------------------------------------

std::vector<Shape> forecast_holrr_grid(std::size_t k, std::size_t stations, std::size_t d0) {
    std::vector<std::size_t> r1{1, (k + 1) / 2, k};
    std::sort(r1.begin(), r1.end());
    r1.erase(std::unique(r1.begin(), r1.end()), r1.end());
    std::vector<std::size_t> r0, r2;
    for (std::size_t r : {5, 10, 20})
        if (r <= d0) r0.push_back(r);
    for (std::size_t r : {2, 4, 8})
        if (r <= stations) r2.push_back(r);
    if (r0.empty()) r0.push_back(d0);
    if (r2.empty()) r2.push_back(stations);
    return rank_product({r0, r1, r2, {2, 3, 5}});
}

ExperimentReport run_forecast(const ExperimentConfig& cfg) {
    const std::vector<StationSeries> series =
        cfg.met_dir ? load_metoffice(*cfg.met_dir, cfg.stations) : synthetic_stations(16, 1960, 2000, cfg.seed);

    struct Unit {
        std::size_t k, n, trial;
    };
    std::vector<ForecastDataset> datasets;
    std::vector<Unit> units;
    for (std::size_t k : cfg.horizons) {
        datasets.push_back(build_forecast_dataset(series, cfg.window, k));
        for (std::size_t n : cfg.sizes)
            for (std::size_t t = 0; t < cfg.trials; ++t) units.push_back({k, n, t});
    }
    std::vector<std::vector<TrialRecord>> results(units.size());

    parallel_for(units.size(), cfg.jobs, [&](std::size_t u) {
        const auto [k, n, trial] = units[u];
        const auto h = static_cast<std::size_t>(std::find(cfg.horizons.begin(), cfg.horizons.end(), k) -
                                                cfg.horizons.begin());
        const ForecastDataset& d = datasets[h];
        const std::size_t total = d.target_month.size();
        const std::size_t need = n + cfg.validation_size + cfg.test_size;
        if (total < need)
            throw std::invalid_argument("forecast dataset for k = " + std::to_string(k) + " has " +
                                        std::to_string(total) + " samples, need " + std::to_string(need));
        const std::uint64_t seed =
            unit_seed(cfg.seed, "forecast/" + std::to_string(k) + "/" + std::to_string(n) + "/" + std::to_string(trial));
        std::vector<std::size_t> perm(total);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(seed, "split");
        rng.shuffle(perm);
        const std::span<const std::size_t> all(perm);
        const auto train = all.subspan(0, n);
        const auto val = all.subspan(n, cfg.validation_size);
        const auto test = all.subspan(n + cfg.validation_size, cfg.test_size);

        Eigen::MatrixXd x = d.x;
        DenseTensor y = d.y;
        if (cfg.zscore) {
            const VariableScaler sc = VariableScaler::fit(d, train);
            x = sc.transform_x(d, x);
            y = sc.transform_y(y);
        }
        const auto xtr = take_matrix_rows(x, train), xva = take_matrix_rows(x, val), xte = take_matrix_rows(x, test);
        const auto ytr = take_rows(y, train), yva = take_rows(y, val), yte = take_rows(y, test);
        const std::size_t d0 = static_cast<std::size_t>(x.cols());
        for (const MethodSpec& m : cfg.methods) {
            const std::vector<Shape> hgrid = forecast_holrr_grid(k, d.stations, m.kernel ? n : d0);
            const std::size_t limit = std::min(m.kernel ? n : d0, k * d.stations * d.variables);
            GridSpec grid{cfg.gammas, rank_grid(cfg, m, hgrid, limit), cfg.folds, seed};
            const CvResult sel = select_on_validation(m, xtr, ytr, xva, yva, grid);
            double seconds = 0;
            const Fitted f = timed_fit(m, sel.best, xtr, ytr, cfg.timing, seconds);
            results[u].push_back(make_record(cfg, m, n, k, trial, seed, rmse(f.predict(xte), yte), seconds));
        }
    });
    ExperimentReport r{cfg.name, {}};
    for (auto& v : results) r.records.insert(r.records.end(), v.begin(), v.end());
    return r;
}

// ---------------------------------------------------------------------------

std::string column_name(const Aggregate& a, bool with_k) {
    std::string s = a.method;
    if (a.kernel != "none") s += "(" + a.kernel + ")";
    if (with_k) s += "_k" + std::to_string(a.k);
    return s;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

template <class T>
T take(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(const std::string& name, bool quick) {
    ExperimentConfig c;
    c.name = name;
    if (name == "synth-linear") {
        c.synth = SynthSpec::linear_defaults();
        c.sizes = {20, 40, 60, 80, 100};
        c.methods = {MethodSpec::parse("rls"), MethodSpec::parse("lrr"), MethodSpec::parse("holrr")};
    } else if (name == "synth-nonlinear") {
        c.synth = SynthSpec::nonlinear_defaults();
        c.sizes = {20, 40, 60, 80, 100};
        c.methods = {MethodSpec::parse("rls@poly:2,0"), MethodSpec::parse("lrr@poly:2,0"),
                     MethodSpec::parse("holrr@poly:2,0")};
    } else if (name == "image") {
        c.sizes = {200};
        c.trials = 1;
        c.methods = {MethodSpec::parse("rls"), MethodSpec::parse("lrr"), MethodSpec::parse("holrr")};
    } else if (name == "forecast") {
        c.sizes = {50, 100};
        c.trials = 10;
        c.test_size = 50;
        c.methods = {MethodSpec::parse("rls"),     MethodSpec::parse("lrr"),     MethodSpec::parse("holrr"),
                     MethodSpec::parse("rls@rbf"), MethodSpec::parse("lrr@rbf"), MethodSpec::parse("holrr@rbf")};
    } else {
        throw std::invalid_argument("unknown experiment '" + name +
                                    "' (expected synth-linear, synth-nonlinear, image or forecast)");
    }
    if (quick) {
        if (name == "synth-linear" || name == "synth-nonlinear") c.sizes = {20, 60, 100};
        if (name == "forecast") c.horizons = {1, 3};
        if (name != "image") c.trials = 5;
    }
    return c;
}

void apply_config_json(ExperimentConfig& cfg, const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const char* k = key.c_str();
        if (key == "seed") cfg.seed = take<std::uint64_t>(j, k);
        else if (key == "sizes") cfg.sizes = take<std::vector<std::size_t>>(j, k);
        else if (key == "trials") cfg.trials = take<std::size_t>(j, k);
        else if (key == "test_size") cfg.test_size = take<std::size_t>(j, k);
        else if (key == "methods") {
            cfg.methods.clear();
            for (const auto& s : take<std::vector<std::string>>(j, k)) cfg.methods.push_back(MethodSpec::parse(s));
        } else if (key == "gammas") cfg.gammas = take<std::vector<double>>(j, k);
        else if (key == "folds") cfg.folds = take<std::size_t>(j, k);
        else if (key == "holrr_ranks") cfg.holrr_ranks = take<std::vector<Shape>>(j, k);
        else if (key == "lrr_ranks") cfg.lrr_ranks = take<std::vector<std::size_t>>(j, k);
        else if (key == "jobs") cfg.jobs = take<std::size_t>(j, k);
        else if (key == "timing") cfg.timing = take<bool>(j, k);
        else if (key == "input_dim") cfg.synth.input_dim = take<std::size_t>(j, k);
        else if (key == "output_shape") cfg.synth.output_shape = take<Shape>(j, k);
        else if (key == "true_ranks") cfg.synth.ranks = take<Shape>(j, k);
        else if (key == "noise_std") cfg.synth.noise_std = take<double>(j, k);
        else if (key == "image") cfg.image_path = take<std::string>(j, k);
        else if (key == "task") cfg.image_task = parse_image_task(take<std::string>(j, k));
        else if (key == "image_noise") cfg.image_noise = take<double>(j, k);
        else if (key == "image_gamma") cfg.image_gamma = take<double>(j, k);
        else if (key == "met_dir") cfg.met_dir = take<std::string>(j, k);
        else if (key == "stations") cfg.stations = take<std::vector<std::string>>(j, k);
        else if (key == "horizons") cfg.horizons = take<std::vector<std::size_t>>(j, k);
        else if (key == "window") cfg.window = take<std::size_t>(j, k);
        else if (key == "validation_size") cfg.validation_size = take<std::size_t>(j, k);
        else if (key == "zscore") cfg.zscore = take<bool>(j, k);
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

std::vector<Aggregate> ExperimentReport::aggregates() const {
    std::vector<Aggregate> out;
    std::map<std::tuple<std::string, std::string, std::size_t, std::size_t>, std::vector<const TrialRecord*>> groups;
    std::vector<std::tuple<std::string, std::string, std::size_t, std::size_t>> order;
    for (const auto& r : records) {
        auto key = std::make_tuple(r.method, r.kernel, r.n, r.k);
        auto& g = groups[key];
        if (g.empty()) order.push_back(key);
        g.push_back(&r);
    }
    for (const auto& key : order) {
        const auto& g = groups[key];
        Aggregate a{std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key), g.size(), 0, 0, 0};
        for (const auto* r : g) {
            a.mean_rmse += r->rmse;
            a.mean_fit_seconds += r->fit_seconds;
        }
        a.mean_rmse /= static_cast<double>(g.size());
        a.mean_fit_seconds /= static_cast<double>(g.size());
        for (const auto* r : g) a.std_rmse += (r->rmse - a.mean_rmse) * (r->rmse - a.mean_rmse);
        a.std_rmse = g.size() > 1 ? std::sqrt(a.std_rmse / static_cast<double>(g.size() - 1)) : 0.0;
        out.push_back(a);
    }
    return out;
}

void write_report_csv(std::ostream& os, const ExperimentReport& r) {
    os << "experiment,method,kernel,N,k,trial,seed,rmse,fit_seconds\n";
    for (const auto& t : r.records)
        os << csv_field(t.experiment) << ',' << csv_field(t.method) << ',' << csv_field(t.kernel) << ',' << t.n << ','
           << t.k << ',' << t.trial << ',' << t.seed << ',' << format_double(t.rmse) << ','
           << format_double(t.fit_seconds) << '\n';
}

void write_report_json(std::ostream& os, const ExperimentReport& r, const ExperimentConfig& cfg) {
    json methods = json::array();
    for (const auto& m : cfg.methods) methods.push_back(m.name() + (m.kernel ? "@" + m.kernel->to_string() : ""));
    json aggs = json::array();
    for (const auto& a : r.aggregates())
        aggs.push_back({{"method", a.method},
                        {"kernel", a.kernel},
                        {"N", a.n},
                        {"k", a.k},
                        {"trials", a.count},
                        {"mean_rmse", a.mean_rmse},
                        {"std_rmse", a.std_rmse},
                        {"mean_fit_seconds", a.mean_fit_seconds}});
    const json out = {{"experiment", r.experiment},
                      {"seed", cfg.seed},
                      {"sizes", cfg.sizes},
                      {"trials", cfg.trials},
                      {"test_size", cfg.test_size},
                      {"methods", methods},
                      {"gammas", cfg.gammas},
                      {"folds", cfg.folds},
                      {"timing", cfg.timing},
                      {"records", r.records.size()},
                      {"aggregates", aggs}};
    os << out.dump(2) << '\n';
}

void write_plot_csv(std::ostream& os, const ExperimentReport& r) {
    const auto aggs = r.aggregates();
    const bool with_k = std::any_of(aggs.begin(), aggs.end(), [](const Aggregate& a) { return a.k > 0; });
    std::vector<std::string> columns;
    std::map<std::size_t, std::map<std::string, double>> rows;
    for (const auto& a : aggs) {
        const std::string c = column_name(a, with_k);
        if (std::find(columns.begin(), columns.end(), c) == columns.end()) columns.push_back(c);
        rows[a.n][c] = a.mean_rmse;
    }
    os << "N";
    for (const auto& c : columns) os << ',' << csv_field(c);
    os << '\n';
    for (const auto& [n, vals] : rows) {
        os << n;
        for (const auto& c : columns) {
            os << ',';
            if (auto it = vals.find(c); it != vals.end()) os << format_double(it->second);
        }
        os << '\n';
    }
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::optional<fs::path>& out_dir) {
    if (cfg.methods.empty()) throw std::invalid_argument("no methods configured");
    if (cfg.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
    if (out_dir) fs::create_directories(*out_dir);
    ExperimentReport report;
    if (cfg.name == "synth-linear" || cfg.name == "synth-nonlinear") report = run_synth(cfg);
    else if (cfg.name == "image") report = run_image(cfg, out_dir);
    else if (cfg.name == "forecast") report = run_forecast(cfg);
    else throw std::invalid_argument("unknown experiment '" + cfg.name + "'");
    if (out_dir) {
        atomic_write(*out_dir / "report.csv", [&](std::ostream& os) { write_report_csv(os, report); });
        atomic_write(*out_dir / "report.json", [&](std::ostream& os) { write_report_json(os, report, cfg); });
        if (cfg.name != "image")
            atomic_write(*out_dir / ("plot_" + cfg.name + ".csv"), [&](std::ostream& os) { write_plot_csv(os, report); });
    }
    return report;
}

}  // namespace tensorreg
