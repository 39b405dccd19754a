#include "tensorreg/metoffice.hpp"

#include "tensorreg/rng.hpp"
#include "tensorreg/tensor_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace tensorreg {

namespace fs = std::filesystem;

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(tok);
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool parse_int(const std::string& s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

// Value token, possibly flagged; "---" is missing.
bool parse_value(std::string tok, double& out) {
    while (!tok.empty() && (tok.back() == '*' || tok.back() == '#' || tok.back() == '$')) tok.pop_back();
    if (tok == "---") {
        out = kMissing;
        return true;
    }
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return !tok.empty() && ec == std::errc() && p == tok.data() + tok.size();
}

}  // namespace

bool MonthRecord::complete() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

StationSeries parse_station_file(std::istream& is, const std::string& source) {
    StationSeries s;
    std::string line;
    std::size_t lineno = 0;
    bool in_table = false;
    const auto fail = [&](const std::string& msg) { throw IoError(source + ":" + std::to_string(lineno) + ": " + msg); };
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto tok = split_ws(line);
        if (!in_table) {
            if (s.name.empty() && !tok.empty()) s.name = line.substr(line.find_first_not_of(" \t"));
            if (tok.size() >= 2 && tok[0] == "yyyy" && tok[1] == "mm") {
                if (tok.size() != 2 + kMetVariableCount) fail("expected columns yyyy mm tmax tmin af rain sun");
                in_table = true;
            }
            continue;
        }
        if (tok.empty()) continue;
        int year = 0;
        if (!parse_int(tok[0], year)) {
            const std::string l = lower(line);
            // Units row and closing notes.
            if (l.find("degc") != std::string::npos || l.find("site closed") != std::string::npos) continue;
            fail("expected a data row, got '" + line + "'");
        }
        std::size_t n = tok.size();
        if (n > 0 && lower(tok[n - 1]) == "provisional") --n;
        if (n != 2 + kMetVariableCount)
            fail("expected " + std::to_string(2 + kMetVariableCount) + " columns, got " + std::to_string(n));
        MonthRecord r;
        r.year = year;
        if (!parse_int(tok[1], r.month) || r.month < 1 || r.month > 12) fail("bad month '" + tok[1] + "'");
        for (std::size_t v = 0; v < kMetVariableCount; ++v)
            if (!parse_value(tok[2 + v], r.values[v]))
                fail(std::string("bad ") + kMetVariables[v] + " value '" + tok[2 + v] + "'");
        if (!s.months.empty() && r.index() <= s.months.back().index())
            fail("dates not increasing (" + std::to_string(r.year) + "/" + std::to_string(r.month) + " after " +
                 std::to_string(s.months.back().year) + "/" + std::to_string(s.months.back().month) + ")");
        s.months.push_back(r);
    }
    if (!in_table) throw IoError(source + ": no 'yyyy mm tmax tmin af rain sun' header line");
    return s;
}

StationSeries load_station_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open station file " + path.string());
    StationSeries s = parse_station_file(is, path.string());
    if (s.name.empty()) s.name = path.stem().string();
    return s;
}

std::vector<StationSeries> load_metoffice(const fs::path& dir, const std::vector<std::string>& stations) {
    if (!fs::is_directory(dir)) throw IoError("station directory " + dir.string() + " does not exist");
    std::vector<fs::path> files;
    if (stations.empty()) {
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw IoError("no station files (*.txt) in " + dir.string());
    } else {
        for (const auto& name : stations) {
            const fs::path p = dir / name;
            if (!fs::exists(p)) throw IoError("missing station file " + p.string());
            files.push_back(p);
        }
    }
    std::vector<StationSeries> out;
    for (const auto& f : files) out.push_back(load_station_file(f));
    return out;
}

void write_station_file(std::ostream& os, const StationSeries& s) {
    os << s.name << "\n"
       << "Missing data (more than 2 days missing in month) is marked by  ---.\n"
       << "   yyyy  mm   tmax    tmin      af    rain     sun\n"
       << "              degC    degC    days      mm   hours\n";
    for (const auto& r : s.months) {
        os << "   " << r.year << std::setw(4) << r.month;
        for (double v : r.values) {
            os << std::setw(8);
            if (std::isfinite(v)) os << std::fixed << std::setprecision(1) << v;
            else os << "---";
        }
        os << '\n';
    }
}

std::vector<StationSeries> synthetic_stations(std::size_t stations, int first_year, int last_year, std::uint64_t seed) {
    if (stations < 1 || last_year < first_year) throw std::invalid_argument("synthetic_stations: empty range");
    Rng rng(seed, "met");
    // Shared regional anomaly plus station noise keeps the stations correlated.
    const std::size_t months = static_cast<std::size_t>(last_year - first_year + 1) * 12;
    std::vector<std::array<double, kMetVariableCount>> regional(months);
    std::array<double, kMetVariableCount> state{};
    for (auto& m : regional) {
        for (std::size_t v = 0; v < kMetVariableCount; ++v) state[v] = 0.6 * state[v] + rng.normal();
        m = state;
    }
    std::vector<StationSeries> out;
    for (std::size_t s = 0; s < stations; ++s) {
        StationSeries st;
        // Zero-padded so a sorted directory listing keeps generation order.
        char name[32];
        std::snprintf(name, sizeof name, "Station%02zu", s + 1);
        st.name = name;
        const double offset = rng.normal();
        for (std::size_t t = 0; t < months; ++t) {
            MonthRecord r;
            r.year = first_year + static_cast<int>(t / 12);
            r.month = static_cast<int>(t % 12) + 1;
            const double season = std::cos(2 * std::numbers::pi * (r.month - 7) / 12.0);
            const auto& a = regional[t];
            const auto round1 = [](double v) { return std::round(v * 10.0) / 10.0; };
            r.values[0] = round1(14 + 6 * season + offset + 1.2 * a[0] + 0.5 * rng.normal());
            r.values[1] = round1(6 + 5 * season + offset + 1.0 * a[0] + 0.5 * rng.normal());
            r.values[2] = std::max(0.0, std::round(6 - 7 * season + 2 * a[2] + rng.normal()));
            r.values[3] = round1(std::max(0.0, 80 - 25 * season + 20 * a[3] + 10 * rng.normal()));
            r.values[4] = round1(std::max(0.0, 120 + 80 * season + 15 * a[4] + 10 * rng.normal()));
            if (rng.uniform() < 0.01) r.values[rng.below(kMetVariableCount)] = kMissing;
            st.months.push_back(r);
        }
        out.push_back(std::move(st));
    }
    return out;
}

ForecastDataset build_forecast_dataset(const std::vector<StationSeries>& series, std::size_t window,
                                       std::size_t horizon) {
    if (series.empty()) throw std::invalid_argument("no stations");
    if (window < 1 || horizon < 1) throw std::invalid_argument("window and horizon must be at least 1");
    const std::size_t S = series.size(), V = kMetVariableCount;

    // Months complete at every station.
    std::map<long, std::vector<const MonthRecord*>> complete;
    for (std::size_t s = 0; s < S; ++s)
        for (const auto& r : series[s].months)
            if (r.complete()) complete[r.index()].push_back(&r);
    std::set<long> usable;
    for (const auto& [t, recs] : complete)
        if (recs.size() == S) usable.insert(t);
    // Records are stored station by station in load order.
    const auto value = [&](long t, std::size_t s, std::size_t v) { return complete.at(t)[s]->values[v]; };

    ForecastDataset d;
    d.window = window;
    d.horizon = horizon;
    d.stations = S;
    for (const auto& st : series) d.station_names.push_back(st.name);
    const auto W = static_cast<long>(window), K = static_cast<long>(horizon);
    for (long t : usable) {
        bool ok = true;
        for (long m = t - W; m < t + K && ok; ++m) ok = usable.count(m) > 0;
        if (ok) d.target_month.push_back(t);
    }
    const std::size_t n = d.target_month.size();
    if (n == 0) throw std::invalid_argument("no complete window of " + std::to_string(window + horizon) + " months");
    d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(window * S * V));
    d.y = DenseTensor({n, horizon, S, V});
    for (std::size_t i = 0; i < n; ++i) {
        const long t = d.target_month[i];
        for (std::size_t v = 0; v < V; ++v)
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t w = 0; w < window; ++w)
                    d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w + window * (s + S * v))) =
                        value(t - W + static_cast<long>(w), s, v);
                for (std::size_t h = 0; h < horizon; ++h) d.y.at({i, h, s, v}) = value(t + static_cast<long>(h), s, v);
            }
    }
    return d;
}

VariableScaler VariableScaler::fit(const ForecastDataset& d, std::span<const std::size_t> train_rows) {
    if (train_rows.empty()) throw std::invalid_argument("scaler needs at least one training row");
    VariableScaler sc;
    const std::size_t block = d.window * d.stations;
    for (std::size_t v = 0; v < d.variables; ++v) {
        double sum = 0, sq = 0;
        for (std::size_t r : train_rows)
            for (std::size_t j = 0; j < block; ++j) sum += d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j + block * v));
        const double count = static_cast<double>(train_rows.size() * block);
        const double mean = sum / count;
        for (std::size_t r : train_rows)
            for (std::size_t j = 0; j < block; ++j) {
                const double e = d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j + block * v)) - mean;
                sq += e * e;
            }
        const double sd = std::sqrt(sq / count);
        sc.mean.push_back(mean);
        sc.stddev.push_back(sd > 0 ? sd : 1.0);
    }
    return sc;
}

Eigen::MatrixXd VariableScaler::transform_x(const ForecastDataset& d, const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out = x;
    const auto block = static_cast<Eigen::Index>(d.window * d.stations);
    for (std::size_t v = 0; v < mean.size(); ++v) {
        auto cols = out.middleCols(block * static_cast<Eigen::Index>(v), block);
        cols = ((cols.array() - mean[v]) / stddev[v]).matrix();
    }
    return out;
}

DenseTensor VariableScaler::transform_y(const DenseTensor& y) const {
    DenseTensor out = y;
    const std::size_t v_mode = y.order() - 1;
    const std::size_t inner = y.size() / y.dim(v_mode);
    for (std::size_t v = 0; v < y.dim(v_mode); ++v)
        for (std::size_t j = 0; j < inner; ++j) {
            double& e = out[j + inner * v];
            e = (e - mean[v]) / stddev[v];
        }
    return out;
}

}  // namespace tensorreg
