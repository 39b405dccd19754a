#pragma once

#include "tensorreg/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tensorreg {

/// Variables of a historic-station file in column order.
inline constexpr std::array<const char*, 5> kMetVariables{"tmax", "tmin", "af", "rain", "sun"};
inline constexpr std::size_t kMetVariableCount = kMetVariables.size();

struct MonthRecord {
    int year = 0;
    int month = 0;
    /// NaN marks a missing value.
    std::array<double, kMetVariableCount> values{};

    /// Months since year 0, January = 0.
    long index() const { return static_cast<long>(year) * 12 + (month - 1); }
    bool complete() const;
};

struct StationSeries {
    std::string name;
    /// Strictly increasing in time.
    std::vector<MonthRecord> months;
};

/// Parses the Met Office historic station layout: free-text header lines, a
/// "yyyy mm tmax tmin af rain sun" column line, an optional units line, then
/// one row per month. "---" is missing; trailing '*', '#', '$' flags and a
/// "Provisional" suffix are ignored. Errors name `source` and the line.
StationSeries parse_station_file(std::istream& is, const std::string& source);
StationSeries load_station_file(const std::filesystem::path& path);

/// Stations in `dir`: the listed file names in order, or every *.txt file
/// sorted by name when `stations` is empty.
std::vector<StationSeries> load_metoffice(const std::filesystem::path& dir,
                                          const std::vector<std::string>& stations = {});

void write_station_file(std::ostream& os, const StationSeries& s);

/// Seasonal series with autoregressive noise and a few missing entries, for
/// smoke runs without the real data.
std::vector<StationSeries> synthetic_stations(std::size_t stations, int first_year, int last_year,
                                              std::uint64_t seed);

struct ForecastDataset {
    std::size_t window = 2;
    std::size_t horizon = 1;
    std::size_t stations = 0;
    std::size_t variables = kMetVariableCount;
    std::vector<std::string> station_names;
    /// N x (window * stations * variables); entry w + W (s + S v), w = 0 the
    /// oldest covariate month.
    Eigen::MatrixXd x;
    /// N x horizon x stations x variables.
    DenseTensor y;
    /// Month index of each sample's first target month.
    std::vector<long> target_month;
};

/// One sample per first-target month t such that t - window .. t + horizon - 1
/// are all complete at every station. A month missing anywhere is dropped
/// everywhere.
ForecastDataset build_forecast_dataset(const std::vector<StationSeries>& series, std::size_t window,
                                       std::size_t horizon);

/// Per-variable z-scoring with statistics from training covariates only.
struct VariableScaler {
    std::vector<double> mean;
    std::vector<double> stddev;

    static VariableScaler fit(const ForecastDataset& d, std::span<const std::size_t> train_rows);
    Eigen::MatrixXd transform_x(const ForecastDataset& d, const Eigen::MatrixXd& x) const;
    DenseTensor transform_y(const DenseTensor& y) const;
};

}  // namespace tensorreg
