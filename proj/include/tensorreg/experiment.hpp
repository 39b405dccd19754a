#pragma once

#include "tensorreg/cv.hpp"
#include "tensorreg/datagen.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tensorreg {

struct ExperimentConfig {
    /// synth-linear, synth-nonlinear, image or forecast.
    std::string name;
    std::uint64_t seed = 0;
    std::vector<std::size_t> sizes;
    std::size_t trials = 20;
    std::size_t test_size = 100;
    std::vector<MethodSpec> methods;
    std::vector<double> gammas = GridSpec::default_gammas();
    std::size_t folds = 3;
    /// Explicit candidate grids; empty means the experiment's default grid.
    std::vector<Shape> holrr_ranks;
    std::vector<std::size_t> lrr_ranks;
    std::size_t jobs = 1;
    /// When false every fit_seconds is written as 0 so reports are byte-stable.
    bool timing = true;

    // synth-*
    SynthSpec synth;

    // image
    std::optional<std::filesystem::path> image_path;
    ImageTask image_task = ImageTask::Channels;
    double image_noise = 1.0;
    double image_gamma = kDefaultGamma;

    // forecast
    std::optional<std::filesystem::path> met_dir;
    std::vector<std::string> stations;
    std::vector<std::size_t> horizons{1, 3, 5};
    std::size_t window = 2;
    std::size_t validation_size = 20;
    bool zscore = true;

    /// Defaults of the named experiment; `quick` shrinks sizes and trials.
    static ExperimentConfig defaults(const std::string& name, bool quick = false);
};

/// Overlays the keys of a JSON object onto `cfg`; unknown keys are errors.
void apply_config_json(ExperimentConfig& cfg, const std::string& json_text);

struct TrialRecord {
    std::string experiment;
    std::string method;
    std::string kernel;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double rmse = 0.0;
    double fit_seconds = 0.0;
};

struct Aggregate {
    std::string method;
    std::string kernel;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t count = 0;
    double mean_rmse = 0.0;
    double std_rmse = 0.0;
    double mean_fit_seconds = 0.0;
};

struct ExperimentReport {
    std::string experiment;
    /// Ordered by (N, k, trial, method) regardless of worker scheduling.
    std::vector<TrialRecord> records;

    /// Grouped by (method, kernel, N, k) in first-appearance order.
    std::vector<Aggregate> aggregates() const;
};

/// Runs the experiment; when `out_dir` is set, writes report.csv,
/// report.json and the plot CSV (plus PPMs for the image experiment).
ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out_dir);

void write_report_csv(std::ostream& os, const ExperimentReport& r);
void write_report_json(std::ostream& os, const ExperimentReport& r, const ExperimentConfig& cfg);
/// x = N, one mean-RMSE column per method (per k for the forecast).
void write_plot_csv(std::ostream& os, const ExperimentReport& r);

}  // namespace tensorreg
