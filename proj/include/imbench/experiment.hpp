#pragma once

// Experiment orchestration: architecture tuning, the dataset x method x
// repetition x fold job matrix, and the append-only JSONL record store that
// makes interrupted runs resumable.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "imbench/config.hpp"
#include "imbench/data.hpp"
#include "imbench/imbalance.hpp"
#include "imbench/metrics.hpp"

namespace imbench {

inline constexpr int record_schema_version = 1;

struct ExperimentRecord {
    std::string dataset;
    std::string method;
    std::size_t fold = 0;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    std::size_t depth = 0;
    EvalScores scores;
    std::size_t epochs = 0;
    std::size_t best_epoch = 0;
    double wall_time_s = 0.0;
    std::optional<std::string> error;

    using Key = std::tuple<std::string, std::string, std::size_t, std::size_t>;
    Key key() const { return {dataset, method, fold, repetition}; }
    bool ok() const { return !error.has_value(); }
};

nlohmann::json record_to_json(const ExperimentRecord& r);
ExperimentRecord record_from_json(const nlohmann::json& j);

/// Reads every parseable record. A torn final line (interrupted write) is
/// skipped; malformed lines elsewhere throw.
std::vector<ExperimentRecord> read_records(const std::filesystem::path& path);

/// Seed of the shared fold split for one (dataset, repetition).
std::uint64_t split_seed(std::uint64_t master, const std::string& dataset, std::size_t repetition);
/// Seed of one job; independent streams without coordination.
std::uint64_t job_seed(std::uint64_t master, const std::string& dataset, Method method, std::size_t repetition,
                       std::size_t fold);

/// Row bookkeeping for one fold, all indices into the dataset.
struct FoldPlan {
    std::vector<std::size_t> test;
    std::vector<std::size_t> early_stop;     // validation rows for early stopping
    std::vector<std::size_t> fit_partition;  // rows used for standardisation statistics
    std::vector<std::size_t> train;          // after resampling; may repeat rows
    std::optional<std::array<double, 2>> class_weights;
    std::vector<std::string> warnings;
};

/// Carves the early-stop set out of the training partition, then applies the
/// method's resampling or weighting to what remains.
FoldPlan plan_fold(std::span<const int> labels, const FoldSplit& split, std::size_t fold, Method method,
                   const ExperimentConfig& config, Rng& rng);

struct JobSpec {
    Method method = Method::erm;
    std::size_t fold = 0;
    std::size_t repetition = 0;
    std::size_t depth = 2;
    std::size_t batch_size = 32;
};

/// Trains and scores a single (method, fold, repetition) job.
ExperimentRecord run_job(const Dataset& data, const FoldSplit& split, const JobSpec& job,
                         const ExperimentConfig& config);
/// Same, with an explicit seed instead of job_seed().
ExperimentRecord run_job(const Dataset& data, const FoldSplit& split, const JobSpec& job,
                         const ExperimentConfig& config, std::uint64_t seed);

struct TuneReport {
    std::string dataset;
    std::vector<std::pair<std::size_t, double>> depth_auc;  // (depth, mean validation ROC-AUC)
    std::size_t selected_depth = 0;
};

nlohmann::json tune_report_to_json(const TuneReport& r);

/// Depth search: stratified tuning partition, k-fold CV with ERM for every
/// candidate depth, highest mean ROC-AUC wins (ties: shallower).
TuneReport tune_architecture(const Dataset& data, const ExperimentConfig& config);

struct RunOptions {
    std::filesystem::path records_path;
    std::optional<std::size_t> workers;  // overrides config/env when set
    /// Stop scheduling after this many newly written records (0: no limit).
    std::size_t stop_after = 0;
    std::function<void(const std::string&)> log;
};

struct RunSummary {
    std::size_t total_jobs = 0;
    std::size_t skipped = 0;  // already present in the record file
    std::size_t completed = 0;
    std::size_t failed = 0;
    bool interrupted = false;
    std::vector<TuneReport> tuning;
};

RunSummary run_experiment(const ExperimentConfig& config, std::span<const Dataset> datasets,
                          const RunOptions& options);

/// Loads every dataset named in the config.
std::vector<Dataset> load_config_datasets(const ExperimentConfig& config);

}  // namespace imbench
