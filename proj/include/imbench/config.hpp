#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imbench/imbalance.hpp"

namespace imbench {

struct DatasetEntry {
    std::string path;
    std::optional<std::size_t> batch_size;
    std::optional<std::string> label_column;  // CSV only; default is the last column
    std::optional<std::string> positive_label;

    bool operator==(const DatasetEntry&) const = default;
};

struct ExperimentConfig {
    std::vector<DatasetEntry> datasets;
    std::vector<Method> methods{all_methods.begin(), all_methods.end()};
    std::optional<std::size_t> depth;  // empty: tune per dataset
    std::size_t width = 50;
    double dropout = 0.5;
    double learning_rate = 0.001;
    std::size_t patience = 10;
    std::size_t max_epochs = 200;
    std::size_t folds = 10;
    std::size_t repetitions = 5;
    // default minibatch size: ceil(N / batch_divisor) clamped to [batch_min, batch_max]
    std::size_t batch_divisor = 50;
    std::size_t batch_min = 8;
    std::size_t batch_max = 1024;
    double validation_fraction = 0.1;
    CostNormalization cost_normalization = CostNormalization::mean_one;
    std::uint64_t seed = 0;
    std::string output_dir = "results";
    std::size_t workers = 1;
    // architecture search
    double tune_fraction = 0.8;
    std::size_t tune_folds = 5;
    std::vector<std::size_t> tune_depths{2, 3, 4, 5, 6};

    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Unknown keys and ill-typed values are rejected with std::invalid_argument.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Default minibatch rule, or the per-dataset override.
std::size_t batch_size_for(const ExperimentConfig& c, std::size_t n_samples,
                           std::optional<std::size_t> override_size = std::nullopt);

/// Worker count after applying the IMBENCH_WORKERS environment override.
std::size_t effective_workers(const ExperimentConfig& c);

}  // namespace imbench
