#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "imbench/class_counts.hpp"
#include "imbench/matrix.hpp"
#include "imbench/random.hpp"

namespace imbench {

/// Binary tabular dataset. Label 1 is the positive/minority class.
struct Dataset {
    std::string name;
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    std::array<std::string, 2> class_names;  // original label text for 0 and 1
    ClassCounts counts;

    std::size_t size() const { return labels.size(); }
    std::size_t dimension() const { return features.cols; }

    bool operator==(const Dataset&) const = default;
};

/// Thrown for malformed input files; message carries file and line context.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a KEEL .dat file. The class is the last @outputs attribute (or the
/// last attribute when @outputs is absent). "positive"/"negative" map to 1/0;
/// any other pair maps the minority to 1. Nominal inputs are encoded by their
/// declaration order.
Dataset load_keel_dat(const std::filesystem::path& path);

using ColumnRef = std::variant<std::string, std::size_t>;

/// Comma-separated file with a header row. The label column is given by name
/// or zero-based index; the minority label maps to 1 unless `positive_label`
/// is set.
Dataset load_csv(const std::filesystem::path& path, const ColumnRef& label_column,
                 const std::optional<std::string>& positive_label = std::nullopt);

/// Writes features plus a trailing "class" column holding the class names.
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Dispatches on extension: .dat -> KEEL, anything else -> CSV with the last
/// column as label.
Dataset load_dataset(const std::filesystem::path& path);

double imbalance_ratio(const ClassCounts& counts);

/// Mean silhouette over all samples using Euclidean distance and the class
/// labels as clusters. Above `max_n` rows a seeded stratified subsample is
/// used.
double silhouette_coefficient(const Matrix& features, std::span<const int> labels, std::size_t max_n, Rng& rng);

struct DatasetProfile {
    std::string name;
    std::size_t samples = 0;
    std::size_t features = 0;
    double percent_majority = 0.0;
    double percent_minority = 0.0;
    double imbalance_ratio = 1.0;
    double silhouette = 0.0;

    bool operator==(const DatasetProfile&) const = default;
};

/// Size, class balance and silhouette (on z-scored features).
DatasetProfile profile_dataset(const Dataset& data, std::uint64_t seed = 0, std::size_t silhouette_max_n = 5000);

/// Per-feature z-scoring fitted on training rows only. Zero-variance
/// features map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // population std

    static Standardizer fit(const Matrix& train);
    Matrix apply(const Matrix& m) const;
};

struct FoldSplit {
    std::vector<std::vector<std::size_t>> folds;
    bool stratified = true;

    std::size_t k() const { return folds.size(); }
    /// All rows outside fold `f`, ascending.
    std::vector<std::size_t> training_rows(std::size_t f) const;
};

/// Each class shuffled and dealt round-robin over k folds. Dealing continues
/// across classes so fold sizes differ by at most one.
FoldSplit stratified_kfold(std::span<const int> labels, std::size_t k, Rng& rng);

struct TrainValidationSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::string> warnings;
};

/// Stratified hold-out of round(fraction * n_c) rows per class (at least one).
/// A class with a single row keeps it in train and a warning is recorded.
TrainValidationSplit train_val_split(std::span<const std::size_t> rows, std::span<const int> labels,
                                     double validation_fraction, Rng& rng);

/// Two isotropic Gaussians in `dim` dimensions; class 1 centred at
/// `separation` along every axis, unit variance. Rows are shuffled.
Dataset make_two_gaussians(std::size_t n_majority, std::size_t n_minority, double separation, std::size_t dim,
                           Rng& rng);

}  // namespace imbench
