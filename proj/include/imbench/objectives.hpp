#pragma once

// ERM and group-DRO training objectives, and the epoch loop with early
// stopping shared by both.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "imbench/class_counts.hpp"
#include "imbench/matrix.hpp"
#include "imbench/nn.hpp"
#include "imbench/random.hpp"

namespace imbench {

enum class Objective { erm, gdro };

std::string_view to_string(Objective objective);

struct TrainConfig {
    Objective objective = Objective::erm;
    std::size_t max_epochs = 200;
    std::size_t batch_size = 32;
    double learning_rate = 0.001;
    std::size_t patience = 10;
    /// Per-class loss weights (COST); ERM only.
    std::optional<std::array<double, 2>> class_weights;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainReport {
    std::size_t epochs_run = 0;
    std::vector<double> train_loss;
    std::vector<double> validation_error;
    bool stopped_early = false;
    std::size_t best_epoch = 0;  // 1-based epoch whose parameters were restored
    double best_validation_error = std::numeric_limits<double>::infinity();

    bool operator==(const TrainReport&) const = default;
};

/// Arithmetic mean of per-sample losses.
double erm_batch_loss(std::span<const double> per_sample_losses);

struct GroupLosses {
    /// Mean batch loss of class c plus 1/sqrt(N_c); empty when c is absent
    /// from the batch.
    std::array<std::optional<double>, 2> adjusted;
    int worst = 0;
};

/// Class-wise adjusted losses over a minibatch. N_c comes from `counts`
/// (the whole training partition). The worst class is the argmax over
/// classes present in the batch; ties go to the smaller N_c, then the lower
/// index.
GroupLosses gdro_adjusted_class_losses(std::span<const double> per_sample_losses, std::span<const int> batch_labels,
                                       const ClassCounts& counts);

/// One forward/backward/Adam update on the (optionally weighted) batch-mean
/// cross-entropy sum_i w_i * loss_i / |B|. Returns that loss.
double erm_step(Mlp& model, const Matrix& batch, std::span<const int> labels,
                std::optional<std::span<const double>> weights, AdamState& adam, Rng& dropout_rng);

/// One update on the worst class's adjusted loss. Returns that loss.
double gdro_step(Mlp& model, const Matrix& batch, std::span<const int> labels, const ClassCounts& counts,
                 AdamState& adam, Rng& dropout_rng);

/// Shuffled minibatches of size `batch_size`. A trailing batch with fewer than
/// two rows is merged into the previous one.
std::vector<std::vector<std::size_t>> make_minibatches(std::size_t n, std::size_t batch_size, Rng& rng);

/// 1 - accuracy at threshold 0.5, inference mode.
double validation_error(const Mlp& model, const Matrix& features, std::span<const int> labels);

/// Patience-based stopping on a sequence of validation errors; only strict
/// improvements reset the counter.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

    /// Records the next epoch's error; true if it is a new best.
    bool observe(double error);
    bool should_stop() const { return since_best_ >= patience_; }
    std::size_t best_epoch() const { return best_epoch_; }
    double best_error() const { return best_; }
    std::size_t epochs_seen() const { return epoch_; }

private:
    std::size_t patience_;
    std::size_t epoch_ = 0;
    std::size_t best_epoch_ = 0;
    std::size_t since_best_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

/// Trains `model` in place and restores the parameters of the epoch with the
/// lowest validation error.
TrainReport train(Mlp& model, const Matrix& train_features, std::span<const int> train_labels,
                  const Matrix& val_features, std::span<const int> val_labels, const TrainConfig& config);

}  // namespace imbench
