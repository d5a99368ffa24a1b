#include "imbench/objectives.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace imbench {

std::string_view to_string(Objective objective) {
    return objective == Objective::gdro ? "gdro" : "erm";
}

void TrainConfig::validate() const {
    if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch size must be >= 2");
    if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
    if (class_weights) {
        if (objective != Objective::erm) throw std::invalid_argument("TrainConfig: class weights apply to ERM only");
        for (double w : *class_weights) {
            if (!(w > 0.0)) throw std::invalid_argument("TrainConfig: class weights must be positive");
        }
    }
}

double erm_batch_loss(std::span<const double> per_sample_losses) {
    if (per_sample_losses.empty()) throw std::invalid_argument("erm_batch_loss: empty batch");
    double sum = 0.0;
    for (double l : per_sample_losses) sum += l;
    return sum / static_cast<double>(per_sample_losses.size());
}

GroupLosses gdro_adjusted_class_losses(std::span<const double> per_sample_losses, std::span<const int> batch_labels,
                                       const ClassCounts& counts) {
    if (per_sample_losses.empty()) throw std::invalid_argument("gdro_adjusted_class_losses: empty batch");
    if (per_sample_losses.size() != batch_labels.size()) {
        throw std::invalid_argument("gdro_adjusted_class_losses: loss and label counts differ");
    }
    std::array<double, 2> sum{0.0, 0.0};
    std::array<std::size_t, 2> n{0, 0};
    for (std::size_t i = 0; i < batch_labels.size(); ++i) {
        const int y = batch_labels[i];
        if (y != 0 && y != 1) throw std::invalid_argument("gdro_adjusted_class_losses: label outside {0,1}");
        sum[static_cast<std::size_t>(y)] += per_sample_losses[i];
        ++n[static_cast<std::size_t>(y)];
    }

    GroupLosses out;
    int worst = -1;
    for (int c = 0; c < 2; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        if (n[ci] == 0) continue;
        if (counts[c] == 0) {
            throw std::invalid_argument("gdro_adjusted_class_losses: class " + std::to_string(c) +
                                        " present in batch but has zero training count");
        }
        const double adjusted = sum[ci] / static_cast<double>(n[ci]) + 1.0 / std::sqrt(static_cast<double>(counts[c]));
        out.adjusted[ci] = adjusted;
        if (worst < 0) {
            worst = c;
            continue;
        }
        const double best = *out.adjusted[static_cast<std::size_t>(worst)];
        if (adjusted > best || (adjusted == best && counts[c] < counts[worst])) worst = c;
    }
    out.worst = worst;
    return out;
}

namespace {

void apply_step(Mlp& model, const Matrix& logits, std::span<const int> labels, std::span<const double> coeffs,
                  AdamState& adam) {
    model.backward(cross_entropy_grad(logits, labels, coeffs));
    const auto params = model.parameters();
    adam_step(params, adam);
}

}  // namespace

double erm_step(Mlp& model, const Matrix& batch, std::span<const int> labels,
                std::optional<std::span<const double>> weights, AdamState& adam, Rng& dropout_rng) {
    const Matrix logits = model.forward(batch, Mode::training, &dropout_rng);
    const auto losses = cross_entropy(logits, labels, weights);
    const double loss = erm_batch_loss(losses);

    const double inv_n = 1.0 / static_cast<double>(labels.size());
    std::vector<double> coeffs(labels.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = (weights ? (*weights)[i] : 1.0) * inv_n;
    apply_step(model, logits, labels, coeffs, adam);
    return loss;
}

double gdro_step(Mlp& model, const Matrix& batch, std::span<const int> labels, const ClassCounts& counts,
                 AdamState& adam, Rng& dropout_rng) {
    const Matrix logits = model.forward(batch, Mode::training, &dropout_rng);
    const auto losses = cross_entropy(logits, labels);
    const auto groups = gdro_adjusted_class_losses(losses, labels, counts);

    // The 1/sqrt(N_c) term is constant in the parameters, so the gradient is
    // that of the worst class's mean loss over its batch members.
    std::size_t members = 0;
    for (int y : labels) members += (y == groups.worst);
    const double inv = 1.0 / static_cast<double>(members);
    std::vector<double> coeffs(labels.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = labels[i] == groups.worst ? inv : 0.0;
    apply_step(model, logits, labels, coeffs, adam);
    return *groups.adjusted[static_cast<std::size_t>(groups.worst)];
}

std::vector<std::vector<std::size_t>> make_minibatches(std::size_t n, std::size_t batch_size, Rng& rng) {
    if (batch_size == 0) throw std::invalid_argument("make_minibatches: batch size must be positive");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span(order), rng);

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    if (batches.size() > 1 && batches.back().size() < 2) {
        auto tail = std::move(batches.back());
        batches.pop_back();
        batches.back().insert(batches.back().end(), tail.begin(), tail.end());
    }
    return batches;
}

double validation_error(const Mlp& model, const Matrix& features, std::span<const int> labels) {
    if (labels.empty()) throw std::invalid_argument("validation_error: empty validation set");
    const auto p = predict_proba(model, features);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int predicted = p[i] >= 0.5 ? 1 : 0;
        wrong += predicted != labels[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

bool EarlyStopping::observe(double error) {
    ++epoch_;
    if (error < best_) {
        best_ = error;
        best_epoch_ = epoch_;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

TrainReport train(Mlp& model, const Matrix& train_features, std::span<const int> train_labels,
                  const Matrix& val_features, std::span<const int> val_labels, const TrainConfig& config) {
    config.validate();
    if (train_features.rows != train_labels.size() || val_features.rows != val_labels.size()) {
        throw std::invalid_argument("train: feature rows and label counts differ");
    }
    if (val_labels.empty()) throw std::invalid_argument("train: validation set is empty");
    const ClassCounts counts = ClassCounts::from_labels(train_labels);
    if (!counts.both_present()) throw std::invalid_argument("train: training data contains a single class");

    std::vector<double> sample_weights;
    if (config.class_weights) {
        sample_weights.resize(train_labels.size());
        for (std::size_t i = 0; i < train_labels.size(); ++i) {
            sample_weights[i] = (*config.class_weights)[static_cast<std::size_t>(train_labels[i])];
        }
    }

    Rng rng(config.seed);
    AdamState adam;
    adam.learning_rate = config.learning_rate;
    EarlyStopping stopper(config.patience);
    TrainReport report;
    Mlp best = model;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto batches = make_minibatches(train_labels.size(), config.batch_size, rng);
        double loss_sum = 0.0;
        for (const auto& idx : batches) {
            const Matrix xb = take_rows(train_features, idx);
            std::vector<int> yb;
            yb.reserve(idx.size());
            for (auto i : idx) yb.push_back(train_labels[i]);

            if (config.objective == Objective::gdro) {
                loss_sum += gdro_step(model, xb, yb, counts, adam, rng);
            } else if (config.class_weights) {
                std::vector<double> wb;
                wb.reserve(idx.size());
                for (auto i : idx) wb.push_back(sample_weights[i]);
                loss_sum += erm_step(model, xb, yb, std::span<const double>(wb), adam, rng);
            } else {
                loss_sum += erm_step(model, xb, yb, std::nullopt, adam, rng);
            }
        }
        report.train_loss.push_back(loss_sum / static_cast<double>(batches.size()));

        const double err = validation_error(model, val_features, val_labels);
        report.validation_error.push_back(err);
        if (stopper.observe(err)) best = model;
        if (stopper.should_stop()) {
            report.stopped_early = epoch + 1 < config.max_epochs;
            break;
        }
    }

    report.epochs_run = report.validation_error.size();
    report.best_epoch = stopper.best_epoch();
    report.best_validation_error = stopper.best_error();
    model = std::move(best);
    return report;
}

}  // namespace imbench
