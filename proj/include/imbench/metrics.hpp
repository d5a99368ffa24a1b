#pragma once

// Threshold and ranking metrics over minority-class scores. Label 1 is the
// positive (minority) class throughout.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace imbench {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

/// Predicted positive iff score >= threshold.
ConfusionCounts confusion_at_threshold(std::span<const double> scores, std::span<const int> labels,
                                       double threshold = 0.5);

// Degenerate denominators give 0 rather than throwing.
double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double true_negative_rate(const ConfusionCounts& c);
double f_beta(const ConfusionCounts& c, double beta = 1.0);
double g_mean(const ConfusionCounts& c);

/// Trapezoidal area under TPR(FPR) over all distinct thresholds; equals the
/// probability that a random positive outranks a random negative, ties 1/2.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under precision(recall), one point per distinct score in
/// descending order, anchored at recall 0 with the first point's precision.
double pr_auc(std::span<const double> scores, std::span<const int> labels);

struct EvalScores {
    double f1 = 0.0;
    double g_mean = 0.0;
    double pr_auc = 0.0;
    double roc_auc = 0.0;
    double precision = 0.0;
    double recall = 0.0;

    bool operator==(const EvalScores&) const = default;
};

inline constexpr std::array<std::string_view, 6> metric_names{"f1", "g_mean", "pr_auc", "roc_auc", "precision",
                                                              "recall"};

/// Value of the metric called `name` (one of metric_names).
double metric_value(const EvalScores& s, std::string_view name);

/// All metrics at threshold 0.5. Curve metrics need both classes present.
EvalScores evaluate(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

}  // namespace imbench
