#include "imbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace imbench {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* who) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument(std::string(who) + ": score and label counts differ");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument(std::string(who) + ": label outside {0,1}");
    }
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Order of rows by descending score.
std::vector<std::size_t> descending(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

ConfusionCounts confusion_at_threshold(std::span<const double> scores, std::span<const int> labels, double threshold) {
    check_inputs(scores, labels, "confusion_at_threshold");
    ConfusionCounts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1) (predicted ? c.tp : c.fn)++;
        else (predicted ? c.fp : c.tn)++;
    }
    return c;
}

double precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp); }
double recall(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }
double true_negative_rate(const ConfusionCounts& c) { return ratio(c.tn, c.tn + c.fp); }

double f_beta(const ConfusionCounts& c, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("f_beta: beta must be positive");
    if (c.tp == 0) return 0.0;
    const double p = precision(c), r = recall(c), b2 = beta * beta;
    return (1.0 + b2) * p * r / (b2 * p + r);
}

double g_mean(const ConfusionCounts& c) {
    if (c.tp + c.fn == 0 || c.tn + c.fp == 0) return 0.0;
    return std::sqrt(recall(c) * true_negative_rate(c));
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    check_inputs(scores, labels, "roc_auc");
    std::size_t pos = 0;
    for (int y : labels) pos += (y == 1);
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw std::invalid_argument("roc_auc: both classes must be present");

    // Sweep thresholds from high to low; one ROC vertex per distinct score.
    // Trapezoid areas are accumulated in units of (tp * fp) and scaled at the
    // end so tie blocks contribute exact halves.
    const auto order = descending(scores);
    double area2 = 0.0;  // twice the unnormalised area
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t block_tp = 0, block_fp = 0;
        const double s = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? block_tp : block_fp)++;
        area2 += static_cast<double>(block_fp) * static_cast<double>(2 * tp + block_tp);
        tp += block_tp;
        fp += block_fp;
    }
    return area2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double pr_auc(std::span<const double> scores, std::span<const int> labels) {
    check_inputs(scores, labels, "pr_auc");
    std::size_t pos = 0;
    for (int y : labels) pos += (y == 1);
    if (pos == 0) throw std::invalid_argument("pr_auc: no positive samples");

    const auto order = descending(scores);
    double area = 0.0;
    double prev_recall = 0.0, prev_precision = -1.0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? tp : fp)++;
        const double r = static_cast<double>(tp) / static_cast<double>(pos);
        const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
        if (prev_precision < 0.0) prev_precision = p;  // anchor (0, P_1)
        area += (r - prev_recall) * (p + prev_precision) / 2.0;
        prev_recall = r;
        prev_precision = p;
    }
    return area;
}

double metric_value(const EvalScores& s, std::string_view name) {
    if (name == "f1") return s.f1;
    if (name == "g_mean") return s.g_mean;
    if (name == "pr_auc") return s.pr_auc;
    if (name == "roc_auc") return s.roc_auc;
    if (name == "precision") return s.precision;
    if (name == "recall") return s.recall;
    throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

EvalScores evaluate(std::span<const double> scores, std::span<const int> labels, double threshold) {
    const auto c = confusion_at_threshold(scores, labels, threshold);
    EvalScores e;
    e.f1 = f_beta(c, 1.0);
    e.g_mean = g_mean(c);
    e.precision = precision(c);
    e.recall = recall(c);
    e.roc_auc = roc_auc(scores, labels);
    e.pr_auc = pr_auc(scores, labels);
    return e;
}

}  // namespace imbench
