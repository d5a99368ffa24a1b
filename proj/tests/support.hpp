#pragma once

// Shared oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "imbench/nn.hpp"
#include "imbench/random.hpp"

namespace imbench::testing {

inline double mean_ce(Mlp& model, const Matrix& x, std::span<const int> y, Rng rng) {
    const Matrix logits = model.forward(x, Mode::training, &rng);
    const auto losses = cross_entropy(logits, y);
    double s = 0.0;
    for (double l : losses) s += l;
    return s / static_cast<double>(losses.size());
}

struct GradCheck {
    std::size_t checked = 0;
    std::size_t passed = 0;
    double worst = 0.0;
    double pass_rate() const { return checked ? static_cast<double>(passed) / static_cast<double>(checked) : 1.0; }
};

/// |a - n| / max(|a|, |n|, floor); the floor keeps round-off on vanishing
/// gradients from counting as relative error.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central differences on the mean cross-entropy of a training-mode forward.
/// Every evaluation replays the same dropout masks and batch statistics are
/// recomputed from the same batch.
inline GradCheck gradient_check(Mlp& model, const Matrix& x, std::span<const int> y, const Rng& dropout_state,
                                double step = 1e-4, double tol = 1e-3) {
    Rng rng = dropout_state;
    const Matrix logits = model.forward(x, Mode::training, &rng);
    std::vector<double> coeffs(y.size(), 1.0 / static_cast<double>(y.size()));
    model.backward(cross_entropy_grad(logits, y, coeffs));

    GradCheck out;
    for (auto& p : model.parameters()) {
        const std::vector<double> analytic(p.grad.begin(), p.grad.end());
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double saved = p.value[i];
            p.value[i] = saved + step;
            const double up = mean_ce(model, x, y, dropout_state);
            p.value[i] = saved - step;
            const double down = mean_ce(model, x, y, dropout_state);
            p.value[i] = saved;
            const double err = relative_error(analytic[i], (up - down) / (2.0 * step));
            ++out.checked;
            if (err < tol) ++out.passed;
            out.worst = std::max(out.worst, err);
        }
    }
    return out;
}

/// Brute-force P(score_pos > score_neg) + 0.5 P(tie) over all pairs.
inline double pairwise_auc(std::span<const double> s, std::span<const int> y) {
    double num = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            ++pairs;
            if (s[i] > s[j]) num += 1.0;
            else if (s[i] == s[j]) num += 0.5;
        }
    }
    return num / static_cast<double>(pairs);
}

/// Two-sided exact Wilcoxon p by enumerating all 2^n sign assignments of the
/// given (possibly tied) ranks.
inline double wilcoxon_enumerated_p(std::span<const double> ranks, double observed_min) {
    const std::size_t n = ranks.size();
    double total = 0.0;
    for (double r : ranks) total += r;
    std::uint64_t hits = 0;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        double wp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1u) wp += ranks[i];
        }
        if (std::min(wp, total - wp) <= observed_min + 1e-9) ++hits;
    }
    return std::min(1.0, static_cast<double>(hits) / static_cast<double>(count));
}

}  // namespace imbench::testing
