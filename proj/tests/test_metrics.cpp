#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "imbench/metrics.hpp"
#include "imbench/random.hpp"
#include "support.hpp"

using namespace imbench;

namespace {

// Independent PR curve: for each distinct threshold, predict positive iff
// score >= t, then integrate with the recall-0 anchor.
double brute_pr_auc(const std::vector<double>& s, const std::vector<int>& y) {
    std::map<double, int, std::greater<>> thresholds;
    for (double v : s) thresholds[v] = 0;
    std::size_t pos = 0;
    for (int v : y) pos += v;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [t, _] : thresholds) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] >= t) (y[i] ? tp : fp)++;
        }
        pts.emplace_back(double(tp) / double(pos), double(tp) / double(tp + fp));
    }
    double area = 0.0, r0 = 0.0, p0 = pts.front().second;
    for (auto [r, p] : pts) {
        area += (r - r0) * (p + p0) / 2.0;
        r0 = r;
        p0 = p;
    }
    return area;
}

}  // namespace

TEST_CASE("confusion counts at a threshold") {
    const std::vector<double> s{0.9, 0.1};
    const std::vector<int> y{1, 0};
    CHECK(confusion_at_threshold(s, y) == ConfusionCounts{1, 0, 1, 0});
    const std::vector<double> low{0.1, 0.2, 0.49};
    const std::vector<int> y3{1, 0, 1};
    const auto c = confusion_at_threshold(low, y3);
    CHECK(c.tp == 0);
    CHECK(c.fp == 0);
    const auto all = confusion_at_threshold(low, y3, 0.0);
    CHECK(all.tp + all.fp == 3);
    CHECK(confusion_at_threshold(std::vector<double>{0.5}, std::vector<int>{1}).tp == 1);
    CHECK_THROWS_AS(confusion_at_threshold(low, y), std::invalid_argument);
}

TEST_CASE("f-beta") {
    CHECK(f_beta(ConfusionCounts{5, 5, 0, 5}) == 0.5);
    CHECK(f_beta(ConfusionCounts{7, 0, 9, 0}) == 1.0);
    CHECK(f_beta(ConfusionCounts{0, 3, 4, 2}) == 0.0);
    const ConfusionCounts c{6, 2, 10, 4};
    const double p = precision(c), r = recall(c);
    CHECK(f_beta(c) == doctest::Approx(2 * p * r / (p + r)));
    CHECK(f_beta(c, 2.0) == doctest::Approx(5 * p * r / (4 * p + r)));
}

TEST_CASE("g-mean") {
    // recall 0.8, TNR 0.5
    CHECK(g_mean(ConfusionCounts{8, 5, 5, 2}) == doctest::Approx(0.63246).epsilon(1e-5));
    CHECK(g_mean(ConfusionCounts{4, 0, 6, 0}) == 1.0);
    CHECK(g_mean(ConfusionCounts{4, 6, 0, 0}) == 0.0);
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
        const ConfusionCounts c{uniform_index(rng, 20), uniform_index(rng, 20), uniform_index(rng, 20),
                                uniform_index(rng, 20)};
        const double g = g_mean(c);
        CHECK(g >= 0.0);
        CHECK(g <= std::max(recall(c), true_negative_rate(c)) + 1e-15);
    }
}

TEST_CASE("roc auc worked examples") {
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.7, 0.1}, std::vector<int>{1, 0, 1, 0}) == 0.75);
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}) == 1.0);
    CHECK(roc_auc(std::vector<double>(6, 0.3), std::vector<int>{1, 0, 0, 1, 0, 0}) == 0.5);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), std::invalid_argument);
}

TEST_CASE("roc auc equals the pairwise oracle, is complementary and rank-invariant") {
    Rng rng(4);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 2 + uniform_index(rng, 29);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(uniform_index(rng, 6)) / 5.0;
            y[i] = static_cast<int>(uniform_index(rng, 2));
        }
        y[0] = 0;
        y[1] = 1;
        CHECK(std::abs(roc_auc(s, y) - testing::pairwise_auc(s, y)) < 1e-12);
        std::vector<double> neg(n), warped(n);
        for (std::size_t i = 0; i < n; ++i) {
            neg[i] = -s[i];
            warped[i] = std::exp(3.0 * s[i]) - 7.0;
        }
        CHECK(roc_auc(s, y) + roc_auc(neg, y) == doctest::Approx(1.0));
        CHECK(roc_auc(warped, y) == roc_auc(s, y));
        CHECK(pr_auc(warped, y) == doctest::Approx(pr_auc(s, y)));
    }
}

TEST_CASE("pr auc worked examples") {
    CHECK(pr_auc(std::vector<double>{0.9, 0.8, 0.1}, std::vector<int>{1, 1, 0}) == 1.0);
    CHECK(pr_auc(std::vector<double>{0.9, 0.8, 0.7}, std::vector<int>{1, 0, 1}) ==
          doctest::Approx(0.79167).epsilon(1e-5));
    CHECK_THROWS_AS(pr_auc(std::vector<double>{0.9, 0.8}, std::vector<int>{0, 0}), std::invalid_argument);
}

TEST_CASE("pr auc matches a brute-force curve") {
    Rng rng(5);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 1 + uniform_index(rng, 30);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(uniform_index(rng, 8));
            y[i] = static_cast<int>(uniform_index(rng, 2));
        }
        y[0] = 1;
        CHECK(pr_auc(s, y) == doctest::Approx(brute_pr_auc(s, y)).epsilon(1e-12));
    }
    // single positive ranked last among n
    for (std::size_t n : {4u, 10u, 50u}) {
        std::vector<double> s(n);
        std::vector<int> y(n, 0);
        for (std::size_t i = 0; i < n; ++i) s[i] = double(n - i);
        y[n - 1] = 1;
        CHECK(pr_auc(s, y) == doctest::Approx(0.5 / double(n)));
        CHECK(pr_auc(s, y) == doctest::Approx(brute_pr_auc(s, y)));
    }
}

TEST_CASE("evaluate reports every metric within [0, 1]") {
    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> s(40);
        std::vector<int> y(40);
        for (std::size_t i = 0; i < 40; ++i) {
            s[i] = uniform01(rng);
            y[i] = static_cast<int>(i % 5 == 0);
        }
        const auto e = evaluate(s, y);
        for (auto name : metric_names) {
            const double v = metric_value(e, name);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        const auto c = confusion_at_threshold(s, y);
        CHECK(e.f1 == f_beta(c));
        CHECK(e.g_mean == g_mean(c));
        CHECK(e.roc_auc == roc_auc(s, y));
    }
    CHECK_THROWS_AS(metric_value(EvalScores{}, "accuracy"), std::invalid_argument);
}
