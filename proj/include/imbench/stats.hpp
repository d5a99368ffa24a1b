#pragma once

// Cross-dataset comparison of methods: average ranks, Friedman's test,
// pairwise Wilcoxon signed-rank tests with Holm's step-down correction, and
// critical-difference diagrams.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "imbench/matrix.hpp"

namespace imbench {

/// Mean metric per (dataset, method); scores is datasets x methods.
struct ScoreTable {
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    Matrix scores;

    void validate() const;
};

struct RankMatrix {
    std::vector<std::string> methods;
    Matrix ranks;  // datasets x methods, 1 = best, ties averaged
    std::vector<double> mean_ranks;

    std::size_t datasets() const { return ranks.rows; }
};

/// Average ranks of `values` (1 = smallest); ties get the mean of their
/// positions.
std::vector<double> average_ranks(std::span<const double> values);

RankMatrix mean_ranks(const ScoreTable& table, bool higher_is_better = true);

/// Regularised upper incomplete gamma Q(a, x): series below x = a + 1,
/// Lentz continued fraction above.
double regularized_gamma_q(double a, double x);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, double dof);

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t dof = 0;
};

FriedmanResult friedman_test(const RankMatrix& ranks);

struct WilcoxonResult {
    std::size_t n = 0;  // non-zero differences
    double w_plus = 0.0;
    double w_minus = 0.0;
    double statistic = 0.0;  // min(W+, W-)
    double p_value = 1.0;    // two-sided
    bool exact = true;
    bool degenerate = false;  // every difference was zero
};

/// Paired test on x - y. Exact null distribution for n <= exact_limit,
/// otherwise normal approximation with continuity and tie correction.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    std::size_t exact_limit = 20);

/// Holm step-down: true where the hypothesis is rejected at family level
/// `alpha`. Result is in the input order.
std::vector<bool> holm_correction(std::span<const double> p_values, double alpha = 0.05);

struct PairwiseResult {
    std::string first;
    std::string second;
    WilcoxonResult test;
    bool significant = false;
};

/// All k(k-1)/2 method pairs on the per-dataset score vectors, Holm over the
/// whole family.
std::vector<PairwiseResult> pairwise_wilcoxon_holm(const ScoreTable& table, double alpha = 0.05);

/// Maximal runs of methods, contiguous in mean-rank order, with no
/// significant pair inside. Each clique lists method names best-first and has
/// at least two members.
std::vector<std::vector<std::string>> cd_cliques(const RankMatrix& ranks, std::span<const PairwiseResult> pairwise);

/// Self-contained SVG 1.1 critical-difference diagram.
std::string cd_diagram_svg(const RankMatrix& ranks, std::span<const PairwiseResult> pairwise,
                           const std::string& title = "");

}  // namespace imbench
