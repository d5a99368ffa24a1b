#include "imbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace imbench {

void ScoreTable::validate() const {
    if (scores.rows != datasets.size() || scores.cols != methods.size()) {
        throw std::invalid_argument("ScoreTable: score matrix is " + std::to_string(scores.rows) + "x" +
                                    std::to_string(scores.cols) + " but table names " +
                                    std::to_string(datasets.size()) + " datasets and " +
                                    std::to_string(methods.size()) + " methods");
    }
    for (double v : scores.values) {
        if (!std::isfinite(v)) throw std::invalid_argument("ScoreTable: missing or non-finite score");
    }
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

RankMatrix mean_ranks(const ScoreTable& table, bool higher_is_better) {
    table.validate();
    const std::size_t n = table.datasets.size(), k = table.methods.size();
    RankMatrix out;
    out.methods = table.methods;
    out.ranks = Matrix(n, k);
    out.mean_ranks.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(table.scores.row(i).begin(), table.scores.row(i).end());
        if (higher_is_better) {
            for (auto& v : row) v = -v;
        }
        const auto r = average_ranks(row);
        for (std::size_t j = 0; j < k; ++j) {
            out.ranks(i, j) = r[j];
            out.mean_ranks[j] += r[j];
        }
    }
    if (n > 0) {
        for (auto& m : out.mean_ranks) m /= static_cast<double>(n);
    }
    return out;
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("regularized_gamma_q: need a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    constexpr int max_iter = 1000;
    constexpr double eps = 1e-16;
    if (x < a + 1.0) {
        // P(a, x) = e^{-x} x^a / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < max_iter; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
    }
    // Q(a, x) continued fraction, modified Lentz.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

double chi_square_sf(double x, double dof) {
    if (!(dof > 0.0)) throw std::invalid_argument("chi_square_sf: degrees of freedom must be positive");
    if (x <= 0.0) return 1.0;
    return regularized_gamma_q(dof / 2.0, x / 2.0);
}

FriedmanResult friedman_test(const RankMatrix& ranks) {
    const auto n = static_cast<double>(ranks.datasets());
    const std::size_t k = ranks.methods.size();
    if (ranks.datasets() < 2 || k < 2) {
        throw std::invalid_argument("friedman_test: need at least 2 datasets and 2 methods");
    }
    const auto kd = static_cast<double>(k);
    double sum_sq = 0.0;
    for (double r : ranks.mean_ranks) sum_sq += r * r;
    FriedmanResult out;
    out.dof = k - 1;
    out.statistic = std::max(0.0, 12.0 * n / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0));
    // Rounding can leave a statistic of ~1e-15 for identical ranks.
    if (out.statistic < 1e-12) out.statistic = 0.0;
    out.p_value = chi_square_sf(out.statistic, static_cast<double>(out.dof));
    return out;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y, std::size_t exact_limit) {
    if (x.size() != y.size()) throw std::invalid_argument("wilcoxon_signed_rank: samples differ in length");
    std::vector<double> diff;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (d != 0.0) diff.push_back(d);
    }
    WilcoxonResult out;
    out.n = diff.size();
    if (diff.empty()) {
        out.degenerate = true;
        out.p_value = 1.0;
        return out;
    }

    // Doubled average ranks are integers, which keeps the exact null
    // distribution on an integer grid.
    const std::size_t n = diff.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(diff[a]) < std::abs(diff[b]); });
    std::vector<std::size_t> rank2(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(diff[order[j + 1]]) == std::abs(diff[order[i]])) ++j;
        for (std::size_t t = i; t <= j; ++t) rank2[order[t]] = (i + 1) + (j + 1);
        const auto tsize = static_cast<double>(j - i + 1);
        tie_term += tsize * tsize * tsize - tsize;
        i = j + 1;
    }
    std::size_t w_plus2 = 0, total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += rank2[i];
        if (diff[i] > 0.0) w_plus2 += rank2[i];
    }
    out.w_plus = static_cast<double>(w_plus2) / 2.0;
    out.w_minus = static_cast<double>(total2 - w_plus2) / 2.0;
    out.statistic = std::min(out.w_plus, out.w_minus);
    const std::size_t w2 = std::min(w_plus2, total2 - w_plus2);

    if (n <= exact_limit) {
        // counts[s] = number of sign patterns whose positive doubled-rank sum is s
        std::vector<double> counts(total2 + 1, 0.0);
        counts[0] = 1.0;
        std::size_t reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t s = reach + 1; s-- > 0;) {
                if (counts[s] != 0.0) counts[s + rank2[i]] += counts[s];
            }
            reach += rank2[i];
        }
        double lower = 0.0;
        for (std::size_t s = 0; s <= w2; ++s) lower += counts[s];
        out.exact = true;
        out.p_value = std::min(1.0, 2.0 * lower / std::ldexp(1.0, static_cast<int>(n)));
        return out;
    }

    const auto nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    out.exact = false;
    if (var <= 0.0) {
        out.p_value = 1.0;
        return out;
    }
    const double z = std::max(0.0, std::abs(out.statistic - mean) - 0.5) / std::sqrt(var);
    out.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return out;
}

std::vector<bool> holm_correction(std::span<const double> p_values, double alpha) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p_values[a] < p_values[b]; });
    std::vector<bool> reject(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        if (p_values[order[i]] <= alpha / static_cast<double>(m - i)) {
            reject[order[i]] = true;
        } else {
            break;
        }
    }
    return reject;
}

std::vector<PairwiseResult> pairwise_wilcoxon_holm(const ScoreTable& table, double alpha) {
    table.validate();
    const std::size_t k = table.methods.size(), n = table.datasets.size();
    std::vector<PairwiseResult> out;
    std::vector<double> p;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            std::vector<double> xa(n), xb(n);
            for (std::size_t i = 0; i < n; ++i) {
                xa[i] = table.scores(i, a);
                xb[i] = table.scores(i, b);
            }
            PairwiseResult r;
            r.first = table.methods[a];
            r.second = table.methods[b];
            r.test = wilcoxon_signed_rank(xa, xb);
            p.push_back(r.test.p_value);
            out.push_back(std::move(r));
        }
    }
    const auto flags = holm_correction(p, alpha);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].significant = flags[i];
    return out;
}

namespace {

std::vector<std::size_t> rank_order(const RankMatrix& ranks) {
    std::vector<std::size_t> order(ranks.methods.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return ranks.mean_ranks[a] < ranks.mean_ranks[b]; });
    return order;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

}  // namespace

std::vector<std::vector<std::string>> cd_cliques(const RankMatrix& ranks, std::span<const PairwiseResult> pairwise) {
    std::map<std::pair<std::string, std::string>, bool> significant;
    for (const auto& p : pairwise) {
        significant[{p.first, p.second}] = p.significant;
        significant[{p.second, p.first}] = p.significant;
    }
    auto differs = [&](const std::string& a, const std::string& b) {
        auto it = significant.find({a, b});
        return it != significant.end() && it->second;
    };

    const auto order = rank_order(ranks);
    const std::size_t k = order.size();
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i;
        while (j + 1 < k) {
            bool ok = true;
            for (std::size_t t = i; t <= j && ok; ++t) {
                ok = !differs(ranks.methods[order[t]], ranks.methods[order[j + 1]]);
            }
            if (!ok) break;
            ++j;
        }
        if (j > i) spans.emplace_back(i, j);
    }
    std::vector<std::vector<std::string>> cliques;
    for (std::size_t s = 0; s < spans.size(); ++s) {
        bool contained = false;
        for (std::size_t t = 0; t < spans.size() && !contained; ++t) {
            contained = t != s && spans[t].first <= spans[s].first && spans[s].second <= spans[t].second &&
                        spans[t] != spans[s];
        }
        if (contained) continue;
        std::vector<std::string> members;
        for (std::size_t t = spans[s].first; t <= spans[s].second; ++t) members.push_back(ranks.methods[order[t]]);
        cliques.push_back(std::move(members));
    }
    return cliques;
}

std::string cd_diagram_svg(const RankMatrix& ranks, std::span<const PairwiseResult> pairwise,
                           const std::string& title) {
    const std::size_t k = ranks.methods.size();
    const auto order = rank_order(ranks);
    const auto cliques = cd_cliques(ranks, pairwise);

    constexpr double width = 640.0, left = 60.0, right = 60.0;
    const double top = title.empty() ? 20.0 : 44.0;
    const double axis_y = top + 60.0;
    const double label_gap = 34.0;
    const double bar_top = axis_y + label_gap + 26.0;
    const double bar_step = 10.0;
    const double height = bar_top + bar_step * static_cast<double>(cliques.size()) + 20.0;
    const double span = width - left - right;
    auto x_of = [&](double rank) {
        return k <= 1 ? left + span / 2.0 : left + (rank - 1.0) / static_cast<double>(k - 1) * span;
    };

    std::map<std::string, double> rank_of;
    for (std::size_t j = 0; j < k; ++j) rank_of[ranks.methods[j]] = ranks.mean_ranks[j];

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" style=\"fill:#ffffff;stroke:none\"/>\n";
    if (!title.empty()) {
        svg << "<text class=\"title\" x=\"" << num(width / 2.0)
            << "\" y=\"24.00\" style=\"font-family:sans-serif;font-size:14px;text-anchor:middle\">"
            << escape_xml(title) << "</text>\n";
    }

    svg << "<g class=\"axis\" style=\"stroke:#000000;stroke-width:1\">\n"
        << "<line x1=\"" << num(x_of(1.0)) << "\" y1=\"" << num(axis_y) << "\" x2=\""
        << num(x_of(static_cast<double>(std::max<std::size_t>(k, 1)))) << "\" y2=\"" << num(axis_y) << "\"/>\n";
    for (std::size_t r = 1; r <= std::max<std::size_t>(k, 1); ++r) {
        const double x = x_of(static_cast<double>(r));
        svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(axis_y - 5.0) << "\" x2=\"" << num(x) << "\" y2=\""
            << num(axis_y) << "\"/>\n";
    }
    svg << "</g>\n<g class=\"ticks\" style=\"font-family:sans-serif;font-size:11px;text-anchor:middle\">\n";
    for (std::size_t r = 1; r <= std::max<std::size_t>(k, 1); ++r) {
        svg << "<text class=\"tick-label\" x=\"" << num(x_of(static_cast<double>(r))) << "\" y=\""
            << num(axis_y - 9.0) << "\">" << r << "</text>\n";
    }
    svg << "</g>\n<g class=\"methods\" style=\"font-family:sans-serif;font-size:12px;text-anchor:middle\">\n";
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = order[i];
        const double x = x_of(ranks.mean_ranks[j]);
        const bool above = i % 2 == 0;
        const double label_y = above ? axis_y - label_gap : axis_y + label_gap;
        svg << "<circle class=\"method-marker\" cx=\"" << num(x) << "\" cy=\"" << num(axis_y)
            << "\" r=\"3\" style=\"fill:#000000\"/>\n"
            << "<line class=\"method-leader\" x1=\"" << num(x) << "\" y1=\"" << num(axis_y) << "\" x2=\"" << num(x)
            << "\" y2=\"" << num(above ? label_y + 4.0 : label_y - 12.0)
            << "\" style=\"stroke:#808080;stroke-width:1\"/>\n"
            << "<text class=\"method-label\" x=\"" << num(x) << "\" y=\"" << num(label_y) << "\">"
            << escape_xml(ranks.methods[j]) << " (" << num(ranks.mean_ranks[j]) << ")</text>\n";
    }
    svg << "</g>\n<g class=\"cliques\" style=\"stroke:#000000;stroke-width:4;stroke-linecap:round\">\n";
    for (std::size_t c = 0; c < cliques.size(); ++c) {
        const double y = bar_top + bar_step * static_cast<double>(c);
        svg << "<line class=\"clique\" x1=\"" << num(x_of(rank_of[cliques[c].front()])) << "\" y1=\"" << num(y)
            << "\" x2=\"" << num(x_of(rank_of[cliques[c].back()])) << "\" y2=\"" << num(y) << "\"/>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

}  // namespace imbench
