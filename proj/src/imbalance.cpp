#include "imbench/imbalance.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>
#include <string>

namespace imbench {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::erm: return "ERM";
        case Method::gdro: return "GDRO";
        case Method::ros: return "ROS";
        case Method::rus: return "RUS";
        case Method::cost: return "COST";
        case Method::rusros: return "RUSROS";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    std::string upper(name);
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (upper == "ROSRUS") return Method::rusros;
    for (Method m : all_methods) {
        if (upper == to_string(m)) return m;
    }
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

Objective objective_for(Method method) { return method == Method::gdro ? Objective::gdro : Objective::erm; }

namespace {

struct ClassRows {
    std::vector<std::size_t> majority;
    std::vector<std::size_t> minority;
};

ClassRows split_classes(std::span<const int> labels, const char* who) {
    const auto counts = ClassCounts::from_labels(labels);
    if (!counts.both_present()) throw std::invalid_argument(std::string(who) + ": input contains a single class");
    const int maj = counts.majority();
    ClassRows rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == maj ? rows.majority : rows.minority).push_back(i);
    }
    return rows;
}

// k distinct rows from `pool`, returned in their original order.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

void append_with_replacement(std::vector<std::size_t>& out, std::span<const std::size_t> pool, std::size_t k,
                             Rng& rng) {
    for (std::size_t i = 0; i < k; ++i) out.push_back(pool[static_cast<std::size_t>(uniform_index(rng, pool.size()))]);
}

std::vector<std::size_t> merge_sorted(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

Resampled gather(const Matrix& features, std::span<const int> labels, std::vector<std::size_t> rows) {
    if (features.rows != labels.size()) throw std::invalid_argument("resample: feature rows and label count differ");
    Resampled r;
    r.features = take_rows(features, rows);
    r.labels.reserve(rows.size());
    for (auto i : rows) r.labels.push_back(labels[i]);
    r.source_rows = std::move(rows);
    return r;
}

}  // namespace

std::vector<std::size_t> random_oversample_indices(std::span<const int> labels, Rng& rng) {
    const auto rows = split_classes(labels, "random_oversample");
    std::vector<std::size_t> out(labels.size());
    std::iota(out.begin(), out.end(), std::size_t{0});
    append_with_replacement(out, rows.minority, rows.majority.size() - rows.minority.size(), rng);
    return out;
}

std::vector<std::size_t> random_undersample_indices(std::span<const int> labels, Rng& rng) {
    const auto rows = split_classes(labels, "random_undersample");
    auto kept = sample_without_replacement(rows.majority, rows.minority.size(), rng);
    return merge_sorted(kept, rows.minority);
}

std::vector<std::size_t> rus_ros_hybrid_indices(std::span<const int> labels, Rng& rng) {
    const auto rows = split_classes(labels, "rus_ros_hybrid");
    if (rows.majority.size() < 2) throw std::invalid_argument("rus_ros_hybrid: majority class needs at least 2 rows");
    const std::size_t target = (rows.majority.size() + 1) / 2;
    auto kept = sample_without_replacement(rows.majority, target, rng);
    if (rows.minority.size() <= target) {
        auto out = merge_sorted(kept, rows.minority);
        append_with_replacement(out, rows.minority, target - rows.minority.size(), rng);
        return out;
    }
    auto minority = sample_without_replacement(rows.minority, target, rng);
    return merge_sorted(kept, minority);
}

Resampled random_oversample(const Matrix& features, std::span<const int> labels, Rng& rng) {
    return gather(features, labels, random_oversample_indices(labels, rng));
}

Resampled random_undersample(const Matrix& features, std::span<const int> labels, Rng& rng) {
    return gather(features, labels, random_undersample_indices(labels, rng));
}

Resampled rus_ros_hybrid(const Matrix& features, std::span<const int> labels, Rng& rng) {
    return gather(features, labels, rus_ros_hybrid_indices(labels, rng));
}

std::array<double, 2> cost_weights(const ClassCounts& counts, CostNormalization mode) {
    if (!counts.both_present()) throw std::invalid_argument("cost_weights: every class needs at least one sample");
    std::array<double, 2> w{};
    const double n = static_cast<double>(counts.total());
    for (int c = 0; c < 2; ++c) {
        const double nc = static_cast<double>(counts[c]);
        w[static_cast<std::size_t>(c)] = mode == CostNormalization::mean_one ? n / (2.0 * nc) : 1.0 / nc;
    }
    return w;
}

}  // namespace imbench
