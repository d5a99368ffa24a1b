#pragma once

// Classical imbalance handling: random over/undersampling, their 50% hybrid,
// and inverse-frequency cost weights. Resamplers return row indices into the
// input so callers can keep index bookkeeping across splits.

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "imbench/class_counts.hpp"
#include "imbench/matrix.hpp"
#include "imbench/objectives.hpp"
#include "imbench/random.hpp"

namespace imbench {

enum class Method { erm, gdro, ros, rus, cost, rusros };

inline constexpr std::array<Method, 6> all_methods{Method::erm, Method::gdro, Method::ros,
                                                   Method::rus, Method::cost, Method::rusros};

std::string_view to_string(Method method);
/// Case-insensitive; accepts "ROSRUS" as an alias of RUSROS.
Method parse_method(std::string_view name);

/// ROS/RUS/RUSROS/COST train with ERM; GDRO with the group-DRO objective.
Objective objective_for(Method method);

struct Resampled {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::size_t> source_rows;  // input row behind each output row
};

/// Minority rows drawn with replacement and appended until the classes are
/// equal. All input rows are kept, in order.
std::vector<std::size_t> random_oversample_indices(std::span<const int> labels, Rng& rng);

/// Majority rows subsampled without replacement down to the minority count.
/// Output keeps input order.
std::vector<std::size_t> random_undersample_indices(std::span<const int> labels, Rng& rng);

/// Majority halved (ceil) without replacement, then the minority resized to
/// match: grown with replacement, or subsampled if it already exceeds the
/// halved majority.
std::vector<std::size_t> rus_ros_hybrid_indices(std::span<const int> labels, Rng& rng);

Resampled random_oversample(const Matrix& features, std::span<const int> labels, Rng& rng);
Resampled random_undersample(const Matrix& features, std::span<const int> labels, Rng& rng);
Resampled rus_ros_hybrid(const Matrix& features, std::span<const int> labels, Rng& rng);

enum class CostNormalization {
    mean_one,     // w_c = N / (C * N_c)
    raw_inverse,  // w_c = 1 / N_c
};

std::array<double, 2> cost_weights(const ClassCounts& counts, CostNormalization mode = CostNormalization::mean_one);

}  // namespace imbench
