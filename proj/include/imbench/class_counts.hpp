#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace imbench {

/// Per-class sample counts for a binary problem (label 1 = minority/positive).
struct ClassCounts {
    std::array<std::size_t, 2> per_class{0, 0};

    std::size_t operator[](int c) const { return per_class.at(static_cast<std::size_t>(c)); }
    std::size_t total() const { return per_class[0] + per_class[1]; }
    bool both_present() const { return per_class[0] > 0 && per_class[1] > 0; }

    /// Index of the larger class; ties go to class 0.
    int majority() const { return per_class[1] > per_class[0] ? 1 : 0; }
    int minority() const { return 1 - majority(); }

    static ClassCounts from_labels(std::span<const int> labels) {
        ClassCounts c;
        for (int y : labels) {
            if (y != 0 && y != 1) throw std::invalid_argument("label " + std::to_string(y) + " outside {0,1}");
            ++c.per_class[static_cast<std::size_t>(y)];
        }
        return c;
    }

    bool operator==(const ClassCounts&) const = default;
};

}  // namespace imbench
