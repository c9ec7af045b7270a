#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qwell/error.hpp"

namespace qwell {

/// [p_min, p_max] split into k bins of width 2*eps, centered on p_j.
/// Bin j covers [p_j - eps, p_j + eps); the last bin is closed at p_max.
struct PriceGrid {
    double p_min = 0;
    double p_max = 0;
    int k = 0;
    double eps = 0;

    double bin_width() const { return 2.0 * eps; }
    double span() const { return p_max - p_min; }

    double center(int j) const { return p_min + (2 * j + 1) * eps; }
    double lower_edge(int j) const { return p_min + 2 * j * eps; }
    double upper_edge(int j) const { return p_min + 2 * (j + 1) * eps; }

    std::vector<double> centers() const {
        std::vector<double> c(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) c[static_cast<std::size_t>(j)] = center(j);
        return c;
    }

    /// Bin containing price p, or nullopt if p falls outside [p_min, p_max].
    std::optional<int> bin_of(double p) const {
        if (!(p >= p_min && p <= p_max)) return std::nullopt;
        int j = static_cast<int>(std::floor((p - p_min) / bin_width()));
        if (j < 0) j = 0;
        if (j >= k) j = k - 1;
        return j;
    }

    bool same_grid(const PriceGrid& other) const {
        return p_min == other.p_min && p_max == other.p_max && k == other.k;
    }
};

inline PriceGrid build_price_grid(double p_min, double p_max, int k) {
    if (!(p_min < p_max)) fail("bad_argument", "price grid requires p_min < p_max");
    if (k < 2) fail("bad_argument", "price grid requires k >= 2");
    PriceGrid g;
    g.p_min = p_min;
    g.p_max = p_max;
    g.k = k;
    g.eps = (p_max - p_min) / (2.0 * k);
    return g;
}

} // namespace qwell
