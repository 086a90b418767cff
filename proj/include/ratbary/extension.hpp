#ifndef RATBARY_EXTENSION_HPP
#define RATBARY_EXTENSION_HPP

// Extension sets for the accumulate step: arccos-gap measure, mock-Chebyshev
// selection on a charted grid, and the resulting polynomial growth bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ratbary/error.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/linalg.hpp"
#include "ratbary/rng.hpp"

namespace ratbary {

/// Largest arccos gap of sorted points in [-1, 1], counting the gaps to -1 and +1.
inline double zeta(std::span<const double> points) {
    if (points.empty()) throw ParameterError("zeta: empty point set");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i] >= -1.0 && points[i] <= 1.0)) throw ParameterError("zeta: point outside [-1, 1]");
        if (i > 0 && points[i] < points[i - 1]) throw ParameterError("zeta: points must be sorted ascending");
    }
    double worst = std::numbers::pi - std::acos(points.front());
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        worst = std::max(worst, std::acos(points[i]) - std::acos(points[i + 1]));
    return std::max(worst, std::acos(points.back()));
}

/// zeta of grid points given by index, measured in the grid's chart.
inline double zeta(const SampleGrid& grid, std::span<const Index> indices) {
    if (!grid.chart()) throw ParameterError("zeta: grid has no chart");
    std::vector<double> x;
    x.reserve(indices.size());
    for (Index i : indices) x.push_back(grid.chart()->to_unit(grid[i]));
    std::sort(x.begin(), x.end());
    return zeta(std::span<const double>(x));
}

/// Chebyshev extrema cos(j pi / order), j = 0..order, in ascending order.
inline std::vector<double> chebyshev_extrema(Index order) {
    if (order < 1) throw ParameterError("chebyshev_extrema: order must be positive");
    std::vector<double> x(static_cast<std::size_t>(order + 1));
    for (Index j = 0; j <= order; ++j)
        x[static_cast<std::size_t>(j)] =
            -std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(order));
    x.front() = -1.0;
    x.back() = 1.0;
    return x;
}

/// Indices of the grid points nearest (in chart coordinates) to the `count`
/// Chebyshev extrema of order count - 1. A node whose nearest point is taken
/// gets the nearest unused one; distance ties go to the lower index. The
/// result is sorted by grid index.
inline std::vector<Index> mock_chebyshev(const SampleGrid& grid, Index count) {
    if (!grid.chart()) throw ParameterError("mock_chebyshev: grid has no chart");
    if (count < 1) throw ParameterError("mock_chebyshev: count must be positive");
    if (grid.size() < count) throw ParameterError("mock_chebyshev: grid smaller than requested count");
    const Index n = grid.size();
    std::vector<double> x = grid.unit_coordinates();
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double xa = x[static_cast<std::size_t>(a)], xb = x[static_cast<std::size_t>(b)];
        return xa < xb || (xa == xb && a < b);
    });
    std::vector<double> sorted_x(static_cast<std::size_t>(n));
    for (Index p = 0; p < n; ++p) sorted_x[static_cast<std::size_t>(p)] = x[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])];

    const std::vector<double> nodes = count == 1 ? std::vector<double>{0.0} : chebyshev_extrema(count - 1);
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(count));
    for (double t : nodes) {
        const auto pos = static_cast<Index>(std::lower_bound(sorted_x.begin(), sorted_x.end(), t) - sorted_x.begin());
        Index left = pos - 1, right = pos;
        while (left >= 0 && used[static_cast<std::size_t>(left)]) --left;
        while (right < n && used[static_cast<std::size_t>(right)]) ++right;
        Index pick;
        if (left < 0) {
            pick = right;
        } else if (right >= n) {
            pick = left;
        } else {
            const double dl = t - sorted_x[static_cast<std::size_t>(left)];
            const double dr = sorted_x[static_cast<std::size_t>(right)] - t;
            if (dl < dr) pick = left;
            else if (dr < dl) pick = right;
            else pick = order[static_cast<std::size_t>(left)] < order[static_cast<std::size_t>(right)] ? left : right;
        }
        used[static_cast<std::size_t>(pick)] = 1;
        out.push_back(order[static_cast<std::size_t>(pick)]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

enum class ExtensionStrategy { random_uniform, mock_chebyshev };

inline std::string to_string(ExtensionStrategy s) {
    return s == ExtensionStrategy::random_uniform ? "random" : "mock-cheb";
}

struct ExtensionSet {
    std::vector<Index> points; // grid indices, ascending
    ExtensionStrategy strategy = ExtensionStrategy::random_uniform;
    Index m_plus = 0;
    Index count = 0; // requested size ceil(3 pi m_plus)
    double zeta = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN(); // m_plus * zeta
    bool good = false;                                        // gamma < 1
};

inline Index m_plus_for(Index union_size) {
    if (union_size < 1) throw ParameterError("m_plus: union of supports is empty");
    return 2 * union_size - 2;
}

inline Index extension_count(Index m_plus) {
    if (m_plus < 0) throw ParameterError("extension_count: negative m_plus");
    return static_cast<Index>(std::ceil(3.0 * std::numbers::pi * static_cast<double>(m_plus)));
}

/// Extension set for the union of local supports `union_supports`.
inline ExtensionSet extension_set(const SampleGrid& grid, std::span<const Index> union_supports,
                                  ExtensionStrategy strategy, std::uint64_t seed,
                                  std::optional<Index> target_m_plus = std::nullopt) {
    if (union_supports.empty()) throw ParameterError("extension_set: union of supports is empty");
    std::vector<char> in_union(static_cast<std::size_t>(grid.size()), 0);
    Index distinct = 0;
    for (Index s : union_supports) {
        if (s < 0 || s >= grid.size()) throw ParameterError("extension_set: support index out of range");
        if (!in_union[static_cast<std::size_t>(s)]) ++distinct;
        in_union[static_cast<std::size_t>(s)] = 1;
    }
    ExtensionSet out;
    out.strategy = strategy;
    out.m_plus = target_m_plus.value_or(m_plus_for(distinct));
    out.count = extension_count(out.m_plus);

    if (strategy == ExtensionStrategy::mock_chebyshev) {
        if (!grid.chart()) throw ParameterError("extension_set: mock-Chebyshev needs a charted grid");
        if (out.count > grid.size()) throw ExhaustionError("extension_set: grid too small for the extension size");
        if (out.count > 0) out.points = mock_chebyshev(grid, out.count);
    } else {
        std::vector<Index> pool;
        for (Index i = 0; i < grid.size(); ++i)
            if (!in_union[static_cast<std::size_t>(i)]) pool.push_back(i);
        if (out.count > static_cast<Index>(pool.size()))
            throw ExhaustionError("extension_set: not enough grid points outside the supports");
        Rng rng(seed);
        out.points = rng.sample(std::move(pool), out.count);
        std::sort(out.points.begin(), out.points.end());
    }
    if (grid.chart() && !out.points.empty()) {
        out.zeta = zeta(grid, out.points);
        out.gamma = static_cast<double>(out.m_plus) * out.zeta;
        out.good = out.gamma < 1.0;
    }
    return out;
}

/// 1 / (1 - gamma) for gamma in [0, 1); +inf otherwise.
inline double b_bound(double gamma) {
    if (!(gamma >= 0.0) || !(gamma < 1.0)) return std::numeric_limits<double>::infinity();
    return 1.0 / (1.0 - gamma);
}

/// q_norm * node_poly_max * b_bound * eps.
inline double linearized_error_bound(double q_norm, double node_poly_max, double b_bound_value, double eps) {
    if (!(q_norm >= 0.0) || !(node_poly_max >= 0.0) || !(eps >= 0.0))
        throw ParameterError("linearized_error_bound: inputs must be nonnegative");
    if (!(b_bound_value >= 1.0)) throw ParameterError("linearized_error_bound: b_bound must be at least 1");
    if (eps == 0.0) return 0.0;
    return q_norm * node_poly_max * b_bound_value * eps;
}

} // namespace ratbary

#endif
