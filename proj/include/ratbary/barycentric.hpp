#ifndef RATBARY_BARYCENTRIC_HPP
#define RATBARY_BARYCENTRIC_HPP

#include <cmath>
#include <span>
#include <vector>

#include "ratbary/error.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/linalg.hpp"

namespace ratbary {

/// One greedy step: after m supports the residual over the remaining grid
/// was `residual`, largest at grid index `argmax`.
struct ResidualRecord {
    Index m = 0;
    double residual = 0.0;
    Index argmax = 0;
};

/// Set-valued barycentric rational function
///
///   r(z) = sum_k w_k f_k / (z - z_k)  /  sum_k w_k / (z - z_k)
///
/// with f_k the rows of `snapshots`. All N components share supports and
/// weights; evaluation at a support returns the stored row.
struct BarycentricModel {
    std::vector<Complex> supports;
    ComplexVector weights;
    ComplexMatrix snapshots; // supports x N
    std::vector<Index> support_indices;
    std::vector<ResidualRecord> history;
    bool converged = false;
    bool exhausted = false;

    Index size() const { return static_cast<Index>(supports.size()); }
    Index degree() const { return size() - 1; }
    Index columns() const { return snapshots.cols(); }
    bool empty() const { return supports.empty(); }
    double final_residual() const { return history.empty() ? 0.0 : history.back().residual; }

    void validate() const {
        if (supports.empty()) throw ParameterError("barycentric model has no supports");
        if (weights.size() != size() || snapshots.rows() != size())
            throw ParameterError("barycentric model: supports, weights and snapshots disagree in length");
        if (!support_indices.empty() && static_cast<Index>(support_indices.size()) != size())
            throw ParameterError("barycentric model: support_indices length mismatch");
        for (std::size_t i = 0; i < supports.size(); ++i)
            for (std::size_t j = i + 1; j < supports.size(); ++j)
                if (supports[i] == supports[j]) throw InputError("barycentric model: duplicate support point");
    }
};

namespace detail {

/// Barycentric values at `points`, rows of an |points| x N matrix. Rows at
/// exact support hits copy the snapshot; vanishing denominators yield
/// non-finite rows and are reported through `pole_row` (first one, or -1).
inline ComplexMatrix barycentric_values(const std::vector<Complex>& supports, const ComplexVector& weights,
                                        const ComplexMatrix& snapshots, std::span<const Complex> points,
                                        Index* pole_row = nullptr) {
    const Index n = static_cast<Index>(points.size());
    const Index m = static_cast<Index>(supports.size());
    ComplexMatrix cauchy(n, m);
    std::vector<Index> hit(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i) {
        const Complex z = points[static_cast<std::size_t>(i)];
        for (Index k = 0; k < m; ++k) {
            const Complex dz = z - supports[static_cast<std::size_t>(k)];
            if (dz == Complex(0.0, 0.0)) {
                hit[static_cast<std::size_t>(i)] = k;
                cauchy(i, k) = 0.0;
            } else {
                cauchy(i, k) = weights(k) / dz;
            }
        }
    }
    ComplexMatrix values = cauchy * snapshots;
    const ComplexVector den = cauchy.rowwise().sum();
    if (pole_row) *pole_row = -1;
    for (Index i = 0; i < n; ++i) {
        const Index k = hit[static_cast<std::size_t>(i)];
        if (k >= 0) {
            values.row(i) = snapshots.row(k);
            continue;
        }
        if (den(i) == Complex(0.0, 0.0)) {
            values.row(i).setConstant(Complex(std::numeric_limits<double>::infinity(), 0.0));
            if (pole_row && *pole_row < 0) *pole_row = i;
            continue;
        }
        values.row(i) /= den(i);
        if (pole_row && *pole_row < 0 && !all_finite(values.row(i))) *pole_row = i;
    }
    return values;
}

} // namespace detail

/// r(z) as a length-N vector. Throws PoleHitError when d(z) = 0 off the supports.
inline ComplexVector evaluate(const BarycentricModel& model, Complex z) {
    if (model.empty()) throw ParameterError("evaluate: empty model");
    Index pole = -1;
    const ComplexMatrix v = detail::barycentric_values(model.supports, model.weights, model.snapshots,
                                                       std::span<const Complex>(&z, 1), &pole);
    if (pole >= 0) throw PoleHitError(z);
    return v.row(0).transpose();
}

inline ComplexMatrix evaluate_points(const BarycentricModel& model, std::span<const Complex> points) {
    if (model.empty()) throw ParameterError("evaluate: empty model");
    Index pole = -1;
    ComplexMatrix v = detail::barycentric_values(model.supports, model.weights, model.snapshots, points, &pole);
    if (pole >= 0) throw PoleHitError(points[static_cast<std::size_t>(pole)]);
    return v;
}

/// Row i is r(z_i); rows at support points equal the snapshots.
inline ComplexMatrix evaluate_grid(const BarycentricModel& model, const SampleGrid& grid) {
    return evaluate_points(model, grid.points());
}

/// max over `points` of |prod_k (z - z_k)|.
inline double node_polynomial_max(std::span<const Complex> supports, std::span<const Complex> points) {
    for (std::size_t i = 0; i < supports.size(); ++i)
        for (std::size_t j = i + 1; j < supports.size(); ++j)
            if (supports[i] == supports[j]) throw InputError("node polynomial: duplicate support point");
    double best = 0.0;
    for (Complex z : points) {
        double prod = 1.0;
        for (Complex s : supports) prod *= std::abs(z - s);
        best = std::max(best, prod);
    }
    return best;
}

/// Node polynomial maximum over a grid. When the grid carries a chart, both
/// supports and grid points are measured in chart coordinates on [-1, 1].
inline double node_polynomial_max(std::span<const Complex> supports, const SampleGrid& grid) {
    if (!grid.chart()) return node_polynomial_max(supports, std::span<const Complex>(grid.points()));
    const Chart& chart = *grid.chart();
    std::vector<Complex> s(supports.size()), x(static_cast<std::size_t>(grid.size()));
    for (std::size_t i = 0; i < supports.size(); ++i) s[i] = chart.to_unit(supports[i]);
    for (Index i = 0; i < grid.size(); ++i) x[static_cast<std::size_t>(i)] = chart.to_unit(grid[i]);
    return node_polynomial_max(std::span<const Complex>(s), std::span<const Complex>(x));
}

} // namespace ratbary

#endif
