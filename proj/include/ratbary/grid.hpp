#ifndef RATBARY_GRID_HPP
#define RATBARY_GRID_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ratbary/error.hpp"
#include "ratbary/linalg.hpp"

namespace ratbary {

enum class ChartAxis { real, imag };

inline std::string to_string(ChartAxis axis) { return axis == ChartAxis::real ? "real" : "imag"; }

/// Affine identification of a real segment [a, b] (or i[a, b]) with [-1, 1].
struct Chart {
    double a = -1.0;
    double b = 1.0;
    ChartAxis axis = ChartAxis::real;

    double coordinate(Complex z) const { return axis == ChartAxis::real ? z.real() : z.imag(); }

    double to_unit(Complex z) const {
        const double t = coordinate(z);
        const double x = ((t - a) - (b - t)) / (b - a);
        return std::clamp(x, -1.0, 1.0);
    }

    Complex from_unit(double x) const {
        const double t = 0.5 * (a + b) + 0.5 * (b - a) * x;
        return axis == ChartAxis::real ? Complex(t, 0.0) : Complex(0.0, t);
    }

    bool operator==(const Chart&) const = default;
};

/// Ordered set of pairwise distinct complex sample points.
class SampleGrid {
  public:
    SampleGrid() = default;

    explicit SampleGrid(std::vector<Complex> points, std::optional<Chart> chart = std::nullopt)
        : points_(std::move(points)), chart_(chart) {
        validate();
    }

    /// `count` equispaced points on [a, b] (axis real) or i[a, b] (axis imag),
    /// endpoints included exactly.
    static SampleGrid equispaced(double a, double b, Index count, ChartAxis axis) {
        if (count < 1) throw ParameterError("equispaced grid needs at least one point");
        if (!(b > a) && count > 1) throw ParameterError("equispaced grid needs a < b");
        std::vector<Complex> pts(static_cast<std::size_t>(count));
        for (Index i = 0; i < count; ++i) {
            const double t = count == 1 ? a
                                        : (a * static_cast<double>(count - 1 - i) + b * static_cast<double>(i)) /
                                              static_cast<double>(count - 1);
            pts[static_cast<std::size_t>(i)] = axis == ChartAxis::real ? Complex(t, 0.0) : Complex(0.0, t);
        }
        std::optional<Chart> chart;
        if (count > 1) chart = Chart{a, b, axis};
        return SampleGrid(std::move(pts), chart);
    }

    Index size() const { return static_cast<Index>(points_.size()); }
    bool empty() const { return points_.empty(); }
    Complex operator[](Index i) const { return points_[static_cast<std::size_t>(i)]; }
    const std::vector<Complex>& points() const { return points_; }
    const std::optional<Chart>& chart() const { return chart_; }

    /// Chart coordinates in [-1, 1]; requires a chart.
    std::vector<double> unit_coordinates() const {
        if (!chart_) throw ParameterError("grid has no chart to [-1, 1]");
        std::vector<double> x(points_.size());
        std::transform(points_.begin(), points_.end(), x.begin(), [&](Complex z) { return chart_->to_unit(z); });
        return x;
    }

    SampleGrid subset(std::span<const Index> indices) const {
        std::vector<Complex> pts;
        pts.reserve(indices.size());
        for (Index i : indices) {
            if (i < 0 || i >= size()) throw ParameterError("grid subset index out of range");
            pts.push_back(points_[static_cast<std::size_t>(i)]);
        }
        return SampleGrid(std::move(pts), chart_);
    }

    bool operator==(const SampleGrid&) const = default;

  private:
    void validate() const {
        for (Complex z : points_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InputError("grid point is not finite");
        std::vector<Complex> sorted = points_;
        std::sort(sorted.begin(), sorted.end(), [](Complex x, Complex y) {
            return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
        });
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] == sorted[i - 1]) throw InputError("grid points must be pairwise distinct");
        if (chart_) {
            if (!(chart_->b > chart_->a)) throw InputError("chart needs a < b");
            const double half = 0.5 * (chart_->b - chart_->a);
            const double tol = 1e-12 * std::max({1.0, std::abs(chart_->a), std::abs(chart_->b)});
            for (Complex z : points_) {
                const double off = chart_->axis == ChartAxis::real ? z.imag() : z.real();
                const double t = chart_->coordinate(z);
                const double x = (t - 0.5 * (chart_->a + chart_->b)) / half;
                if (std::abs(off) > tol || std::abs(x) > 1.0 + 1e-12)
                    throw InputError("grid point lies outside its chart segment");
            }
        }
    }

    std::vector<Complex> points_;
    std::optional<Chart> chart_;
};

} // namespace ratbary

#endif
