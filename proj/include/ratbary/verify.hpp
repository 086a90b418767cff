#ifndef RATBARY_VERIFY_HPP
#define RATBARY_VERIFY_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "ratbary/barycentric.hpp"
#include "ratbary/error.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/linalg.hpp"

namespace ratbary {

/// Full-grid audit of a model against its data.
struct VerifyReport {
    RealVector column_errors;  // ||f_j - r_j||_inf / d_j; absolute for zero columns
    RealVector point_errors;   // per grid point, max over columns of the relative error
    RealVector point_residual; // per grid point, p-norm of the scaled error row
    std::vector<Index> zero_columns;
    std::vector<Index> pole_points; // grid indices where the denominator vanished
    double max_relative_error = 0.0;
    double residual = 0.0; // ||(F - r(Z)) D^{-1}||_{p,inf}, zero columns unscaled
    double tol = 0.0;
    bool pass = false;
};

/// Scaling d_j is the max-norm of column j of F.
inline VerifyReport verify_model(const BarycentricModel& model, const Eigen::Ref<const ComplexMatrix>& f,
                                 const SampleGrid& grid, PNorm p_norm, double tol) {
    model.validate();
    if (f.rows() != grid.size()) throw ParameterError("verify: matrix rows do not match grid size");
    if (f.cols() != model.columns()) throw ParameterError("verify: model and data differ in column count");

    Index first_pole = -1;
    const ComplexMatrix approx =
        detail::barycentric_values(model.supports, model.weights, model.snapshots, grid.points(), &first_pole);
    VerifyReport out;
    out.tol = tol;
    const Index n = f.rows(), cols = f.cols();
    RealVector d(cols);
    for (Index j = 0; j < cols; ++j) {
        d(j) = f.col(j).cwiseAbs().maxCoeff();
        if (d(j) == 0.0) out.zero_columns.push_back(j);
    }
    out.column_errors = RealVector::Zero(cols);
    out.point_errors = RealVector::Zero(n);
    out.point_residual = RealVector::Zero(n);
    const double inf = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
        bool pole = false;
        double sq = 0.0, worst = 0.0;
        for (Index j = 0; j < cols; ++j) {
            const Complex a = approx(i, j);
            double e = std::abs(f(i, j) - a);
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || !std::isfinite(e)) {
                e = inf;
                pole = true;
            }
            const double rel = d(j) > 0.0 ? e / d(j) : e;
            out.column_errors(j) = std::max(out.column_errors(j), rel);
            worst = std::max(worst, rel);
            sq += rel * rel;
        }
        if (pole) out.pole_points.push_back(i);
        out.point_errors(i) = worst;
        out.point_residual(i) = p_norm == PNorm::inf ? worst : std::sqrt(sq);
    }
    out.max_relative_error = cols > 0 ? out.column_errors.maxCoeff() : 0.0;
    out.residual = n > 0 ? out.point_residual.maxCoeff() : 0.0;
    out.pass = out.pole_points.empty() && out.max_relative_error <= tol;
    return out;
}

} // namespace ratbary

#endif
