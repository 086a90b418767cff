#ifndef RATBARY_QR_AAA_HPP
#define RATBARY_QR_AAA_HPP

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ratbary/aaa.hpp"
#include "ratbary/barycentric.hpp"
#include "ratbary/error.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/linalg.hpp"

namespace ratbary {

/// Per-column max-norm scaling; zero columns are dropped.
struct ColumnScaling {
    RealVector d;                    // length N, max-norm of each original column
    std::vector<Index> zero_columns; // original indices with d == 0
    std::vector<Index> kept_columns; // original indices of the scaled columns, in order

    Index columns() const { return d.size(); }
};

struct ScaledMatrix {
    ComplexMatrix g;
    ColumnScaling scaling;
};

/// Divides each nonzero column by its max-norm.
inline ScaledMatrix scale_columns(const Eigen::Ref<const ComplexMatrix>& f) {
    if (f.rows() == 0 || f.cols() == 0) throw ParameterError("scale_columns: empty matrix");
    require_finite(f, "scale_columns input");
    ScaledMatrix out;
    out.scaling.d.resize(f.cols());
    for (Index j = 0; j < f.cols(); ++j) {
        const double dj = f.col(j).cwiseAbs().maxCoeff();
        out.scaling.d(j) = dj;
        (dj > 0.0 ? out.scaling.kept_columns : out.scaling.zero_columns).push_back(j);
    }
    if (out.scaling.kept_columns.empty()) throw DegenerateError("scale_columns: every column is zero");
    out.g.resize(f.rows(), static_cast<Index>(out.scaling.kept_columns.size()));
    for (std::size_t q = 0; q < out.scaling.kept_columns.size(); ++q) {
        const Index j = out.scaling.kept_columns[q];
        out.g.col(static_cast<Index>(q)) = f.col(j) / out.scaling.d(j);
    }
    return out;
}

/// `practical` passes tol to the inner SV-AAA unchanged, `theory` passes tol / k.
enum class TolMode { practical, theory };

inline std::string to_string(TolMode mode) { return mode == TolMode::practical ? "practical" : "theory"; }

struct QrAaaOptions {
    double tol = 1e-8;
    TolMode tol_mode = TolMode::practical;
    PNorm p_norm = PNorm::inf;
    Index max_degree = 150;
    std::optional<double> rrqr_tol; // defaults to tol
    bool monitor_node_polynomial = false;
    WeightSolver solver = WeightSolver::incremental;
};

struct QrAaaModel {
    BarycentricModel model;       // snapshots are rows of the original F
    BarycentricModel basis_model; // same supports and weights, snapshots rows of Q
    ColumnScaling scaling;
    Index rank = 0;
    RealVector gamma; // |R(nu, nu)|
    TolMode tol_mode = TolMode::practical;
    double tol = 0.0;
    double inner_tol = 0.0;
};

struct QrAaaRun {
    QrAaaModel result;
    RrqrFactorization factorization; // of the scaled matrix
};

/// Rebuilds a model over F from a model over Q Gamma: same supports and
/// weights, snapshots replaced by the given rows of F.
inline BarycentricModel reconstruct(const BarycentricModel& model_q, const Eigen::Ref<const ComplexMatrix>& r,
                                    const ColumnScaling& scaling, std::span<const Index> supports,
                                    const Eigen::Ref<const ComplexMatrix>& f_rows) {
    const Index m = model_q.size();
    if (static_cast<Index>(supports.size()) != m) throw ParameterError("reconstruct: support count mismatch");
    if (f_rows.rows() != m) throw ParameterError("reconstruct: f_rows must have one row per support");
    if (f_rows.cols() != scaling.columns()) throw ParameterError("reconstruct: f_rows width differs from scaling");
    if (r.rows() != model_q.columns()) throw ParameterError("reconstruct: R rows differ from basis model width");
    if (r.cols() != static_cast<Index>(scaling.kept_columns.size()))
        throw ParameterError("reconstruct: R columns differ from kept column count");
    if (!model_q.support_indices.empty())
        for (Index k = 0; k < m; ++k)
            if (model_q.support_indices[static_cast<std::size_t>(k)] != supports[static_cast<std::size_t>(k)])
                throw ParameterError("reconstruct: support indices disagree with the basis model");
    BarycentricModel out;
    out.supports = model_q.supports;
    out.weights = model_q.weights;
    out.support_indices.assign(supports.begin(), supports.end());
    out.snapshots = f_rows;
    out.history = model_q.history;
    out.converged = model_q.converged;
    out.exhausted = model_q.exhausted;
    return out;
}

/// Scale, factor F(:, perm) ~ Q R with the truncated pivoted QR, run weighted
/// SV-AAA on Q with weights |R(nu, nu)|, and attach the rows of F.
inline QrAaaRun qr_aaa_run(const Eigen::Ref<const ComplexMatrix>& f, const SampleGrid& grid,
                           const QrAaaOptions& opt) {
    if (f.rows() != grid.size()) throw ParameterError("qr_aaa: matrix rows do not match grid size");
    if (!(opt.tol > 0.0) || !std::isfinite(opt.tol)) throw ParameterError("qr_aaa: tol must be positive");
    ScaledMatrix scaled = scale_columns(f);

    QrAaaRun run;
    run.factorization = rrqr(scaled.g, opt.rrqr_tol.value_or(opt.tol));
    const RrqrFactorization& qr = run.factorization;
    if (qr.rank == 0) throw DegenerateError("qr_aaa: numerical rank is zero");

    QrAaaModel& out = run.result;
    out.scaling = std::move(scaled.scaling);
    out.rank = qr.rank;
    out.gamma.resize(qr.rank);
    for (Index i = 0; i < qr.rank; ++i) out.gamma(i) = std::abs(qr.r(i, i));
    out.tol_mode = opt.tol_mode;
    out.tol = opt.tol;
    out.inner_tol = opt.tol_mode == TolMode::theory ? opt.tol / static_cast<double>(qr.rank) : opt.tol;

    AaaConfig cfg;
    cfg.tol = out.inner_tol;
    cfg.p_norm = opt.p_norm;
    cfg.max_degree = opt.max_degree;
    cfg.column_weights = out.gamma;
    cfg.monitor_node_polynomial = opt.monitor_node_polynomial;
    cfg.solver = opt.solver;
    out.basis_model = sv_aaa(qr.q, grid, cfg);

    const std::vector<Index>& sup = out.basis_model.support_indices;
    ComplexMatrix rows(static_cast<Index>(sup.size()), f.cols());
    for (std::size_t k = 0; k < sup.size(); ++k) rows.row(static_cast<Index>(k)) = f.row(sup[k]);
    out.model = reconstruct(out.basis_model, qr.r, out.scaling, sup, rows);
    return run;
}

inline QrAaaModel qr_aaa(const Eigen::Ref<const ComplexMatrix>& f, const SampleGrid& grid, const QrAaaOptions& opt) {
    return qr_aaa_run(f, grid, opt).result;
}

/// max_j ||f(:, j) - g(:, j)||_inf / ||f(:, j)||_inf over columns with
/// nonzero f; zero columns contribute their absolute error.
inline double max_relative_column_error(const Eigen::Ref<const ComplexMatrix>& f,
                                        const Eigen::Ref<const ComplexMatrix>& g) {
    if (f.rows() != g.rows() || f.cols() != g.cols()) throw ParameterError("relative error: shape mismatch");
    double worst = 0.0;
    for (Index j = 0; j < f.cols(); ++j) {
        const double scale = f.col(j).cwiseAbs().maxCoeff();
        double e = (f.col(j) - g.col(j)).cwiseAbs().maxCoeff();
        if (!std::isfinite(e)) e = std::numeric_limits<double>::infinity();
        worst = std::max(worst, scale > 0.0 ? e / scale : e);
    }
    return worst;
}

} // namespace ratbary

#endif
