#ifndef RATBARY_AAA_HPP
#define RATBARY_AAA_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ratbary/barycentric.hpp"
#include "ratbary/error.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/linalg.hpp"
#include "ratbary/loewner.hpp"

namespace ratbary {

/// Weight solve of each greedy step. Both variants work in extended
/// precision; `reference` assembles the full Loewner matrix every step.
enum class WeightSolver { incremental, reference };

namespace detail {

inline ComplexVector to_double_weights(const BasicComplexVector<long double>& w) {
    ComplexVector out = w.cast<Complex>();
    normalize_phase(out);
    return out;
}

} // namespace detail

struct AaaConfig {
    double tol = 1e-8;
    PNorm p_norm = PNorm::inf;
    Index max_degree = 150; // cap on the number of supports
    std::optional<RealVector> column_weights;
    bool monitor_node_polynomial = false;
    WeightSolver solver = WeightSolver::incremental;

    void validate(Index columns) const {
        if (!(tol > 0.0) || !std::isfinite(tol)) throw ParameterError("aaa: tol must be positive and finite");
        if (max_degree < 1) throw ParameterError("aaa: max_degree must be at least 1");
        if (column_weights) {
            if (column_weights->size() != columns) throw ParameterError("aaa: column_weights length mismatch");
            for (Index j = 0; j < columns; ++j)
                if (!((*column_weights)(j) > 0.0) || !std::isfinite((*column_weights)(j)))
                    throw ParameterError("aaa: column_weights must be positive");
        }
    }
};

struct ArgmaxResult {
    Index index = 0;
    double value = 0.0;
};

namespace detail {

inline ComplexMatrix weighted(const Eigen::Ref<const ComplexMatrix>& f, const AaaConfig& cfg) {
    if (!cfg.column_weights) return f;
    return f * cfg.column_weights->asDiagonal();
}

/// Largest row norm among rows with mask 0; non-finite rows count as +inf,
/// ties go to the lowest index. Returns index -1 when every row is masked.
inline ArgmaxResult masked_row_argmax(const Eigen::Ref<const ComplexMatrix>& err, PNorm p,
                                      const std::vector<char>& mask) {
    ArgmaxResult best{-1, -1.0};
    for (Index i = 0; i < err.rows(); ++i) {
        if (mask[static_cast<std::size_t>(i)]) continue;
        double v = row_norm(err.row(i), p);
        if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
        if (v > best.value) best = {i, v};
    }
    return best;
}

} // namespace detail

/// Grid index outside `excluded` with the largest weighted row p-norm of
/// f - r(z), and that norm.
inline ArgmaxResult residual_argmax(const Eigen::Ref<const ComplexMatrix>& f, const SampleGrid& grid,
                                   const BarycentricModel& model, const AaaConfig& cfg,
                                   std::span<const Index> excluded) {
    if (f.rows() != grid.size()) throw ParameterError("residual_argmax: matrix rows do not match grid size");
    if (model.columns() != f.cols()) throw ParameterError("residual_argmax: model width does not match data");
    cfg.validate(f.cols());
    std::vector<char> mask(static_cast<std::size_t>(grid.size()), 0);
    for (Index e : excluded) {
        if (e < 0 || e >= grid.size()) throw ParameterError("residual_argmax: excluded index out of range");
        mask[static_cast<std::size_t>(e)] = 1;
    }
    Index dummy = -1;
    ComplexMatrix err = f - detail::barycentric_values(model.supports, model.weights, model.snapshots,
                                                       grid.points(), &dummy);
    if (cfg.column_weights) err = err * cfg.column_weights->asDiagonal();
    const ArgmaxResult r = detail::masked_row_argmax(err, cfg.p_norm, mask);
    if (r.index < 0) throw ExhaustionError("residual_argmax: every grid point is excluded");
    return r;
}

/// Greedy set-valued AAA on the rows of f (one row per grid point).
///
/// With column weights the greedy selection, the Loewner matrix and the
/// stopping test all use f * diag(weights); the snapshots keep the rows of f.
inline BarycentricModel sv_aaa(const Eigen::Ref<const ComplexMatrix>& f, const SampleGrid& grid,
                               const AaaConfig& cfg) {
    const Index n = grid.size();
    if (f.rows() != n) throw ParameterError("sv_aaa: matrix rows do not match grid size");
    if (n == 0 || f.cols() == 0) throw ParameterError("sv_aaa: empty input");
    cfg.validate(f.cols());
    require_finite(f, "sv_aaa input");

    const ComplexMatrix fw = detail::weighted(f, cfg);
    const std::vector<Complex>& z = grid.points();
    std::vector<char> used(static_cast<std::size_t>(n), 0);

    BarycentricModel model;
    const ComplexRowVector mean = fw.colwise().mean();
    ArgmaxResult next = detail::masked_row_argmax(fw.rowwise() - mean, cfg.p_norm, used);
    model.history.push_back({0, next.value, next.index});
    if (next.value == 0.0) {
        // Constant data: one support reproduces it exactly.
        model.supports = {z[static_cast<std::size_t>(next.index)]};
        model.support_indices = {next.index};
        model.weights = ComplexVector::Ones(1);
        model.snapshots = f.row(next.index);
        model.history.push_back({1, 0.0, next.index});
        model.converged = true;
        return model;
    }

    std::optional<LoewnerState> state;
    if (cfg.solver == WeightSolver::incremental) state.emplace(fw, std::span<const Complex>(z));

    std::vector<Index> order;
    double best_res = std::numeric_limits<double>::infinity();
    Index best_m = 0;
    ComplexVector best_w;
    ComplexVector w;

    while (true) {
        const Index s = next.index;
        order.push_back(s);
        used[static_cast<std::size_t>(s)] = 1;
        const Index m = static_cast<Index>(order.size());

        if (state) {
            state->add_support(s);
            w = detail::to_double_weights(state->solve().vector);
        } else {
            const BasicComplexMatrix<long double> l = loewner_assemble_as<long double>(fw, z, order);
            w = detail::to_double_weights(smallest_singular_pair(l).vector);
        }

        std::vector<Complex> sup(order.size());
        ComplexMatrix snap(m, fw.cols());
        for (Index k = 0; k < m; ++k) {
            sup[static_cast<std::size_t>(k)] = z[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
            snap.row(k) = fw.row(order[static_cast<std::size_t>(k)]);
        }
        Index dummy = -1;
        const ComplexMatrix err = fw - detail::barycentric_values(sup, w, snap, z, &dummy);
        const ArgmaxResult found = detail::masked_row_argmax(err, cfg.p_norm, used);
        const double res = found.index < 0 ? 0.0 : found.value;
        model.history.push_back({m, res, found.index < 0 ? s : found.index});

        double factor = 1.0;
        if (cfg.monitor_node_polynomial) factor = std::max(1.0, node_polynomial_max(sup, grid));
        if (res < best_res) {
            best_res = res;
            best_m = m;
            best_w = w;
        }
        if (found.index >= 0 && res * factor < cfg.tol) {
            model.converged = true;
            break;
        }
        if (found.index < 0 || m + 1 >= n) {
            model.exhausted = true;
            break;
        }
        if (m >= cfg.max_degree) break;
        next = found;
    }

    Index keep = static_cast<Index>(order.size());
    if (!model.converged) {
        keep = best_m;
        w = best_w;
    }
    model.supports.resize(static_cast<std::size_t>(keep));
    model.support_indices.assign(order.begin(), order.begin() + keep);
    model.snapshots.resize(keep, f.cols());
    for (Index k = 0; k < keep; ++k) {
        const Index s = order[static_cast<std::size_t>(k)];
        model.supports[static_cast<std::size_t>(k)] = z[static_cast<std::size_t>(s)];
        model.snapshots.row(k) = f.row(s);
    }
    model.weights = w;
    return model;
}

/// Scalar AAA: sv_aaa on a single column.
inline BarycentricModel aaa(const Eigen::Ref<const ComplexVector>& f, const SampleGrid& grid, const AaaConfig& cfg) {
    return sv_aaa(ComplexMatrix(f), grid, cfg);
}

} // namespace ratbary

#endif
