#ifndef RATBARY_PQR_AAA_HPP
#define RATBARY_PQR_AAA_HPP

// Column-partitioned QR-AAA with an accumulate step: local models are
// evaluated on the merged support-plus-extension set and glued by one more
// SV-AAA run (flat), or pairwise level by level (tree).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ratbary/aaa.hpp"
#include "ratbary/barycentric.hpp"
#include "ratbary/error.hpp"
#include "ratbary/extension.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/linalg.hpp"
#include "ratbary/qr_aaa.hpp"

namespace ratbary {

enum class MergeMode { flat, tree };

inline std::string to_string(MergeMode m) { return m == MergeMode::flat ? "flat" : "tree"; }

struct PartitionPlan {
    Index p = 1;
    std::vector<Index> assignment; // column -> partition
    std::uint64_t seed = 0;

    /// Contiguous blocks, sizes differing by at most one.
    static PartitionPlan contiguous(Index columns, Index p, std::uint64_t seed) {
        if (p < 1) throw ParameterError("partition count must be positive");
        if (p > columns) throw ParameterError("more partitions than columns");
        PartitionPlan plan;
        plan.p = p;
        plan.seed = seed;
        plan.assignment.resize(static_cast<std::size_t>(columns));
        const Index base = columns / p, extra = columns % p;
        Index j = 0;
        for (Index mu = 0; mu < p; ++mu) {
            const Index len = base + (mu < extra ? 1 : 0);
            for (Index t = 0; t < len; ++t) plan.assignment[static_cast<std::size_t>(j++)] = mu;
        }
        return plan;
    }

    void validate(Index columns) const {
        if (p < 1) throw ParameterError("partition count must be positive");
        if (static_cast<Index>(assignment.size()) != columns)
            throw ParameterError("partition plan does not cover every column");
        std::vector<Index> count(static_cast<std::size_t>(p), 0);
        for (Index mu : assignment) {
            if (mu < 0 || mu >= p) throw ParameterError("partition index out of range");
            ++count[static_cast<std::size_t>(mu)];
        }
        for (Index c : count)
            if (c == 0) throw ParameterError("empty partition");
    }

    std::vector<std::vector<Index>> blocks() const {
        std::vector<std::vector<Index>> out(static_cast<std::size_t>(p));
        for (std::size_t j = 0; j < assignment.size(); ++j)
            out[static_cast<std::size_t>(assignment[j])].push_back(static_cast<Index>(j));
        return out;
    }
};

struct PqrOptions {
    double tol = 1e-8;
    TolMode tol_mode = TolMode::practical;
    PNorm p_norm = PNorm::inf;
    Index max_degree = 150;
    std::optional<ExtensionStrategy> strategy; // automatic when unset
    MergeMode merge = MergeMode::flat;
    bool weighted_merge = true; // merge Q_mu Gamma_mu rather than Q_mu
    bool monitor_node_polynomial = true;
    Index workers = 0; // 0: RATBARY_WORKERS or hardware concurrency
    WeightSolver solver = WeightSolver::incremental;
};

struct PartitionResult {
    Index id = 0;
    std::vector<Index> columns;
    bool degenerate = false; // all columns zero, contributes no supports
    QrAaaModel local;

    Index rank() const { return degenerate ? 0 : local.rank; }
    const std::vector<Index>& supports() const { return local.basis_model.support_indices; }
};

struct MergeStage {
    Index level = 0;
    Index left = 0;  // node ids at this level
    Index right = -1;
    Index right_columns = 0;
    std::vector<Index> z_plus;
    ExtensionSet extension;
    bool extension_saturated = false;
    BarycentricModel model; // over the concatenated local blocks
};

struct CommCounters {
    Index flat_values = 0;               // sum_mu k_mu * |Z+|
    std::vector<Index> tree_level_values; // per level, sum over pairs of cols(right) * |Z+ pair|
    Index levels = 0;                    // ceil(log2 p) for the tree
    Index index_exchange = 0;            // sum_mu |Z_mu| * (p - 1)
};

struct AccumulationResult {
    BarycentricModel final_model; // snapshots are rows of F
    std::vector<PartitionResult> partitions;
    std::vector<MergeStage> stages; // one for flat, one per pair for tree
    std::vector<Index> z_plus;      // evaluation set of the last stage
    ExtensionSet extension;         // extension of the last stage
    bool extension_saturated = false;
    ExtensionStrategy strategy = ExtensionStrategy::random_uniform;
    double node_poly_max = 0.0;      // final supports over the full grid
    double full_grid_error = 0.0;    // max relative column error of the final model on all of Z
    double full_grid_residual = 0.0; // ||F - r(Z)||_{p,inf} on all of Z
    double verify_tol = 0.0;         // 10 * tol
    bool partitions_converged = true;
    bool converged = false;   // every AAA stage converged
    bool full_grid_ok = false; // full_grid_error <= verify_tol
    CommCounters comm;
    double seconds_partition = 0.0;
    double seconds_merge = 0.0;
};

/// Worker count: explicit request, else RATBARY_WORKERS, else hardware concurrency.
inline Index resolve_workers(Index requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RATBARY_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<Index>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<Index>(hw) : 1;
}

namespace detail {

/// Runs fn(0..count-1) on up to `workers` threads; results are written by
/// index, so scheduling does not affect them. The lowest-index exception wins.
template <typename Fn>
void parallel_for(Index count, Index workers, Fn&& fn) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    const Index nthreads = std::max<Index>(1, std::min(workers, count));
    if (nthreads == 1) {
        for (Index i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
        std::mutex mutex;
        Index next = 0;
        std::vector<std::thread> pool;
        for (Index t = 0; t < nthreads; ++t) {
            pool.emplace_back([&] {
                while (true) {
                    Index i;
                    {
                        std::lock_guard<std::mutex> lock(mutex);
                        if (next >= count) return;
                        i = next++;
                    }
                    try {
                        fn(i);
                    } catch (...) {
                        errors[static_cast<std::size_t>(i)] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Evaluable block of a merge node: a model whose snapshots are rows of
/// [Q_a Gamma_a, Q_b Gamma_b, ...] at its supports.
struct MergeNode {
    BarycentricModel model; // support_indices are global grid indices
    Index columns = 0;
    bool empty = false;
};

inline std::vector<Index> sorted_union(const std::vector<Index>& a, const std::vector<Index>& b) {
    std::vector<Index> x = a, y = b, out;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct ZPlus {
    std::vector<Index> points;
    ExtensionSet extension;
    bool saturated = false;
};

/// U plus an extension set; when the grid cannot supply the requested size,
/// the extension is every remaining grid point.
inline ZPlus build_z_plus(const SampleGrid& grid, const std::vector<Index>& u, ExtensionStrategy strategy,
                          std::uint64_t seed) {
    ZPlus out;
    try {
        out.extension = extension_set(grid, u, strategy, seed);
    } catch (const ExhaustionError&) {
        out.saturated = true;
        out.extension.strategy = strategy;
        out.extension.m_plus = m_plus_for(static_cast<Index>(u.size()));
        out.extension.count = extension_count(out.extension.m_plus);
        std::vector<char> in_u(static_cast<std::size_t>(grid.size()), 0);
        for (Index s : u) in_u[static_cast<std::size_t>(s)] = 1;
        for (Index i = 0; i < grid.size(); ++i)
            if (!in_u[static_cast<std::size_t>(i)]) out.extension.points.push_back(i);
        if (grid.chart() && !out.extension.points.empty()) {
            out.extension.zeta = zeta(grid, out.extension.points);
            out.extension.gamma = static_cast<double>(out.extension.m_plus) * out.extension.zeta;
            out.extension.good = out.extension.gamma < 1.0;
        }
    }
    out.points = sorted_union(u, out.extension.points);
    return out;
}

/// Rows of the node's block at the given grid indices (support hits exact).
inline ComplexMatrix evaluate_node(const MergeNode& node, const SampleGrid& grid, const std::vector<Index>& at) {
    std::vector<Complex> pts(at.size());
    for (std::size_t q = 0; q < at.size(); ++q) pts[q] = grid[at[q]];
    return evaluate_points(node.model, pts);
}

inline MergeStage merge_nodes(const std::vector<const MergeNode*>& parts, const SampleGrid& grid,
                              ExtensionStrategy strategy, std::uint64_t seed, const AaaConfig& cfg) {
    std::vector<Index> u;
    Index cols = 0;
    for (const MergeNode* node : parts) {
        if (node->empty) continue;
        u = sorted_union(u, node->model.support_indices);
        cols += node->columns;
    }
    MergeStage stage;
    ZPlus zp = build_z_plus(grid, u, strategy, seed);
    stage.z_plus = zp.points;
    stage.extension = zp.extension;
    stage.extension_saturated = zp.saturated;

    ComplexMatrix g(static_cast<Index>(zp.points.size()), cols);
    Index c0 = 0;
    for (const MergeNode* node : parts) {
        if (node->empty) continue;
        g.middleCols(c0, node->columns) = evaluate_node(*node, grid, zp.points);
        c0 += node->columns;
    }
    const SampleGrid sub = grid.subset(zp.points);
    BarycentricModel local = sv_aaa(g, sub, cfg);
    for (Index& s : local.support_indices) s = zp.points[static_cast<std::size_t>(s)];
    for (ResidualRecord& h : local.history) h.argmax = zp.points[static_cast<std::size_t>(h.argmax)];
    stage.model = std::move(local);
    return stage;
}

} // namespace detail

/// Parallel QR-AAA over the column partitions of `plan`.
inline AccumulationResult pqr_aaa(const Eigen::Ref<const ComplexMatrix>& f, const SampleGrid& grid,
                                  const PartitionPlan& plan, const PqrOptions& opt) {
    using clock = std::chrono::steady_clock;
    if (f.rows() != grid.size()) throw ParameterError("pqr_aaa: matrix rows do not match grid size");
    if (!(opt.tol > 0.0) || !std::isfinite(opt.tol)) throw ParameterError("pqr_aaa: tol must be positive");
    plan.validate(f.cols());
    require_finite(f, "pqr_aaa input");

    AccumulationResult out;
    out.verify_tol = 10.0 * opt.tol;
    const auto blocks = plan.blocks();
    const Index p = plan.p;
    const Index workers = resolve_workers(opt.workers);

    QrAaaOptions local_opt;
    local_opt.tol = opt.tol;
    local_opt.tol_mode = opt.tol_mode;
    local_opt.p_norm = opt.p_norm;
    local_opt.max_degree = opt.max_degree;
    local_opt.solver = opt.solver;

    const auto t0 = clock::now();
    out.partitions.resize(static_cast<std::size_t>(p));
    detail::parallel_for(p, workers, [&](Index mu) {
        PartitionResult& part = out.partitions[static_cast<std::size_t>(mu)];
        part.id = mu;
        part.columns = blocks[static_cast<std::size_t>(mu)];
        ComplexMatrix fm(f.rows(), static_cast<Index>(part.columns.size()));
        for (std::size_t q = 0; q < part.columns.size(); ++q) fm.col(static_cast<Index>(q)) = f.col(part.columns[q]);
        try {
            part.local = qr_aaa(fm, grid, local_opt);
        } catch (const DegenerateError&) {
            part.degenerate = true;
        }
    });
    out.seconds_partition = std::chrono::duration<double>(clock::now() - t0).count();

    Index total_rank = 0;
    for (const PartitionResult& part : out.partitions) {
        if (part.degenerate) continue;
        total_rank += part.rank();
        out.partitions_converged = out.partitions_converged && part.local.model.converged;
        out.comm.index_exchange += static_cast<Index>(part.supports().size()) * (p - 1);
    }
    if (total_rank == 0) throw DegenerateError("pqr_aaa: every partition is zero");

    const auto t1 = clock::now();
    if (p == 1) {
        // Nothing to accumulate: the single local model is the result.
        out.final_model = out.partitions[0].local.model;
        out.converged = out.final_model.converged;
        out.strategy = opt.strategy.value_or(ExtensionStrategy::random_uniform);
    } else {
        ExtensionStrategy strategy = ExtensionStrategy::random_uniform;
        if (opt.strategy) {
            strategy = *opt.strategy;
        } else if (grid.chart()) {
            std::vector<Index> u;
            for (const PartitionResult& part : out.partitions)
                if (!part.degenerate) u = detail::sorted_union(u, part.supports());
            try {
                strategy = extension_set(grid, u, ExtensionStrategy::mock_chebyshev, plan.seed).good
                               ? ExtensionStrategy::mock_chebyshev
                               : ExtensionStrategy::random_uniform;
            } catch (const ExhaustionError&) {
            }
        }
        out.strategy = strategy;

        AaaConfig cfg;
        cfg.tol = opt.tol_mode == TolMode::theory ? opt.tol / static_cast<double>(total_rank) : opt.tol;
        cfg.p_norm = opt.p_norm;
        cfg.max_degree = opt.max_degree;
        cfg.monitor_node_polynomial = opt.monitor_node_polynomial;
        cfg.solver = opt.solver;

        std::vector<detail::MergeNode> nodes(static_cast<std::size_t>(p));
        for (Index mu = 0; mu < p; ++mu) {
            const PartitionResult& part = out.partitions[static_cast<std::size_t>(mu)];
            detail::MergeNode& node = nodes[static_cast<std::size_t>(mu)];
            if (part.degenerate) {
                node.empty = true;
                continue;
            }
            node.model = part.local.basis_model;
            if (opt.weighted_merge) node.model.snapshots = node.model.snapshots * part.local.gamma.asDiagonal();
            node.columns = part.local.rank;
        }

        bool stages_converged = true;
        if (opt.merge == MergeMode::flat) {
            std::vector<const detail::MergeNode*> parts;
            for (const auto& node : nodes) parts.push_back(&node);
            MergeStage stage = detail::merge_nodes(parts, grid, strategy, plan.seed, cfg);
            stage.level = 0;
            stage.left = 0;
            stage.right = p - 1;
            out.comm.flat_values = total_rank * static_cast<Index>(stage.z_plus.size());
            stages_converged = stage.model.converged;
            out.stages.push_back(std::move(stage));
        } else {
            Index level = 0;
            while (nodes.size() > 1) {
                const Index pairs = static_cast<Index>(nodes.size()) / 2;
                std::vector<MergeStage> level_stages(static_cast<std::size_t>(pairs));
                detail::parallel_for(pairs, workers, [&](Index i) {
                    const detail::MergeNode& a = nodes[static_cast<std::size_t>(2 * i)];
                    const detail::MergeNode& b = nodes[static_cast<std::size_t>(2 * i + 1)];
                    Rng seeds = Rng::derived(plan.seed, static_cast<std::uint64_t>(level) + 1,
                                             static_cast<std::uint64_t>(i));
                    MergeStage stage;
                    if (a.empty && b.empty) {
                        stage.model = BarycentricModel{};
                    } else {
                        stage = detail::merge_nodes({&a, &b}, grid, strategy, seeds.next(), cfg);
                    }
                    stage.level = level;
                    stage.left = 2 * i;
                    stage.right = 2 * i + 1;
                    stage.right_columns = b.empty ? 0 : b.columns;
                    level_stages[static_cast<std::size_t>(i)] = std::move(stage);
                });
                Index moved = 0;
                std::vector<detail::MergeNode> next;
                for (Index i = 0; i < pairs; ++i) {
                    MergeStage& stage = level_stages[static_cast<std::size_t>(i)];
                    const detail::MergeNode& a = nodes[static_cast<std::size_t>(2 * i)];
                    const detail::MergeNode& b = nodes[static_cast<std::size_t>(2 * i + 1)];
                    detail::MergeNode merged;
                    merged.empty = a.empty && b.empty;
                    merged.columns = (a.empty ? 0 : a.columns) + (b.empty ? 0 : b.columns);
                    if (!merged.empty) {
                        // The stage input rows are the merged block, so its snapshots already are too.
                        merged.model = stage.model;
                        stages_converged = stages_converged && stage.model.converged;
                        moved += stage.right_columns * static_cast<Index>(stage.z_plus.size());
                    }
                    next.push_back(std::move(merged));
                    out.stages.push_back(std::move(stage));
                }
                if (nodes.size() % 2 == 1) next.push_back(std::move(nodes.back()));
                out.comm.tree_level_values.push_back(moved);
                nodes = std::move(next);
                ++level;
            }
            out.comm.levels = level;
        }
        const MergeStage& last = out.stages.back();
        out.z_plus = last.z_plus;
        out.extension = last.extension;
        for (const MergeStage& s : out.stages) out.extension_saturated = out.extension_saturated || s.extension_saturated;

        BarycentricModel final_model = last.model;
        final_model.snapshots.resize(final_model.size(), f.cols());
        for (Index k = 0; k < final_model.size(); ++k)
            final_model.snapshots.row(k) = f.row(final_model.support_indices[static_cast<std::size_t>(k)]);
        out.final_model = std::move(final_model);
        out.converged = stages_converged;
    }
    out.converged = out.converged && out.partitions_converged;
    out.seconds_merge = std::chrono::duration<double>(clock::now() - t1).count();

    // Validation on every grid point, not only on Z+.
    out.node_poly_max = node_polynomial_max(out.final_model.supports, grid);
    Index pole = -1;
    const ComplexMatrix approx = detail::barycentric_values(out.final_model.supports, out.final_model.weights,
                                                            out.final_model.snapshots, grid.points(), &pole);
    out.full_grid_error = max_relative_column_error(f, approx);
    const ComplexMatrix diff = f - approx;
    out.full_grid_residual = all_finite(diff) ? norm_p_inf(diff, opt.p_norm) : std::numeric_limits<double>::infinity();
    out.full_grid_ok = out.full_grid_error <= out.verify_tol;
    return out;
}

} // namespace ratbary

#endif
