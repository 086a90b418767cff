#ifndef RATBARY_COMMANDS_HPP
#define RATBARY_COMMANDS_HPP

// The five CLI verbs as library calls. Each returns the data it wrote so the
// tests can inspect it without reparsing files.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ratbary/aaa.hpp"
#include "ratbary/barycentric.hpp"
#include "ratbary/error.hpp"
#include "ratbary/extension.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/io.hpp"
#include "ratbary/linalg.hpp"
#include "ratbary/pqr_aaa.hpp"
#include "ratbary/problems.hpp"
#include "ratbary/qr_aaa.hpp"
#include "ratbary/verify.hpp"

namespace ratbary {

// ---- gen -------------------------------------------------------------------

struct GenArgs {
    std::string problem = "beam";
    Index n = 200;
    std::uint64_t seed = 0;
    std::optional<Index> count;
    std::optional<double> a;
    std::optional<double> b;
    std::filesystem::path out;
    std::optional<std::filesystem::path> manifest; // default: <out>.json
};

struct GenResult {
    MatrixFile file;
    Json manifest;
};

inline std::filesystem::path default_manifest_path(const std::filesystem::path& out) {
    std::filesystem::path m = out;
    m += ".json";
    return m;
}

inline GenResult gen_problem(const GenArgs& args) {
    const std::vector<std::string> names = problem_names();
    if (std::find(names.begin(), names.end(), args.problem) == names.end())
        throw ParameterError("unknown problem '" + args.problem + "'");
    SplitFormProblem p = generate(args.problem, args.n, args.seed);
    if (args.count) p.grid_spec.count = *args.count;
    if (args.a) p.grid_spec.a = *args.a;
    if (args.b) p.grid_spec.b = *args.b;

    GenResult out;
    out.file.grid = p.grid();
    out.file.f = p.sample(out.file.grid);

    Json params = Json::object();
    for (const auto& [k, v] : p.parameters) params[k] = v;
    Json terms = Json::array();
    for (const SplitTerm& t : p.terms) terms.push_back(t.label);
    out.manifest = {{"problem", p.name},
                    {"n", args.n},
                    {"columns", out.file.f.cols()},
                    {"dimension", p.dimension},
                    {"seed", p.seed},
                    {"tol_default", p.tol_default},
                    {"parameters", params},
                    {"terms", terms},
                    {"grid",
                     {{"a", p.grid_spec.a},
                      {"b", p.grid_spec.b},
                      {"count", p.grid_spec.count},
                      {"axis", to_string(p.grid_spec.axis)}}}};
    return out;
}

inline GenResult cmd_gen(const GenArgs& args) {
    if (args.out.empty()) throw ParameterError("gen: --out is required");
    GenResult out = gen_problem(args);
    out.manifest["matrix_file"] = args.out.filename().string();
    write_matrix_file(args.out, out.file);
    atomic_write(args.manifest.value_or(default_manifest_path(args.out)), out.manifest.dump(2) + "\n");
    return out;
}

// ---- approx ----------------------------------------------------------------

struct ApproxArgs {
    std::filesystem::path input;
    std::string method = "qr"; // sv | qr | pqr
    double tol = 1e-8;
    std::string norm = "inf";
    std::string tol_mode = "practical";
    Index partitions = 1;
    std::optional<std::string> extension; // random | mock-cheb; automatic when unset
    std::string merge = "flat";
    std::uint64_t seed = 0;
    Index max_degree = 150;
    Index workers = 0;
    std::filesystem::path out;
    std::optional<std::filesystem::path> history_out;
};

struct ApproxResult {
    ModelFile model;
    VerifyReport report;
    bool ok = false; // converged and the full-grid check passed
};

inline TolMode parse_tol_mode(const std::string& s) {
    if (s == "practical") return TolMode::practical;
    if (s == "theory") return TolMode::theory;
    throw ParameterError("tol-mode must be practical or theory");
}

inline ExtensionStrategy parse_extension(const std::string& s) {
    if (s == "random") return ExtensionStrategy::random_uniform;
    if (s == "mock-cheb") return ExtensionStrategy::mock_chebyshev;
    throw ParameterError("extension must be random or mock-cheb");
}

inline MergeMode parse_merge(const std::string& s) {
    if (s == "flat") return MergeMode::flat;
    if (s == "tree") return MergeMode::tree;
    throw ParameterError("merge must be flat or tree");
}

namespace detail {

inline Json model_summary(const BarycentricModel& m) {
    return {{"m", m.size()}, {"converged", m.converged}, {"exhausted", m.exhausted}};
}

inline Json extension_json(const ExtensionSet& e, bool saturated) {
    return {{"strategy", to_string(e.strategy)},
            {"m_plus", e.m_plus},
            {"count", e.count},
            {"zeta", json_number(e.zeta)},
            {"gamma", json_number(e.gamma)},
            {"good", e.good},
            {"b_bound", json_number(b_bound(e.gamma))},
            {"saturated", saturated}};
}

inline Json comm_json(const CommCounters& c) {
    return {{"flat_values", c.flat_values},
            {"tree_level_values", c.tree_level_values},
            {"levels", c.levels},
            {"index_exchange", c.index_exchange}};
}

inline RealVector column_max_norms(const Eigen::Ref<const ComplexMatrix>& f, std::vector<Index>& zero) {
    RealVector d(f.cols());
    for (Index j = 0; j < f.cols(); ++j) {
        d(j) = f.col(j).cwiseAbs().maxCoeff();
        if (d(j) == 0.0) zero.push_back(j);
    }
    return d;
}

inline BarycentricModel with_rows_of(BarycentricModel m, const Eigen::Ref<const ComplexMatrix>& f) {
    ComplexMatrix rows(m.size(), f.cols());
    for (Index k = 0; k < m.size(); ++k) rows.row(k) = f.row(m.support_indices[static_cast<std::size_t>(k)]);
    m.snapshots = std::move(rows);
    return m;
}

} // namespace detail

/// Runs the selected pipeline on F; nothing is written.
inline ApproxResult approximate(const MatrixFile& input, const ApproxArgs& args) {
    const ComplexMatrix& f = input.f;
    const SampleGrid& grid = input.grid;
    if (f.cols() == 0 || f.rows() == 0) throw ParameterError("approx: empty input matrix");
    const PNorm p_norm = parse_p_norm(args.norm);
    const TolMode tol_mode = parse_tol_mode(args.tol_mode);
    if (!(args.tol > 0.0) || !std::isfinite(args.tol)) throw ParameterError("approx: tol must be positive");

    ApproxResult out;
    ModelFile& mf = out.model;
    mf.method = args.method;
    mf.tol = args.tol;
    mf.verify_tol = args.tol;
    mf.tol_mode = args.tol_mode;
    mf.p_norm = args.norm;
    mf.seed = args.seed;
    mf.partitions = 1;
    mf.d = detail::column_max_norms(f, mf.zero_columns);
    if (static_cast<Index>(mf.zero_columns.size()) == f.cols()) throw DegenerateError("approx: every column is zero");

    if (args.method == "sv") {
        const ScaledMatrix scaled = scale_columns(f);
        AaaConfig cfg;
        cfg.tol = args.tol;
        cfg.p_norm = p_norm;
        cfg.max_degree = args.max_degree;
        const BarycentricModel m = sv_aaa(scaled.g, grid, cfg);
        mf.model = detail::with_rows_of(m, f);
        mf.history = history_rows(m.history, "0");
        mf.diagnostics = {{"node_poly_max", detail::json_number(node_polynomial_max(m.supports, grid))}};
    } else if (args.method == "qr") {
        QrAaaOptions opt;
        opt.tol = args.tol;
        opt.tol_mode = tol_mode;
        opt.p_norm = p_norm;
        opt.max_degree = args.max_degree;
        const QrAaaModel q = qr_aaa(f, grid, opt);
        mf.model = q.model;
        mf.history = history_rows(q.basis_model.history, "0");
        std::vector<double> gamma(q.gamma.data(), q.gamma.data() + q.gamma.size());
        mf.diagnostics = {{"rank", q.rank},
                          {"gamma", gamma},
                          {"inner_tol", q.inner_tol},
                          {"node_poly_max", detail::json_number(node_polynomial_max(q.model.supports, grid))}};
    } else if (args.method == "pqr") {
        if (args.partitions < 1) throw ParameterError("approx: partitions must be at least 1");
        PqrOptions opt;
        opt.tol = args.tol;
        opt.tol_mode = tol_mode;
        opt.p_norm = p_norm;
        opt.max_degree = args.max_degree;
        if (args.extension) opt.strategy = parse_extension(*args.extension);
        opt.merge = parse_merge(args.merge);
        opt.workers = args.workers;
        const PartitionPlan plan = PartitionPlan::contiguous(f.cols(), args.partitions, args.seed);
        const AccumulationResult r = pqr_aaa(f, grid, plan, opt);
        mf.partitions = args.partitions;
        mf.verify_tol = r.verify_tol;
        mf.model = r.final_model;
        mf.model.converged = r.converged;
        Json parts = Json::array();
        for (const PartitionResult& part : r.partitions) {
            if (!part.degenerate) {
                auto rows = history_rows(part.local.basis_model.history, std::to_string(part.id));
                mf.history.insert(mf.history.end(), rows.begin(), rows.end());
            }
            parts.push_back({{"id", part.id},
                             {"columns", static_cast<Index>(part.columns.size())},
                             {"degenerate", part.degenerate},
                             {"rank", part.degenerate ? 0 : part.rank()},
                             {"m", part.degenerate ? 0 : part.local.model.size()},
                             {"converged", part.degenerate || part.local.model.converged}});
        }
        Json stages = Json::array();
        for (const MergeStage& s : r.stages) {
            const std::string label =
                "merge:" + std::to_string(s.level) + ":" + std::to_string(s.left) + "-" + std::to_string(s.right);
            auto rows = history_rows(s.model.history, label);
            mf.history.insert(mf.history.end(), rows.begin(), rows.end());
            stages.push_back({{"level", s.level},
                              {"left", s.left},
                              {"right", s.right},
                              {"right_columns", s.right_columns},
                              {"z_plus", static_cast<Index>(s.z_plus.size())},
                              {"model", detail::model_summary(s.model)},
                              {"extension", detail::extension_json(s.extension, s.extension_saturated)}});
        }
        mf.diagnostics = {{"partitions", parts},
                          {"stages", stages},
                          {"merge", args.merge},
                          {"strategy", to_string(r.strategy)},
                          {"weighted_merge", opt.weighted_merge},
                          {"comm", detail::comm_json(r.comm)},
                          {"extension_saturated", r.extension_saturated},
                          {"node_poly_max", detail::json_number(r.node_poly_max)},
                          {"full_grid_error", detail::json_number(r.full_grid_error)}};
    } else {
        throw ParameterError("method must be sv, qr or pqr");
    }

    out.report = verify_model(mf.model, f, grid, p_norm, mf.verify_tol);
    Index worst = 0;
    if (out.report.point_residual.size() > 0) out.report.point_residual.maxCoeff(&worst);
    mf.history.push_back({0, mf.model.size(), out.report.residual, worst, "final"});
    out.ok = mf.model.converged && out.report.pass;
    return out;
}

inline ApproxResult cmd_approx(const ApproxArgs& args) {
    if (args.out.empty()) throw ParameterError("approx: --out is required");
    const MatrixFile input = read_matrix_file(args.input);
    ApproxResult out = approximate(input, args);
    write_model_file(args.out, out.model);
    if (args.history_out) atomic_write(*args.history_out, history_csv(out.model.history));
    return out;
}

// ---- eval ------------------------------------------------------------------

struct EvalResult {
    ComplexMatrix values;   // rows at poles are not finite
    std::vector<bool> pole; // per point
    std::string csv;
};

inline EvalResult evaluate_model(const ModelFile& mf, const std::vector<Complex>& points) {
    EvalResult out;
    const Index cols = mf.model.columns();
    std::string csv = "index,re,im,status";
    for (Index j = 0; j < cols; ++j) csv += ",f" + std::to_string(j) + "_re,f" + std::to_string(j) + "_im";
    csv += '\n';
    out.values.resize(static_cast<Index>(points.size()), cols);
    if (!points.empty()) {
        Index first = -1;
        out.values = detail::barycentric_values(mf.model.supports, mf.model.weights, mf.model.snapshots, points, &first);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = out.values.row(static_cast<Index>(i));
        const bool pole = !all_finite(row);
        out.pole.push_back(pole);
        csv += std::to_string(i) + ',' + format_double(points[i].real()) + ',' + format_double(points[i].imag()) +
               (pole ? ",pole" : ",ok");
        for (Index j = 0; j < cols; ++j) {
            if (pole) {
                csv += ",,";
            } else {
                csv += ',' + format_double(row(j).real()) + ',' + format_double(row(j).imag());
            }
        }
        csv += '\n';
    }
    out.csv = std::move(csv);
    return out;
}

inline EvalResult cmd_eval(const std::filesystem::path& model_path, const std::vector<Complex>& points,
                           const std::optional<std::filesystem::path>& out) {
    const ModelFile mf = read_model_file(model_path);
    EvalResult r = evaluate_model(mf, points);
    if (out) atomic_write(*out, r.csv);
    return r;
}

// ---- verify ----------------------------------------------------------------

struct VerifyResult {
    VerifyReport report;
    Json json;
    std::string csv;
};

inline VerifyResult verify_against(const ModelFile& mf, const MatrixFile& input) {
    if (mf.model.columns() != input.f.cols())
        throw ParameterError("verify: model has " + std::to_string(mf.model.columns()) + " columns, input has " +
                             std::to_string(input.f.cols()));
    for (std::size_t k = 0; k < mf.model.support_indices.size(); ++k) {
        const Index s = mf.model.support_indices[k];
        if (s < 0 || s >= input.grid.size() || input.grid[s] != mf.model.supports[k])
            throw ParameterError("verify: model supports are not points of the input grid");
    }
    VerifyResult out;
    out.report = verify_model(mf.model, input.f, input.grid, parse_p_norm(mf.p_norm), mf.verify_tol);
    const VerifyReport& r = out.report;
    std::vector<double> col(r.column_errors.data(), r.column_errors.data() + r.column_errors.size());
    Json cols = Json::array();
    for (double e : col) cols.push_back(detail::json_number(e));
    out.json = {{"pass", r.pass},
                {"tol", r.tol},
                {"method", mf.method},
                {"m", mf.model.size()},
                {"converged", mf.model.converged},
                {"max_relative_error", detail::json_number(r.max_relative_error)},
                {"residual", detail::json_number(r.residual)},
                {"p_norm", mf.p_norm},
                {"column_errors", cols},
                {"zero_columns", r.zero_columns},
                {"pole_points", r.pole_points}};
    std::string csv = "index,re,im,max_relative_error,residual\n";
    for (Index i = 0; i < input.grid.size(); ++i)
        csv += std::to_string(i) + ',' + format_double(input.grid[i].real()) + ',' +
               format_double(input.grid[i].imag()) + ',' + format_double(r.point_errors(i)) + ',' +
               format_double(r.point_residual(i)) + '\n';
    out.csv = std::move(csv);
    return out;
}

inline VerifyResult cmd_verify(const std::filesystem::path& model_path, const std::filesystem::path& input_path,
                               const std::optional<std::filesystem::path>& report_json,
                               const std::optional<std::filesystem::path>& report_csv) {
    const VerifyResult r = verify_against(read_model_file(model_path), read_matrix_file(input_path));
    if (report_json) atomic_write(*report_json, r.json.dump(2) + "\n");
    if (report_csv) atomic_write(*report_csv, r.csv);
    return r;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
    std::vector<std::string> problems{"beam"};
    Index base_n = 200;
    std::vector<Index> factors{1, 2, 4, 8}; // column duplication
    Index repetitions = 10;
    Index count = 1000;                     // grid size
    Index skip_aaa_f_above = -1;            // skip t_AAA_F for larger N; -1 never
    double tol = 0.0;                       // 0: problem default
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out;
};

struct BenchRow {
    std::string problem;
    Index n = 0;
    Index rep = 0;
    double t_qr = 0.0;
    double t_aaa_q = 0.0;
    std::optional<double> t_aaa_f;
};

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string s = "problem,N,rep,t_QR,t_AAA_Q,t_AAA_F\n";
    for (const BenchRow& r : rows)
        s += r.problem + ',' + std::to_string(r.n) + ',' + std::to_string(r.rep) + ',' + format_double(r.t_qr) + ',' +
             format_double(r.t_aaa_q) + ',' + (r.t_aaa_f ? format_double(*r.t_aaa_f) : std::string()) + '\n';
    return s;
}

/// [F F ... F] with `factor` copies.
inline ComplexMatrix duplicate_columns(const Eigen::Ref<const ComplexMatrix>& f, Index factor) {
    if (factor < 1) throw ParameterError("duplication factor must be at least 1");
    ComplexMatrix out(f.rows(), f.cols() * factor);
    for (Index k = 0; k < factor; ++k) out.middleCols(k * f.cols(), f.cols()) = f;
    return out;
}

/// Times the QR stage (scaling + truncated pivoted QR), SV-AAA on Q Gamma, and
/// SV-AAA directly on the scaled F.
inline std::vector<BenchRow> run_bench(const BenchArgs& args) {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    if (args.repetitions < 1) throw ParameterError("bench: repetitions must be at least 1");
    std::vector<BenchRow> rows;
    for (const std::string& name : args.problems) {
        SplitFormProblem p = generate(name, args.base_n, args.seed);
        p.grid_spec.count = args.count;
        const SampleGrid grid = p.grid();
        const ComplexMatrix base = p.sample(grid);
        const double tol = args.tol > 0.0 ? args.tol : p.tol_default;
        for (Index factor : args.factors) {
            const ComplexMatrix f = duplicate_columns(base, factor);
            for (Index rep = 0; rep < args.repetitions; ++rep) {
                BenchRow row;
                row.problem = name;
                row.n = f.cols();
                row.rep = rep;

                const auto t0 = clock::now();
                ScaledMatrix scaled = scale_columns(f);
                const RrqrFactorization qr = rrqr(scaled.g, tol);
                const auto t1 = clock::now();
                AaaConfig cfg;
                cfg.tol = tol;
                cfg.column_weights = RealVector(qr.r.diagonal().cwiseAbs());
                const BarycentricModel mq = sv_aaa(qr.q, grid, cfg);
                const auto t2 = clock::now();
                row.t_qr = seconds(t0, t1);
                row.t_aaa_q = seconds(t1, t2);

                if (args.skip_aaa_f_above < 0 || f.cols() <= args.skip_aaa_f_above) {
                    AaaConfig cf;
                    cf.tol = tol;
                    const auto t3 = clock::now();
                    const BarycentricModel mf = sv_aaa(scaled.g, grid, cf);
                    row.t_aaa_f = seconds(t3, clock::now());
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

inline std::vector<BenchRow> cmd_bench(const BenchArgs& args) {
    std::vector<BenchRow> rows = run_bench(args);
    if (args.out) atomic_write(*args.out, bench_csv(rows));
    return rows;
}

} // namespace ratbary

#endif
