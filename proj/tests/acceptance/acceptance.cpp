// Acceptance runner: one PASS/FAIL line per criterion, details on the lines
// below it. Pass criterion numbers as arguments to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ratbary/ratbary.hpp"
#include "support/oracles.hpp"

using namespace ratbary;
namespace fs = std::filesystem;

namespace {

class Check {
  public:
    void expect(bool ok, const std::string& what) {
        ++count_;
        if (ok) return;
        ++failures_;
        if (failures_ <= 12) notes_.push_back("violation: " + what);
    }
    void note(const std::string& s) { notes_.push_back(s); }
    bool passed() const { return failures_ == 0 && count_ > 0; }
    int failures() const { return failures_; }
    int count() const { return count_; }
    const std::vector<std::string>& notes() const { return notes_; }

  private:
    int count_ = 0;
    int failures_ = 0;
    std::vector<std::string> notes_;
};

std::string sci(double x) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << x;
    return s.str();
}

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

SplitFormProblem problem(const std::string& name, Index n, Index count, std::uint64_t seed) {
    SplitFormProblem p = generate(name, n, seed);
    p.grid_spec.count = count;
    return p;
}

// Rational values on the grid by direct summation, independent of the library evaluator.
oracle::Mat oracle_values(const BarycentricModel& m, const SampleGrid& grid) {
    return oracle::bary_eval_all(m.supports, m.weights, m.snapshots, grid.points());
}

double rel_column_error(const ComplexMatrix& f, const ComplexMatrix& g) {
    double worst = 0.0;
    for (Index j = 0; j < f.cols(); ++j) {
        const double d = f.col(j).cwiseAbs().maxCoeff();
        const double e = (f.col(j) - g.col(j)).cwiseAbs().maxCoeff();
        worst = std::max(worst, std::isfinite(e) ? (d > 0 ? e / d : e) : INFINITY);
    }
    return worst;
}

double row_inf_norm(const ComplexMatrix& e) {
    double worst = 0.0;
    for (Index i = 0; i < e.rows(); ++i) worst = std::max(worst, e.row(i).cwiseAbs().maxCoeff());
    return worst;
}

// ---- 1. theorem suite ---------------------------------------------------

void theorem_suite(Check& c) {
    const double eps = 1e-8;
    // Rank of the set-valued interpolant and its grid residual.
    for (const std::string& name : problem_names()) {
        const Index n = name == "delay" ? 36 : 120;
        const SplitFormProblem p = problem(name, n, 500, 1);
        const SampleGrid grid = p.grid();
        const ComplexMatrix g = scale_columns(p.sample(grid)).g;
        AaaConfig cfg;
        cfg.tol = eps;
        const BarycentricModel m = sv_aaa(g, grid, cfg);
        const oracle::Mat approx = oracle_values(m, grid);
        const double res = row_inf_norm(g - approx);
        c.expect(m.converged && res < eps, name + " residual " + sci(res));
        const auto s = oracle::singular_values(approx);
        double tail = 0.0;
        for (std::size_t k = static_cast<std::size_t>(m.size()); k < s.size(); ++k) tail = std::max(tail, s[k]);
        c.expect(tail <= 1e-10 * s.front(), name + " rank beyond m=" + std::to_string(m.size()));
    }

    // Inner residual below eps / k implies the per-column bound, and the total
    // error including the truncated QR stays below 2 eps.
    const std::vector<std::string> families{"beam", "photonic", "schrodinger", "delay"};
    int hypotheses = 0, rel_bad = 0, total_bad = 0;
    double worst_rel = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::string& name = families[seed % families.size()];
        const SplitFormProblem p = problem(name, 40, 300, seed);
        const SampleGrid grid = p.grid();
        const ComplexMatrix f = p.sample(grid);
        const double e = p.tol_default;
        QrAaaOptions opt;
        opt.tol = e;
        opt.tol_mode = TolMode::theory;
        const QrAaaRun run = qr_aaa_run(f, grid, opt);
        const QrAaaModel& q = run.result;
        const ComplexMatrix& qmat = run.factorization.q;
        const oracle::Mat qhat = oracle::bary_eval_all(q.basis_model.supports, q.basis_model.weights,
                                                       q.basis_model.snapshots, grid.points());
        const double inner = row_inf_norm((qmat - qhat) * q.gamma.asDiagonal());
        const double err = rel_column_error(f, oracle_values(q.model, grid));
        worst_rel = std::max(worst_rel, err);
        if (inner < e / static_cast<double>(q.rank)) {
            ++hypotheses;
            if (!(err < e)) ++rel_bad;
        }
        if (!(err < 2 * e)) ++total_bad;
        c.expect(err < e || !(inner < e / static_cast<double>(q.rank)),
                 name + " seed " + std::to_string(seed) + " column error " + sci(err) + " tol " + sci(e));
        c.expect(err < 2 * e, name + " seed " + std::to_string(seed) + " total error " + sci(err));
    }
    c.expect(hypotheses == 20, "inner hypothesis held on " + std::to_string(hypotheses) + " of 20");
    c.note("relNorm: " + std::to_string(hypotheses) + "/20 hypotheses, " + std::to_string(rel_bad) +
           " violations; totalApprox violations " + std::to_string(total_bad) + "; worst rel/tol error " + sci(worst_rel));

    // ||A||_{p,inf} <= ||A||_2 <= sqrt(rows) ||A||_{p,inf} and likewise for Frobenius,
    // plus the row-norm equivalence between p = inf and p = 2.
    oracle::Gen gen(2024);
    for (int t = 0; t < 100; ++t) {
        const Index rows = gen.index(1, 40), cols = gen.index(1, 40);
        oracle::Mat a = gen.matrix(rows, cols) * std::pow(10.0, gen.uniform(-5, 5));
        const double two = norm_p_inf(a, PNorm::two), inf = norm_p_inf(a, PNorm::inf);
        const double spec = oracle::singular_values(a).front(), fro = a.norm();
        const double r = std::sqrt(static_cast<double>(rows)), k = std::sqrt(static_cast<double>(cols));
        const double slack = 1 + 1e-13;
        c.expect(two <= spec * slack && spec <= r * two * slack, "spectral sandwich " + std::to_string(t));
        c.expect(two <= fro * slack && fro <= r * two * slack, "Frobenius sandwich " + std::to_string(t));
        c.expect(inf <= two * slack && two <= k * inf * slack, "row norm equivalence " + std::to_string(t));
    }
}

// ---- 2. QR-AAA and SV-AAA agree -----------------------------------------

void equivalence(Check& c) {
    for (const std::string& name : {"beam", "photonic", "schrodinger", "delay"}) {
        const SplitFormProblem p = problem(name, 200, 500, 0);
        const SampleGrid grid = p.grid();
        const ComplexMatrix f = p.sample(grid);
        const double tol = p.tol_default;

        AaaConfig cfg;
        cfg.tol = tol;
        const ScaledMatrix s = scale_columns(f);
        const BarycentricModel sv = sv_aaa(s.g, grid, cfg);
        const double e_sv = rel_column_error(s.g, oracle_values(sv, grid));

        QrAaaOptions opt;
        opt.tol = tol;
        opt.tol_mode = TolMode::theory;
        const QrAaaModel qr = qr_aaa(f, grid, opt);
        const double e_qr = rel_column_error(f, oracle_values(qr.model, grid));

        opt.tol_mode = TolMode::practical;
        const QrAaaModel qp = qr_aaa(f, grid, opt);
        const double e_qp = rel_column_error(f, oracle_values(qp.model, grid));

        c.expect(sv.converged && e_sv < tol, name + " SV-AAA error " + sci(e_sv));
        c.expect(qr.model.converged && e_qr < tol, name + " QR-AAA error " + sci(e_qr));
        c.expect(std::abs(sv.degree() - qr.model.degree()) <= 2,
                 name + " degrees " + std::to_string(sv.degree()) + " vs " + std::to_string(qr.model.degree()));
        c.note(name + ": SV-AAA deg " + std::to_string(sv.degree()) + " err " + sci(e_sv) + "; QR-AAA(theory) deg " +
               std::to_string(qr.model.degree()) + " err " + sci(e_qr) + "; QR-AAA(practical) deg " +
               std::to_string(qp.model.degree()) + " err " + sci(e_qp));
    }
}

// ---- 3. incremental weight solve vs explicit assembly -------------------

void compare_solvers(Check& c, const ComplexMatrix& f, const SampleGrid& grid, AaaConfig cfg, const std::string& what,
                     double& worst) {
    cfg.solver = WeightSolver::incremental;
    const BarycentricModel a = sv_aaa(f, grid, cfg);
    cfg.solver = WeightSolver::reference;
    const BarycentricModel b = sv_aaa(f, grid, cfg);
    const bool same = a.support_indices == b.support_indices;
    c.expect(same, what + " support sequences differ");
    if (!same) return;
    const double d = (a.weights - b.weights).cwiseAbs().maxCoeff();
    worst = std::max(worst, d);
    c.expect(d <= 1e-10, what + " weights differ by " + sci(d));
}

void fast_path(Check& c) {
    double worst = 0.0;
    int cases = 0;
    for (const std::string& name : problem_names()) {
        const SplitFormProblem p = problem(name, 30, 300, 3);
        const SampleGrid grid = p.grid();
        const ComplexMatrix f = p.sample(grid);
        AaaConfig cfg;
        cfg.tol = p.tol_default;
        compare_solvers(c, scale_columns(f).g, grid, cfg, name, worst);
        ++cases;
        if (f.cols() > 1) {
            // The QR-AAA inner problem: Q with weights |R(i,i)|.
            const RrqrFactorization qr = rrqr(scale_columns(f).g, p.tol_default);
            cfg.column_weights = RealVector(qr.r.diagonal().cwiseAbs());
            compare_solvers(c, qr.q, grid, cfg, name + " (Q Gamma)", worst);
            ++cases;
        }
    }
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        oracle::Gen gen(1000 + seed);
        const Index count = gen.index(40, 200), cols = gen.index(1, 8), r = gen.index(1, 8);
        const SampleGrid grid = SampleGrid::equispaced(-1.0, 1.0, count, ChartAxis::real);
        const ComplexMatrix f = gen.rational_columns(grid.points(), cols, r);
        AaaConfig cfg;
        cfg.tol = std::pow(10.0, -gen.uniform(6, 12));
        cfg.p_norm = seed % 2 == 0 ? PNorm::inf : PNorm::two;
        compare_solvers(c, f, grid, cfg, "random seed " + std::to_string(seed), worst);
        ++cases;
    }
    c.note(std::to_string(cases) + " cases, largest weight difference " + sci(worst));
}

// ---- 4. truncated pivoted QR --------------------------------------------

void rrqr_properties(Check& c) {
    int runs = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        for (const std::string& name : problem_names()) {
            const SplitFormProblem p = problem(name, 120, 300, seed);
            const ComplexMatrix g = scale_columns(p.sample()).g;
            const RrqrFactorization qr = rrqr(g, 1e-10);
            const Index k = qr.rank;
            const std::string tag = name + " seed " + std::to_string(seed);
            ++runs;
            c.expect(k <= p.term_count(), tag + " rank " + std::to_string(k));
            for (Index i = 0; i + 1 < k; ++i)
                c.expect(std::abs(qr.r(i + 1, i + 1)) <= std::abs(qr.r(i, i)), tag + " diagonal not monotone");
            for (Index i = 0; i < k; ++i) {
                const double dii = std::abs(qr.r(i, i));
                double off = 0.0;
                for (Index j = i + 1; j < qr.r.cols(); ++j) off = std::max(off, std::abs(qr.r(i, j)));
                c.expect(off <= dii * (1 + 1e-13), tag + " row " + std::to_string(i) + " not dominated");
            }
            const double orth = (qr.q.adjoint() * qr.q - oracle::Mat::Identity(k, k)).norm();
            c.expect(orth <= 1e-12 * std::sqrt(static_cast<double>(k)), tag + " orthogonality " + sci(orth));
        }
    c.note(std::to_string(runs) + " factorizations");
}

// ---- 5. parallel accumulation -------------------------------------------

void pqr(Check& c) {
    for (const std::string& name : {"beam", "delay"}) {
        const SplitFormProblem prob = problem(name, name == std::string("beam") ? 200 : 96, 500, 7);
        const SampleGrid grid = prob.grid();
        const ComplexMatrix f = prob.sample(grid);
        const double tol = prob.tol_default;

        PqrOptions opt;
        opt.tol = tol;
        const AccumulationResult one = pqr_aaa(f, grid, PartitionPlan::contiguous(f.cols(), 1, 0), opt);
        QrAaaOptions qopt;
        qopt.tol = tol;
        const QrAaaModel q = qr_aaa(f, grid, qopt);
        c.expect(one.final_model.support_indices == q.model.support_indices, name + " p=1 supports differ from QR-AAA");

        for (Index p : {2, 4, 8})
            for (ExtensionStrategy strategy : {ExtensionStrategy::random_uniform, ExtensionStrategy::mock_chebyshev})
                for (MergeMode merge : {MergeMode::flat, MergeMode::tree}) {
                    opt.strategy = strategy;
                    opt.merge = merge;
                    const PartitionPlan plan = PartitionPlan::contiguous(f.cols(), p, 5);
                    const auto t0 = Clock::now();
                    const AccumulationResult acc = pqr_aaa(f, grid, plan, opt);
                    const double secs = since(t0);
                    const std::string tag =
                        name + " p=" + std::to_string(p) + " " + to_string(strategy) + " " + to_string(merge);
                    const double err = rel_column_error(f, oracle_values(acc.final_model, grid));
                    c.expect(err <= 10 * tol, tag + " full-grid error " + sci(err));

                    Index ranks = 0, supports = 0;
                    for (const PartitionResult& part : acc.partitions) {
                        ranks += part.rank();
                        supports += static_cast<Index>(part.supports().size());
                    }
                    c.expect(acc.comm.index_exchange == supports * (p - 1), tag + " index exchange counter");
                    if (merge == MergeMode::flat) {
                        c.expect(acc.stages.size() == 1 &&
                                     acc.comm.flat_values == ranks * static_cast<Index>(acc.stages[0].z_plus.size()),
                                 tag + " flat counter");
                    } else {
                        const Index levels = static_cast<Index>(std::ceil(std::log2(static_cast<double>(p))));
                        c.expect(acc.comm.levels == levels, tag + " level count");
                        c.expect(static_cast<Index>(acc.stages.size()) == p - 1, tag + " stage count");
                        // Right node i at level L holds partitions [(2i+1) 2^L, (2i+2) 2^L).
                        std::vector<Index> want(static_cast<std::size_t>(levels), 0);
                        for (const MergeStage& s : acc.stages) {
                            const Index width = Index{1} << s.level;
                            Index right_rank = 0;
                            for (Index mu = s.right * width; mu < (s.right + 1) * width; ++mu)
                                right_rank += acc.partitions[static_cast<std::size_t>(mu)].rank();
                            want[static_cast<std::size_t>(s.level)] += right_rank * static_cast<Index>(s.z_plus.size());
                        }
                        c.expect(acc.comm.tree_level_values == want, tag + " tree counters");
                    }
                    c.note(tag + ": error " + sci(err) + ", degree " + std::to_string(acc.final_model.degree()) +
                           (acc.extension_saturated ? ", saturated" : "") + ", " + sci(secs) + " s");
                }
    }
}

// ---- 6. extension sets ---------------------------------------------------

void extension_math(Check& c) {
    for (Index order = 1; order <= 200; ++order) {
        const auto x = chebyshev_extrema(order);
        const double z = zeta(std::span<const double>(x));
        c.expect(std::abs(z - std::numbers::pi / static_cast<double>(order)) <= 1e-14,
                 "zeta of extrema order " + std::to_string(order) + " off by " +
                     sci(z - std::numbers::pi / static_cast<double>(order)));
    }
    // |Z| = 10^4 supports M up to about 100 under the |Z| = O(M^2) sizing.
    const SampleGrid fine = SampleGrid::equispaced(0.0, 1.0, 10000, ChartAxis::imag);
    double worst_ratio = 0.0;
    for (Index count = 2; count <= 100; ++count) {
        const auto idx = mock_chebyshev(fine, count);
        const double z = zeta(fine, idx);
        const double bound = 2 * std::numbers::pi / static_cast<double>(count);
        worst_ratio = std::max(worst_ratio, z / bound);
        c.expect(static_cast<Index>(idx.size()) == count && z <= bound,
                 "mock-Chebyshev M=" + std::to_string(count) + " zeta " + sci(z));
    }
    c.note("largest zeta / (2 pi / M) on the fine grid: " + sci(worst_ratio));
    for (Index u = 1; u <= 60; ++u) {
        const Index m_plus = m_plus_for(u);
        c.expect(m_plus == 2 * u - 2, "m_plus for " + std::to_string(u));
        const Index count = extension_count(m_plus);
        const double target = 3 * std::numbers::pi * static_cast<double>(m_plus);
        c.expect(static_cast<double>(count) >= target && static_cast<double>(count) - 1 < target,
                 "M for m_plus " + std::to_string(m_plus));
    }
    for (Index u = 2; u <= 6; ++u) {
        const Index m_plus = m_plus_for(u), count = extension_count(m_plus);
        const auto idx = mock_chebyshev(fine, count);
        const double gamma = static_cast<double>(m_plus) * zeta(fine, idx);
        c.expect(b_bound(gamma) < 3.0, "B-bound for m_plus " + std::to_string(m_plus) + " is " + sci(b_bound(gamma)));
    }
}

// ---- 7. cost of the two stages as columns are duplicated ------------------

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void scaling(Check& c) {
    BenchArgs args;
    args.problems = {"beam"};
    args.base_n = 200;
    args.factors = {1, 2, 4, 8};
    args.repetitions = 5;
    const auto t0 = Clock::now();
    const std::vector<BenchRow> rows = run_bench(args);
    const double total = since(t0);

    std::vector<double> t_qr, t_aaa_q;
    for (Index factor : args.factors) {
        std::vector<double> a, b, cf;
        const Index n = args.base_n * factor;
        for (const BenchRow& r : rows)
            if (r.n == n) {
                a.push_back(r.t_qr);
                b.push_back(r.t_aaa_q);
                if (r.t_aaa_f) cf.push_back(*r.t_aaa_f);
            }
        t_qr.push_back(median(a));
        t_aaa_q.push_back(median(b));
        const double ratio = median(a) / median(cf);
        if (n >= 1000) c.expect(ratio < 0.2, "t_QR / t_AAA_F at N=" + std::to_string(n) + " is " + sci(ratio));
        c.note("N=" + std::to_string(n) + ": t_QR " + sci(median(a)) + ", t_AAA_Q " + sci(median(b)) + ", t_AAA_F " +
               sci(median(cf)));
    }
    const auto [lo, hi] = std::minmax_element(t_aaa_q.begin(), t_aaa_q.end());
    c.expect(*hi <= 1.5 * *lo, "median t_AAA_Q ranges from " + sci(*lo) + " to " + sci(*hi));
    for (std::size_t i = 1; i < t_qr.size(); ++i) {
        const double growth = t_qr[i] / t_qr[0];
        const double size = static_cast<double>(args.factors[i]) / static_cast<double>(args.factors[0]);
        c.expect(growth >= size / 2, "t_QR grew by " + sci(growth) + " for " + sci(size) + "x columns");
    }
    c.expect(total <= 600, "bench took " + sci(total) + " s");
    c.note("bench time " + sci(total) + " s");
}

// ---- 8. CLI determinism --------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RATBARY_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string capture_cli(const std::string& args) {
    const std::string cmd = std::string(RATBARY_CLI_PATH) + " " + args + " 2>/dev/null";
    std::string out;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return out;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    ::pclose(pipe);
    return out;
}

void determinism(Check& c) {
    const fs::path dir = fs::temp_directory_path() / "ratbary_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto at = [&](const std::string& name) { return (dir / name).string(); };
    auto same = [&](const std::string& a, const std::string& b, const std::string& what) {
        c.expect(fs::exists(a) && read_file(a) == read_file(b), what + " differs between runs");
    };
    const Index max_workers = std::max<Index>(8, static_cast<Index>(std::thread::hardware_concurrency()));

    for (const std::string& name : problem_names()) {
        const std::string n = name == "delay" ? " --n 40" : " --n 60";
        for (const char* run : {"1", "2"})
            c.expect(run_cli("gen --problem " + name + n + " --seed 11 --out " + at(name + run + ".bin")) == 0,
                     "gen " + name);
        same(at(name + "1.bin"), at(name + "2.bin"), "gen " + name);
        same(at(name + "1.bin.json"), at(name + "2.bin.json"), "gen manifest " + name);
    }

    struct Pipeline {
        std::string input, flags;
    };
    const std::vector<Pipeline> pipelines{
        {"beam", "--method sv"},
        {"photonic", "--method qr --tol-mode theory"},
        {"schrodinger", "--method qr"},
        {"runge", "--method sv --norm 2"},
        {"beam", "--method pqr --partitions 4 --merge flat --seed 3"},
        {"delay", "--method pqr --partitions 4 --merge tree --extension mock-cheb --tol 1e-4 --seed 9"},
        {"photonic", "--method pqr --partitions 3 --merge tree --extension random --seed 1"},
    };
    int k = 0;
    for (const Pipeline& pl : pipelines) {
        const std::string input = at(pl.input + "1.bin");
        const std::string tag = pl.input + " " + pl.flags;
        std::vector<std::string> workers{""};
        if (pl.flags.find("pqr") != std::string::npos) workers = {" --workers 1", " --workers " + std::to_string(max_workers)};
        for (std::size_t w = 0; w < workers.size(); ++w)
            for (const char* run : {"a", "b"}) {
                const std::string stem = at("p" + std::to_string(k) + "_" + std::to_string(w) + run);
                const int code = run_cli("approx --input " + input + " " + pl.flags + workers[w] + " --out " + stem +
                                         ".json --history-out " + stem + ".csv");
                c.expect(code == 0, tag + " approx exit " + std::to_string(code));
                run_cli("verify --model " + stem + ".json --input " + input + " --report " + stem + ".rep.json --csv " +
                        stem + ".rep.csv");
                const std::string ev = capture_cli("eval --model " + stem + ".json --point 0.25,0.5 --point 1,-1");
                atomic_write(stem + ".eval.csv", ev);
            }
        const std::string base = at("p" + std::to_string(k) + "_0a");
        for (std::size_t w = 0; w < workers.size(); ++w)
            for (const char* run : {"a", "b"}) {
                const std::string other = at("p" + std::to_string(k) + "_" + std::to_string(w) + run);
                if (other == base) continue;
                for (const char* ext : {".json", ".csv", ".rep.json", ".rep.csv", ".eval.csv"})
                    same(base + ext, other + ext, tag + workers[w] + " " + ext);
            }
        ++k;
    }
    c.note(std::to_string(pipelines.size()) + " approx pipelines, pqr up to " + std::to_string(max_workers) + " workers");
    fs::remove_all(dir);
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> run;
    double time_limit; // seconds, 0 for none
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "theorem suite", theorem_suite, 60},
        {2, "QR-AAA matches SV-AAA", equivalence, 0},
        {3, "incremental weight solve matches explicit assembly", fast_path, 0},
        {4, "truncated pivoted QR properties", rrqr_properties, 0},
        {5, "parallel accumulation", pqr, 0},
        {6, "extension set arithmetic", extension_math, 0},
        {7, "scaling under column duplication", scaling, 0},
        {8, "CLI determinism", determinism, 0},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const Criterion& cr : all) {
        if (!only.empty() && !only.count(cr.id)) continue;
        Check c;
        const auto t0 = Clock::now();
        try {
            cr.run(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = since(t0);
        if (cr.time_limit > 0) c.expect(secs < cr.time_limit, "took " + sci(secs) + " s, limit " + sci(cr.time_limit));
        const bool ok = c.passed();
        failed += !ok;
        std::printf("%s %d %s (%d checks, %d failed, %.1f s)\n", ok ? "PASS" : "FAIL", cr.id, cr.name, c.count(),
                    c.failures(), secs);
        for (const std::string& n : c.notes()) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
