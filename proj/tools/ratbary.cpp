#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ratbary/ratbary.hpp"

namespace {

using namespace ratbary;

enum Exit { ok = 0, failed = 1, bad_parameter = 2, bad_input = 3, internal = 4 };

Complex parse_point(const std::string& s) {
    const auto f = split(s, ',');
    if (f.size() == 1) return {parse_double(f[0]), 0.0};
    if (f.size() != 2) throw ParameterError("point must be RE or RE,IM: '" + s + "'");
    return {parse_double(f[0]), parse_double(f[1])};
}

void print_summary(const ApproxResult& r) {
    const ModelFile& m = r.model;
    std::cout << "method=" << m.method << " m=" << m.model.size() << " converged=" << (m.model.converged ? 1 : 0)
              << " max_relative_error=" << format_double(r.report.max_relative_error)
              << " residual=" << format_double(r.report.residual) << " verify_tol=" << format_double(m.verify_tol)
              << (r.ok ? "" : " FAILED") << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Set-valued AAA rational approximation of sampled matrix functions"};
    app.require_subcommand(1);

    GenArgs gen;
    std::string gen_out, gen_manifest;
    auto* g = app.add_subcommand("gen", "Generate a sampled test problem");
    g->add_option("--problem", gen.problem, "beam | photonic | schrodinger | delay | exp | runge | planted-rational")
        ->required();
    g->add_option("--n", gen.n, "Number of columns")->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--count", gen.count, "Grid size override");
    g->add_option("--a", gen.a, "Segment start override");
    g->add_option("--b", gen.b, "Segment end override");
    g->add_option("--out", gen_out, "Matrix file")->required();
    g->add_option("--manifest", gen_manifest, "Manifest path (default <out>.json)");

    ApproxArgs ap;
    std::string ap_in, ap_out, ap_hist, ap_ext;
    auto* a = app.add_subcommand("approx", "Fit a barycentric model to a matrix file");
    a->add_option("--input", ap_in)->required();
    a->add_option("--method", ap.method)->check(CLI::IsMember({"sv", "qr", "pqr"}))->capture_default_str();
    a->add_option("--tol", ap.tol)->capture_default_str();
    a->add_option("--norm", ap.norm)->check(CLI::IsMember({"2", "inf"}))->capture_default_str();
    a->add_option("--tol-mode", ap.tol_mode)->check(CLI::IsMember({"practical", "theory"}))->capture_default_str();
    a->add_option("--partitions", ap.partitions)->capture_default_str();
    a->add_option("--extension", ap_ext, "random | mock-cheb (default: automatic)")
        ->check(CLI::IsMember({"random", "mock-cheb"}));
    a->add_option("--merge", ap.merge)->check(CLI::IsMember({"flat", "tree"}))->capture_default_str();
    a->add_option("--seed", ap.seed)->capture_default_str();
    a->add_option("--max-degree", ap.max_degree, "Cap on the number of supports")->capture_default_str();
    a->add_option("--workers", ap.workers, "Partition threads (0: RATBARY_WORKERS or all cores)")
        ->capture_default_str();
    a->add_option("--out", ap_out)->required();
    a->add_option("--history-out", ap_hist);

    std::string ev_model, ev_file, ev_grid, ev_out;
    std::vector<std::string> ev_points;
    auto* e = app.add_subcommand("eval", "Evaluate a model at points");
    e->add_option("--model", ev_model)->required();
    e->add_option("--point", ev_points, "RE,IM (repeatable)");
    e->add_option("--points-file", ev_file, "CSV of re,im lines");
    e->add_option("--grid", ev_grid, "Matrix file whose grid to use");
    e->add_option("--out", ev_out, "CSV output (default stdout)");

    std::string vf_model, vf_input, vf_json, vf_csv;
    auto* v = app.add_subcommand("verify", "Check a model against sampled data on the full grid");
    v->add_option("--model", vf_model)->required();
    v->add_option("--input", vf_input)->required();
    v->add_option("--report", vf_json, "JSON report");
    v->add_option("--csv", vf_csv, "Error per grid point");

    BenchArgs bn;
    std::string bn_out;
    auto* b = app.add_subcommand("bench", "Time the QR stage, AAA on Q Gamma, and AAA on F");
    b->add_option("--problems", bn.problems)->delimiter(',')->capture_default_str();
    b->add_option("--base-n", bn.base_n)->capture_default_str();
    b->add_option("--factors", bn.factors, "Column duplication factors")->delimiter(',')->capture_default_str();
    b->add_option("--reps", bn.repetitions)->capture_default_str();
    b->add_option("--count", bn.count, "Grid size")->capture_default_str();
    b->add_option("--skip-aaa-f-above", bn.skip_aaa_f_above)->capture_default_str();
    b->add_option("--tol", bn.tol, "0: problem default")->capture_default_str();
    b->add_option("--seed", bn.seed)->capture_default_str();
    b->add_option("--out", bn_out, "CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex);
        return code == 0 ? Exit::ok : Exit::bad_parameter;
    }

    try {
        if (*g) {
            gen.out = gen_out;
            if (!gen_manifest.empty()) gen.manifest = gen_manifest;
            const GenResult r = cmd_gen(gen);
            std::cout << "wrote " << gen_out << " (" << r.file.f.rows() << " x " << r.file.f.cols() << ")\n";
        } else if (*a) {
            ap.input = ap_in;
            ap.out = ap_out;
            if (!ap_hist.empty()) ap.history_out = ap_hist;
            if (!ap_ext.empty()) ap.extension = ap_ext;
            const ApproxResult r = cmd_approx(ap);
            print_summary(r);
            return r.ok ? Exit::ok : Exit::failed;
        } else if (*e) {
            std::vector<Complex> pts;
            for (const std::string& s : ev_points) pts.push_back(parse_point(s));
            if (!ev_file.empty()) {
                const auto more = parse_points_csv(read_file(ev_file));
                pts.insert(pts.end(), more.begin(), more.end());
            }
            if (!ev_grid.empty()) {
                const MatrixFile mf = read_matrix_file(ev_grid);
                pts.insert(pts.end(), mf.grid.points().begin(), mf.grid.points().end());
            }
            std::optional<std::filesystem::path> out;
            if (!ev_out.empty()) out = ev_out;
            const EvalResult r = cmd_eval(ev_model, pts, out);
            if (!out) std::cout << r.csv;
            std::size_t poles = 0;
            for (bool p : r.pole) poles += p ? 1 : 0;
            if (poles > 0) std::cerr << poles << " point(s) hit a pole\n";
        } else if (*v) {
            std::optional<std::filesystem::path> js, cs;
            if (!vf_json.empty()) js = vf_json;
            if (!vf_csv.empty()) cs = vf_csv;
            const VerifyResult r = cmd_verify(vf_model, vf_input, js, cs);
            std::cout << (r.report.pass ? "pass" : "FAIL")
                      << " max_relative_error=" << format_double(r.report.max_relative_error)
                      << " residual=" << format_double(r.report.residual) << " tol=" << format_double(r.report.tol)
                      << '\n';
            return r.report.pass ? Exit::ok : Exit::failed;
        } else if (*b) {
            if (!bn_out.empty()) bn.out = bn_out;
            const auto rows = cmd_bench(bn);
            if (bn_out.empty()) std::cout << bench_csv(rows);
        }
    } catch (const ParameterError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return Exit::bad_parameter;
    } catch (const FormatError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return Exit::bad_input;
    } catch (const InputError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return Exit::bad_input;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return Exit::internal;
    }
    return Exit::ok;
}
