#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "ratbary/commands.hpp"

using namespace ratbary;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run_cli(const std::string& args) {
    const std::string cmd = std::string(RATBARY_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ratbary_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, GenWritesMatrixAndManifest) {
    ASSERT_EQ(run_cli("gen --problem beam --n 50 --seed 3 --out " + path("b.bin")).status, 0);
    const MatrixFile mf = read_matrix_file(path("b.bin"));
    EXPECT_EQ(mf.f.rows(), 1000);
    EXPECT_EQ(mf.f.cols(), 50);
    EXPECT_EQ(mf.grid[0], Complex(0, 200));
    const Json manifest = Json::parse(read_file(path("b.bin.json")));
    EXPECT_EQ(manifest.at("problem"), "beam");
    EXPECT_EQ(manifest.at("seed"), 3);

    ASSERT_EQ(run_cli("gen --problem exp --out " + path("e.bin")).status, 0);
    const MatrixFile e = read_matrix_file(path("e.bin"));
    EXPECT_EQ(e.f.rows(), 1000);
    EXPECT_EQ(e.f.cols(), 1);

    ASSERT_EQ(run_cli("gen --problem runge --count 64 --a -2 --b 2 --out " + path("r.bin")).status, 0);
    const MatrixFile r = read_matrix_file(path("r.bin"));
    EXPECT_EQ(r.grid.size(), 64);
    EXPECT_EQ(r.grid[0], Complex(-2, 0));
}

TEST_F(Cli, ApproxEvalVerifyPipeline) {
    ASSERT_EQ(run_cli("gen --problem beam --n 40 --out " + path("in.bin")).status, 0);
    for (const std::string method : {"sv", "qr", "pqr"}) {
        const std::string model = path(method + ".json"), hist = path(method + ".csv");
        std::string extra = method == "pqr" ? " --partitions 3" : "";
        const Run a = run_cli("approx --input " + path("in.bin") + " --method " + method + extra + " --out " + model +
                              " --history-out " + hist);
        ASSERT_EQ(a.status, 0) << method << "\n" << a.out;

        const ModelFile mf = read_model_file(model);
        EXPECT_EQ(mf.method, method);
        const auto rows = parse_history_csv(read_file(hist));
        ASSERT_FALSE(rows.empty());
        EXPECT_EQ(rows.back().stage, "final");
        EXPECT_EQ(rows, mf.history);

        const Run v = run_cli("verify --model " + model + " --input " + path("in.bin") + " --report " +
                              path("rep.json") + " --csv " + path("rep.csv"));
        EXPECT_EQ(v.status, 0) << v.out;
        const Json rep = Json::parse(read_file(path("rep.json")));
        EXPECT_NEAR(rep.at("residual").get<double>(), rows.back().res_m, 1e-12);
        EXPECT_TRUE(rep.at("pass").get<bool>());

        const MatrixFile in = read_matrix_file(path("in.bin"));
        const Index s = mf.model.support_indices.front();
        const Complex z = in.grid[s];
        const Run ev = run_cli("eval --model " + model + " --point " + format_double(z.real()) + "," +
                               format_double(z.imag()));
        ASSERT_EQ(ev.status, 0);
        const auto lines = split(ev.out, '\n');
        ASSERT_GE(lines.size(), 2u);
        const auto fields = split(lines[1], ',');
        ASSERT_EQ(fields.size(), 4u + 2u * 40u);
        EXPECT_EQ(fields[3], "ok");
        EXPECT_EQ(parse_double(fields[4]), in.f(s, 0).real());
        EXPECT_EQ(parse_double(fields[5]), in.f(s, 0).imag());
    }
}

TEST_F(Cli, OutputsAreByteIdenticalAcrossRuns) {
    ASSERT_EQ(run_cli("gen --problem photonic --n 30 --seed 4 --out " + path("a.bin")).status, 0);
    ASSERT_EQ(run_cli("gen --problem photonic --n 30 --seed 4 --out " + path("b.bin")).status, 0);
    EXPECT_EQ(read_file(path("a.bin")), read_file(path("b.bin")));
    const std::string common = "approx --input " + path("a.bin") + " --method pqr --partitions 4 --merge tree";
    ASSERT_EQ(run_cli(common + " --workers 1 --out " + path("m1.json") + " --history-out " + path("h1.csv")).status, 0);
    ASSERT_EQ(run_cli(common + " --workers 4 --out " + path("m2.json") + " --history-out " + path("h2.csv")).status, 0);
    EXPECT_EQ(read_file(path("m1.json")), read_file(path("m2.json")));
    EXPECT_EQ(read_file(path("h1.csv")), read_file(path("h2.csv")));
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("gen --problem nope --out " + path("x.bin")).status, 2);
    EXPECT_EQ(run_cli("gen --out").status, 2);
    EXPECT_EQ(run_cli("approx --input " + path("missing.bin") + " --out " + path("m.json")).status, 3);
    atomic_write(path("junk.bin"), "not a matrix file");
    EXPECT_EQ(run_cli("approx --input " + path("junk.bin") + " --out " + path("m.json")).status, 3);
    EXPECT_FALSE(fs::exists(path("m.json")));
    ASSERT_EQ(run_cli("gen --problem exp --out " + path("e.bin")).status, 0);
    EXPECT_EQ(run_cli("approx --input " + path("e.bin") + " --method sv --tol 1e-15 --max-degree 3 --out " +
                      path("m.json"))
                  .status,
              1);
    EXPECT_EQ(run_cli("approx --input " + path("e.bin") + " --method sv --tol -1 --out " + path("m.json")).status, 2);
    EXPECT_EQ(run_cli("verify --model " + path("junk.bin") + " --input " + path("e.bin")).status, 3);
}

TEST_F(Cli, BenchWritesCsv) {
    const Run r = run_cli("bench --problems beam --base-n 20 --factors 1,2 --reps 1 --count 200");
    ASSERT_EQ(r.status, 0);
    const auto lines = split(r.out, '\n');
    EXPECT_EQ(lines[0], "problem,N,rep,t_QR,t_AAA_Q,t_AAA_F");
    EXPECT_EQ(split(lines[1], ',')[1], "20");
    EXPECT_EQ(split(lines[2], ',')[1], "40");
}

TEST(Commands, EvaluateFlagsPoles) {
    ModelFile mf;
    mf.model.supports = {Complex(0, 0), Complex(1, 0)};
    mf.model.weights = ComplexVector::Ones(2) / std::sqrt(2.0);
    mf.model.snapshots = ComplexMatrix::Ones(2, 1);
    mf.d = RealVector::Ones(1);
    const EvalResult r = evaluate_model(mf, {Complex(0.5, 0), Complex(2, 0)});
    ASSERT_EQ(r.pole.size(), 2u);
    EXPECT_TRUE(r.pole[0]);
    EXPECT_FALSE(r.pole[1]);
    const auto lines = split(r.csv, '\n');
    EXPECT_EQ(lines[0], "index,re,im,status,f0_re,f0_im");
    EXPECT_EQ(split(lines[1], ',')[3], "pole");
    EXPECT_EQ(split(lines[2], ',')[3], "ok");
}

TEST(Commands, VerifyRejectsForeignGrid) {
    MatrixFile in{SampleGrid::equispaced(-1, 1, 20, ChartAxis::real), ComplexMatrix::Ones(20, 2), {}};
    ApproxArgs args;
    args.method = "qr";
    const ApproxResult r = approximate(in, args);
    EXPECT_TRUE(r.ok);
    MatrixFile other{SampleGrid::equispaced(-1, 1, 21, ChartAxis::real), ComplexMatrix::Ones(21, 2), {}};
    EXPECT_THROW(verify_against(r.model, other), ParameterError);
    MatrixFile wide{in.grid, ComplexMatrix::Ones(20, 3), {}};
    EXPECT_THROW(verify_against(r.model, wide), ParameterError);
}
