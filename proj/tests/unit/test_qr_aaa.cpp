#include <gtest/gtest.h>

#include <cmath>

#include "ratbary/problems.hpp"
#include "ratbary/qr_aaa.hpp"
#include "support/oracles.hpp"

using namespace ratbary;

TEST(ScaleColumns, MaxNormAndZeroColumns) {
    ComplexMatrix f(3, 3);
    f << Complex(3, 4), 0.0, 1.0,
         1.0, 0.0, Complex(0, -2),
         0.0, 0.0, 0.5;
    const ScaledMatrix s = scale_columns(f);
    EXPECT_DOUBLE_EQ(s.scaling.d(0), 5.0);
    EXPECT_DOUBLE_EQ(s.scaling.d(1), 0.0);
    EXPECT_DOUBLE_EQ(s.scaling.d(2), 2.0);
    EXPECT_EQ(s.scaling.zero_columns, std::vector<Index>{1});
    EXPECT_EQ(s.scaling.kept_columns, (std::vector<Index>{0, 2}));
    ASSERT_EQ(s.g.cols(), 2);
    EXPECT_DOUBLE_EQ(s.g.col(0).cwiseAbs().maxCoeff(), 1.0);
    EXPECT_DOUBLE_EQ(s.g.col(1).cwiseAbs().maxCoeff(), 1.0);
    EXPECT_THROW(scale_columns(ComplexMatrix::Zero(3, 2)), DegenerateError);
}

TEST(QrAaa, ModelReproducesDataOnGrid) {
    const SplitFormProblem p = gen_beam(60, 1);
    const SampleGrid g = p.grid();
    const ComplexMatrix f = p.sample(g);
    QrAaaOptions opt;
    opt.tol = 1e-8;
    const QrAaaModel m = qr_aaa(f, g, opt);
    EXPECT_TRUE(m.model.converged);
    EXPECT_EQ(m.rank, 3);
    const ComplexMatrix r = evaluate_grid(m.model, g);
    EXPECT_LT(max_relative_column_error(f, r), 10 * opt.tol);
    for (Index k = 0; k < m.model.size(); ++k)
        EXPECT_EQ(m.model.snapshots.row(k), f.row(m.model.support_indices[static_cast<std::size_t>(k)]));
}

// Q R reproduces the scaled data, so the model over Q carried through R must
// agree with the model over F divided by the column scales.
TEST(QrAaa, BasisModelTimesRMatchesScaledModel) {
    const SplitFormProblem p = gen_photonic(40, 2);
    const SampleGrid g = p.grid();
    const ComplexMatrix f = p.sample(g);
    QrAaaOptions opt;
    opt.tol = 1e-9;
    const QrAaaRun run = qr_aaa_run(f, g, opt);
    const QrAaaModel& m = run.result;
    const RrqrFactorization& qr = run.factorization;
    const ComplexMatrix hat_qc = evaluate_grid(m.basis_model, g) * qr.coefficients();
    const ComplexMatrix model_f = evaluate_grid(m.model, g);
    ComplexMatrix scaled(f.rows(), f.cols());
    for (Index j = 0; j < f.cols(); ++j) scaled.col(j) = model_f.col(qr.perm[static_cast<std::size_t>(j)]) / m.scaling.d(qr.perm[static_cast<std::size_t>(j)]);
    EXPECT_LE((hat_qc - scaled).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(QrAaa, GammaIsRDiagonalAndTheoryTolIsDivided) {
    const SplitFormProblem p = gen_beam(30, 4);
    const SampleGrid g = p.grid();
    const ComplexMatrix f = p.sample(g);
    QrAaaOptions opt;
    opt.tol = 1e-8;
    opt.tol_mode = TolMode::theory;
    const QrAaaRun run = qr_aaa_run(f, g, opt);
    ASSERT_EQ(run.result.gamma.size(), run.result.rank);
    for (Index i = 0; i < run.result.rank; ++i) EXPECT_EQ(run.result.gamma(i), std::abs(run.factorization.r(i, i)));
    EXPECT_DOUBLE_EQ(run.result.inner_tol, 1e-8 / static_cast<double>(run.result.rank));
    EXPECT_LT(run.result.basis_model.final_residual(), run.result.inner_tol);
}

TEST(QrAaa, ZeroColumnsStayZero) {
    oracle::Gen gen(3);
    const SampleGrid g = SampleGrid::equispaced(-1.0, 1.0, 100, ChartAxis::real);
    ComplexMatrix f = gen.rational_columns(g.points(), 5, 3);
    f.col(2).setZero();
    QrAaaOptions opt;
    opt.tol = 1e-9;
    const QrAaaModel m = qr_aaa(f, g, opt);
    EXPECT_EQ(m.scaling.zero_columns, std::vector<Index>{2});
    const ComplexMatrix r = evaluate_grid(m.model, g);
    EXPECT_EQ(r.col(2).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(qr_aaa(ComplexMatrix::Zero(100, 2), g, opt), DegenerateError);
}

TEST(QrAaa, RejectsBadOptions) {
    const SampleGrid g = SampleGrid::equispaced(-1.0, 1.0, 10, ChartAxis::real);
    QrAaaOptions opt;
    opt.tol = 0.0;
    EXPECT_THROW(qr_aaa(ComplexMatrix::Ones(10, 2), g, opt), ParameterError);
    EXPECT_THROW(qr_aaa(ComplexMatrix::Ones(9, 2), g, QrAaaOptions{}), ParameterError);
}

TEST(Reconstruct, ChecksShapes) {
    BarycentricModel q;
    q.supports = {Complex(0, 0), Complex(1, 0)};
    q.support_indices = {0, 4};
    q.weights = ComplexVector::Ones(2);
    q.snapshots = ComplexMatrix::Ones(2, 1);
    ColumnScaling sc;
    sc.d = RealVector::Ones(2);
    sc.kept_columns = {0, 1};
    const ComplexMatrix r = ComplexMatrix::Ones(1, 2);
    const std::vector<Index> sup{0, 4};
    const ComplexMatrix rows = ComplexMatrix::Ones(2, 2);
    EXPECT_NO_THROW(reconstruct(q, r, sc, sup, rows));
    const std::vector<Index> wrong{0, 3};
    EXPECT_THROW(reconstruct(q, r, sc, wrong, rows), ParameterError);
    EXPECT_THROW(reconstruct(q, r, sc, sup, ComplexMatrix::Ones(1, 2)), ParameterError);
    EXPECT_THROW(reconstruct(q, ComplexMatrix::Ones(2, 2), sc, sup, rows), ParameterError);
}

TEST(RelativeError, ZeroColumnsCountAbsolute) {
    ComplexMatrix f(2, 2), g(2, 2);
    f << 2.0, 0.0, 1.0, 0.0;
    g << 2.2, 0.0, 1.0, 0.5;
    EXPECT_NEAR(max_relative_column_error(f, g), 0.5, 1e-15);
    g(1, 1) = 0.0;
    EXPECT_NEAR(max_relative_column_error(f, g), 0.1, 1e-15);
}
