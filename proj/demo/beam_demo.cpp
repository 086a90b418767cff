// Fit the sandwich beam with QR-AAA and compare against plain SV-AAA.

#include <iostream>

#include "ratbary/ratbary.hpp"

int main() {
    using namespace ratbary;

    const SplitFormProblem beam = gen_beam(300, 1);
    const SampleGrid grid = beam.grid();
    const ComplexMatrix f = beam.sample(grid);
    std::cout << "beam: " << f.rows() << " points, " << f.cols() << " columns, " << beam.term_count()
              << " split terms\n";

    QrAaaOptions opt;
    opt.tol = beam.tol_default;
    const QrAaaModel qr = qr_aaa(f, grid, opt);
    std::cout << "QR-AAA: rank " << qr.rank << ", " << qr.model.size() << " supports, max relative error "
              << max_relative_column_error(f, evaluate_grid(qr.model, grid)) << '\n';

    const ScaledMatrix scaled = scale_columns(f);
    AaaConfig cfg;
    cfg.tol = beam.tol_default;
    const BarycentricModel sv = sv_aaa(scaled.g, grid, cfg);
    std::cout << "SV-AAA: " << sv.size() << " supports, max relative error "
              << max_relative_column_error(scaled.g, evaluate_grid(sv, grid)) << '\n';

    for (const ResidualRecord& r : qr.basis_model.history)
        std::cout << "  m=" << r.m << "  res=" << r.residual << '\n';

    // Evaluate away from the grid.
    const Complex s(0.0, 12345.0);
    const ComplexVector r = evaluate(qr.model, s);
    std::cout << "F(" << s << ")[0] = " << beam.entry(s, 0) << ", model " << r(0) << '\n';
}
