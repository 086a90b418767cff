#ifndef RATBARY_PROBLEMS_HPP
#define RATBARY_PROBLEMS_HPP

// Seeded split-form test families F(z) = sum_l g_l(z) A_l. Column j of the
// sample matrix is one entry of the flattened coefficient matrices.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ratbary/error.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/linalg.hpp"
#include "ratbary/rng.hpp"

namespace ratbary {

struct SplitTerm {
    std::string label;
    std::function<Complex(Complex)> g;
    ComplexVector coef; // length N
};

struct GridSpec {
    double a = -1.0;
    double b = 1.0;
    Index count = 1000;
    ChartAxis axis = ChartAxis::real;

    SampleGrid make() const { return SampleGrid::equispaced(a, b, count, axis); }
};

struct SplitFormProblem {
    std::string name;
    std::vector<SplitTerm> terms;
    GridSpec grid_spec;
    double tol_default = 1e-8;
    std::uint64_t seed = 0;
    Index dimension = 0; // side of the coefficient matrices (1 for scalar problems)
    std::vector<std::pair<std::string, double>> parameters;

    Index columns() const { return terms.empty() ? 0 : terms.front().coef.size(); }
    Index term_count() const { return static_cast<Index>(terms.size()); }
    SampleGrid grid() const { return grid_spec.make(); }

    /// Entry j of F(z), summed term by term.
    Complex entry(Complex z, Index j) const {
        Complex acc = 0.0;
        for (const SplitTerm& t : terms) acc += t.g(z) * t.coef(j);
        return acc;
    }

    /// |grid| x N sample matrix.
    ComplexMatrix sample(const SampleGrid& grid) const {
        const Index l = term_count();
        ComplexMatrix g(grid.size(), l);
        ComplexMatrix a(columns(), l);
        for (Index t = 0; t < l; ++t) {
            const SplitTerm& term = terms[static_cast<std::size_t>(t)];
            for (Index i = 0; i < grid.size(); ++i) g(i, t) = term.g(grid[i]);
            a.col(t) = term.coef;
        }
        return g * a.transpose();
    }

    ComplexMatrix sample() const { return sample(grid()); }
};

namespace detail {

/// Smallest d with d(d+1)/2 >= n (symmetric families use upper-triangle entries).
inline Index symmetric_side(Index n) {
    Index d = 1;
    while (d * (d + 1) / 2 < n) ++d;
    return d;
}

inline Index square_side(Index n) {
    Index d = 1;
    while (d * d < n) ++d;
    return d;
}

/// First n upper-triangle entries (row-major) of a symmetric matrix.
inline ComplexVector upper_entries(const Eigen::MatrixXd& a, Index n) {
    ComplexVector v(n);
    Index k = 0;
    for (Index i = 0; i < a.rows() && k < n; ++i)
        for (Index j = i; j < a.cols() && k < n; ++j) v(k++) = a(i, j);
    return v;
}

inline ComplexVector row_major_entries(const Eigen::MatrixXd& a, Index n) {
    ComplexVector v(n);
    Index k = 0;
    for (Index i = 0; i < a.rows() && k < n; ++i)
        for (Index j = 0; j < a.cols() && k < n; ++j) v(k++) = a(i, j);
    return v;
}

inline Eigen::MatrixXd normal_matrix(Rng& rng, Index rows, Index cols) {
    Eigen::MatrixXd a(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) a(i, j) = rng.normal();
    return a;
}

/// B B^T / d: symmetric positive semidefinite.
inline Eigen::MatrixXd gram_matrix(Rng& rng, Index d) {
    const Eigen::MatrixXd b = normal_matrix(rng, d, d);
    return b * b.transpose() / static_cast<double>(d);
}

inline void require_columns(Index n) {
    if (n < 1) throw ParameterError("problem size must be at least 1");
}

} // namespace detail

/// Sandwich beam: K + g(s) D + s^2 M with a fractional-derivative shear modulus.
inline double beam_p() { return 0.675; }
inline double beam_g0() { return 350.4e3; }
inline double beam_ginf() { return 3.062e6; }
inline double beam_tau() { return 8.230e-9; }

inline Complex beam_modulus(Complex s) {
    if (s == Complex(0.0, 0.0)) return beam_g0();
    const Complex x = std::pow(s * beam_tau(), beam_p());
    return (beam_g0() + x * beam_ginf()) / (1.0 + x);
}

inline SplitFormProblem gen_beam(Index n, std::uint64_t seed) {
    if (n < 2) throw ParameterError("beam: n must be at least 2");
    Rng rng = Rng::derived(seed, 1);
    const Index d = detail::symmetric_side(n);
    SplitFormProblem p;
    p.name = "beam";
    p.seed = seed;
    p.dimension = d;
    p.grid_spec = {200.0, 30000.0, 1000, ChartAxis::imag};
    p.tol_default = 1e-8;
    p.parameters = {{"p", beam_p()}, {"G0", beam_g0()}, {"Ginf", beam_ginf()}, {"tau", beam_tau()}};
    const Eigen::MatrixXd k = detail::gram_matrix(rng, d);
    const Eigen::MatrixXd dd = detail::gram_matrix(rng, d);
    const Eigen::MatrixXd m = detail::gram_matrix(rng, d);
    p.terms.push_back({"K", [](Complex) { return Complex(1.0, 0.0); }, detail::upper_entries(k, n)});
    p.terms.push_back({"g(s) D", [](Complex s) { return beam_modulus(s); }, detail::upper_entries(dd, n)});
    p.terms.push_back({"s^2 M", [](Complex s) { return s * s; }, detail::upper_entries(m, n)});
    return p;
}

struct PhotonicParams {
    double gamma = 0.5;
    double c = 2.0;
    double eps0 = 1.0;
    std::vector<double> lambda_p;
    std::vector<double> lambda_0;

    Complex eps1(Complex s) const {
        Complex e = c;
        for (std::size_t l = 0; l < lambda_p.size(); ++l)
            e += lambda_p[l] * lambda_p[l] / (s * s + gamma * s + lambda_0[l] * lambda_0[l]);
        return e;
    }
};

/// Distance from the poles of eps1 to the segment i[a, b].
inline double photonic_pole_distance(const PhotonicParams& q, double a, double b) {
    double best = std::numeric_limits<double>::infinity();
    for (double l0 : q.lambda_0) {
        const Complex disc = std::sqrt(Complex(q.gamma * q.gamma - 4.0 * l0 * l0, 0.0));
        for (Complex pole : {(-q.gamma + disc) / 2.0, (-q.gamma - disc) / 2.0}) {
            const double t = std::clamp(pole.imag(), a, b);
            best = std::min(best, std::abs(pole - Complex(0.0, t)));
        }
    }
    return best;
}

inline double photonic_margin() { return 0.05; }

/// Photonic crystal: G + s^2 eps0 M0 + s^2 eps1(s) M1 with a two-pole permittivity.
inline SplitFormProblem gen_photonic(Index n, std::uint64_t seed) {
    detail::require_columns(n);
    Rng rng = Rng::derived(seed, 2);
    PhotonicParams q;
    const GridSpec spec{0.0, 10.0, 1000, ChartAxis::imag};
    for (int attempt = 0;; ++attempt) {
        if (attempt == 100) throw ParameterError("photonic: could not draw poles away from the grid");
        q.gamma = rng.uniform(0.1, 1.0);
        q.c = rng.uniform(1.0, 3.0);
        q.lambda_p = {rng.uniform(1.0, 10.0), rng.uniform(1.0, 10.0)};
        q.lambda_0 = {rng.uniform(1.0, 10.0), rng.uniform(1.0, 10.0)};
        if (photonic_pole_distance(q, spec.a, spec.b) >= photonic_margin()) break;
    }
    const Index d = detail::symmetric_side(n);
    SplitFormProblem p;
    p.name = "photonic";
    p.seed = seed;
    p.dimension = d;
    p.grid_spec = spec;
    p.tol_default = 1e-8;
    p.parameters = {{"gamma", q.gamma},          {"c", q.c},
                    {"eps0", q.eps0},            {"lambda_p1", q.lambda_p[0]},
                    {"lambda_p2", q.lambda_p[1]}, {"lambda_01", q.lambda_0[0]},
                    {"lambda_02", q.lambda_0[1]}};
    const Eigen::MatrixXd g = detail::gram_matrix(rng, d);
    const Eigen::MatrixXd m0 = detail::gram_matrix(rng, d);
    const Eigen::MatrixXd m1 = detail::gram_matrix(rng, d);
    p.terms.push_back({"G", [](Complex) { return Complex(1.0, 0.0); }, detail::upper_entries(g, n)});
    const double eps0 = q.eps0;
    p.terms.push_back({"s^2 eps0 M0", [eps0](Complex s) { return eps0 * s * s; }, detail::upper_entries(m0, n)});
    p.terms.push_back({"s^2 eps1(s) M1", [q](Complex s) { return s * s * q.eps1(s); }, detail::upper_entries(m1, n)});
    return p;
}

inline Index schrodinger_terms() { return 81; }
inline double schrodinger_mass() { return 0.2; }
inline double schrodinger_branch(Index l) { return -0.01 * static_cast<double>(l); } // l = 1..81

inline Complex schrodinger_factor(Complex lambda, double a) {
    return std::exp(Complex(0.0, 1.0) * std::sqrt(schrodinger_mass() * (lambda - a)));
}

/// Rank-2 symmetric u v^T + v u^T with three nonzeros in each of u and v.
inline Eigen::MatrixXd sparse_rank_two(Rng& rng, Index d) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(d), v = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < 3; ++k) {
        u(static_cast<Index>(rng.index(static_cast<std::uint64_t>(d)))) += rng.normal();
        v(static_cast<Index>(rng.index(static_cast<std::uint64_t>(d)))) += rng.normal();
    }
    return u * v.transpose() + v * u.transpose();
}

/// Quantum well: H - lambda I - sum_l exp(i sqrt(m (lambda - a_l))) S_l.
inline SplitFormProblem gen_schrodinger(Index n, std::uint64_t seed) {
    detail::require_columns(n);
    Rng rng = Rng::derived(seed, 3);
    const Index d = detail::symmetric_side(n);
    SplitFormProblem p;
    p.name = "schrodinger";
    p.seed = seed;
    p.dimension = d;
    p.grid_spec = {0.0, 4.0, 1000, ChartAxis::real};
    p.tol_default = 1e-8;
    p.parameters = {{"terms", static_cast<double>(schrodinger_terms())},
                    {"mass", schrodinger_mass()},
                    {"a_first", schrodinger_branch(1)},
                    {"a_last", schrodinger_branch(schrodinger_terms())}};
    Eigen::MatrixXd h = detail::normal_matrix(rng, d, d);
    h = 0.5 * (h + h.transpose()).eval();
    p.terms.push_back({"H", [](Complex) { return Complex(1.0, 0.0); }, detail::upper_entries(h, n)});
    p.terms.push_back({"-lambda I", [](Complex s) { return -s; },
                       detail::upper_entries(Eigen::MatrixXd::Identity(d, d), n)});
    for (Index l = 1; l <= schrodinger_terms(); ++l) {
        const double a = schrodinger_branch(l);
        const Eigen::MatrixXd s = sparse_rank_two(rng, d);
        p.terms.push_back({"S_" + std::to_string(l), [a](Complex z) { return -schrodinger_factor(z, a); },
                           detail::upper_entries(s, n)});
    }
    return p;
}

inline Index delay_terms() { return 20; }

/// Max absolute row sum.
inline double inf_operator_norm(const Eigen::MatrixXd& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

/// Time delay: s I - sum_l exp(-s l) A_l with ||A_l||_inf = 10^(l/2).
inline SplitFormProblem gen_delay(Index n, std::uint64_t seed) {
    detail::require_columns(n);
    Rng rng = Rng::derived(seed, 4);
    const Index d = detail::square_side(n);
    SplitFormProblem p;
    p.name = "delay";
    p.seed = seed;
    p.dimension = d;
    p.grid_spec = {-10.0, 10.0, 1000, ChartAxis::imag};
    p.tol_default = 1e-4;
    p.parameters = {{"terms", static_cast<double>(delay_terms())}};
    p.terms.push_back({"s I", [](Complex s) { return s; },
                       detail::row_major_entries(Eigen::MatrixXd::Identity(d, d), n)});
    for (Index l = 1; l <= delay_terms(); ++l) {
        Eigen::MatrixXd a = detail::normal_matrix(rng, d, d);
        a *= std::pow(10.0, 0.5 * static_cast<double>(l)) / inf_operator_norm(a);
        const double tau = static_cast<double>(l);
        p.terms.push_back({"A_" + std::to_string(l), [tau](Complex s) { return -std::exp(-s * tau); },
                           detail::row_major_entries(a, n)});
    }
    return p;
}

/// Coefficient matrices A_l of the delay family (full d x d), for checks.
inline std::vector<Eigen::MatrixXd> delay_matrices(Index n, std::uint64_t seed) {
    Rng rng = Rng::derived(seed, 4);
    const Index d = detail::square_side(n);
    std::vector<Eigen::MatrixXd> out;
    for (Index l = 1; l <= delay_terms(); ++l) {
        Eigen::MatrixXd a = detail::normal_matrix(rng, d, d);
        a *= std::pow(10.0, 0.5 * static_cast<double>(l)) / inf_operator_norm(a);
        out.push_back(std::move(a));
    }
    return out;
}

/// Single-column baselines on [-1, 1]: exp, runge, planted-rational (type (3, 3)).
inline SplitFormProblem gen_scalar(const std::string& name, std::uint64_t seed) {
    SplitFormProblem p;
    p.name = name;
    p.seed = seed;
    p.dimension = 1;
    p.grid_spec = {-1.0, 1.0, 1000, ChartAxis::real};
    const ComplexVector one = ComplexVector::Ones(1);
    if (name == "exp") {
        p.tol_default = 1e-13;
        p.terms.push_back({"exp(z)", [](Complex z) { return std::exp(z); }, one});
    } else if (name == "runge") {
        p.tol_default = 1e-10;
        p.terms.push_back({"1/(1+25z^2)", [](Complex z) { return 1.0 / (1.0 + 25.0 * z * z); }, one});
    } else if (name == "planted-rational") {
        p.tol_default = 1e-11;
        Rng rng = Rng::derived(seed, 5);
        p.terms.push_back({"1", [](Complex) { return Complex(1.0, 0.0); }, ComplexVector::Constant(1, rng.normal())});
        for (int k = 0; k < 3; ++k) {
            const double x = rng.uniform(-1.0, 1.0);
            const double y = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.2, 1.0);
            const Complex pole(x, y);
            p.parameters.push_back({"pole" + std::to_string(k) + "_re", x});
            p.parameters.push_back({"pole" + std::to_string(k) + "_im", y});
            p.terms.push_back({"1/(z-p" + std::to_string(k) + ")", [pole](Complex z) { return 1.0 / (z - pole); },
                               ComplexVector::Constant(1, rng.complex_normal())});
        }
    } else {
        throw ParameterError("unknown scalar problem: " + name);
    }
    return p;
}

inline std::vector<std::string> problem_names() {
    return {"beam", "photonic", "schrodinger", "delay", "exp", "runge", "planted-rational"};
}

/// Dispatch by name; `n` is the column count (ignored for scalar problems).
inline SplitFormProblem generate(const std::string& name, Index n, std::uint64_t seed) {
    if (name == "beam") return gen_beam(n, seed);
    if (name == "photonic") return gen_photonic(n, seed);
    if (name == "schrodinger") return gen_schrodinger(n, seed);
    if (name == "delay") return gen_delay(n, seed);
    return gen_scalar(name, seed);
}

} // namespace ratbary

#endif
