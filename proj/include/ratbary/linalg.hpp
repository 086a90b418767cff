#ifndef RATBARY_LINALG_HPP
#define RATBARY_LINALG_HPP

// Dense complex kernels: row-wise mixed norms, truncated column-pivoted
// Householder QR, and smallest right singular vectors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Householder>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "ratbary/error.hpp"

namespace ratbary {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd; // column-major
using ComplexVector = Eigen::VectorXcd;
using ComplexRowVector = Eigen::RowVectorXcd;
using RealVector = Eigen::VectorXd;

/// Row norm used by the greedy selection and by the mixed (p, inf) norm.
enum class PNorm { two, inf };

inline bool all_finite(const Eigen::Ref<const ComplexMatrix>& a) {
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
    return true;
}

inline void require_finite(const Eigen::Ref<const ComplexMatrix>& a, const char* what) {
    if (!all_finite(a)) throw InputError(std::string(what) + " contains non-finite entries");
}

/// p-norm of a single row (or any vector expression).
template <typename Derived>
double row_norm(const Eigen::MatrixBase<Derived>& row, PNorm p) {
    if (row.size() == 0) return 0.0;
    if (p == PNorm::inf) return row.cwiseAbs().maxCoeff();
    return row.norm();
}

/// Max over rows of the row-wise p-norm, i.e. ||A||_{p,inf} with rows as the
/// outer index. For p = inf this is the max-norm of the matrix.
inline double norm_p_inf(const Eigen::Ref<const ComplexMatrix>& a, PNorm p) {
    if (a.rows() == 0 || a.cols() == 0) throw ParameterError("norm_p_inf: empty matrix");
    require_finite(a, "norm_p_inf input");
    if (p == PNorm::inf) return a.cwiseAbs().maxCoeff();
    return a.rowwise().norm().maxCoeff();
}

/// Truncated column-pivoted QR: F(:, perm) ~= Q * R.
///
/// `perm` holds the full column permutation; its first `rank` entries are the
/// selected pivots and column j of `r` belongs to column perm[j] of F.
struct RrqrFactorization {
    ComplexMatrix q;          // rows x rank, orthonormal columns
    ComplexMatrix r;          // rank x cols, upper trapezoidal
    std::vector<Index> perm;  // length cols
    Index rank = 0;
    bool degenerate = false;  // all columns below threshold: rank 0
    RealVector residual_norms; // per permuted column: 2-norm of the part not captured by Q

    std::vector<Index> selected() const { return {perm.begin(), perm.begin() + rank}; }

    /// R with columns moved back into the original column order (the C in F ~= Q C).
    ComplexMatrix coefficients() const {
        ComplexMatrix c(r.rows(), r.cols());
        for (Index j = 0; j < r.cols(); ++j) c.col(perm[static_cast<std::size_t>(j)]) = r.col(j);
        return c;
    }

    /// |R(i,i)| for i < rank.
    std::vector<double> diagonal_moduli() const {
        std::vector<double> d(static_cast<std::size_t>(rank));
        for (Index i = 0; i < rank; ++i) d[static_cast<std::size_t>(i)] = std::abs(r(i, i));
        return d;
    }
};

/// Greedy column-pivoted Householder QR, truncated once every remaining
/// residual column has 2-norm below `tol` (squared norms compared with tol^2).
inline RrqrFactorization rrqr(const Eigen::Ref<const ComplexMatrix>& f, double tol) {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw ParameterError("rrqr: tol must be positive and finite");
    if (f.rows() == 0 || f.cols() == 0) throw ParameterError("rrqr: empty matrix");
    require_finite(f, "rrqr input");

    const Index rows = f.rows();
    const Index cols = f.cols();
    const Index kmax = std::min(rows, cols);
    const double threshold = tol * tol;
    const double guard = std::sqrt(std::numeric_limits<double>::epsilon());

    ComplexMatrix a = f;
    std::vector<Index> perm(static_cast<std::size_t>(cols));
    std::iota(perm.begin(), perm.end(), Index{0});
    RealVector norms = a.colwise().squaredNorm().transpose();
    RealVector reference = norms;
    ComplexVector tau(kmax);
    ComplexVector workspace(cols);

    auto pick = [&](Index from) {
        Index best = from;
        for (Index j = from + 1; j < cols; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            const auto sb = static_cast<std::size_t>(best);
            if (norms(j) > norms(best) || (norms(j) == norms(best) && perm[sj] < perm[sb])) best = j;
        }
        return best;
    };

    Index k = 0;
    while (k < kmax) {
        Index pivot = pick(k);
        if (norms(pivot) < threshold) {
            // Downdated norms can drift; confirm with exact residual norms before stopping.
            for (Index j = k; j < cols; ++j) {
                norms(j) = a.col(j).tail(rows - k).squaredNorm();
                reference(j) = norms(j);
            }
            pivot = pick(k);
            if (norms(pivot) < threshold) break;
        }
        if (pivot != k) {
            a.col(k).swap(a.col(pivot));
            std::swap(norms(k), norms(pivot));
            std::swap(reference(k), reference(pivot));
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(pivot)]);
        }

        Complex tk;
        double beta;
        a.col(k).tail(rows - k).makeHouseholderInPlace(tk, beta);
        a(k, k) = beta;
        tau(k) = tk;
        if (k + 1 < cols) {
            a.bottomRightCorner(rows - k, cols - k - 1)
                .applyHouseholderOnTheLeft(a.col(k).tail(rows - k - 1), tk, workspace.data());
        }

        for (Index j = k + 1; j < cols; ++j) {
            norms(j) -= std::norm(a(k, j));
            if (norms(j) < guard * reference(j) || norms(j) < 0.0) {
                norms(j) = a.col(j).tail(rows - k - 1).squaredNorm();
                reference(j) = norms(j);
            }
        }
        ++k;
    }

    RrqrFactorization out;
    out.rank = k;
    out.degenerate = (k == 0);
    out.perm = std::move(perm);
    out.r = ComplexMatrix::Zero(k, cols);
    for (Index j = 0; j < cols; ++j) {
        const Index top = std::min(j + 1, k);
        out.r.col(j).head(top) = a.col(j).head(top);
    }
    out.residual_norms.resize(cols);
    for (Index j = 0; j < cols; ++j) out.residual_norms(j) = j < k ? 0.0 : a.col(j).tail(rows - k).norm();

    // R = H_{k-1} ... H_0 F(:, perm) with H = I - tau v v^*, so Q = H_0^* ... H_{k-1}^* [I; 0].
    out.q = ComplexMatrix::Identity(rows, k);
    ComplexVector qwork(k > 0 ? k : 1);
    for (Index i = k - 1; i >= 0; --i) {
        out.q.bottomRightCorner(rows - i, k - i)
            .applyHouseholderOnTheLeft(a.col(i).tail(rows - i - 1), std::conj(tau(i)), qwork.data());
    }
    return out;
}

template <typename Real>
using BasicComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using BasicComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

/// Rotate v so its largest-modulus entry (lowest index on ties) is real
/// positive, and rescale to unit 2-norm.
template <typename Real>
void normalize_phase(BasicComplexVector<Real>& v) {
    if (v.size() == 0) return;
    Index best = 0;
    Real best_abs = std::abs(v(0));
    for (Index i = 1; i < v.size(); ++i) {
        const Real ai = std::abs(v(i));
        if (ai > best_abs) {
            best = i;
            best_abs = ai;
        }
    }
    if (best_abs == Real(0)) return;
    v *= std::conj(v(best)) / best_abs;
    v(best) = std::complex<Real>(v(best).real(), Real(0));
    v /= v.norm();
}

template <typename Real>
struct BasicSingularPair {
    Real value = 0;
    BasicComplexVector<Real> vector;
};
using SingularPair = BasicSingularPair<double>;

/// Smallest singular value of `l` together with a matching right singular
/// vector (phase-normalized). Tall inputs are first compressed to their
/// square triangular factor; wide inputs are padded with zero rows.
template <typename Real>
BasicSingularPair<Real> smallest_singular_pair(const BasicComplexMatrix<Real>& l) {
    using Matrix = BasicComplexMatrix<Real>;
    const Index m = l.cols();
    if (m == 0) throw ParameterError("min_right_singular_vector: matrix has no columns");
    BasicSingularPair<Real> out;
    if (m == 1) {
        out.value = l.rows() > 0 ? l.col(0).norm() : Real(0);
        out.vector = BasicComplexVector<Real>::Ones(1);
        return out;
    }
    Matrix square = Matrix::Zero(m, m);
    if (l.rows() > m) {
        Eigen::HouseholderQR<Matrix> qr(l);
        square = qr.matrixQR().topRows(m).template triangularView<Eigen::Upper>();
    } else {
        square.topRows(l.rows()) = l;
    }
    Eigen::BDCSVD<Matrix> svd(square, Eigen::ComputeFullV);
    out.value = svd.singularValues()(m - 1);
    out.vector = svd.matrixV().col(m - 1);
    normalize_phase(out.vector);
    return out;
}

#ifdef RATBARY_PRECOMPILED
extern template BasicSingularPair<double> smallest_singular_pair<double>(const BasicComplexMatrix<double>&);
extern template BasicSingularPair<long double> smallest_singular_pair<long double>(const BasicComplexMatrix<long double>&);
#endif

inline ComplexVector min_right_singular_vector(const ComplexMatrix& l) { return smallest_singular_pair(l).vector; }

} // namespace ratbary

#endif
