#ifndef RATBARY_LOEWNER_HPP
#define RATBARY_LOEWNER_HPP

// Block Loewner matrices of set-valued data and an incremental solver for
// their smallest right singular vector.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ratbary/error.hpp"
#include "ratbary/linalg.hpp"

namespace ratbary {

/// Stacked Loewner matrix with entries (f_j(zeta_i) - f_j(z_nu)) / (zeta_i - z_nu),
/// evaluated in precision Real. Rows are ordered by column j first, then by
/// candidate point i (grid order with the supports removed); row index
/// j * (|Z| - m) + i.
template <typename Real>
BasicComplexMatrix<Real> loewner_assemble_as(const Eigen::Ref<const ComplexMatrix>& f,
                                             std::span<const Complex> points, std::span<const Index> supports) {
    using C = std::complex<Real>;
    const Index n = static_cast<Index>(points.size());
    if (f.rows() != n) throw ParameterError("loewner_assemble: matrix rows do not match grid size");
    if (supports.empty()) throw ParameterError("loewner_assemble: no supports");
    std::vector<char> is_support(static_cast<std::size_t>(n), 0);
    for (Index s : supports) {
        if (s < 0 || s >= n) throw ParameterError("loewner_assemble: support index out of range");
        if (is_support[static_cast<std::size_t>(s)]) throw ParameterError("loewner_assemble: duplicate support");
        is_support[static_cast<std::size_t>(s)] = 1;
    }
    std::vector<Index> cand;
    for (Index i = 0; i < n; ++i)
        if (!is_support[static_cast<std::size_t>(i)]) cand.push_back(i);

    const Index m = static_cast<Index>(supports.size());
    const Index nc = static_cast<Index>(cand.size());
    const Index cols = f.cols();
    BasicComplexMatrix<Real> l(nc * cols, m);
    for (Index nu = 0; nu < m; ++nu) {
        const Index s = supports[static_cast<std::size_t>(nu)];
        const C zs(points[static_cast<std::size_t>(s)]);
        for (Index j = 0; j < cols; ++j) {
            const C fs(f(s, j));
            for (Index t = 0; t < nc; ++t) {
                const Index i = cand[static_cast<std::size_t>(t)];
                l(j * nc + t, nu) = (C(f(i, j)) - fs) / (C(points[static_cast<std::size_t>(i)]) - zs);
            }
        }
    }
    return l;
}

inline ComplexMatrix loewner_assemble(const Eigen::Ref<const ComplexMatrix>& f, std::span<const Complex> points,
                                      std::span<const Index> supports) {
    return loewner_assemble_as<double>(f, points, supports);
}

namespace detail {

/// Householder QR of a matrix that only ever grows: columns are appended,
/// zero rows are appended, and unitary 2x2 row rotations may be applied to
/// the whole matrix. R keeps its old entries under all three operations.
template <typename Real>
class GrowingQr {
    using C = std::complex<Real>;
    using Matrix = BasicComplexMatrix<Real>;
    using Vector = BasicComplexVector<Real>;

  public:
    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index r_rows() const { return static_cast<Index>(reflectors_.size()); }
    auto r() const { return r_.topLeftCorner(r_rows(), cols_); }
    /// Column at which row k of R appeared; R(k, j) = 0 for j < lead(k).
    Index lead(Index k) const { return lead_[static_cast<std::size_t>(k)]; }

    void append_zero_row() { ++rows_; }

    /// Rows (a, b) of the represented matrix are replaced by U * [row a; row b],
    /// U = [u11 u12; u21 u22] unitary.
    void rotate(Index a, Index b, C u11, C u12, C u21, C u22) {
        rotations_.push_back({a, b, u11, u12, u21, u22});
    }

    /// Appends column `x` (length rows()); the new column of R is returned
    /// through r(). Returns true when R gained a row.
    bool append_column(Vector x) {
        // Back to the frame in which the reflectors were built.
        for (auto it = rotations_.rbegin(); it != rotations_.rend(); ++it) {
            const C xa = x(it->a), xb = x(it->b);
            x(it->a) = std::conj(it->u11) * xa + std::conj(it->u21) * xb;
            x(it->b) = std::conj(it->u12) * xa + std::conj(it->u22) * xb;
        }
        const Index k = r_rows();
        for (Index q = 0; q < k; ++q) {
            const Reflector& h = reflectors_[static_cast<std::size_t>(q)];
            const Index len = static_cast<Index>(h.essential.size());
            C dot = x(q) + h.essential.dot(x.segment(q + 1, len));
            dot *= h.tau;
            x(q) -= dot;
            x.segment(q + 1, len) -= dot * h.essential;
        }
        const bool grow = rows_ > k;
        if (grow) {
            // Trailing exact zeros stay untouched, so the reflector can stop short.
            Index live = rows_;
            while (live > k + 1 && x(live - 1) == C(0)) --live;
            Reflector h;
            h.essential.resize(live - k - 1);
            Real beta = 0;
            x.segment(k, live - k).makeHouseholder(h.essential, h.tau, beta);
            x(k) = beta;
            x.segment(k + 1, live - k - 1).setZero();
            reflectors_.push_back(std::move(h));
            lead_.push_back(cols_);
        }
        reserve(r_rows(), cols_ + 1);
        if (grow && cols_ > 0) r_.row(k).head(cols_).setZero();
        r_.col(cols_).head(r_rows()) = x.head(r_rows());
        ++cols_;
        return grow;
    }

  private:
    // Capacity grows geometrically; only the top-left r_rows x cols block is live.
    void reserve(Index rows, Index cols) {
        if (rows <= r_.rows() && cols <= r_.cols()) return;
        Matrix next(std::max(rows, 2 * r_.rows()), std::max(cols, 2 * r_.cols()));
        next.topLeftCorner(r_.rows(), r_.cols()) = r_;
        r_ = std::move(next);
    }

    struct Rotation {
        Index a, b;
        C u11, u12, u21, u22;
    };
    struct Reflector {
        Vector essential;
        C tau;
    };

    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Rotation> rotations_;
    std::vector<Reflector> reflectors_;
    std::vector<Index> lead_;
    Matrix r_;
};

} // namespace detail

/// Incremental weight solver for greedy SV-AAA.
///
/// The data dimension N is compressed onto an orthonormal basis of the
/// support rows. For a candidate point the Loewner block then reduces to at
/// most rank+1 rows with the same Gram matrix; these blocks are combined by a
/// binary tree of QR factorizations whose root yields the reduced triangular
/// factor. Each support update appends one column everywhere, and the leaf of
/// the new support is dropped by refactoring the nodes on its path.
/// All arithmetic is carried out in precision Real.
template <typename Real>
class BasicLoewnerState {
    using C = std::complex<Real>;
    using Matrix = BasicComplexMatrix<Real>;
    using Vector = BasicComplexVector<Real>;

  public:
    BasicLoewnerState(const Eigen::Ref<const ComplexMatrix>& f, std::span<const Complex> points)
        : f_(f.template cast<C>()) {
        points_.reserve(points.size());
        for (Complex z : points) points_.push_back(C(z));
        n_ = static_cast<Index>(points_.size());
        if (f_.rows() != n_) throw ParameterError("LoewnerState: matrix rows do not match grid size");
        if (n_ == 0) throw ParameterError("LoewnerState: empty grid");
        cols_ = f_.cols();
        residual_ = f_;
        rho_ = residual_.rowwise().norm();
        basis_.resize(cols_, 0);
        coef_.resize(n_, 0);
        support_coef_.resize(0, 0);
        active_.assign(static_cast<std::size_t>(n_), 1);
        size_ = 1;
        while (size_ < n_) size_ *= 2;
        nodes_.assign(static_cast<std::size_t>(2 * size_), Node{});
        for (Index i = 0; i < n_; ++i) {
            Node& leaf = nodes_[static_cast<std::size_t>(size_ + i)];
            leaf.active = true;
            leaf.qr.append_zero_row(); // residual row
        }
        for (Index v = size_ - 1; v >= 1; --v) {
            Node& node = nodes_[static_cast<std::size_t>(v)];
            node.active = nodes_[static_cast<std::size_t>(2 * v)].active || nodes_[static_cast<std::size_t>(2 * v + 1)].active;
        }
    }

    Index supports() const { return static_cast<Index>(support_indices_.size()); }
    Index basis_rank() const { return basis_.cols(); }

    /// Moves grid point `s` from the candidates into the support set.
    void add_support(Index s) {
        if (s < 0 || s >= n_) throw ParameterError("LoewnerState: support index out of range");
        if (!active_[static_cast<std::size_t>(s)]) throw ParameterError("LoewnerState: point already a support");
        const Index m = supports();
        active_[static_cast<std::size_t>(s)] = 0;
        support_indices_.push_back(s);

        const bool grown = extend_basis(s);
        const Index r = basis_rank();

        support_coef_.conservativeResize(r, m + 1);
        if (grown && m > 0) support_coef_.row(r - 1).head(m).setZero();
        support_coef_.col(m) = basis_.adjoint() * f_.row(s).transpose();

        // Leaf of the new support goes away; its ancestors are refactored.
        Node& gone = nodes_[static_cast<std::size_t>(size_ + s)];
        gone = Node{};
        for (Index v = (size_ + s) / 2; v >= 1; v /= 2) nodes_[static_cast<std::size_t>(v)].dirty = true;

        const C zs = points_[static_cast<std::size_t>(s)];
        for (Index i = 0; i < n_; ++i) {
            if (!active_[static_cast<std::size_t>(i)]) continue;
            Node& leaf = nodes_[static_cast<std::size_t>(size_ + i)];
            if (grown) {
                // The residual row splits into the new direction and the new residual.
                const Index old_row = leaf.qr.rows() - 1;
                leaf.qr.append_zero_row();
                const C alpha = coef_(i, r - 1);
                const Real rho = rho_(i);
                const Real h = std::hypot(std::abs(alpha), rho);
                C u1(1, 0), u2(0, 0);
                if (h > 0) {
                    u1 = alpha / h;
                    u2 = rho / h;
                }
                leaf.qr.rotate(old_row, old_row + 1, u1, -std::conj(u2), u2, std::conj(u1));
            }
            const C c = Real(1) / (points_[static_cast<std::size_t>(i)] - zs);
            Vector x(r + 1);
            x.head(r) = (coef_.row(i).transpose() - support_coef_.col(m)) * c;
            x(r) = rho_(i) * c;
            leaf.new_row = leaf.qr.append_column(std::move(x));
        }
        update_tree();
    }

    /// Upper-trapezoidal factor R with R^* R equal to the Gram matrix of the
    /// current Loewner matrix.
    Matrix reduced_factor() const { return nodes_[1].qr.r(); }

    BasicSingularPair<Real> solve() const {
        const Matrix r = reduced_factor();
        if (r.cols() == 0) throw ParameterError("LoewnerState: no supports yet");
        if (r.rows() == 0) {
            BasicSingularPair<Real> out;
            out.vector = Vector::Zero(r.cols());
            out.vector(r.cols() - 1) = 1;
            return out;
        }
        return smallest_singular_pair(r);
    }

  private:
    struct Node {
        bool active = false;
        bool dirty = false;
        bool new_row = false; // R gained a row with the latest column
        detail::GrowingQr<Real> qr;
        std::vector<std::pair<int, Index>> inputs; // (child 0/1, child R row)
    };

    bool extend_basis(Index s) {
        const Index r = basis_rank();
        if (r >= cols_) return false;
        Vector v = residual_.row(s).transpose();
        if (r > 0) v -= basis_ * (basis_.adjoint() * v);
        const Real nv = v.norm();
        const Real scale = f_.row(s).norm();
        if (!(nv > 8 * std::numeric_limits<Real>::epsilon() * scale) || nv == 0) return false;
        v /= nv;
        basis_.conservativeResize(cols_, r + 1);
        basis_.col(r) = v;
        const Vector alpha = residual_ * v.conjugate();
        residual_ -= alpha * v.transpose();
        coef_.conservativeResize(n_, r + 1);
        coef_.col(r) = alpha;
        rho_ = residual_.rowwise().norm();
        return true;
    }

    void update_tree() {
        for (Index v = size_ - 1; v >= 1; --v) {
            Node& node = nodes_[static_cast<std::size_t>(v)];
            const Node& left = nodes_[static_cast<std::size_t>(2 * v)];
            const Node& right = nodes_[static_cast<std::size_t>(2 * v + 1)];
            node.active = left.active || right.active;
            if (!node.active) {
                node = Node{};
                continue;
            }
            const Node* child[2] = {&left, &right};
            if (node.dirty) {
                node.qr = detail::GrowingQr<Real>{};
                node.inputs.clear();
                for (int c = 0; c < 2; ++c)
                    if (child[c]->active)
                        for (Index q = 0; q < child[c]->qr.r_rows(); ++q) node.inputs.emplace_back(c, q);
                // Staircase order: rows that start later come later.
                std::stable_sort(node.inputs.begin(), node.inputs.end(), [&](const auto& a, const auto& b) {
                    return child[a.first]->qr.lead(a.second) < child[b.first]->qr.lead(b.second);
                });
                for (std::size_t q = 0; q < node.inputs.size(); ++q) node.qr.append_zero_row();
                bool grew = false;
                for (Index j = 0; j < supports(); ++j) grew = node.qr.append_column(gather(node, child, j));
                node.new_row = grew;
                node.dirty = false;
                continue;
            }
            for (int c = 0; c < 2; ++c) {
                if (child[c]->active && child[c]->new_row) {
                    node.inputs.emplace_back(c, child[c]->qr.r_rows() - 1);
                    node.qr.append_zero_row();
                }
            }
            node.new_row = node.qr.append_column(gather(node, child, supports() - 1));
        }
    }

    static Vector gather(const Node& node, const Node* const child[2], Index col) {
        Vector x(static_cast<Index>(node.inputs.size()));
        for (std::size_t q = 0; q < node.inputs.size(); ++q) {
            const auto [c, row] = node.inputs[q];
            x(static_cast<Index>(q)) = child[c]->qr.r()(row, col);
        }
        return x;
    }

    Matrix f_;
    std::vector<C> points_;
    Index n_ = 0;
    Index cols_ = 0;
    Matrix residual_;     // n x N, rows orthogonal to basis_
    Eigen::Matrix<Real, Eigen::Dynamic, 1> rho_; // row norms of residual_
    Matrix basis_;        // N x r, orthonormal
    Matrix coef_;         // n x r, rows of f in basis_
    Matrix support_coef_; // r x m
    std::vector<Index> support_indices_;
    std::vector<char> active_;
    Index size_ = 1;
    std::vector<Node> nodes_; // heap order, leaves at size_ + i
};

using LoewnerState = BasicLoewnerState<long double>;

#ifdef RATBARY_PRECOMPILED
extern template class detail::GrowingQr<long double>;
extern template class BasicLoewnerState<long double>;
extern template BasicComplexMatrix<long double> loewner_assemble_as<long double>(const Eigen::Ref<const ComplexMatrix>&,
                                                                                std::span<const Complex>,
                                                                                std::span<const Index>);
extern template BasicComplexMatrix<double> loewner_assemble_as<double>(const Eigen::Ref<const ComplexMatrix>&,
                                                                      std::span<const Complex>, std::span<const Index>);
#endif

} // namespace ratbary

#endif
