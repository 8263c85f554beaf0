#pragma once

#include <utility>
#include <vector>

#include <bireflect/matrix.hpp>

namespace bireflect {

/** A unital subalgebra of n x n matrices, held as a Frobenius-orthonormal
 *  basis together with its unit. The unit is the ambient identity for
 *  algebras built from a span; corner algebras carry their idempotent. */
class AlgebraRep {
public:
    static AlgebraRep full_matrix_algebra(Eigen::Index n) {
        AlgebraRep a;
        a.n_ = n;
        a.unit_ = CMat::Identity(n, n);
        a.full_ = true;
        a.basis_.reserve(static_cast<std::size_t>(n * n));
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) {
                CMat e = CMat::Zero(n, n);
                e(i, j) = Scalar(1.0);
                a.basis_.push_back(std::move(e));
            }
        a.refresh_flat();
        return a;
    }

    Eigen::Index ambient_dim() const { return n_; }
    int dim() const { return static_cast<int>(basis_.size()); }
    bool is_full() const { return full_; }
    const CMat& unit() const { return unit_; }
    const std::vector<CMat>& basis() const { return basis_; }

    CVec coordinates(const CMat& x) const { return flat_.adjoint() * vec(x); }

    CMat project(const CMat& x) const {
        return unvec(flat_ * coordinates(x), n_, n_);
    }

    double membership_defect(const CMat& x) const {
        if (full_) return 0.0;
        return (x - project(x)).norm();
    }

    bool contains(const CMat& x, const TolerancePolicy& policy = {}) const {
        if (x.rows() != n_ || x.cols() != n_) return false;
        if (full_) return true;
        return membership_defect(x) <= policy.tau_eq * std::max(1.0, x.norm());
    }

    friend AlgebraRep algebra_from_span(const std::vector<CMat>&, const TolerancePolicy&);
    friend AlgebraRep corner_algebra(const AlgebraRep&, const CMat&, const TolerancePolicy&);

private:
    void refresh_flat() {
        flat_.resize(n_ * n_, static_cast<Eigen::Index>(basis_.size()));
        for (std::size_t i = 0; i < basis_.size(); ++i)
            flat_.col(static_cast<Eigen::Index>(i)) = vec(basis_[i]);
    }

    /** Twice-iterated Gram-Schmidt adjoin; returns false for a dependent
     *  candidate. The threshold is relative to the candidate's norm. */
    bool adjoin(const CMat& x, double rel_threshold) {
        const double original = x.norm();
        if (original <= 0.0) return false;
        CMat r = x;
        for (int pass = 0; pass < 2; ++pass)
            for (const CMat& b : basis_) r -= (vec(b).adjoint() * vec(r))(0) * b;
        if (r.norm() <= rel_threshold * original) return false;
        basis_.push_back(r / r.norm());
        return true;
    }

    Eigen::Index n_ = 0;
    bool full_ = false;
    CMat unit_;
    std::vector<CMat> basis_;
    CMat flat_;
};

/** Smallest unital subalgebra containing the generators: adjoins the ambient
 *  identity, then closes the span under pairwise products. */
inline AlgebraRep algebra_from_span(const std::vector<CMat>& gens,
                                    const TolerancePolicy& policy = {}) {
    if (gens.empty()) throw PreconditionViolated("algebra_from_span: no generators");
    const Eigen::Index n = gens.front().rows();
    for (const CMat& g : gens)
        if (g.rows() != n || g.cols() != n)
            throw DimensionMismatch("algebra_from_span: generators must be square, same size");

    AlgebraRep a;
    a.n_ = n;
    a.unit_ = CMat::Identity(n, n);
    const double rel = std::max(policy.tau_rank, 1e-12);
    a.adjoin(a.unit_, rel);
    for (const CMat& g : gens) a.adjoin(g, rel);

    // Product closure; each pass multiplies all current pairs.
    std::size_t frontier = 0;
    while (a.dim() < n * n) {
        const std::size_t sz = a.basis_.size();
        bool grew = false;
        for (std::size_t i = 0; i < sz; ++i)
            for (std::size_t j = (i >= frontier ? 0 : frontier); j < sz; ++j)
                grew |= a.adjoin(a.basis_[i] * a.basis_[j], rel);
        if (!grew) break;
        frontier = sz;
    }
    a.full_ = (a.dim() == static_cast<int>(n * n));
    a.refresh_flat();
    return a;
}

/** The corner u*A*u for an idempotent u in A. Closed under products by
 *  construction, with unit u. */
inline AlgebraRep corner_algebra(const AlgebraRep& a, const CMat& u,
                                 const TolerancePolicy& policy = {}) {
    if (u.rows() != a.ambient_dim() || u.cols() != a.ambient_dim())
        throw DimensionMismatch("corner_algebra: idempotent has wrong size");
    const double scale = std::max(1.0, u.norm());
    if ((u * u - u).norm() > policy.tau_eq * scale * scale * 10.0)
        throw PreconditionViolated("corner_algebra: element is not idempotent");
    if (!a.contains(u, policy))
        throw PreconditionViolated("corner_algebra: idempotent not in the algebra");

    AlgebraRep c;
    c.n_ = a.ambient_dim();
    c.unit_ = u;
    const double rel = std::max(policy.tau_rank, 1e-12);
    for (const CMat& b : a.basis()) c.adjoin(u * b * u, rel);
    c.full_ = false;
    c.refresh_flat();
    return c;
}

/** Inverse of x within the algebra: y in A with x*y = y*x = unit. For a
 *  corner with unit u != I this goes through x + I - u, which is ambient
 *  invertible exactly when x is invertible in the corner. */
inline CMat invert_in_algebra(const AlgebraRep& a, const CMat& x,
                              const TolerancePolicy& policy = {}) {
    if (!a.contains(x, policy))
        throw PreconditionViolated("invert_in_algebra: element not in the algebra");
    if (a.is_full()) return inverse_checked(x, policy);

    const Eigen::Index n = a.ambient_dim();
    const CMat eye = CMat::Identity(n, n);
    const CMat m = x + eye - a.unit();
    CMat y = inverse_checked(m, policy) - eye + a.unit();

    const double scale = std::max({1.0, x.norm(), y.norm()});
    if ((x * y - a.unit()).norm() > 1e-8 * scale || (y * x - a.unit()).norm() > 1e-8 * scale)
        throw NumericalBreakdown("invert_in_algebra: inverse residual too large");
    if (!a.contains(y, policy))
        throw NumericalBreakdown("invert_in_algebra: inverse left the algebra");
    return y;
}

inline bool is_invertible_in_algebra(const AlgebraRep& a, const CMat& x,
                                     const TolerancePolicy& policy = {}) {
    if (a.is_full()) return is_invertible(x, policy);
    const CMat m = x + CMat::Identity(a.ambient_dim(), a.ambient_dim()) - a.unit();
    return is_invertible(m, policy);
}

} // namespace bireflect
