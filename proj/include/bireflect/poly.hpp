#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <bireflect/scalar.hpp>

namespace bireflect {

/** Poly: dense univariate polynomial over Scalar, coefficients lowest-degree
 *  first. The zero polynomial is the empty coefficient list (degree -1). */
class Poly {
public:
    Poly() = default;
    Poly(std::initializer_list<Scalar> cs) : c_(cs) { tight_trim(); }
    explicit Poly(std::vector<Scalar> cs) : c_(std::move(cs)) { tight_trim(); }

    static Poly zero() { return Poly{}; }
    static Poly one() { return Poly{Scalar(1.0)}; }
    static Poly t() { return Poly{Scalar(0.0), Scalar(1.0)}; }
    static Poly constant(Scalar v) { return Poly{v}; }

    /** Monic product of (t - r) over the given roots. */
    template <typename Range>
    static Poly from_roots(const Range& roots) {
        Poly p = one();
        for (const Scalar& r : roots) p = p * Poly{-r, Scalar(1.0)};
        return p;
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }

    Scalar coeff(int i) const {
        if (i < 0 || i >= static_cast<int>(c_.size())) return Scalar(0.0);
        return c_[static_cast<std::size_t>(i)];
    }
    const std::vector<Scalar>& coeffs() const { return c_; }

    Scalar lead() const { return c_.empty() ? Scalar(0.0) : c_.back(); }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const Scalar& v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    /** Drop leading coefficients below rel * max|coeff|. */
    Poly trimmed(double rel) const {
        Poly p = *this;
        const double cut = rel * p.max_abs_coeff();
        while (!p.c_.empty() && std::abs(p.c_.back()) <= cut) p.c_.pop_back();
        return p;
    }

    Scalar eval(Scalar x) const {
        Scalar acc(0.0);
        for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
        return acc;
    }

    /** Substitute t -> alpha * t (coefficient rescaling). */
    Poly scaled_argument(Scalar alpha) const {
        Poly p = *this;
        Scalar f(1.0);
        for (std::size_t i = 0; i < p.c_.size(); ++i) {
            p.c_[i] *= f;
            f *= alpha;
        }
        return p;
    }

    /** Multiply by t^k. */
    Poly shifted(int k) const {
        if (is_zero()) return *this;
        Poly p;
        p.c_.assign(c_.size() + static_cast<std::size_t>(k), Scalar(0.0));
        std::copy(c_.begin(), c_.end(), p.c_.begin() + k);
        return p;
    }

    Poly operator-() const {
        Poly p = *this;
        for (Scalar& v : p.c_) v = -v;
        return p;
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        Poly p;
        p.c_.assign(std::max(a.c_.size(), b.c_.size()), Scalar(0.0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) p.c_[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) p.c_[i] += b.c_[i];
        p.tight_trim();
        return p;
    }
    friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return zero();
        Poly p;
        p.c_.assign(a.c_.size() + b.c_.size() - 1, Scalar(0.0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                p.c_[i + j] += a.c_[i] * b.c_[j];
        p.tight_trim();
        return p;
    }
    friend Poly operator*(Scalar s, const Poly& a) {
        Poly p = a;
        for (Scalar& v : p.c_) v *= s;
        p.tight_trim();
        return p;
    }
    friend Poly operator*(const Poly& a, Scalar s) { return s * a; }

private:
    // Exact-noise trim only; tolerance-aware trimming is an explicit call.
    void tight_trim() {
        const double cut = 64.0 * kEps * max_abs_coeff();
        while (!c_.empty() && std::abs(c_.back()) <= cut) c_.pop_back();
    }

    std::vector<Scalar> c_;
};

/** Euclidean division a = q*b + r with deg r < deg b. */
inline std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b,
                                         const TolerancePolicy& policy = {}) {
    const Poly bt = b.trimmed(policy.tau_eq);
    if (bt.is_zero()) throw DivisionByZeroPoly("poly_divmod: divisor is zero");
    if (a.is_zero() || a.degree() < bt.degree()) return {Poly::zero(), a};

    std::vector<Scalar> r(a.coeffs());
    std::vector<Scalar> q(static_cast<std::size_t>(a.degree() - bt.degree() + 1), Scalar(0.0));
    const Scalar lead = bt.lead();
    for (int k = a.degree() - bt.degree(); k >= 0; --k) {
        const Scalar f = r[static_cast<std::size_t>(k + bt.degree())] / lead;
        q[static_cast<std::size_t>(k)] = f;
        for (int i = 0; i <= bt.degree(); ++i)
            r[static_cast<std::size_t>(k + i)] -= f * bt.coeff(i);
        r[static_cast<std::size_t>(k + bt.degree())] = Scalar(0.0); // cancels by construction
    }
    r.resize(static_cast<std::size_t>(std::max(bt.degree(), 0)));
    return {Poly(std::move(q)), Poly(std::move(r))};
}

inline Poly poly_mod(const Poly& a, const Poly& m, const TolerancePolicy& policy = {}) {
    return poly_divmod(a, m, policy).second;
}

/** Inverse of a modulo m: b with a*b = 1 (mod m). Extended Euclid with
 *  per-step remainder renormalization; the gcd must be a nonzero constant. */
inline Poly poly_mod_inverse(const Poly& a, const Poly& m,
                             const TolerancePolicy& policy = {}) {
    if (m.trimmed(policy.tau_eq).degree() < 1)
        throw PreconditionViolated("poly_mod_inverse: modulus must have degree >= 1");

    Poly r0 = m, s0 = Poly::zero();
    Poly r1 = poly_mod(a, m, policy), s1 = Poly::one();
    if (r1.max_abs_coeff() <= policy.tau_eq * std::max(1.0, a.max_abs_coeff()))
        throw NotCoprime("poly_mod_inverse: argument is zero modulo m");

    for (int guard = 0; guard <= 4 * (m.degree() + 1); ++guard) {
        const Poly r1t = r1.trimmed(policy.tau_eq);
        if (r1t.degree() <= 0) {
            if (r1t.is_zero()) throw NotCoprime("poly_mod_inverse: gcd vanished");
            Poly inv = poly_mod((Scalar(1.0) / r1t.coeff(0)) * s1, m, policy);
            const Poly check = poly_mod(a * inv, m, policy) - Poly::one();
            const double bound = std::max(policy.tau_eq, 1e4 * kEps) *
                                 std::max({1.0, a.max_abs_coeff(), inv.max_abs_coeff()});
            if (check.max_abs_coeff() > bound * (m.degree() + 1))
                throw NumericalBreakdown("poly_mod_inverse: residual check failed");
            return inv;
        }
        auto [q, r2] = poly_divmod(r0, r1t, policy);
        Poly s2 = s0 - q * s1;
        const double rscale = std::max(1.0, r0.max_abs_coeff());
        if (r2.max_abs_coeff() <= policy.tau_eq * rscale) {
            throw NotCoprime("poly_mod_inverse: gcd has positive degree");
        }
        const double lam = 1.0 / r2.max_abs_coeff();
        r0 = r1t;
        s0 = s1;
        r1 = Scalar(lam) * r2;
        s1 = Scalar(lam) * s2;
    }
    throw NumericalBreakdown("poly_mod_inverse: Euclid failed to terminate");
}

namespace detail {

/** Single-linkage clustering of points at the given absolute radius.
 *  Returns groups of indices; within each group, indices ascend. */
inline std::vector<std::vector<int>> single_linkage(const std::vector<Scalar>& pts,
                                                    double radius) {
    const int k = static_cast<int>(pts.size());
    std::vector<int> parent(static_cast<std::size_t>(k));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            parent[static_cast<std::size_t>(i)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
            i = parent[static_cast<std::size_t>(i)];
        }
        return i;
    };
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (std::abs(pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]) <= radius) {
                int a = find(i), b = find(j);
                if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
            }
    std::vector<std::vector<int>> groups;
    std::vector<int> root_to_group(static_cast<std::size_t>(k), -1);
    for (int i = 0; i < k; ++i) {
        int r = find(i);
        if (root_to_group[static_cast<std::size_t>(r)] < 0) {
            root_to_group[static_cast<std::size_t>(r)] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(root_to_group[static_cast<std::size_t>(r)])].push_back(i);
    }
    return groups;
}

inline bool scalar_lex_less(Scalar a, Scalar b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

} // namespace detail

/** Roots with multiplicity via the companion matrix; eigenvalues are
 *  single-linkage clustered at tau_eq * scale so repeated roots come back
 *  once per occurrence with a consistent value. Deterministic order. */
inline std::vector<Scalar> poly_roots(const Poly& p, const TolerancePolicy& policy = {}) {
    const Poly pt = p.trimmed(policy.tau_eq);
    if (pt.is_zero()) throw PreconditionViolated("poly_roots: zero polynomial");
    const int d = pt.degree();
    if (d == 0) return {};

    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
    const Scalar lead = pt.lead();
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -pt.coeff(i) / lead;
    for (int i = 0; i + 1 < d; ++i) comp(i + 1, i) = Scalar(1.0);

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericalBreakdown("poly_roots: eigenvalue iteration failed");

    std::vector<Scalar> eigs(static_cast<std::size_t>(d));
    double scale = 1.0;
    for (int i = 0; i < d; ++i) {
        eigs[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        scale = std::max(scale, std::abs(eigs[static_cast<std::size_t>(i)]));
    }

    std::vector<Scalar> out;
    out.reserve(static_cast<std::size_t>(d));
    for (const auto& grp : detail::single_linkage(eigs, policy.tau_eq * scale)) {
        Scalar mean(0.0);
        for (int idx : grp) mean += eigs[static_cast<std::size_t>(idx)];
        mean /= static_cast<double>(grp.size());
        for (std::size_t i = 0; i < grp.size(); ++i) out.push_back(mean);
    }
    std::sort(out.begin(), out.end(), detail::scalar_lex_less);
    return out;
}

/** Newton-form interpolation through distinct nodes; monomial result. */
inline Poly poly_interpolate(const std::vector<Scalar>& nodes,
                             const std::vector<Scalar>& values) {
    if (nodes.size() != values.size() || nodes.empty())
        throw DimensionMismatch("poly_interpolate: nodes/values size mismatch");
    const std::size_t n = nodes.size();
    double scale = 0.0;
    for (const Scalar& x : nodes) scale = std::max(scale, std::abs(x));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(nodes[i] - nodes[j]) <= 1e3 * kEps * std::max(scale, 1.0))
                throw RepeatedRoot("poly_interpolate: coincident nodes");

    std::vector<Scalar> dd(values);
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = n - 1; i >= j; --i) {
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - j]);
            if (i == j) break;
        }

    Poly p = Poly::constant(dd[n - 1]);
    for (std::size_t i = n - 1; i-- > 0;)
        p = p * Poly{-nodes[i], Scalar(1.0)} + Poly::constant(dd[i]);
    return p;
}

} // namespace bireflect
