#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>

#include <bireflect/decomp.hpp>

namespace bireflect {

/** A linear antiautomorphism candidate on matrices. Note: these maps are
 *  linear over the complex scalars, never conjugate-linear; make_star
 *  enforces that along with the other axioms. */
class StarMap {
public:
    enum class Kind { transpose, form, custom };

    static StarMap transpose_star() {
        StarMap s;
        s.kind_ = Kind::transpose;
        return s;
    }

    /** x -> g^-1 * x^T * g. Involutive on all of M_n exactly when g is
     *  symmetric or antisymmetric; validation happens in make_star. */
    static StarMap form_star(const CMat& g, const TolerancePolicy& policy = {}) {
        StarMap s;
        s.kind_ = Kind::form;
        s.g_ = g;
        s.ginv_ = inverse_checked(g, policy);
        s.amplification_ = std::max(1.0, cond_2(g));
        return s;
    }

    static StarMap custom_star(std::function<CMat(const CMat&)> fn) {
        StarMap s;
        s.kind_ = Kind::custom;
        s.fn_ = std::move(fn);
        return s;
    }

    CMat operator()(const CMat& x) const {
        switch (kind_) {
            case Kind::transpose: return x.transpose();
            case Kind::form: return ginv_ * x.transpose() * g_;
            case Kind::custom: return fn_(x);
        }
        throw PreconditionViolated("StarMap: empty map");
    }

    Kind kind() const { return kind_; }
    const CMat& form() const { return g_; }
    /** Conditioning factor star applications can multiply residuals by. */
    double amplification() const { return amplification_; }

private:
    Kind kind_ = Kind::custom;
    CMat g_, ginv_;
    std::function<CMat(const CMat&)> fn_;
    double amplification_ = 1.0;
};

/** Validates the four axioms of a star on the given algebra: linearity over
 *  the complex scalars, involutivity, reversal of products, and stability of
 *  the algebra's span. Returns the map unchanged on success. */
inline StarMap make_star(const AlgebraRep& alg, const StarMap& star,
                         const TolerancePolicy& policy = {}) {
    const double tol =
        100.0 * std::max(policy.tau_eq, 1e3 * kEps * star.amplification() * star.amplification());
    const auto& basis = alg.basis();
    std::vector<CMat> image;
    image.reserve(basis.size());
    for (const CMat& b : basis) image.push_back(star(b));

    const Scalar iu(0.0, 1.0);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if ((star(iu * basis[i]) - iu * image[i]).norm() > tol)
            throw NotAnInvolution("linearity",
                                  "make_star: map is not linear over the complex scalars");
        if (i + 1 < basis.size()) {
            const Scalar al(0.3, 0.7), be(-0.2, 0.4);
            if ((star(al * basis[i] + be * basis[i + 1]) - al * image[i] - be * image[i + 1])
                    .norm() > tol)
                throw NotAnInvolution("linearity", "make_star: map is not additive");
        }
        if ((star(image[i]) - basis[i]).norm() > tol * std::max(1.0, image[i].norm()))
            throw NotAnInvolution("involutivity", "make_star: map applied twice is not identity");
        if (!alg.contains(image[i], policy))
            throw AlgebraNotStable("make_star: star image leaves the algebra");
    }
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j)
            if ((star(basis[i] * basis[j]) - image[j] * image[i]).norm() > tol)
                throw NotAnInvolution("antimultiplicativity",
                                      "make_star: map does not reverse products");
    if ((star(alg.unit()) - alg.unit()).norm() > tol * std::max(1.0, alg.unit().norm()))
        throw NotAnInvolution("unit", "make_star: map moves the unit");
    return star;
}

inline bool is_unitary(const StarMap& star, const CMat& x, const TolerancePolicy& policy = {}) {
    if (x.rows() != x.cols()) return false;
    const double scale = std::max(1.0, x.norm());
    const double tol =
        100.0 * std::max(policy.tau_eq, 1e3 * kEps * star.amplification() * star.amplification());
    return (star(x) * x - CMat::Identity(x.rows(), x.rows())).norm() <= tol * scale * scale;
}

/** Scales a conjugator to a star-unitary one without disturbing what it
 *  conjugates: s = sqrt(star(z)*z) is a polynomial in star(z)*z, so z*s^-1
 *  keeps every intertwining property z has with elements star(z)*z commutes
 *  with, and (z*s^-1)* (z*s^-1) = s^-1 * (star(z) z) * s^-1 = unit. */
inline CMat unitarize_conjugator(const AlgebraRep& alg, const StarMap& star, const CMat& z,
                                 const TolerancePolicy& policy = {}) {
    const CMat zz = star(z) * z;
    auto s = sqrt_element(alg, zz, policy);
    const CMat zprime = z * invert_in_algebra(alg, s.element, policy);
    const double scale = std::max(1.0, zprime.norm());
    const double tol =
        1e4 * std::max(policy.tau_eq, 1e3 * kEps) * star.amplification() * star.amplification();
    if ((star(zprime) * zprime - alg.unit()).norm() > tol * scale * scale)
        throw NumericalBreakdown("unitarize_conjugator: result failed its unitarity check");
    return zprime;
}

struct UnitaryCert {
    CMat x; // star-unitary input, conjugate to its inverse in the algebra
    CMat y; // star-unitary, y^4 = 1, y x y^-1 = x^-1
    CMat w; // y^-1 x: star-unitary, w^4 = 1, x = y * w
};

/** For a star-unitary x conjugate to its inverse, builds a star-unitary
 *  fourth root of unity y with y x y^-1 = x^-1.
 *
 *  Construction: unitarize a conjugator z, set d = z - z^-1 and e = z + z^-1
 *  (both intertwine x with x^-1, d is star-negated, e is star-fixed), and
 *  split on the idempotent of a = d^2. Where a is invertible, i*d rescaled by
 *  the corner root of (d^2)^-1 squares to minus the corner unit; where a is
 *  nilpotent, e^2 = a + 4 is corner-invertible and e rescaled by the corner
 *  root of (e^2)^-1 squares to the corner unit. The sum y of the two pieces
 *  is star-unitary with y^2 = 1 - 2f and y^4 = 1. */
inline UnitaryCert unitary_fourth_root_conjugator(const AlgebraRep& alg, const StarMap& star,
                                                  const CMat& x, std::uint64_t seed = 1,
                                                  const TolerancePolicy& policy = {}) {
    const StarMap st = make_star(alg, star, policy);
    if (!alg.contains(x, policy))
        throw PreconditionViolated("unitary_fourth_root_conjugator: x not in the algebra");
    if (!is_unitary(st, x, policy))
        throw PreconditionViolated("unitary_fourth_root_conjugator: x is not star-unitary");

    const Eigen::Index n = alg.ambient_dim();
    const CMat unit = alg.unit();

    auto cw = find_conjugator(alg, x, ConjugacyTarget::inverse, seed, policy);
    const CMat z = unitarize_conjugator(alg, st, cw.conjugator, policy);
    const CMat zinv = invert_in_algebra(alg, z, policy);
    const CMat d = z - zinv;
    const CMat e = z + zinv;
    const CMat a = d * d;

    // a is a difference of O(||z|| + ||z^-1||) terms, squared; below that
    // times tau_eq it is rounding noise and f must come out zero, not be
    // fitted to the noise spectrum.
    const double a_context = std::pow(z.norm() + zinv.norm(), 2);
    auto fit = fitting_idempotent(alg, a, policy, a_context);
    const CMat& f = fit.idempotent;
    const CMat h = unit - f;

    const Scalar iu(0.0, 1.0);
    CMat u1 = CMat::Zero(n, n);
    CMat u2 = CMat::Zero(n, n);
    const int rank_f = static_cast<int>(std::lround(f.trace().real()));
    const int rank_h = static_cast<int>(std::lround(h.trace().real()));
    if (rank_f > 0) {
        auto corner = corner_algebra(alg, f, policy);
        const CMat d1 = d * f;
        const CMat m = d1 * d1;
        auto w1 = sqrt_element(corner, invert_in_algebra(corner, m, policy), policy);
        u1 = iu * d1 * w1.element;
    }
    if (rank_h > 0) {
        auto corner = corner_algebra(alg, h, policy);
        const CMat e2 = e * h;
        const CMat v = e2 * e2;
        auto w2 = sqrt_element(corner, invert_in_algebra(corner, v, policy), policy);
        u2 = e2 * w2.element;
    }

    UnitaryCert cert;
    cert.x = x;
    cert.y = u1 + u2;
    cert.w = invert_in_algebra(alg, cert.y, policy) * x;

    const CMat& y = cert.y;
    const double sy = std::max(1.0, y.norm());
    const double tol = 1e4 * std::max(policy.tau_eq, 1e3 * kEps) * st.amplification() *
                       st.amplification() * std::max(1.0, cond_2(z));
    const CMat y2 = y * y;
    if ((y2 * y2 - unit).norm() > tol * sy * sy * sy * sy)
        throw NumericalBreakdown("unitary_fourth_root_conjugator: y^4 drifted from the unit");
    if ((st(y) * y - unit).norm() > tol * sy * sy)
        throw NumericalBreakdown("unitary_fourth_root_conjugator: y is not star-unitary");
    const CMat xinv = invert_in_algebra(alg, x, policy);
    if ((y * x - xinv * y).norm() > tol * sy * std::max(1.0, xinv.norm()))
        throw NumericalBreakdown("unitary_fourth_root_conjugator: conjugation identity failed");
    return cert;
}

/** Product form: x = y * w with both factors star-unitary fourth roots of
 *  unity. w = y^-1 x inherits w^2 = y^-2 from the intertwining, so w^4 = 1. */
inline std::pair<CMat, CMat> unitary_fourth_root_product(const AlgebraRep& alg,
                                                         const StarMap& star, const CMat& x,
                                                         std::uint64_t seed = 1,
                                                         const TolerancePolicy& policy = {}) {
    auto cert = unitary_fourth_root_conjugator(alg, star, x, seed, policy);
    return {cert.y, cert.w};
}

/** Independent replay of the unitary fourth-root identities. */
inline VerificationReport verify_unitary_fourth_root(const UnitaryCert& cert,
                                                     const StarMap& star,
                                                     const AlgebraRep* alg = nullptr,
                                                     const TolerancePolicy& policy = {}) {
    VerificationReport rep;
    const Eigen::Index n = cert.x.rows();
    const CMat eye = CMat::Identity(n, n);
    const double amp = star.amplification();
    const double tol = 100.0 * std::max(policy.tau_eq, 1e3 * kEps * amp * amp);
    const double sx = std::max(1.0, cert.x.norm());
    const double sy = std::max(1.0, cert.y.norm());

    rep.add("x is star-unitary", (star(cert.x) * cert.x - eye).norm(), tol * sx * sx);
    rep.add("y is star-unitary", (star(cert.y) * cert.y - eye).norm(), tol * sy * sy);
    const CMat y2 = cert.y * cert.y;
    rep.add("y is a fourth root of unity", (y2 * y2 - eye).norm(), tol * sy * sy * sy * sy);
    try {
        const CMat xinv = inverse_checked(cert.x, policy);
        rep.add("y conjugates x to its inverse", (cert.y * cert.x - xinv * cert.y).norm(),
                tol * sy * sx * std::max(1.0, xinv.norm()));
    } catch (const Error&) {
        rep.add("y conjugates x to its inverse", std::numeric_limits<double>::infinity(),
                tol);
    }
    if (cert.w.size() > 0) {
        const double sw = std::max(1.0, cert.w.norm());
        rep.add("w is star-unitary", (star(cert.w) * cert.w - eye).norm(), tol * sw * sw);
        const CMat w2 = cert.w * cert.w;
        rep.add("w is a fourth root of unity", (w2 * w2 - eye).norm(), tol * sw * sw * sw * sw);
        rep.add("x = y * w", (cert.y * cert.w - cert.x).norm(), tol * sy * sw);
    }
    if (alg) {
        rep.add("x in algebra", alg->membership_defect(cert.x), tol * sx);
        rep.add("y in algebra", alg->membership_defect(cert.y), tol * sy);
        if (cert.w.size() > 0)
            rep.add("w in algebra", alg->membership_defect(cert.w),
                    tol * std::max(1.0, cert.w.norm()));
    }
    return rep;
}

} // namespace bireflect
