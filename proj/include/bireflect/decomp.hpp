#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <bireflect/algebra.hpp>
#include <bireflect/hensel.hpp>

namespace bireflect {

enum class ConjugacyTarget { inverse, negation };

struct ConjugacyWitness {
    CMat conjugator;    // invertible y in the algebra with y*x = target(x)*y
    int kernel_dim = 0; // dimension of the intertwining space that was searched
    int attempts = 0;   // candidates tried before an invertible one appeared
};

/** Searches the algebra for an invertible y with y*x*y^-1 equal to x^-1 or
 *  -x. The intertwining space is the exact kernel of a linear map, so an
 *  empty kernel is a proof of impossibility; a kernel without an invertible
 *  element is reported after seeded random probing, flagged probabilistic. */
inline ConjugacyWitness find_conjugator(const AlgebraRep& alg, const CMat& x,
                                        ConjugacyTarget target, std::uint64_t seed = 1,
                                        const TolerancePolicy& policy = {}) {
    if (!alg.contains(x, policy))
        throw PreconditionViolated("find_conjugator: element not in the algebra");
    const Eigen::Index n = alg.ambient_dim();
    const CMat t = (target == ConjugacyTarget::inverse) ? invert_in_algebra(alg, x, policy)
                                                        : CMat(-x);

    const auto& basis = alg.basis();
    const int d = alg.dim();
    const double data_scale = 1.0 + x.norm() + t.norm();
    CMat map(n * n, d);
    for (int i = 0; i < d; ++i)
        map.col(i) = vec(basis[static_cast<std::size_t>(i)] * x -
                         t * basis[static_cast<std::size_t>(i)]);
    // data_scale floors the rank cut: when x and t already commute with the
    // whole algebra (x close to -x^-1, say) the map is a zero matrix plus
    // rounding, and a purely relative cut would read that noise as full rank.
    const CMat kernel = kernel_basis(map, policy, data_scale);
    const int k = static_cast<int>(kernel.cols());
    if (k == 0)
        throw NotConjugateInAlgebra(0, 0, false,
                                    "find_conjugator: no intertwining element exists");

    const double relation_bound = 10.0 * std::max(policy.tau_rank, 1e4 * kEps) *
                                  std::sqrt(static_cast<double>(d)) * data_scale;
    // Random kernel combinations hit an invertible element with probability
    // one whenever the kernel holds any, so every candidate is drawn from the
    // seed; distinct seeds then probe genuinely distinct candidates, which
    // callers rely on to retry past a numerically unlucky witness. The
    // witness feeds a square root of y*y downstream, whose accuracy degrades
    // with cond(y)^2, so the scan keeps the best-conditioned candidate and
    // stops early once a comfortable one appears.
    Rng rng(seed);
    std::optional<ConjugacyWitness> best;
    double best_cond = std::numeric_limits<double>::infinity();
    const int budget = std::max(policy.max_retries, k);
    for (int attempt = 0; attempt < budget; ++attempt) {
        CVec c(k);
        for (int i = 0; i < k; ++i) c(i) = rng.next_cnormal();
        const CVec coeff = kernel * c;
        CMat y = CMat::Zero(n, n);
        for (int i = 0; i < d; ++i) y += coeff(i) * basis[static_cast<std::size_t>(i)];
        const double ynorm = y.norm();
        if (!(ynorm > 0.0) || !y.allFinite()) continue;
        y /= ynorm;
        if ((y * x - t * y).norm() > relation_bound) continue;
        if (!is_invertible_in_algebra(alg, y, policy)) continue;
        try {
            invert_in_algebra(alg, y, policy);
        } catch (const Error&) {
            continue;
        }
        const double cy = cond_2(y);
        if (cy < best_cond) {
            best_cond = cy;
            best = ConjugacyWitness{std::move(y), k, attempt + 1};
        }
        if (best_cond <= 30.0) break;
    }
    if (best) return std::move(*best);
    throw NotConjugateInAlgebra(k, budget, true,
                                "find_conjugator: intertwining space holds no invertible "
                                "element (probabilistic)");
}

struct InvolutionWitness {
    CMat involution; // j with j*j = unit and j*x*j = x^-1 (or -x)
    ConjugacyWitness conjugacy;
    SqrtWitness sqrt;
};

/** Upgrades a conjugator y to an involution j = y * s^-1 with s = r(y*y) a
 *  square root of y^2. s is a polynomial in y^2, so it commutes with y and
 *  with anything y^2 commutes with, and j*j = y^2 * (y^2)^-1 = unit. Taking
 *  the root before inverting keeps the root's operand at the scale of y^2
 *  instead of compounding the inversion error through the root. A conjugator
 *  whose root or square check degrades is discarded and the search reruns
 *  under a shifted seed; structural refusals propagate unchanged. */
inline InvolutionWitness involution_intertwiner(const AlgebraRep& alg, const CMat& x,
                                                ConjugacyTarget target,
                                                std::uint64_t seed = 1,
                                                const TolerancePolicy& policy = {}) {
    std::string last_error;
    for (std::uint64_t attempt = 0; attempt < 5; ++attempt) {
        ConjugacyWitness cw = find_conjugator(alg, x, target, seed + attempt, policy);
        try {
            InvolutionWitness wit;
            wit.conjugacy = std::move(cw);
            const CMat& y = wit.conjugacy.conjugator;
            wit.sqrt = sqrt_element(alg, y * y, policy);
            wit.involution = y * invert_in_algebra(alg, wit.sqrt.element, policy);
            const CMat& j = wit.involution;
            const double jscale = std::max(1.0, j.norm());
            if ((j * j - alg.unit()).norm() > 100.0 * policy.tau_eq * jscale * jscale)
                throw NumericalBreakdown(
                    "involution_intertwiner: squared witness drifted from the unit");
            return wit;
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    throw NumericalBreakdown(last_error);
}

struct BireflectionalCert {
    CMat x;
    CMat a, b;        // x = a*b with a*a = b*b = identity
    CMat intertwiner; // j = b
};

struct SquareZeroCert {
    CMat x;
    CMat a, b;        // x = a + b with a*a = b*b = 0
    CMat intertwiner; // j with j*j = identity, j*x*j = -x
};

/** Writes an invertible x as a product of two involutions: j from the
 *  inverse-target intertwiner gives x = (x*j)*j with (x*j)^2 = x*j*x*j =
 *  x * x^-1 = unit. */
inline BireflectionalCert bireflectional_decompose(const AlgebraRep& alg, const CMat& x,
                                                   std::uint64_t seed = 1,
                                                   const TolerancePolicy& policy = {}) {
    auto iw = involution_intertwiner(alg, x, ConjugacyTarget::inverse, seed, policy);
    BireflectionalCert cert;
    cert.x = x;
    cert.b = iw.involution;
    cert.a = x * iw.involution;
    cert.intertwiner = std::move(iw.involution);
    const double ascale = std::max(1.0, cert.a.norm());
    if ((cert.a * cert.a - alg.unit()).norm() > 100.0 * policy.tau_eq * ascale * ascale)
        throw NumericalBreakdown("bireflectional_decompose: first factor failed its square check");
    return cert;
}

/** Writes x as a sum of two square-zero elements: with j*x*j = -x the
 *  idempotents p = (unit+j)/2 and q = (unit-j)/2 satisfy p*x*p = q*x*q = 0,
 *  so a = p*x*q and b = q*x*p sum to x and square to zero via q*p = 0. */
inline SquareZeroCert square_zero_decompose(const AlgebraRep& alg, const CMat& x,
                                            std::uint64_t seed = 1,
                                            const TolerancePolicy& policy = {}) {
    auto iw = involution_intertwiner(alg, x, ConjugacyTarget::negation, seed, policy);
    const CMat& j = iw.involution;
    const CMat p = (alg.unit() + j) / Scalar(2.0);
    const CMat q = (alg.unit() - j) / Scalar(2.0);
    SquareZeroCert cert;
    cert.x = x;
    cert.a = p * x * q;
    cert.b = q * x * p;
    cert.intertwiner = j;
    const double scale = std::max(1.0, x.norm());
    if ((cert.a + cert.b - x).norm() > 100.0 * policy.tau_eq * scale * std::max(1.0, j.norm() * j.norm()))
        throw NumericalBreakdown("square_zero_decompose: summands failed to reproduce x");
    return cert;
}

/** The reverse direction of the square-zero decomposition: from a^2 = b^2 = 0
 *  and x = a + b, the commutator y = ab - ba anticommutes with x and its
 *  square is x^4. */
struct ConverseReport {
    CMat y;                      // ab - ba
    double res_a2 = 0.0;         // ||a^2||
    double res_b2 = 0.0;         // ||b^2||
    double res_anticommute = 0.0; // ||y*x + x*y||
    double res_square = 0.0;      // ||y^2 - x^4||
    bool pass = false;
};

inline ConverseReport verify_square_zero_converse(const CMat& a, const CMat& b,
                                                  const TolerancePolicy& policy = {}) {
    if (a.rows() != a.cols() || a.rows() != b.rows() || b.rows() != b.cols())
        throw DimensionMismatch("verify_square_zero_converse: shapes disagree");
    ConverseReport rep;
    const CMat x = a + b;
    rep.y = a * b - b * a;
    rep.res_a2 = (a * a).norm();
    rep.res_b2 = (b * b).norm();
    rep.res_anticommute = (rep.y * x + x * rep.y).norm();
    const CMat x2 = x * x;
    rep.res_square = (rep.y * rep.y - x2 * x2).norm();

    const double tol = 100.0 * policy.tau_eq;
    const double sa = std::max(1.0, a.norm()), sb = std::max(1.0, b.norm());
    const double sx = std::max(1.0, x.norm());
    rep.pass = rep.res_a2 <= tol * sa * sa && rep.res_b2 <= tol * sb * sb &&
               rep.res_anticommute <= tol * sx * sx * sx &&
               rep.res_square <= tol * sx * sx * sx * sx;
    return rep;
}

struct CheckItem {
    std::string name;
    double residual = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<CheckItem> checks;
    bool pass = true;

    void add(std::string name, double residual, double bound) {
        checks.push_back(CheckItem{std::move(name), residual, bound, residual <= bound});
        pass = pass && checks.back().pass;
    }
};

/** Independent replay of the bireflectional identities. The optional algebra
 *  adds membership checks; the stored intertwiner, when present, is held to
 *  its own contract. */
inline VerificationReport verify_bireflectional(const BireflectionalCert& cert,
                                                const AlgebraRep* alg = nullptr,
                                                const TolerancePolicy& policy = {}) {
    VerificationReport rep;
    const double tol = 100.0 * policy.tau_eq;
    const Eigen::Index n = cert.x.rows();
    const CMat eye = CMat::Identity(n, n);
    const double sa = std::max(1.0, cert.a.norm());
    const double sb = std::max(1.0, cert.b.norm());
    rep.add("product reproduces x", (cert.a * cert.b - cert.x).norm(), tol * sa * sb);
    rep.add("first factor is an involution", (cert.a * cert.a - eye).norm(), tol * sa * sa);
    rep.add("second factor is an involution", (cert.b * cert.b - eye).norm(), tol * sb * sb);
    if (cert.intertwiner.size() > 0) {
        const CMat& j = cert.intertwiner;
        const double sj = std::max(1.0, j.norm());
        const double sx = std::max(1.0, cert.x.norm());
        rep.add("intertwiner is an involution", (j * j - eye).norm(), tol * sj * sj);
        rep.add("intertwiner sends x to its inverse", (cert.x * (j * cert.x * j) - eye).norm(),
                tol * sx * sx * sj * sj);
    }
    if (alg) {
        rep.add("x in algebra", alg->membership_defect(cert.x), tol * std::max(1.0, cert.x.norm()));
        rep.add("a in algebra", alg->membership_defect(cert.a), tol * sa);
        rep.add("b in algebra", alg->membership_defect(cert.b), tol * sb);
    }
    return rep;
}

/** Independent replay of the square-zero identities. */
inline VerificationReport verify_square_zero(const SquareZeroCert& cert,
                                             const AlgebraRep* alg = nullptr,
                                             const TolerancePolicy& policy = {}) {
    VerificationReport rep;
    const double tol = 100.0 * policy.tau_eq;
    const Eigen::Index n = cert.x.rows();
    const double sa = std::max(1.0, cert.a.norm());
    const double sb = std::max(1.0, cert.b.norm());
    const double sx = std::max(1.0, cert.x.norm());
    // a and b are projections of x and may dwarf it, so the rounding in the
    // sum scales with the larger summand. When the split came from an
    // intertwiner j, the identity a + b - x = -(x + j x j)/2 holds exactly,
    // so half the measured negation defect belongs in the budget as well.
    double sum_bound = tol * std::max({sx, sa, sb});
    if (cert.intertwiner.size() > 0)
        sum_bound += 0.5 * (cert.intertwiner * cert.x * cert.intertwiner + cert.x).norm();
    rep.add("sum reproduces x", (cert.a + cert.b - cert.x).norm(), sum_bound);
    rep.add("first summand squares to zero", (cert.a * cert.a).norm(), tol * sa * sa);
    rep.add("second summand squares to zero", (cert.b * cert.b).norm(), tol * sb * sb);
    if (cert.intertwiner.size() > 0) {
        const CMat& j = cert.intertwiner;
        const double sj = std::max(1.0, j.norm());
        rep.add("intertwiner is an involution",
                (j * j - CMat::Identity(n, n)).norm(), tol * sj * sj);
        rep.add("intertwiner negates x", (j * cert.x * j + cert.x).norm(), tol * sx * sj * sj);
    }
    if (alg) {
        rep.add("x in algebra", alg->membership_defect(cert.x), tol * sx);
        rep.add("a in algebra", alg->membership_defect(cert.a), tol * sa);
        rep.add("b in algebra", alg->membership_defect(cert.b), tol * sb);
    }
    return rep;
}

} // namespace bireflect
