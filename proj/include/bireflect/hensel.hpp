#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <bireflect/algebra.hpp>
#include <bireflect/poly.hpp>
#include <bireflect/spectra.hpp>

namespace bireflect {

/** Chooses a square root b of each cluster value v (b*b = v). */
using BranchPicker = std::function<Scalar(Scalar)>;

inline Scalar principal_branch(Scalar v) { return std::sqrt(v); }

namespace detail {

/** Taylor coefficients of sqrt at v with chosen branch b:
 *  sqrt(v + h) = b * sum_j binom(1/2, j) (h/v)^j. Returns jet[0..order-1],
 *  jet[j] = derivative_j / j!. */
inline std::vector<Scalar> sqrt_jet(Scalar v, Scalar b, int order) {
    std::vector<Scalar> jet(static_cast<std::size_t>(order));
    Scalar binom(1.0); // binom(1/2, j), built incrementally
    Scalar vpow(1.0);
    for (int j = 0; j < order; ++j) {
        jet[static_cast<std::size_t>(j)] = b * binom / vpow;
        binom *= (Scalar(0.5) - Scalar(static_cast<double>(j))) / Scalar(static_cast<double>(j + 1));
        vpow *= v;
    }
    return jet;
}

/** Greedy Leja ordering: start at the largest modulus, then repeatedly pick
 *  the value maximizing the product of distances to those already chosen. */
inline std::vector<int> leja_order(const std::vector<Scalar>& values) {
    const int k = static_cast<int>(values.size());
    std::vector<int> order;
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    for (int step = 0; step < k; ++step) {
        int pick = -1;
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            double score;
            if (order.empty()) {
                score = std::abs(values[static_cast<std::size_t>(i)]);
            } else {
                score = 0.0;
                for (int j : order)
                    score += std::log(std::max(
                        std::abs(values[static_cast<std::size_t>(i)] -
                                 values[static_cast<std::size_t>(j)]),
                        1e-300));
            }
            if (score > best) {
                best = score;
                pick = i;
            }
        }
        order.push_back(pick);
        used[static_cast<std::size_t>(pick)] = true;
    }
    return order;
}

struct HermiteData {
    std::vector<Scalar> nodes; // confluent sequence, equal nodes adjacent
    std::vector<Scalar> dd;    // Newton coefficients
};

/** Confluent divided differences from per-node jets. Node i carries
 *  orders[i] copies; jets[i][j] is the j-th Taylor coefficient there. */
inline HermiteData confluent_newton(const std::vector<Scalar>& values,
                                    const std::vector<int>& orders,
                                    const std::vector<std::vector<Scalar>>& jets) {
    HermiteData h;
    std::vector<int> owner; // cluster index per confluent position
    for (std::size_t c = 0; c < values.size(); ++c)
        for (int r = 0; r < orders[c]; ++r) {
            h.nodes.push_back(values[c]);
            owner.push_back(static_cast<int>(c));
        }
    const int n = static_cast<int>(h.nodes.size());
    std::vector<std::vector<Scalar>> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        t[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(i + 1));
        t[static_cast<std::size_t>(i)][0] =
            jets[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])][0];
    }
    for (int j = 1; j < n; ++j)
        for (int i = j; i < n; ++i) {
            if (owner[static_cast<std::size_t>(i)] == owner[static_cast<std::size_t>(i - j)]) {
                t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    jets[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])]
                        [static_cast<std::size_t>(j)];
            } else {
                t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    (t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)] -
                     t[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]) /
                    (h.nodes[static_cast<std::size_t>(i)] - h.nodes[static_cast<std::size_t>(i - j)]);
            }
        }
    h.dd.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        h.dd[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    return h;
}

/** Newton-form evaluation at a matrix argument, with the algebra unit in
 *  place of t^0. Nested products keep the evaluation stable where the
 *  expanded monomial certificate would cancel catastrophically. */
inline CMat hermite_matrix_eval(const HermiteData& h, const CMat& z, const CMat& unit) {
    const int n = static_cast<int>(h.nodes.size());
    CMat p = h.dd[static_cast<std::size_t>(n - 1)] * unit;
    for (int i = n - 2; i >= 0; --i)
        p = p * (z - h.nodes[static_cast<std::size_t>(i)] * unit) +
            h.dd[static_cast<std::size_t>(i)] * unit;
    return p;
}

/** Monomial form of the Newton interpolant (certificate reconstruction). */
inline Poly newton_to_monomial(const HermiteData& h) {
    const int n = static_cast<int>(h.nodes.size());
    Poly p = Poly::constant(h.dd[static_cast<std::size_t>(n - 1)]);
    for (int i = n - 2; i >= 0; --i)
        p = p * Poly{-h.nodes[static_cast<std::size_t>(i)], Scalar(1.0)} +
            Poly::constant(h.dd[static_cast<std::size_t>(i)]);
    return p;
}

/** Quadratic lifting on unit-scaled roots: returns r with r*r = t modulo
 *  prod (t - root)^lift_order and r(root) = branch. The inverse of 2r modulo
 *  the separable base is computed once; r stays fixed modulo the base. */
inline Poly hensel_sqrt_scaled(const std::vector<Scalar>& roots,
                               const std::vector<Scalar>& branches, int lift_order,
                               const TolerancePolicy& policy) {
    const Poly s = Poly::from_roots(roots);
    Poly r = (roots.size() == 1) ? Poly::constant(branches[0])
                                 : poly_interpolate(roots, branches);
    if (lift_order > 1) {
        const Poly w = poly_mod_inverse(Scalar(2.0) * r, s, policy);
        Poly spow = s;
        for (int k = 1; k < lift_order; ++k) {
            auto [q, rem] = poly_divmod(r * r - Poly::t(), spow, policy);
            const Poly v = poly_mod(q, s, policy);
            const Poly u = poly_mod(-(v * w), s, policy);
            r = r + spow * u;
            spow = spow * s;
        }
    }
    Poly target = Poly::one();
    for (int k = 0; k < lift_order; ++k) target = target * s;
    const Poly residual = poly_mod(r * r - Poly::t(), target, policy);
    const double rmax = std::max(1.0, r.max_abs_coeff());
    if (residual.max_abs_coeff() >
        std::max(policy.tau_eq, 1e4 * kEps) * rmax * rmax * (r.degree() + 2))
        throw NumericalBreakdown("sqrt_poly: lifted residual check failed");
    return r;
}

} // namespace detail

/** Square-root certificate: the unique r of degree < k * lift_order with
 *  r*r = t modulo prod (t - root_k)^lift_order and r(root_k) equal to the
 *  chosen branch. Roots must be distinct and nonzero; branches default to
 *  the principal square root. Internally computed on unit-scaled roots. */
inline Poly sqrt_poly(const std::vector<Scalar>& roots, int lift_order,
                      const std::vector<Scalar>& branches = {},
                      const TolerancePolicy& policy = {}) {
    if (roots.empty() || lift_order < 1)
        throw PreconditionViolated("sqrt_poly: need roots and lift_order >= 1");
    double beta = 0.0;
    for (Scalar a : roots) beta = std::max(beta, std::abs(a));
    if (beta <= 0.0) throw ZeroRoot("sqrt_poly: root at zero");
    for (Scalar a : roots)
        if (std::abs(a) <= policy.tau_eq * beta)
            throw ZeroRoot("sqrt_poly: root at zero");
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (std::abs(roots[i] - roots[j]) <= policy.tau_eq * beta)
                throw RepeatedRoot("sqrt_poly: roots must be distinct");
    if (!branches.empty() && branches.size() != roots.size())
        throw DimensionMismatch("sqrt_poly: one branch value per root");

    const double sqrt_beta = std::sqrt(beta);
    std::vector<Scalar> rh(roots.size()), bh(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        rh[i] = roots[i] / beta;
        Scalar b = branches.empty() ? principal_branch(roots[i]) : branches[i];
        if (std::abs(b * b - roots[i]) > 1e-8 * std::abs(roots[i]))
            throw PreconditionViolated("sqrt_poly: branch value does not square to its root");
        bh[i] = b / sqrt_beta;
    }
    Poly r_hat = detail::hensel_sqrt_scaled(rh, bh, lift_order, policy);
    return Scalar(sqrt_beta) * r_hat.scaled_argument(Scalar(1.0 / beta));
}

/** Result of a constructive square root inside an algebra. */
struct SqrtWitness {
    Poly certificate;            // r(t): element = r(z) with t^0 read as the unit
    CMat element;                // w, with w*w = z to working accuracy
    double residual = 0.0;       // Frobenius norm of w*w - z
    EigenClusterReport spectrum; // clustering the construction used
};

namespace detail {

/** One live spectral node for evaluation: ambient-scale value, its chosen
 *  square root, the Jordan block order to match, and the algebraic
 *  multiplicity (the trace weight of its spectral projector). */
struct SpectralNode {
    Scalar value;
    Scalar branch;
    int order = 1;
    int multiplicity = 1;
};

/** One-shot confluent Newton evaluation of the square root on a node group,
 *  normalized to the group's own largest modulus. */
inline CMat sqrt_eval_group(const std::vector<SpectralNode>& nodes, const CMat& z,
                            const CMat& unit) {
    double beta = 0.0;
    for (const auto& nd : nodes) beta = std::max(beta, std::abs(nd.value));
    const double sqrt_beta = std::sqrt(beta);
    std::vector<Scalar> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = nodes[i].value / beta;
    const auto perm = leja_order(vals);
    std::vector<Scalar> ordered(vals.size());
    std::vector<int> orders(vals.size());
    std::vector<std::vector<Scalar>> jets(vals.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        const auto src = static_cast<std::size_t>(perm[i]);
        ordered[i] = vals[src];
        orders[i] = nodes[src].order;
        jets[i] = sqrt_jet(ordered[i], nodes[src].branch / Scalar(sqrt_beta), orders[i]);
    }
    return sqrt_beta *
           hermite_matrix_eval(confluent_newton(ordered, orders, jets), z / beta, unit);
}

/** Evaluates the square root group by group when the node moduli span a wide
 *  dynamic range. One interpolant across such a range has divided
 *  differences that amplify rounding past any sensible gate, so the spectrum
 *  is cut at its largest modulus gap: an indicator interpolant (jet 1,0,...
 *  on the small group, all zeros on the rest) evaluated at z gives a
 *  spectral projector p, the split z = z p + (z - z p) is exact by
 *  construction, and each half recurses at its own scale. Every factor stays
 *  a polynomial in z, so commutation and algebra membership are preserved.
 *  The projector is polished and checked; any doubt falls back to one-shot
 *  evaluation, and the caller's residual gate arbitrates either way. */
inline CMat sqrt_eval_split(const std::vector<SpectralNode>& nodes, const CMat& z,
                            const CMat& unit, int depth) {
    constexpr double kGapRatio = 1e2;
    if (nodes.size() > 1 && depth < 3) {
        std::vector<std::size_t> idx(nodes.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&nodes](std::size_t a, std::size_t b) {
            return std::abs(nodes[a].value) < std::abs(nodes[b].value);
        });
        std::size_t cut = 0;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            const double lo = std::abs(nodes[idx[i]].value);
            const double hi = std::abs(nodes[idx[i + 1]].value);
            const double ratio = hi / std::max(lo, 1e-300);
            // Ties go to the topmost gap, where the indicator's node
            // separation is widest after normalization.
            if (ratio >= best_ratio) {
                best_ratio = ratio;
                cut = i + 1;
            }
        }
        if (best_ratio >= kGapRatio) {
            const double beta = std::abs(nodes[idx.back()].value);
            const double small_cap = std::abs(nodes[idx[cut - 1]].value);
            int small_mult = 0;
            for (const auto& nd : nodes)
                if (std::abs(nd.value) <= small_cap) small_mult += nd.multiplicity;
            std::vector<Scalar> vals(nodes.size());
            for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = nodes[i].value / beta;
            const auto perm = leja_order(vals);
            std::vector<Scalar> ordered(vals.size());
            std::vector<int> orders(vals.size());
            std::vector<std::vector<Scalar>> jets(vals.size());
            for (std::size_t i = 0; i < perm.size(); ++i) {
                const auto src = static_cast<std::size_t>(perm[i]);
                ordered[i] = vals[src];
                orders[i] = nodes[src].order;
                jets[i].assign(static_cast<std::size_t>(orders[i]), Scalar(0.0));
                if (std::abs(nodes[src].value) <= small_cap) jets[i][0] = Scalar(1.0);
            }
            CMat p = hermite_matrix_eval(confluent_newton(ordered, orders, jets),
                                         z / beta, unit);
            // Two cubic polish rounds contract the idempotency defect
            // quadratically without moving the invariant subspaces.
            p = p * p * (3.0 * unit - 2.0 * p);
            p = p * p * (3.0 * unit - 2.0 * p);
            const double idem = (p * p - p).norm();
            const Scalar tr = p.trace();
            const double trgap = std::abs(tr - Scalar(static_cast<double>(small_mult)));
            if (idem <= 1e-8 && trgap <= 0.1) {
                std::vector<SpectralNode> small_nodes, large_nodes;
                for (const auto& nd : nodes)
                    (std::abs(nd.value) <= small_cap ? small_nodes : large_nodes)
                        .push_back(nd);
                const CMat zs = z * p;
                const CMat ws = sqrt_eval_split(small_nodes, zs, p, depth + 1);
                const CMat wl = sqrt_eval_split(large_nodes, z - zs, unit - p, depth + 1);
                return ws + wl;
            }
        }
    }
    return sqrt_eval_group(nodes, z, unit);
}

/** Shared core: z is a member of an algebra whose unit is `unit`; exactly
 *  artifact_mult ambient zero eigenvalues are bookkeeping from a corner
 *  embedding and carry no content. Tries cluster candidates in preference
 *  order until the evaluated root passes its residual gate. */
inline SqrtWitness sqrt_core(const CMat& z, const CMat& unit, int artifact_mult,
                             const BranchPicker& branch, const TolerancePolicy& policy) {
    const Eigen::Index n = z.rows();
    const CMat eye = CMat::Identity(n, n);
    const CMat invertibility_probe = z + eye - unit;
    if (!is_invertible(invertibility_probe, policy))
        throw ZeroRoot("sqrt_element: element is singular in its algebra");
    const double kappa = cond_2(invertibility_probe);
    const double accept = 10.0 * std::max(policy.tau_eq, 1e3 * kEps) *
                          std::max(1.0, z.norm()) * std::max(1.0, kappa);

    auto pick = branch ? branch : BranchPicker(principal_branch);
    std::optional<SqrtWitness> best;
    bool saw_zero_failure = false;
    std::string last_error = "no candidate clustering";

    for (const auto& cand : eigen_cluster_candidates(z, policy)) {
        // Only bookkeeping zeros are counted here: they come from an exact
        // zero block of a corner embedding, so they sit at rounding level.
        // Content zeros were already refused by the invertibility probe, and
        // a merge-radius-sized threshold would swallow genuine small
        // eigenvalues at coarse rungs.
        const double zero_thresh =
            std::max(2.0 * policy.tau_eq, 100.0 * kEps) * cand.spectral_scale;
        std::vector<EigenCluster> live;
        int zero_mult = 0;
        for (const auto& c : cand.clusters) {
            if (std::abs(c.value) <= zero_thresh)
                zero_mult += c.multiplicity;
            else
                live.push_back(c);
        }
        if (zero_mult != artifact_mult || live.empty()) {
            saw_zero_failure = saw_zero_failure || zero_mult > artifact_mult || live.empty();
            last_error = "zero eigenvalue cluster";
            continue;
        }

        try {
            int lift = 1;
            double beta = 0.0;
            for (const auto& c : live) {
                lift = std::max(lift, c.block);
                beta = std::max(beta, std::abs(c.value));
            }
            const double sqrt_beta = std::sqrt(beta);
            std::vector<Scalar> vals(live.size()), brs(live.size());
            std::vector<SpectralNode> nodes(live.size());
            for (std::size_t i = 0; i < live.size(); ++i) {
                vals[i] = live[i].value / beta;
                Scalar b = pick(live[i].value);
                if (std::abs(b * b - live[i].value) > 1e-8 * std::abs(live[i].value))
                    throw PreconditionViolated("sqrt_element: branch does not square to value");
                brs[i] = b / sqrt_beta;
                nodes[i] = SpectralNode{live[i].value, b, live[i].block,
                                        live[i].multiplicity};
            }

            Poly r_hat = hensel_sqrt_scaled(vals, brs, lift, policy);

            // Evaluation matches each node only to its own block order and
            // splits the spectrum at large modulus gaps: the annihilator of z
            // divides prod (t - a_c)^{block_c}, so every such evaluation
            // agrees with the uniform-lift certificate at z, while skipping
            // jets and divided differences that would only amplify rounding.
            CMat w = sqrt_eval_split(nodes, z, unit, 0);

            SqrtWitness wit;
            wit.certificate = Scalar(sqrt_beta) * r_hat.scaled_argument(Scalar(1.0 / beta));
            wit.element = std::move(w);
            wit.residual = (wit.element * wit.element - z).norm();
            wit.spectrum = cand;

            // Guarded Newton polish: w <- (w + w^{-1} z)/2 stays a rational
            // function of z, so commutation is preserved, and it converges to
            // the branch it starts near. A start that is not already close is
            // left alone, so a wrong-branch limit can never be polished into
            // acceptance.
            const double zn = std::max(1.0, z.norm());
            if (wit.residual > policy.tau_eq * zn && wit.residual <= 0.05 * zn) {
                CMat wcur = wit.element;
                double rcur = wit.residual;
                for (int it = 0; it < 3; ++it) {
                    try {
                        const CMat winv =
                            inverse_checked(wcur + eye - unit, policy) - (eye - unit);
                        const CMat wn = 0.5 * (wcur + winv * z);
                        const double rn = (wn * wn - z).norm();
                        if (!(rn < rcur)) break;
                        wcur = wn;
                        rcur = rn;
                    } catch (const Error&) {
                        break;
                    }
                }
                if (rcur < wit.residual) {
                    wit.element = std::move(wcur);
                    wit.residual = rcur;
                }
            }

            if (wit.residual <= accept) return wit;
            if (!best || wit.residual < best->residual) best = std::move(wit);
            last_error = "residual gate";
        } catch (const Error& e) {
            last_error = e.what();
            continue;
        }
    }
    if (best) {
        throw NumericalBreakdown("sqrt_element: best residual " +
                                 std::to_string(best->residual) + " exceeds gate");
    }
    if (saw_zero_failure)
        throw ZeroRoot("sqrt_element: element is singular in its algebra");
    throw NumericalBreakdown(std::string("sqrt_element: ") + last_error);
}

} // namespace detail

/** Square root of an ambient matrix: w = r(z) for a certificate polynomial
 *  r, so w commutes with everything commuting with z. */
inline SqrtWitness sqrt_element(const CMat& z, const TolerancePolicy& policy = {},
                                const BranchPicker& branch = {}) {
    if (z.rows() != z.cols() || z.rows() == 0)
        throw DimensionMismatch("sqrt_element: matrix must be square and nonempty");
    return detail::sqrt_core(z, CMat::Identity(z.rows(), z.rows()), 0, branch, policy);
}

/** Square root within an algebra (possibly a corner): the artifact zero
 *  eigenvalues contributed by the corner embedding are discounted, and the
 *  certificate is evaluated with the algebra's unit in place of t^0. */
inline SqrtWitness sqrt_element(const AlgebraRep& alg, const CMat& z,
                                const TolerancePolicy& policy = {},
                                const BranchPicker& branch = {}) {
    if (!alg.contains(z, policy))
        throw PreconditionViolated("sqrt_element: element not in the algebra");
    const int unit_rank =
        static_cast<int>(std::lround(alg.unit().trace().real()));
    const int artifact = static_cast<int>(alg.ambient_dim()) - unit_rank;
    return detail::sqrt_core(z, alg.unit(), artifact, branch, policy);
}

/** Result of the kernel-splitting idempotent construction. */
struct FittingWitness {
    CMat idempotent;             // p = g(a): commutes with a, splits it
    Poly certificate;            // g
    int nilpotent_index = 0;     // a restricted to (unit - p) is nilpotent of this index
    EigenClusterReport spectrum;
};

/** Idempotent p = g(a) in the algebra with: p commutes with a, a*p is
 *  invertible in the p-corner, and a*(unit - p) is nilpotent. g is the
 *  Chinese-remainder polynomial that is 0 to the kernel order at the zero
 *  cluster and 1 to block order at every nonzero cluster. Each cluster
 *  candidate is accepted only after those claims verify numerically.
 *
 *  context_scale, when positive, declares the magnitude a was built from:
 *  anything at or below tau_eq * context_scale is rounding noise, not an
 *  invertible part. Without it a matrix of pure noise looks invertible
 *  relative to itself. */
inline FittingWitness fitting_idempotent(const AlgebraRep& alg, const CMat& a,
                                         const TolerancePolicy& policy = {},
                                         double context_scale = 0.0) {
    if (!alg.contains(a, policy))
        throw PreconditionViolated("fitting_idempotent: element not in the algebra");
    const Eigen::Index n = a.rows();
    const CMat unit = alg.unit();

    if (context_scale > 0.0 && sigma_max(a) <= policy.tau_eq * context_scale) {
        FittingWitness wit;
        wit.idempotent = CMat::Zero(n, n);
        wit.certificate = Poly::zero();
        wit.nilpotent_index = 1;
        wit.spectrum.spectral_scale = sigma_max(a);
        wit.spectrum.clusters = {EigenCluster{Scalar(0.0), static_cast<int>(n), 1}};
        return wit;
    }
    std::string last_error = "no candidate clustering";

    for (const auto& cand : eigen_cluster_candidates(a, policy)) {
        const double zero_thresh =
            std::max({2.0 * policy.tau_eq * cand.spectral_scale, 2.0 * cand.radius_used,
                      policy.tau_eq * context_scale});
        std::vector<EigenCluster> live;
        int zero_mult = 0;
        for (const auto& c : cand.clusters) {
            if (std::abs(c.value) <= zero_thresh)
                zero_mult += c.multiplicity;
            else
                live.push_back(c);
        }

        try {
            FittingWitness wit;
            wit.spectrum = cand;

            int e0 = 0;
            if (zero_mult > 0) {
                auto blk = detail::cluster_block_size(a, Scalar(0.0), zero_mult,
                                                      cand.spectral_scale, policy);
                if (!blk) {
                    last_error = "zero cluster has no certified nilpotency index";
                    continue;
                }
                e0 = *blk;
            }
            wit.nilpotent_index = e0;

            if (live.empty()) {
                wit.idempotent = CMat::Zero(n, n);
                wit.certificate = Poly::zero();
            } else if (e0 == 0) {
                wit.idempotent = unit;
                wit.certificate = Poly::one();
            } else {
                double beta = 0.0;
                for (const auto& c : live) beta = std::max(beta, std::abs(c.value));

                Poly s_nz = Poly::one();
                for (const auto& c : live)
                    for (int k = 0; k < c.block; ++k)
                        s_nz = s_nz * Poly{-c.value / beta, Scalar(1.0)};
                Poly tpow = Poly::one();
                for (int k = 0; k < e0; ++k) tpow = tpow * Poly::t();
                const Poly h = poly_mod_inverse(tpow, s_nz, policy);
                const Poly g_hat = poly_mod(tpow * h, tpow * s_nz, policy);

                std::vector<Scalar> vals;
                std::vector<int> orders;
                std::vector<std::vector<Scalar>> jets;
                vals.push_back(Scalar(0.0));
                orders.push_back(e0);
                jets.emplace_back(static_cast<std::size_t>(e0), Scalar(0.0));
                for (const auto& c : live) {
                    vals.push_back(c.value / beta);
                    orders.push_back(c.block);
                    std::vector<Scalar> jet(static_cast<std::size_t>(c.block), Scalar(0.0));
                    jet[0] = Scalar(1.0);
                    jets.push_back(std::move(jet));
                }
                const auto perm = detail::leja_order(vals);
                std::vector<Scalar> ov(vals.size());
                std::vector<int> oo(vals.size());
                std::vector<std::vector<Scalar>> oj(vals.size());
                for (std::size_t i = 0; i < perm.size(); ++i) {
                    ov[i] = vals[static_cast<std::size_t>(perm[i])];
                    oo[i] = orders[static_cast<std::size_t>(perm[i])];
                    oj[i] = jets[static_cast<std::size_t>(perm[i])];
                }
                const auto hermite = detail::confluent_newton(ov, oo, oj);
                wit.idempotent = detail::hermite_matrix_eval(hermite, a / beta, unit);
                wit.certificate = g_hat.scaled_argument(Scalar(1.0 / beta));
            }

            // Claim verification; any failure tries the next clustering.
            const CMat& p = wit.idempotent;
            const double pscale = std::max(1.0, p.norm());
            const double claim_tol = 10.0 * std::max(policy.tau_eq, 1e3 * kEps);
            if ((p * p - p).norm() > claim_tol * pscale * pscale) {
                last_error = "idempotency claim failed";
                continue;
            }
            if ((p * a - a * p).norm() > claim_tol * std::max(1.0, a.norm()) * pscale) {
                last_error = "commutation claim failed";
                continue;
            }
            if (!alg.contains(p, policy)) {
                last_error = "idempotent left the algebra";
                continue;
            }
            try {
                invert_in_algebra(alg, a * p + unit - p, policy);
            } catch (const Error&) {
                last_error = "corner invertibility claim failed";
                continue;
            }
            if (e0 > 0) {
                const CMat nil = a * (unit - p);
                const double s = sigma_max(nil);
                if (s > policy.tau_eq * std::max(1.0, a.norm())) {
                    CMat acc = CMat::Identity(n, n);
                    for (int k = 0; k < e0; ++k) acc = acc * (nil / s);
                    if (acc.norm() >
                        10.0 * std::max(policy.tau_eq, 1e4 * kEps) * std::sqrt(static_cast<double>(n))) {
                        last_error = "nilpotency claim failed";
                        continue;
                    }
                }
            }
            return wit;
        } catch (const Error& e) {
            last_error = e.what();
            continue;
        }
    }
    throw NumericalBreakdown(std::string("fitting_idempotent: ") + last_error);
}

} // namespace bireflect
