#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <bireflect/matrix.hpp>
#include <bireflect/poly.hpp>

namespace bireflect {

/** One spectral cluster: representative value, algebraic multiplicity, and
 *  the certified nilpotency index of (A - value*I) on its invariant subspace. */
struct EigenCluster {
    Scalar value;
    int multiplicity = 0;
    int block = 1;
};

struct EigenClusterReport {
    std::vector<EigenCluster> clusters;
    int max_block = 1;
    double radius_used = 0.0;
    double spectral_scale = 0.0; // largest singular value of the input

    int total_degree() const {
        int d = 0;
        for (const auto& c : clusters) d += c.block;
        return d;
    }
};

namespace detail {

/** Nullity of ((A - lambda*I)/s)^e with an absolute cutoff on the normalized
 *  power; s is pinned to the input's spectral scale so a genuinely collapsed
 *  power reads as rank-deficient even when its entries are all tiny. */
inline std::optional<int> cluster_block_size(const CMat& a, Scalar lambda, int mult,
                                             double spectral_scale,
                                             const TolerancePolicy& policy) {
    const Eigen::Index n = a.rows();
    const double s = std::max(spectral_scale + std::abs(lambda), 1e-300);
    const CMat base = (a - lambda * CMat::Identity(n, n)) / s;
    CMat power = base;
    for (int e = 1; e <= mult; ++e) {
        const auto sv = svd_of(power).singularValues();
        int nullity = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) <= policy.tau_rank) ++nullity;
        if (nullity >= mult) return e;
        if (e < mult) power = power * base;
    }
    return std::nullopt;
}

/** Frobenius norm of prod_c ((A - value_c*I)/s_c)^block_c. */
inline double normalized_annihilation_residual(const CMat& a,
                                               const std::vector<EigenCluster>& clusters,
                                               double spectral_scale) {
    const Eigen::Index n = a.rows();
    CMat acc = CMat::Identity(n, n);
    for (const auto& c : clusters) {
        const double s = std::max(spectral_scale + std::abs(c.value), 1e-300);
        const CMat factor = (a - c.value * CMat::Identity(n, n)) / s;
        for (int e = 0; e < c.block; ++e) acc = acc * factor;
    }
    return acc.norm();
}

} // namespace detail

/** All certified cluster candidates of a square matrix, best first.
 *  Candidate groupings are generated by a ladder of clustering radii; a
 *  candidate is kept only if every cluster attains its multiplicity as a
 *  kernel of the shifted power and the product of shifted powers annihilates
 *  the matrix to working accuracy. Ranking: least total degree, then fewer
 *  clusters, then the smaller radius. Distinct radii that produce the same
 *  grouping are reported once. */
inline std::vector<EigenClusterReport> eigen_cluster_candidates(
    const CMat& a, const TolerancePolicy& policy = {}) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw DimensionMismatch("eigen_clusters: matrix must be square and nonempty");
    const Eigen::Index n = a.rows();

    EigenClusterReport proto;
    proto.spectral_scale = sigma_max(a);
    if (proto.spectral_scale <= 1e-300) {
        proto.clusters = {EigenCluster{Scalar(0.0), static_cast<int>(n), 1}};
        proto.max_block = 1;
        return {proto};
    }

    Eigen::ComplexEigenSolver<CMat> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericalBreakdown("eigen_clusters: eigenvalue iteration failed");
    std::vector<Scalar> eigs(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) eigs[static_cast<std::size_t>(i)] = es.eigenvalues()(i);

    std::vector<double> rungs{std::max(policy.tau_eq, 64.0 * kEps), 1e-7, 1e-5, 1e-3, 1e-2};
    std::erase_if(rungs, [&](double r) { return r < std::max(policy.tau_eq, 64.0 * kEps); });
    rungs.erase(std::unique(rungs.begin(), rungs.end()), rungs.end());

    const double residual_bound =
        std::max(policy.tau_eq, 1e4 * kEps) * std::sqrt(static_cast<double>(n));

    std::vector<EigenClusterReport> valid;
    std::vector<std::vector<std::vector<int>>> seen_groupings;
    for (double rung : rungs) {
        const double radius = rung * proto.spectral_scale;
        auto grouping = detail::single_linkage(eigs, radius);
        std::sort(grouping.begin(), grouping.end());
        if (std::find(seen_groupings.begin(), seen_groupings.end(), grouping) !=
            seen_groupings.end())
            continue;
        seen_groupings.push_back(grouping);

        std::vector<EigenCluster> clusters;
        bool structurally_ok = true;
        for (const auto& grp : grouping) {
            Scalar mean(0.0);
            for (int idx : grp) mean += eigs[static_cast<std::size_t>(idx)];
            mean /= static_cast<double>(grp.size());
            const int mult = static_cast<int>(grp.size());
            auto block = detail::cluster_block_size(a, mean, mult, proto.spectral_scale, policy);
            if (!block) {
                structurally_ok = false;
                break;
            }
            clusters.push_back(EigenCluster{mean, mult, *block});
        }
        if (!structurally_ok) continue;
        if (detail::normalized_annihilation_residual(a, clusters, proto.spectral_scale) >
            residual_bound)
            continue;

        std::sort(clusters.begin(), clusters.end(),
                  [](const EigenCluster& x, const EigenCluster& y) {
                      return detail::scalar_lex_less(x.value, y.value);
                  });

        EigenClusterReport cand = proto;
        cand.clusters = std::move(clusters);
        cand.radius_used = radius;
        cand.max_block = 1;
        for (const auto& c : cand.clusters) cand.max_block = std::max(cand.max_block, c.block);
        valid.push_back(std::move(cand));
    }
    if (valid.empty())
        throw NumericalBreakdown("eigen_clusters: no clustering certified at any radius");

    std::stable_sort(valid.begin(), valid.end(),
                     [](const EigenClusterReport& x, const EigenClusterReport& y) {
                         if (x.total_degree() != y.total_degree())
                             return x.total_degree() < y.total_degree();
                         if (x.clusters.size() != y.clusters.size())
                             return x.clusters.size() < y.clusters.size();
                         return x.radius_used < y.radius_used;
                     });
    return valid;
}

/** Best certified clustering; see eigen_cluster_candidates. */
inline EigenClusterReport eigen_clusters(const CMat& a, const TolerancePolicy& policy = {}) {
    return eigen_cluster_candidates(a, policy).front();
}

/** Monic annihilating polynomial of least certified degree,
 *  prod_c (t - value_c)^block_c. */
inline Poly minimal_polynomial(const EigenClusterReport& report) {
    Poly p = Poly::one();
    for (const auto& c : report.clusters)
        for (int e = 0; e < c.block; ++e) p = p * Poly{-c.value, Scalar(1.0)};
    return p;
}

inline Poly minimal_polynomial(const CMat& a, const TolerancePolicy& policy = {}) {
    return minimal_polynomial(eigen_clusters(a, policy));
}

} // namespace bireflect
