#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include <bireflect/scalar.hpp>

namespace bireflect {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline double fnorm(const CMat& a) { return a.norm(); }

inline bool mat_close(const CMat& a, const CMat& b, double tau, double scale = 1.0) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return (a - b).norm() <= tau * std::max(scale, 1.0);
}

/** Column-major flattening, the convention used for all vectorized maps. */
inline CVec vec(const CMat& a) {
    return Eigen::Map<const CVec>(a.data(), a.size());
}

inline CMat unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const CMat>(v.data(), rows, cols);
}

struct SvdResult {
    Eigen::VectorXd sv;
    CMat v; // full V, only filled when vectors were requested
    const Eigen::VectorXd& singularValues() const { return sv; }
    const CMat& matrixV() const { return v; }
};

/** Jacobi for small inputs (accuracy), divide-and-conquer above that: the
 *  conjugator search factors dim(A) x dim(A) relation matrices, quadratically
 *  larger than the ambient size, where Jacobi is far too slow. The
 *  divide-and-conquer deflation can emit NaN on spectra with many repeated
 *  singular values (relation maps of structured inputs are exactly that), so
 *  a non-finite result falls back to the Jacobi path. */
inline SvdResult svd_of(const CMat& a, bool vectors = false) {
    const unsigned opts = vectors ? Eigen::ComputeFullV : 0u;
    SvdResult r;
    if (std::min(a.rows(), a.cols()) > 16) {
        Eigen::BDCSVD<CMat> svd(a, opts);
        r.sv = svd.singularValues();
        if (vectors) r.v = svd.matrixV();
        if (r.sv.allFinite() && (!vectors || r.v.allFinite())) return r;
    }
    Eigen::JacobiSVD<CMat> svd(a, opts);
    r.sv = svd.singularValues();
    if (vectors) r.v = svd.matrixV();
    return r;
}

inline double sigma_max(const CMat& a) {
    if (a.size() == 0) return 0.0;
    return svd_of(a).singularValues()(0);
}

inline int rank_of(const CMat& a, const TolerancePolicy& policy = {}) {
    if (a.size() == 0) return 0;
    const auto sv = svd_of(a).singularValues();
    const double cut = policy.tau_rank * std::max(sv(0), 1e-300);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++r;
    return r;
}

/** Orthonormal basis of the (right) null space; n x k, possibly k = 0. */
/** scale_floor guards maps that are numerically zero: a matrix built from
 *  data of that scale has no trustworthy singular value below
 *  tau_rank * scale_floor, so such directions count as kernel even when
 *  they happen to be the largest ones present. */
inline CMat kernel_basis(const CMat& a, const TolerancePolicy& policy = {},
                         double scale_floor = 0.0) {
    auto svd = svd_of(a, /*vectors=*/true);
    const auto& sv = svd.singularValues();
    const double cut =
        sv.size() ? policy.tau_rank * std::max({sv(0), scale_floor, 1e-300}) : 0.0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++r;
    return svd.matrixV().rightCols(a.cols() - r);
}

/** 2-norm condition number; huge when numerically singular. */
inline double cond_2(const CMat& a) {
    const auto sv = svd_of(a).singularValues();
    if (sv.size() == 0) return 1.0;
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

/** Inverse with a singularity gate and residual verification. */
inline CMat inverse_checked(const CMat& a, const TolerancePolicy& policy = {}) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("inverse_checked: matrix is not square");
    const Eigen::Index n = a.rows();
    if (n == 0) return a;
    const auto sv = svd_of(a).singularValues();
    if (sv(n - 1) <= policy.tau_rank * std::max(sv(0), 1e-300))
        throw Singular("inverse_checked: singular to working tolerance");
    Eigen::PartialPivLU<CMat> lu(a);
    CMat inv = lu.solve(CMat::Identity(n, n));
    const double resid = (a * inv - CMat::Identity(n, n)).norm();
    if (resid > 1e-8 * std::sqrt(static_cast<double>(n)))
        throw NumericalBreakdown("inverse_checked: inverse residual too large");
    return inv;
}

inline bool is_invertible(const CMat& a, const TolerancePolicy& policy = {}) {
    if (a.rows() != a.cols() || a.size() == 0) return false;
    const auto sv = svd_of(a).singularValues();
    return sv(sv.size() - 1) > policy.tau_rank * std::max(sv(0), 1e-300);
}

inline CMat matrix_power(const CMat& a, int k) {
    CMat acc = CMat::Identity(a.rows(), a.cols());
    CMat base = a;
    while (k > 0) {
        if (k & 1) acc = acc * base;
        base = base * base;
        k >>= 1;
    }
    return acc;
}

} // namespace bireflect
