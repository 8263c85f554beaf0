#include <catch2/catch_amalgamated.hpp>

#include <bireflect/matrix.hpp>
#include <bireflect/spectra.hpp>

using namespace bireflect;

TEST_CASE("kernel basis of a rank-one matrix") {
    CMat a(2, 2);
    a << Scalar(1.0), Scalar(1.0), Scalar(1.0), Scalar(1.0);
    CMat k = kernel_basis(a);
    REQUIRE(k.cols() == 1);
    CHECK((a * k).norm() < 1e-12);
    CHECK(std::abs(k.col(0).norm() - 1.0) < 1e-12);
    CHECK(rank_of(a) == 1);
}

TEST_CASE("rank uses a relative cutoff") {
    CMat a = CMat::Zero(2, 2);
    a(0, 0) = Scalar(2.0);
    a(1, 1) = Scalar(1e-20);
    CHECK(rank_of(a) == 1);
    CHECK(cond_2(a) > 1e19);
}

TEST_CASE("inverse_checked inverts and gates singularity") {
    CMat a = CMat::Identity(3, 3);
    a(0, 1) = Scalar(1.0); // I + E12
    CMat inv = inverse_checked(a);
    CMat expect = CMat::Identity(3, 3);
    expect(0, 1) = Scalar(-1.0);
    CHECK((inv - expect).norm() < 1e-13);

    CMat s(2, 2);
    s << Scalar(1.0), Scalar(2.0), Scalar(2.0), Scalar(4.0);
    CHECK_THROWS_AS(inverse_checked(s), Singular);
}

TEST_CASE("vec and unvec round trip column-major") {
    CMat a(2, 3);
    a << Scalar(1), Scalar(2), Scalar(3), Scalar(4), Scalar(5), Scalar(6);
    CVec v = vec(a);
    CHECK(v(1) == Scalar(4)); // column-major: second entry is a(1,0)
    CHECK((unvec(v, 2, 3) - a).norm() == 0.0);
}

TEST_CASE("matrix_power matches repeated products") {
    CMat a(2, 2);
    a << Scalar(1.0), Scalar(1.0), Scalar(0.0), Scalar(1.0);
    CHECK((matrix_power(a, 5) - a * a * a * a * a).norm() < 1e-13);
    CHECK((matrix_power(a, 0) - CMat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("clusters of a distinct-diagonal matrix are simple") {
    CMat a = CMat::Zero(3, 3);
    a(0, 0) = Scalar(1.0);
    a(1, 1) = Scalar(2.0);
    a(2, 2) = Scalar(3.0);
    auto rep = eigen_clusters(a);
    REQUIRE(rep.clusters.size() == 3);
    CHECK(rep.max_block == 1);
    CHECK(std::abs(rep.clusters[0].value - Scalar(1.0)) < 1e-12);
    CHECK(std::abs(rep.clusters[2].value - Scalar(3.0)) < 1e-12);
    Poly mu = minimal_polynomial(rep);
    CHECK(mu.degree() == 3);
}

TEST_CASE("a full nilpotent block is one cluster of full index") {
    CMat a = CMat::Zero(3, 3);
    a(0, 1) = Scalar(1.0);
    a(1, 2) = Scalar(1.0);
    auto rep = eigen_clusters(a);
    REQUIRE(rep.clusters.size() == 1);
    CHECK(rep.clusters[0].multiplicity == 3);
    CHECK(rep.clusters[0].block == 3);
    CHECK(std::abs(rep.clusters[0].value) < 1e-10);
}

TEST_CASE("a perturbed defective pair is recovered as one cluster") {
    CMat a(2, 2);
    a << Scalar(1.0), Scalar(1.0), Scalar(1e-12), Scalar(1.0);
    auto rep = eigen_clusters(a); // eigenvalues split by ~1e-6
    REQUIRE(rep.clusters.size() == 1);
    CHECK(rep.clusters[0].multiplicity == 2);
    CHECK(rep.clusters[0].block == 2);
    CHECK(std::abs(rep.clusters[0].value - Scalar(1.0)) < 1e-9);
}

TEST_CASE("well separated eigenvalues never merge") {
    CMat a = CMat::Zero(2, 2);
    a(0, 0) = Scalar(1.0);
    a(1, 1) = Scalar(2.0);
    auto rep = eigen_clusters(a);
    REQUIRE(rep.clusters.size() == 2);
    CHECK(rep.max_block == 1);
}

TEST_CASE("the zero matrix is a single semisimple cluster") {
    auto rep = eigen_clusters(CMat::Zero(4, 4));
    REQUIRE(rep.clusters.size() == 1);
    CHECK(rep.clusters[0].multiplicity == 4);
    CHECK(rep.clusters[0].block == 1);
}

TEST_CASE("minimal polynomial of a derogatory matrix has reduced degree") {
    CMat a = CMat::Zero(3, 3);
    a(0, 0) = Scalar(1.0);
    a(1, 1) = Scalar(1.0);
    a(2, 2) = Scalar(5.0);
    Poly mu = minimal_polynomial(a);
    CHECK(mu.degree() == 2); // (t-1)(t-5)
    CHECK(std::abs(mu.eval(Scalar(1.0))) < 1e-10);
    CHECK(std::abs(mu.eval(Scalar(5.0))) < 1e-10);
}

TEST_CASE("mixed structure: one defective and one simple cluster") {
    CMat a = CMat::Zero(3, 3);
    a(0, 0) = Scalar(2.0);
    a(0, 1) = Scalar(1.0);
    a(1, 1) = Scalar(2.0);
    a(2, 2) = Scalar(-1.0);
    auto rep = eigen_clusters(a);
    REQUIRE(rep.clusters.size() == 2);
    CHECK(rep.clusters[0].multiplicity == 1); // -1 sorts first
    CHECK(rep.clusters[0].block == 1);
    CHECK(rep.clusters[1].multiplicity == 2);
    CHECK(rep.clusters[1].block == 2);
    CHECK(rep.total_degree() == 3);
}
