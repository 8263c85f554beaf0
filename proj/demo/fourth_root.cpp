#include <cmath>
#include <cstdio>
#include <iostream>

#include <bireflect/bireflect.hpp>

using namespace bireflect;

static CMat rot(double th) {
    CMat r(2, 2);
    r << Scalar(std::cos(th)), Scalar(-std::sin(th)),
         Scalar(std::sin(th)), Scalar(std::cos(th));
    return r;
}

int main() {
    // Two rotation blocks make x transpose-unitary; the library finds a star
    // unitary y of order four with y x y^-1 = x^-1 and the splitting x = y*w
    // into two fourth roots of the identity.
    CMat x = CMat::Zero(4, 4);
    x.block(0, 0, 2, 2) = rot(0.9);
    x.block(2, 2, 2, 2) = rot(-1.7);

    auto alg = AlgebraRep::full_matrix_algebra(4);
    auto star = StarMap::transpose_star();
    auto cert = unitary_fourth_root_conjugator(alg, star, x, /*seed=*/3);

    const CMat eye = CMat::Identity(4, 4);
    const CMat yinv = inverse_checked(cert.y);
    std::printf("||y*y - 1||        = %.3e\n", (star(cert.y) * cert.y - eye).norm());
    std::printf("||y^4 - 1||        = %.3e\n", (matrix_power(cert.y, 4) - eye).norm());
    std::printf("||y x y^-1 - x^-1|| = %.3e\n",
                (cert.y * x * yinv - inverse_checked(x)).norm());
    std::printf("||y*w - x||        = %.3e\n", (cert.y * cert.w - x).norm());
    std::printf("||w^4 - 1||        = %.3e\n", (matrix_power(cert.w, 4) - eye).norm());

    // The same certificate as it leaves the command-line tool.
    std::cout << dump_canonical(cert_to_json(cert, star));
    return 0;
}
