#include <cmath>
#include <cstdio>

#include <bireflect/bireflect.hpp>

using namespace bireflect;

int main() {
    // A plane rotation is a product of two reflections; recover such a pair.
    const double th = 0.7;
    CMat x(2, 2);
    x << Scalar(std::cos(th)), Scalar(-std::sin(th)),
         Scalar(std::sin(th)), Scalar(std::cos(th));
    auto m2 = AlgebraRep::full_matrix_algebra(2);
    auto br = bireflectional_decompose(m2, x);
    std::printf("rotation(%.1f) = a * b with\n", th);
    std::printf("  ||a^2 - 1||  = %.3e\n", (br.a * br.a - CMat::Identity(2, 2)).norm());
    std::printf("  ||b^2 - 1||  = %.3e\n", (br.b * br.b - CMat::Identity(2, 2)).norm());
    std::printf("  ||a*b - x||  = %.3e\n", (br.a * br.b - x).norm());
    std::printf("  verify: %s\n", verify_bireflectional(br, &m2).pass ? "pass" : "fail");

    // A nilpotent Jordan block is a sum of two square-zero matrices.
    CMat j = CMat::Zero(3, 3);
    j(0, 1) = Scalar(1.0);
    j(1, 2) = Scalar(1.0);
    auto m3 = AlgebraRep::full_matrix_algebra(3);
    auto sz = square_zero_decompose(m3, j);
    std::printf("J_3(0) = a + b with\n");
    std::printf("  ||a^2||      = %.3e\n", (sz.a * sz.a).norm());
    std::printf("  ||b^2||      = %.3e\n", (sz.b * sz.b).norm());
    std::printf("  ||a+b - J||  = %.3e\n", (sz.a + sz.b - j).norm());
    std::printf("  verify: %s\n", verify_square_zero(sz, &m3).pass ? "pass" : "fail");

    // Inside C*I + strictly-upper-triangular the same split is impossible:
    // nothing there conjugates J to -J.
    CMat e12 = CMat::Zero(3, 3), e13 = CMat::Zero(3, 3), e23 = CMat::Zero(3, 3);
    e12(0, 1) = e13(0, 2) = e23(1, 2) = Scalar(1.0);
    auto small = algebra_from_span({CMat::Identity(3, 3), e12, e13, e23});
    try {
        square_zero_decompose(small, j);
        std::printf("unexpected: split succeeded in the small algebra\n");
        return 1;
    } catch (const NotConjugateInAlgebra& e) {
        std::printf("small algebra refuses: %s (kernel dim %d)\n", e.code().c_str(),
                    e.kernel_dim());
    }
    return 0;
}
