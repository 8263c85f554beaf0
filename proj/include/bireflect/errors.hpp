#pragma once

#include <stdexcept>
#include <string>

namespace bireflect {

/** Error: base of every structured failure the library reports.
 *
 *  code() is a stable machine-readable tag (used by the CLI for its
 *  refusal JSON); what() carries the human-readable detail.
 */
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/** Inputs whose shapes cannot be combined (non-square, size mismatch, non-finite). */
class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error("DimensionMismatch", msg) {}
};

/** Polynomial division by the zero polynomial. */
class DivisionByZeroPoly : public Error {
public:
    explicit DivisionByZeroPoly(const std::string& msg) : Error("DivisionByZeroPoly", msg) {}
};

/** Modular inverse requested for polynomials with a non-constant gcd. */
class NotCoprime : public Error {
public:
    explicit NotCoprime(const std::string& msg) : Error("NotCoprime", msg) {}
};

/** A matrix (or algebra element, relative to the algebra's unit) has no inverse. */
class Singular : public Error {
public:
    explicit Singular(const std::string& msg) : Error("Singular", msg) {}
};

/** Square-root lift asked for a root at zero, where no branch exists. */
class ZeroRoot : public Error {
public:
    explicit ZeroRoot(const std::string& msg) : Error("ZeroRoot", msg) {}
};

/** Interpolation nodes collided; the caller must cluster before lifting. */
class RepeatedRoot : public Error {
public:
    explicit RepeatedRoot(const std::string& msg) : Error("RepeatedRoot", msg) {}
};

/** A candidate star map failed one of the four involution axioms. */
class NotAnInvolution : public Error {
public:
    NotAnInvolution(const std::string& axiom, const std::string& msg)
        : Error("NotAnInvolution", msg), axiom_(axiom) {}
    const std::string& axiom() const noexcept { return axiom_; }

private:
    std::string axiom_;
};

/** A candidate star map does not leave the algebra's span invariant. */
class AlgebraNotStable : public Error {
public:
    explicit AlgebraNotStable(const std::string& msg) : Error("AlgebraNotStable", msg) {}
};

/** No invertible intertwiner exists in the algebra (or none was found).
 *
 *  kernel_dim is the dimension of the intertwining solution space inside the
 *  algebra; probabilistic marks the exhausted-retries case, where the refusal
 *  is evidence rather than proof.
 */
class NotConjugateInAlgebra : public Error {
public:
    NotConjugateInAlgebra(int kernel_dim, int retries, bool probabilistic, const std::string& msg)
        : Error("NotConjugateInAlgebra", msg),
          kernel_dim_(kernel_dim), retries_(retries), probabilistic_(probabilistic) {}
    int kernel_dim() const noexcept { return kernel_dim_; }
    int retries() const noexcept { return retries_; }
    bool probabilistic() const noexcept { return probabilistic_; }

private:
    int kernel_dim_;
    int retries_;
    bool probabilistic_;
};

/** A documented precondition failed (non-unitary input, non-square-zero factor, ...). */
class PreconditionViolated : public Error {
public:
    explicit PreconditionViolated(const std::string& msg) : Error("PreconditionViolated", msg) {}
};

/** Floating-point evidence is too weak to certify any answer. */
class NumericalBreakdown : public Error {
public:
    explicit NumericalBreakdown(const std::string& msg) : Error("NumericalBreakdown", msg) {}
};

} // namespace bireflect
