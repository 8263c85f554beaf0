#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "json_io.hpp"

namespace bireflect {

/** One parsed command invocation. tol < 0 means "use the defaults". */
struct JobSpec {
    std::string command;          // sqrt | birefl | szero | unitary4 | verify
    std::string input;            // matrix file (decomposition commands)
    std::string cert;             // certificate file (verify)
    std::string algebra;          // optional subalgebra file
    std::string star = "transpose"; // transpose | form:<path>
    std::string out;              // output file; empty writes to the stream
    double tol = -1.0;
    std::uint64_t seed = 1;
};

namespace detail {

inline TolerancePolicy policy_from_job(const JobSpec& job) {
    TolerancePolicy policy;
    if (job.tol > 0.0) {
        policy.tau_eq = job.tol;
        policy.tau_rank = job.tol;
    }
    if (const char* env = std::getenv("BIREFL_MAX_RETRIES")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || v == 0)
            throw ParseError("BIREFL_MAX_RETRIES must be a positive integer");
        policy.max_retries = static_cast<int>(v);
    }
    return policy;
}

inline StarMap star_from_spec(const std::string& spec, const TolerancePolicy& policy) {
    if (spec == "transpose") return StarMap::transpose_star();
    const std::string prefix = "form:";
    if (spec.rfind(prefix, 0) == 0) {
        const json j = load_json_file(spec.substr(prefix.size()));
        if (j.is_object() && j.contains("star")) return star_from_json(j, policy);
        return StarMap::form_star(matrix_from_json(j), policy);
    }
    throw ParseError("--star must be \"transpose\" or \"form:<path to G>\"");
}

/** Plain monomial Horner in the algebra; the loose bound below accounts for
 *  its conditioning so a certificate is never rejected for the evaluation
 *  scheme rather than its content. */
inline CMat poly_matrix_eval(const Poly& p, const CMat& z, const CMat& unit) {
    if (p.degree() < 0) return CMat::Zero(z.rows(), z.cols());
    CMat acc = p.coeff(p.degree()) * unit;
    for (int i = p.degree() - 1; i >= 0; --i) acc = acc * z + p.coeff(i) * unit;
    return acc;
}

inline VerificationReport verify_sqrt_cert(const json& j, const AlgebraRep* alg,
                                           const TolerancePolicy& policy) {
    const CMat input = required_matrix(j, "input");
    const CMat element = required_matrix(j, "element");
    check_same_dim(input, element, "element");
    const Eigen::Index n = input.rows();
    const CMat unit = alg ? alg->unit() : CMat(CMat::Identity(n, n));
    const CMat probe = input + CMat::Identity(n, n) - unit;

    VerificationReport rep;
    const double tol = 100.0 * policy.tau_eq;
    const double scale = std::max(1.0, input.norm()) * std::max(1.0, cond_2(probe));
    rep.add("square reproduces the input", (element * element - input).norm(), tol * scale);
    if (j.contains("certificate")) {
        const Poly r = poly_from_json(j["certificate"]);
        const double zpow = std::max(1.0, input.norm());
        double amplitude = 0.0, zk = 1.0;
        for (int i = 0; i <= r.degree(); ++i, zk *= zpow) amplitude += std::abs(r.coeff(i)) * zk;
        rep.add("certificate evaluates to the element",
                (poly_matrix_eval(r, input, unit) - element).norm(),
                tol * std::max(1.0, amplitude));
    }
    if (alg) {
        rep.add("input in algebra", alg->membership_defect(input),
                tol * std::max(1.0, input.norm()));
        rep.add("element in algebra", alg->membership_defect(element),
                tol * std::max(1.0, element.norm()));
    }
    return rep;
}

inline json refusal_body(const Error& e) {
    json body;
    body["error"] = e.code();
    body["detail"] = e.what();
    if (const auto* nc = dynamic_cast<const NotConjugateInAlgebra*>(&e)) {
        body["kernel_dim"] = nc->kernel_dim();
        body["retries"] = nc->retries();
        body["probabilistic"] = nc->probabilistic();
    } else if (const auto* ni = dynamic_cast<const NotAnInvolution*>(&e)) {
        body["axiom"] = ni->axiom();
    }
    return body;
}

} // namespace detail

/** Executes one job and writes its JSON document to `out` (or job.out when
 *  set). Returns 0 on success, 2 on a structured mathematical refusal or a
 *  failed verification, and lets file and schema problems propagate as
 *  ParseError for the caller to map to exit 1. */
inline int run_job(const JobSpec& job, std::ostream& out) {
    const TolerancePolicy policy = detail::policy_from_job(job);
    json body;
    int status = 0;

    std::optional<AlgebraRep> user_alg;
    if (!job.algebra.empty()) user_alg = algebra_from_json(load_json_file(job.algebra), policy);

    try {
        if (job.command == "verify") {
            const json cj = load_json_file(job.cert);
            if (!cj.is_object() || !cj.contains("kind") || !cj["kind"].is_string())
                throw ParseError("certificates need a string \"kind\" field");
            const std::string kind = cj["kind"].get<std::string>();
            if (user_alg == std::nullopt && cj.contains("algebra"))
                user_alg = algebra_from_json(cj["algebra"], policy);
            const AlgebraRep* alg_ptr = user_alg ? &*user_alg : nullptr;

            VerificationReport rep;
            if (kind == "bireflectional")
                rep = verify_bireflectional(bireflectional_cert_from_json(cj), alg_ptr, policy);
            else if (kind == "squarezero")
                rep = verify_square_zero(squarezero_cert_from_json(cj), alg_ptr, policy);
            else if (kind == "unitary4") {
                if (!cj.contains("star"))
                    throw ParseError("unitary4 certificates need a \"star\" field");
                const StarMap star = star_from_json(cj["star"], policy);
                rep = verify_unitary_fourth_root(unitary_cert_from_json(cj), star, alg_ptr, policy);
            } else if (kind == "sqrt")
                rep = detail::verify_sqrt_cert(cj, alg_ptr, policy);
            else
                throw ParseError("unknown certificate kind: " + kind);

            body["kind"] = kind;
            body.update(report_to_json(rep));
            if (!rep.pass) {
                json failed = json::array();
                for (const auto& c : rep.checks)
                    if (!c.pass) failed.push_back(c.name);
                body["error"] = "VerificationFailed";
                body["failed"] = std::move(failed);
                status = 2;
            }
        } else {
            const CMat x = matrix_from_json(load_json_file(job.input));
            const AlgebraRep alg =
                user_alg ? *user_alg : AlgebraRep::full_matrix_algebra(x.rows());
            const AlgebraRep* alg_ptr = user_alg ? &*user_alg : nullptr;

            if (job.command == "sqrt") {
                const SqrtWitness wit =
                    user_alg ? sqrt_element(alg, x, policy) : sqrt_element(x, policy);
                body["kind"] = "sqrt";
                body["input"] = matrix_to_json(x);
                body["element"] = matrix_to_json(wit.element);
                body["certificate"] = poly_to_json(wit.certificate);
                body["residual"] = wit.residual;
            } else if (job.command == "birefl") {
                const BireflectionalCert cert =
                    bireflectional_decompose(alg, x, job.seed, policy);
                const VerificationReport rep = verify_bireflectional(cert, alg_ptr, policy);
                if (!rep.pass)
                    throw NumericalBreakdown("emitted certificate failed re-verification");
                body = cert_to_json(cert);
                body["residuals"] = residuals_to_json(rep);
            } else if (job.command == "szero") {
                const SquareZeroCert cert = square_zero_decompose(alg, x, job.seed, policy);
                const VerificationReport rep = verify_square_zero(cert, alg_ptr, policy);
                if (!rep.pass)
                    throw NumericalBreakdown("emitted certificate failed re-verification");
                body = cert_to_json(cert);
                body["residuals"] = residuals_to_json(rep);
            } else if (job.command == "unitary4") {
                const StarMap star = detail::star_from_spec(job.star, policy);
                const UnitaryCert cert =
                    unitary_fourth_root_conjugator(alg, star, x, job.seed, policy);
                const VerificationReport rep =
                    verify_unitary_fourth_root(cert, star, alg_ptr, policy);
                if (!rep.pass)
                    throw NumericalBreakdown("emitted certificate failed re-verification");
                body = cert_to_json(cert, star);
                body["residuals"] = residuals_to_json(rep);
            } else {
                throw ParseError("unknown command: " + job.command);
            }
            if (user_alg) body["algebra"] = algebra_to_json(*user_alg);
        }
    } catch (const NotConjugateInAlgebra& e) {
        body = detail::refusal_body(e);
        status = 2;
    } catch (const NotAnInvolution& e) {
        body = detail::refusal_body(e);
        status = 2;
    } catch (const Error& e) {
        body = detail::refusal_body(e);
        status = 2;
    }

    const std::string payload = dump_canonical(body);
    if (!job.out.empty())
        write_text_file(job.out, payload);
    else
        out << payload;
    return status;
}

/** argv-style front end. Returns 0 success, 1 usage/file/schema trouble,
 *  2 structured refusal. */
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constructive decompositions in matrix algebras"};
    app.require_subcommand(1);
    JobSpec job;

    auto add_common = [&](CLI::App* sub, bool needs_input) {
        if (needs_input)
            sub->add_option("--input", job.input, "matrix JSON file")->required();
        sub->add_option("--algebra", job.algebra, "subalgebra JSON file (generators suffice)");
        sub->add_option("--tol", job.tol, "equality tolerance; also sets the rank tolerance");
        sub->add_option("--seed", job.seed, "seed for the randomized conjugator search");
        sub->add_option("--out", job.out, "write the JSON document here instead of stdout");
    };

    add_common(app.add_subcommand("sqrt", "square root of an invertible element"), true);
    add_common(app.add_subcommand("birefl", "factor x into two involutions"), true);
    add_common(app.add_subcommand("szero", "split x into two square-zero summands"), true);
    CLI::App* u4 = app.add_subcommand("unitary4", "star-unitary fourth root conjugating x to its inverse");
    add_common(u4, true);
    u4->add_option("--star", job.star, "transpose (default) or form:<path to G>");
    CLI::App* ver = app.add_subcommand("verify", "replay a certificate's identities");
    ver->add_option("--cert", job.cert, "certificate JSON file")->required();
    add_common(ver, false);

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("bireflect");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 1;
    }
    job.command = app.get_subcommands().front()->get_name();

    try {
        return run_job(job, out);
    } catch (const ParseError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 1;
    }
}

} // namespace bireflect
