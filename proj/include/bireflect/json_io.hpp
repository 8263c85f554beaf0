#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "algebra.hpp"
#include "decomp.hpp"
#include "matrix.hpp"
#include "poly.hpp"
#include "staru.hpp"

namespace bireflect {

using json = nlohmann::ordered_json;

/** Schema or file trouble. Deliberately not a bireflect::Error: malformed
 *  input is an I/O failure, not a mathematical refusal, and the CLI maps the
 *  two to different exit codes. */
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

inline json complex_to_json(Scalar v) { return json::array({v.real(), v.imag()}); }

/** Accepts a plain number (real entry) or an [re, im] pair. */
inline Scalar complex_from_json(const json& j) {
    if (j.is_number()) return Scalar(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Scalar(j[0].get<double>(), j[1].get<double>());
    throw ParseError("expected a number or an [re, im] pair, got: " + j.dump());
}

/** { "n": rows, "entries": [...] } with entries row-major. */
inline json matrix_to_json(const CMat& m) {
    if (m.rows() != m.cols())
        throw ParseError("only square matrices have a serialized form");
    json j;
    j["n"] = static_cast<int>(m.rows());
    json entries = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) entries.push_back(complex_to_json(m(i, k)));
    j["entries"] = std::move(entries);
    return j;
}

inline CMat matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("entries"))
        throw ParseError("matrix objects need \"n\" and \"entries\" fields");
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1)
        throw ParseError("matrix field \"n\" must be a positive integer");
    const Eigen::Index n = j["n"].get<Eigen::Index>();
    const json& entries = j["entries"];
    if (!entries.is_array() || entries.size() != static_cast<std::size_t>(n * n))
        throw ParseError("matrix \"entries\" must hold exactly n*n values in row-major order");
    CMat m(n, n);
    std::size_t pos = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) m(i, k) = complex_from_json(entries[pos++]);
    return m;
}

/** { "coeffs": [...] } lowest degree first; the zero polynomial is []. */
inline json poly_to_json(const Poly& p) {
    json coeffs = json::array();
    for (int i = 0; i <= p.degree(); ++i) coeffs.push_back(complex_to_json(p.coeff(i)));
    return json{{"coeffs", std::move(coeffs)}};
}

inline Poly poly_from_json(const json& j) {
    if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array())
        throw ParseError("polynomial objects need a \"coeffs\" array");
    std::vector<Scalar> cs;
    cs.reserve(j["coeffs"].size());
    for (const auto& c : j["coeffs"]) cs.push_back(complex_from_json(c));
    return Poly(std::move(cs));
}

/** { "ambient_dim": n, "basis": [matrix, ...] }. */
inline json algebra_to_json(const AlgebraRep& a) {
    json j;
    j["ambient_dim"] = static_cast<int>(a.ambient_dim());
    json basis = json::array();
    for (const CMat& b : a.basis()) basis.push_back(matrix_to_json(b));
    j["basis"] = std::move(basis);
    return j;
}

/** Rebuilds the algebra as the unital span closure of the listed matrices,
 *  so a file may list generators rather than a closed basis. */
inline AlgebraRep algebra_from_json(const json& j, const TolerancePolicy& policy = {}) {
    if (!j.is_object() || !j.contains("ambient_dim") || !j.contains("basis"))
        throw ParseError("algebra objects need \"ambient_dim\" and \"basis\" fields");
    if (!j["ambient_dim"].is_number_integer() || j["ambient_dim"].get<long long>() < 1)
        throw ParseError("algebra field \"ambient_dim\" must be a positive integer");
    const Eigen::Index n = j["ambient_dim"].get<Eigen::Index>();
    if (!j["basis"].is_array() || j["basis"].empty())
        throw ParseError("algebra field \"basis\" must be a non-empty array");
    std::vector<CMat> gens;
    gens.reserve(j["basis"].size());
    for (const auto& bj : j["basis"]) {
        CMat b = matrix_from_json(bj);
        if (b.rows() != n) throw ParseError("algebra basis matrix does not match ambient_dim");
        gens.push_back(std::move(b));
    }
    return algebra_from_span(gens, policy);
}

/** { "star": "transpose" } or { "star": "form", "G": matrix }. */
inline json star_to_json(const StarMap& s) {
    switch (s.kind()) {
        case StarMap::Kind::transpose: return json{{"star", "transpose"}};
        case StarMap::Kind::form: return json{{"star", "form"}, {"G", matrix_to_json(s.form())}};
        case StarMap::Kind::custom: break;
    }
    throw ParseError("custom stars have no serialized form");
}

inline StarMap star_from_json(const json& j, const TolerancePolicy& policy = {}) {
    if (!j.is_object() || !j.contains("star") || !j["star"].is_string())
        throw ParseError("star objects need a \"star\" field of \"transpose\" or \"form\"");
    const std::string kind = j["star"].get<std::string>();
    if (kind == "transpose") return StarMap::transpose_star();
    if (kind == "form") {
        if (!j.contains("G")) throw ParseError("form stars need a \"G\" matrix");
        return StarMap::form_star(matrix_from_json(j["G"]), policy);
    }
    throw ParseError("unknown star kind: " + kind);
}

inline json report_to_json(const VerificationReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back(json{{"name", c.name},
                              {"residual", c.residual},
                              {"bound", c.bound},
                              {"pass", c.pass}});
    return json{{"pass", rep.pass}, {"checks", std::move(checks)}};
}

/** Residual map keyed by check name; what a certificate carries alongside
 *  its matrices so readers see the numbers it was accepted with. */
inline json residuals_to_json(const VerificationReport& rep) {
    json r = json::object();
    for (const auto& c : rep.checks) r[c.name] = c.residual;
    return r;
}

inline json cert_to_json(const BireflectionalCert& c) {
    json j;
    j["kind"] = "bireflectional";
    j["x"] = matrix_to_json(c.x);
    j["a"] = matrix_to_json(c.a);
    j["b"] = matrix_to_json(c.b);
    if (c.intertwiner.size() > 0) j["intertwiner"] = matrix_to_json(c.intertwiner);
    return j;
}

inline json cert_to_json(const SquareZeroCert& c) {
    json j;
    j["kind"] = "squarezero";
    j["x"] = matrix_to_json(c.x);
    j["a"] = matrix_to_json(c.a);
    j["b"] = matrix_to_json(c.b);
    if (c.intertwiner.size() > 0) j["intertwiner"] = matrix_to_json(c.intertwiner);
    return j;
}

inline json cert_to_json(const UnitaryCert& c, const StarMap& star) {
    json j;
    j["kind"] = "unitary4";
    j["star"] = star_to_json(star);
    j["x"] = matrix_to_json(c.x);
    j["y"] = matrix_to_json(c.y);
    if (c.w.size() > 0) j["w"] = matrix_to_json(c.w);
    return j;
}

namespace detail {
inline CMat required_matrix(const json& j, const char* field) {
    if (!j.contains(field))
        throw ParseError(std::string("certificate is missing field \"") + field + "\"");
    return matrix_from_json(j[field]);
}
inline CMat optional_matrix(const json& j, const char* field) {
    return j.contains(field) ? matrix_from_json(j[field]) : CMat();
}
inline void check_same_dim(const CMat& ref, const CMat& m, const char* field) {
    if (m.size() > 0 && m.rows() != ref.rows())
        throw ParseError(std::string("certificate field \"") + field +
                         "\" does not match the dimension of x");
}
} // namespace detail

inline BireflectionalCert bireflectional_cert_from_json(const json& j) {
    BireflectionalCert c;
    c.x = detail::required_matrix(j, "x");
    c.a = detail::required_matrix(j, "a");
    c.b = detail::required_matrix(j, "b");
    c.intertwiner = detail::optional_matrix(j, "intertwiner");
    detail::check_same_dim(c.x, c.a, "a");
    detail::check_same_dim(c.x, c.b, "b");
    detail::check_same_dim(c.x, c.intertwiner, "intertwiner");
    return c;
}

inline SquareZeroCert squarezero_cert_from_json(const json& j) {
    SquareZeroCert c;
    c.x = detail::required_matrix(j, "x");
    c.a = detail::required_matrix(j, "a");
    c.b = detail::required_matrix(j, "b");
    c.intertwiner = detail::optional_matrix(j, "intertwiner");
    detail::check_same_dim(c.x, c.a, "a");
    detail::check_same_dim(c.x, c.b, "b");
    detail::check_same_dim(c.x, c.intertwiner, "intertwiner");
    return c;
}

inline UnitaryCert unitary_cert_from_json(const json& j) {
    UnitaryCert c;
    c.x = detail::required_matrix(j, "x");
    c.y = detail::required_matrix(j, "y");
    c.w = detail::optional_matrix(j, "w");
    detail::check_same_dim(c.x, c.y, "y");
    detail::check_same_dim(c.x, c.w, "w");
    return c;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("failed to parse " + path + ": " + e.what());
    }
}

/** The one dump format every emitter uses, so identical documents are
 *  byte-identical. */
inline std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << text;
    if (!out) throw ParseError("failed while writing: " + path);
}

} // namespace bireflect
