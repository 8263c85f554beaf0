// Acceptance gate: one pass/fail line per criterion, tolerances pinned here.
// Exit status 0 only when every criterion passes. An optional argv[1] names
// the command-line binary, enabling the out-of-process spot checks.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <bireflect/bireflect.hpp>

#include "support/generators.hpp"

using namespace bireflect;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Tracker {
    int failures = 0;
    double worst_ratio = 0.0;
    std::string first_failure;

    void check(double residual, double bound, const std::string& what) {
        const double ratio = residual / std::max(bound, 1e-300);
        worst_ratio = std::max(worst_ratio, ratio);
        if (residual > bound) {
            ++failures;
            if (first_failure.empty()) {
                std::ostringstream os;
                os << what << " (residual " << residual << " > bound " << bound << ")";
                first_failure = os.str();
            }
        }
    }

    void fail(const std::string& what) {
        ++failures;
        if (first_failure.empty()) first_failure = what;
    }
};

bool g_all_pass = true;

void line(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    g_all_pass = g_all_pass && pass;
}

std::filesystem::path work_dir() {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() / "bireflect_acceptance";
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

std::string stash(const std::string& name, const json& j) {
    const auto path = (work_dir() / name).string();
    write_text_file(path, dump_canonical(j));
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Certificates emitted while running the corpora, replayed at the end.
std::vector<json> g_emitted;

void c1_square_roots() {
    const auto t0 = Clock::now();
    Tracker tr;
    Rng rng(1001);
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const CMat z = corpus::planted_jordan(rng);
        try {
            const SqrtWitness wit = sqrt_element(z);
            tr.check((wit.element * wit.element - z).norm(), 1e-8 * z.norm() * cond_2(z),
                     "trial " + std::to_string(t));
        } catch (const Error& e) {
            tr.fail("trial " + std::to_string(t) + " threw " + e.code() + ": " + e.what());
        }
    }
    const double dt = seconds_since(t0);
    if (dt >= 10.0) tr.fail("runtime " + std::to_string(dt) + "s exceeded 10s");
    std::ostringstream os;
    os << trials << " planted-spectrum square roots within 1e-8*||z||*cond(z), worst ratio "
       << tr.worst_ratio << ", " << dt << "s";
    if (tr.failures) os << "; first failure: " << tr.first_failure;
    line("C1 element square roots", tr.failures == 0, os.str());
}

void c2_bireflectional() {
    const auto t0 = Clock::now();
    Tracker tr;
    Rng rng(2002);
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        const int n = 2 + (t % 9);
        const CMat a0 = corpus::random_involution(rng, n);
        const CMat b0 = corpus::random_involution(rng, n);
        const CMat x = a0 * b0;
        try {
            const auto alg = AlgebraRep::full_matrix_algebra(n);
            const BireflectionalCert cert =
                bireflectional_decompose(alg, x, static_cast<std::uint64_t>(t + 1));
            const CMat eye = CMat::Identity(n, n);
            const double sa = std::max(1.0, cert.a.norm()), sb = std::max(1.0, cert.b.norm());
            tr.check((cert.a * cert.a - eye).norm(), 1e-8 * sa * sa,
                     "a^2 at trial " + std::to_string(t));
            tr.check((cert.b * cert.b - eye).norm(), 1e-8 * sb * sb,
                     "b^2 at trial " + std::to_string(t));
            tr.check((cert.a * cert.b - x).norm(), 1e-8 * sa * sb,
                     "a*b at trial " + std::to_string(t));
            g_emitted.push_back(cert_to_json(cert));
        } catch (const Error& e) {
            tr.fail("trial " + std::to_string(t) + " threw " + e.code() + ": " + e.what());
        }
    }
    const double dt = seconds_since(t0);
    if (dt >= 30.0) tr.fail("runtime " + std::to_string(dt) + "s exceeded 30s");
    std::ostringstream os;
    os << trials << " involution products refactored within 1e-8*scale, worst ratio "
       << tr.worst_ratio << ", " << dt << "s";
    if (tr.failures) os << "; first failure: " << tr.first_failure;
    line("C2 two-involution factorizations", tr.failures == 0, os.str());
}

void c3_square_zero() {
    const auto t0 = Clock::now();
    Tracker tr;
    Rng rng(3003);
    const int trials = 500;
    auto run_one = [&](const CMat& x, const std::string& what, std::uint64_t seed) {
        const int n = static_cast<int>(x.rows());
        const auto alg = AlgebraRep::full_matrix_algebra(n);
        const SquareZeroCert cert = square_zero_decompose(alg, x, seed);
        const double sa = std::max(1.0, cert.a.norm()), sb = std::max(1.0, cert.b.norm());
        const double jn = cert.intertwiner.norm();
        // a + b - x = -(x + j x j)/2 exactly, so the sum inherits the
        // intertwiner's amplification of x on top of the summand scales.
        const double sx = std::max({1.0, x.norm(), sa, sb, 0.5 * x.norm() * jn * jn});
        tr.check((cert.a + cert.b - x).norm(), 1e-8 * sx, "a+b at " + what);
        tr.check((cert.a * cert.a).norm(), 1e-8 * sa * sa, "a^2 at " + what);
        tr.check((cert.b * cert.b).norm(), 1e-8 * sb * sb, "b^2 at " + what);
        g_emitted.push_back(cert_to_json(cert));
    };
    for (int t = 0; t < trials; ++t) {
        const int n = 2 + (t % 9);
        const CMat a0 = corpus::random_square_zero(rng, n);
        const CMat b0 = corpus::random_square_zero(rng, n);
        try {
            run_one(a0 + b0, "trial " + std::to_string(t), static_cast<std::uint64_t>(t + 1));
        } catch (const Error& e) {
            tr.fail("trial " + std::to_string(t) + " threw " + e.code() + ": " + e.what());
        }
    }
    for (int k = 1; k <= 7; ++k) {
        CMat j = CMat::Zero(k, k);
        for (int i = 0; i + 1 < k; ++i) j(i, i + 1) = 1.0;
        try {
            run_one(j, "nilpotent block size " + std::to_string(k), 1);
        } catch (const Error& e) {
            tr.fail("nilpotent block size " + std::to_string(k) + " threw " + e.code() + ": " +
                    e.what());
        }
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << trials << " random sums plus nilpotent blocks 1..7 split within 1e-8*scale, worst ratio "
       << tr.worst_ratio << ", " << dt << "s";
    if (tr.failures) os << "; first failure: " << tr.first_failure;
    line("C3 square-zero splittings", tr.failures == 0, os.str());
}

void c4_counterexample() {
    Tracker tr;
    CMat e12 = CMat::Zero(3, 3), e23 = CMat::Zero(3, 3);
    e12(0, 1) = 1.0;
    e23(1, 2) = 1.0;
    const CMat j = e12 + e23;
    const AlgebraRep small = algebra_from_span({e12, e23}, {});

    bool refused = false;
    try {
        square_zero_decompose(small, j);
    } catch (const NotConjugateInAlgebra& e) {
        refused = true;
        if (e.kernel_dim() != 2)
            tr.fail("refusal reported kernel dimension " + std::to_string(e.kernel_dim()) +
                    ", expected 2");
        if (!e.probabilistic()) tr.fail("refusal was not marked probabilistic");
        if (e.retries() < 32) tr.fail("refusal gave up before 32 retries");
    } catch (const Error& e) {
        tr.fail(std::string("wrong refusal type ") + e.code());
    }
    if (!refused) tr.fail("decomposition inside the 4-dimensional algebra did not refuse");

    try {
        const auto full = AlgebraRep::full_matrix_algebra(3);
        const SquareZeroCert cert = square_zero_decompose(full, j);
        if (!verify_square_zero(cert).pass) tr.fail("full-algebra split failed verification");
    } catch (const Error& e) {
        tr.fail(std::string("full-algebra split threw ") + e.code() + ": " + e.what());
    }

    SquareZeroCert external;
    external.x = j;
    external.a = e12;
    external.b = e23;
    if (!verify_square_zero(external, &small).pass)
        tr.fail("the displayed external split failed verification");

    std::ostringstream os;
    os << "4-dim triangular algebra refuses (kernel dim 2, probabilistic), the full algebra "
          "splits, the displayed external split verifies";
    if (tr.failures) os << "; first failure: " << tr.first_failure;
    line("C4 small-algebra counterexample", tr.failures == 0, os.str());
}

void c5_converse() {
    const auto t0 = Clock::now();
    Tracker tr;
    Rng rng(5005);
    const int trials = 200;
    auto half_rank_square_zero = [&](int n) {
        const int k = n / 2;
        CMat nil = CMat::Zero(n, n);
        for (int i = 0; i < k; ++i)
            for (int c = k; c < n; ++c) nil(i, c) = rng.next_cnormal();
        const CMat v = corpus::conditioned_invertible(rng, n);
        CMat m = v * nil * inverse_checked(v);
        return CMat(m / m.norm());
    };
    int done = 0;
    while (done < trials) {
        const int n = 2 * (1 + done % 4);
        const CMat a = half_rank_square_zero(n);
        const CMat b = half_rank_square_zero(n);
        const CMat x = a + b;
        if (!is_invertible(x)) continue;
        const CMat y = a * b - b * a;
        tr.check((y * y - matrix_power(x, 4)).norm(), 1e-10 * std::pow(x.norm(), 4),
                 "y^2 = x^4 at trial " + std::to_string(done));
        tr.check((y * x + x * y).norm(), 1e-10 * x.norm() * y.norm(),
                 "anticommutation at trial " + std::to_string(done));
        const ConverseReport rep = verify_square_zero_converse(a, b);
        if (!rep.pass) tr.fail("converse report rejected trial " + std::to_string(done));
        ++done;
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << trials << " pairs with invertible sum satisfy y^2 = x^4 and yx = -xy within 1e-10, "
       << "worst ratio " << tr.worst_ratio << ", " << dt << "s";
    if (tr.failures) os << "; first failure: " << tr.first_failure;
    line("C5 commutator converse", tr.failures == 0, os.str());
}

struct StarConfig {
    const char* label;
    bool symplectic;
    int n; // ambient size
};

const StarConfig kStarConfigs[] = {
    {"transpose n=2", false, 2}, {"transpose n=4", false, 4}, {"transpose n=6", false, 6},
    {"symplectic n=2", true, 2}, {"symplectic n=4", true, 4},
};

StarMap config_star(const StarConfig& cfg) {
    if (cfg.symplectic) return StarMap::form_star(corpus::symplectic_form(cfg.n / 2));
    return StarMap::transpose_star();
}

CMat config_input(const StarConfig& cfg, Rng& rng, int kind) {
    if (cfg.symplectic) return corpus::symplectic_unitary_input(rng, cfg.n / 2, kind);
    return corpus::transpose_unitary_input(rng, cfg.n, kind);
}

void c6_unitary_conjugators() {
    const auto t0 = Clock::now();
    Tracker tr;
    const int per_config = 100;
    int minus_one_hits = 0;
    for (int c = 0; c < 5; ++c) {
        const StarConfig& cfg = kStarConfigs[c];
        const StarMap star = config_star(cfg);
        const auto alg = AlgebraRep::full_matrix_algebra(cfg.n);
        Rng rng(6000 + static_cast<std::uint64_t>(c));
        for (int t = 0; t < per_config; ++t) {
            const CMat x = config_input(cfg, rng, t);
            const std::string what =
                std::string(cfg.label) + " trial " + std::to_string(t);
            try {
                const UnitaryCert cert = unitary_fourth_root_conjugator(
                    alg, star, x, static_cast<std::uint64_t>(t + 1));
                const CMat eye = CMat::Identity(cfg.n, cfg.n);
                const double sy = std::max(1.0, cert.y.norm());
                const CMat yinv = inverse_checked(cert.y);
                const CMat xinv = inverse_checked(x);
                tr.check((star(cert.y) * cert.y - eye).norm(), 1e-7 * sy * sy,
                         "star-unitarity at " + what);
                tr.check((matrix_power(cert.y, 4) - eye).norm(), 1e-7 * sy * sy * sy * sy,
                         "fourth power at " + what);
                tr.check((cert.y * x * yinv - xinv).norm(),
                         1e-7 * std::max(1.0, xinv.norm()) *
                             std::max(1.0, cert.y.norm() * yinv.norm()),
                         "conjugation at " + what);
                if (cfg.symplectic && cfg.n == 2 &&
                    (cert.y * cert.y + eye).norm() <= 1e-7 * sy * sy)
                    ++minus_one_hits;
                g_emitted.push_back(cert_to_json(cert, star));
            } catch (const Error& e) {
                tr.fail(what + " threw " + e.code() + ": " + e.what());
            }
        }
    }
    if (minus_one_hits == 0)
        tr.fail("no symplectic n=2 input produced y^2 = -1");
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "5 star configurations x " << per_config
       << " inputs within 1e-7*scale, y^2 = -1 seen " << minus_one_hits
       << " times on symplectic n=2, worst ratio " << tr.worst_ratio << ", " << dt << "s";
    if (tr.failures) os << "; first failure: " << tr.first_failure;
    line("C6 unitary fourth-root conjugators", tr.failures == 0, os.str());
}

void c7_unitary_products() {
    const auto t0 = Clock::now();
    Tracker tr;
    const int per_config = 100;
    for (int c = 0; c < 5; ++c) {
        const StarConfig& cfg = kStarConfigs[c];
        const StarMap star = config_star(cfg);
        const auto alg = AlgebraRep::full_matrix_algebra(cfg.n);
        Rng rng(6000 + static_cast<std::uint64_t>(c));
        for (int t = 0; t < per_config; ++t) {
            const CMat x = config_input(cfg, rng, t);
            const std::string what =
                std::string(cfg.label) + " trial " + std::to_string(t);
            try {
                const auto [y, w] = unitary_fourth_root_product(
                    alg, star, x, static_cast<std::uint64_t>(t + 1));
                const CMat eye = CMat::Identity(cfg.n, cfg.n);
                const double sy = std::max(1.0, y.norm()), sw = std::max(1.0, w.norm());
                tr.check((y * w - x).norm(), 1e-7 * sy * sw, "y*w = x at " + what);
                tr.check((matrix_power(y, 4) - eye).norm(), 1e-7 * sy * sy * sy * sy,
                         "y^4 at " + what);
                tr.check((matrix_power(w, 4) - eye).norm(), 1e-7 * sw * sw * sw * sw,
                         "w^4 at " + what);
            } catch (const Error& e) {
                tr.fail(what + " threw " + e.code() + ": " + e.what());
            }
        }
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "same corpus factored as products of two fourth roots of unity within 1e-7*scale, "
       << "worst ratio " << tr.worst_ratio << ", " << dt << "s";
    if (tr.failures) os << "; first failure: " << tr.first_failure;
    line("C7 unitary product form", tr.failures == 0, os.str());
}

void c8_axiom_gate() {
    Tracker tr;
    const auto alg = AlgebraRep::full_matrix_algebra(2);
    const StarMap conj_transpose =
        StarMap::custom_star([](const CMat& m) { return CMat(m.adjoint()); });
    bool rejected = false;
    try {
        make_star(alg, conj_transpose);
    } catch (const NotAnInvolution& e) {
        rejected = true;
        if (e.axiom() != "linearity")
            tr.fail("rejection named axiom \"" + e.axiom() + "\", expected \"linearity\"");
    } catch (const Error& e) {
        tr.fail(std::string("wrong rejection type ") + e.code());
    }
    if (!rejected) tr.fail("conjugate-transpose was accepted as a star");
    std::ostringstream os;
    os << "conjugate-transpose rejected as non-linear over the complex scalars";
    if (tr.failures) os << "; first failure: " << tr.first_failure;
    line("C8 star axiom gate", tr.failures == 0, os.str());
}

int run_binary(const std::string& cmd) {
    const int raw = std::system(cmd.c_str());
    if (raw == -1) return -1;
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

void c9_cli_round_trip(const std::string& binary) {
    const auto t0 = Clock::now();
    Tracker tr;

    int replayed = 0;
    for (const json& cert : g_emitted) {
        const std::string path = stash("emitted_" + std::to_string(replayed) + ".json", cert);
        JobSpec job;
        job.command = "verify";
        job.cert = path;
        std::ostringstream sink;
        try {
            if (run_job(job, sink) != 0) {
                tr.fail("emitted certificate " + std::to_string(replayed) +
                        " failed verify: " + sink.str());
            }
        } catch (const std::exception& e) {
            tr.fail("verify of certificate " + std::to_string(replayed) + " threw: " + e.what());
        }
        ++replayed;
    }

    // szero needs x conjugate to -x (traceless works); birefl needs x
    // conjugate to x^-1, so it gets a spectrum symmetric under inversion.
    CMat x0(2, 2);
    x0 << 0.0, 2.0, 3.0, 0.0;
    CMat x1(2, 2);
    x1 << 2.0, 0.0, 0.0, 0.5;
    const std::string xpath = stash("det_input.json", matrix_to_json(x0));
    const std::string xpath_inv = stash("det_input_inv.json", matrix_to_json(x1));
    for (const char* command : {"szero", "birefl"}) {
        JobSpec job;
        job.command = command;
        job.input = std::string(command) == "birefl" ? xpath_inv : xpath;
        job.seed = 11;
        std::ostringstream s1, s2;
        try {
            const int r1 = run_job(job, s1);
            const int r2 = run_job(job, s2);
            if (r1 != 0 || r2 != 0)
                tr.fail(std::string(command) + " determinism run returned nonzero");
            else if (s1.str() != s2.str())
                tr.fail(std::string(command) + " produced different bytes for the same seed");
        } catch (const std::exception& e) {
            tr.fail(std::string(command) + " determinism run threw: " + e.what());
        }
    }

    bool binary_checked = false;
    if (!binary.empty()) {
        binary_checked = true;
        const std::string o1 = (work_dir() / "bin_run1.json").string();
        const std::string o2 = (work_dir() / "bin_run2.json").string();
        if (run_binary(binary + " szero --input " + xpath + " --seed 11 --out " + o1) != 0 ||
            run_binary(binary + " szero --input " + xpath + " --seed 11 --out " + o2) != 0)
            tr.fail("binary szero run failed");
        else if (slurp(o1) != slurp(o2))
            tr.fail("binary runs with the same seed differ");
        else if (run_binary(binary + " verify --cert " + o1) != 0)
            tr.fail("binary verify rejected the binary's own certificate");

        CMat e12 = CMat::Zero(3, 3), e23 = CMat::Zero(3, 3);
        e12(0, 1) = 1.0;
        e23(1, 2) = 1.0;
        json alg_doc;
        alg_doc["ambient_dim"] = 3;
        alg_doc["basis"] = json::array({matrix_to_json(e12), matrix_to_json(e23)});
        const std::string apath = stash("tri3.json", alg_doc);
        const std::string jpath = stash("j3.json", matrix_to_json(CMat(e12 + e23)));
        if (run_binary(binary + " szero --input " + jpath + " --algebra " + apath +
                       " --out " + (work_dir() / "refusal.json").string()) != 2)
            tr.fail("binary did not exit 2 on the structured refusal");
    }

    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << replayed << " emitted certificates re-verified, identical seeds byte-identical"
       << (binary_checked ? ", binary spot checks included" : ", binary not provided") << ", "
       << dt << "s";
    if (tr.failures) os << "; first failure: " << tr.first_failure;
    line("C9 command-line round trip", tr.failures == 0, os.str());
}

} // namespace

int main(int argc, char** argv) {
    const std::string binary = argc > 1 ? argv[1] : "";
    c1_square_roots();
    c2_bireflectional();
    c3_square_zero();
    c4_counterexample();
    c5_converse();
    c6_unitary_conjugators();
    c7_unitary_products();
    c8_axiom_gate();
    c9_cli_round_trip(binary);
    std::printf("%s\n", g_all_pass ? "acceptance: all criteria passed"
                                   : "acceptance: FAILURES PRESENT");
    return g_all_pass ? 0 : 1;
}
