// phaselearn CLI: learn one instance, sweep sample grids, verify the dense
// numerics, reconstruct circuits from sampling access, or run a quick
// selftest.

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "phaselearn/circuits.hpp"
#include "phaselearn/harness.hpp"
#include "phaselearn/learners.hpp"
#include "phaselearn/oracle.hpp"

using namespace phaselearn;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::uint64_t env_seed_default() {
    if (const char* s = std::getenv("PHASELEARN_SEED")) return std::strtoull(s, nullptr, 10);
    return 1;
}

struct LearnOptions {
    std::string learner = "binary";
    int n = 8, d = 2, q = 4, s = 4, gd = 2, m = 0, m_support = 0, support_dim = -1;
    double eps = 0.0;
    std::string f2_file, zq_file, circuit_file, noise = "none";
    std::uint64_t seed = 0;
    std::string mode = "auto";
};

GenSearchMode parse_mode(const std::string& s) {
    if (s == "auto") return GenSearchMode::Auto;
    if (s == "brute") return GenSearchMode::BruteForce;
    if (s == "exclusion") return GenSearchMode::Exclusion;
    throw std::runtime_error("unknown search mode '" + s + "'");
}

int default_m(const std::string& learner, int n, int d, int q, int s) {
    if (learner == "binary") return 4 * (1 << d) * int(count_monomials_up_to(n - 1, d - 1));
    if (learner == "sparse")
        return 2 * (1 << d) * s *
               int(std::ceil(std::log2(double(count_monomials_up_to(n - 1, d - 1)))));
    if (learner == "generalized")
        return int(std::ceil(0.15 * q * q * q * (1 << d) * n * std::log2(double(q))));
    if (learner == "stabilizer") return 280;
    return int(std::ceil(12.0 * n * std::log2(std::max(n, 2))));
}

int run_learn(const LearnOptions& opt) {
    std::uint64_t seed = opt.seed ? opt.seed : env_seed_default();
    NoiseModel noise = parse_noise_clause(opt.noise);
    int m = opt.m;

    auto finish = [](const LearnReport& rep, bool matched) {
        std::cout << rep.to_text() << "\n";
        std::cout << (rep.success ? (matched ? "verdict: MATCH\n" : "verdict: MISMATCH\n")
                                  : "verdict: FAILED\n");
        return rep.success && matched ? 0 : 1;
    };

    if (!opt.circuit_file.empty()) {
        Circuit hidden = parse_circuit(read_file(opt.circuit_file));
        auto o = oracle_from_circuit(hidden, seed);
        if (!m)
            m = default_m(o.is_binary() ? "binary" : "generalized", hidden.n, hidden.level,
                          hidden.q(), opt.s);
        auto rep = reconstruct(o, hidden.n, hidden.level, m);
        std::cout << rep.learn.to_text() << "\n";
        if (rep.success) std::cout << to_text(rep.circuit);
        bool ok = rep.success && circuits_equivalent(rep.circuit, hidden);
        std::cout << (ok ? "verdict: EQUIVALENT\n" : "verdict: FAILED\n");
        return ok ? 0 : 1;
    }
    if (!opt.zq_file.empty()) {
        ZqPoly f = zqpoly_from_text(read_file(opt.zq_file));
        int d = 0;
        while ((1 << d) < f.q()) ++d;
        auto o = PhaseOracle::generalized(f, seed);
        if (!m) m = default_m("generalized", f.vars(), d, f.q(), opt.s);
        auto rep = learn_generalized(o, f.vars(), d, f.q(), m, parse_mode(opt.mode));
        if (rep.success) std::cout << to_text(rep.zq->without_constant());
        return finish(rep, rep.success && equivalent(*rep.zq, f));
    }
    if (!opt.f2_file.empty()) {
        F2Poly f = f2poly_from_text(read_file(opt.f2_file));
        auto o = PhaseOracle::binary(f, noise, seed);
        LearnReport rep;
        if (noise.kind == NoiseKind::Global && noise.eps > 0.0) {
            if (f.degree() > 2) throw std::runtime_error("noisy learning needs degree <= 2");
            if (!m) m = default_m("noisy-quadratic", f.vars(), 2, 4, opt.s);
            rep = learn_noisy_quadratic(o, f.vars(), noise.eps, m);
            if (rep.success) std::cout << to_text(*rep.f2);
            return finish(rep, rep.success && *rep.f2 == f);
        }
        if (noise.kind == NoiseKind::Local) {
            if (f.degree() > 2) throw std::runtime_error("noisy learning needs degree <= 2");
            if (!m) m = default_m("local-noisy-quadratic", f.vars(), 2, 4, opt.s);
            rep = learn_local_noise_quadratic(o, f.vars(), noise.eps, opt.gd, m);
            if (rep.success) std::cout << to_text(*rep.f2);
            return finish(rep, rep.success && *rep.f2 == f);
        }
        int d = std::max(1, f.degree());
        bool sparse = opt.learner == "sparse";
        int cap = std::max(opt.s, f.sparsity());
        if (!m) m = default_m(sparse ? "sparse" : "binary", f.vars(), d, 4, cap);
        rep = sparse ? learn_sparse(o, f.vars(), d, cap, m) : learn_binary(o, f.vars(), d, m);
        if (rep.success) std::cout << to_text(*rep.f2);
        return finish(rep, rep.success && equal_mod_constant(*rep.f2, f));
    }

    // Random hidden instance through the sweep machinery (one trial).
    ExperimentSpec spec;
    spec.learner = opt.learner;
    spec.n = opt.n;
    spec.d = opt.d;
    spec.q = opt.q;
    spec.s = opt.s;
    spec.gd = opt.gd;
    spec.eps = opt.eps;
    spec.support_dim = opt.support_dim;
    spec.m_support = opt.m_support;
    spec.seed = seed;
    spec.trials = 1;
    spec.m_grid = {m ? m : default_m(opt.learner, opt.n, opt.d, opt.q, opt.s)};
    auto rows = run_trials(spec);
    std::cout << to_csv(spec, rows);
    return rows[0].successes == 1 ? 0 : 1;
}

int run_verify() {
    auto checks = verify_numerics();
    bool all = true;
    for (const auto& c : checks) {
        std::printf("%-45s %s  achieved %.3e (tolerance %.1e)\n", c.name.c_str(),
                    c.pass ? "PASS" : "FAIL", c.achieved, c.tolerance);
        all &= c.pass;
    }
    return all ? 0 : 1;
}

int run_selftest(std::uint64_t seed) {
    struct Quick {
        std::string name;
        ExperimentSpec spec;
    };
    std::vector<Quick> quick;
    auto mk = [&](const char* name, const char* learner, int n, int d, int m, double eps, int dim) {
        ExperimentSpec s;
        s.learner = learner;
        s.n = n;
        s.d = d;
        s.q = 4;
        s.s = 3;
        s.gd = 2;
        s.eps = eps;
        s.support_dim = dim;
        s.m_grid = {m};
        s.trials = 5;
        s.seed = seed;
        quick.push_back({name, s});
    };
    mk("binary learner (n=6, d=2)", "binary", 6, 2, 64, 0.0, -1);
    mk("sparse learner (n=8, d=2, s=3)", "sparse", 8, 2, 40, 0.0, -1);
    mk("generalized learner (n=4, q=4)", "generalized", 4, 2, 220, 0.0, -1);
    mk("stabilizer learner (n=6, dim=3)", "stabilizer", 6, 2, 240, 0.0, 3);
    mk("noisy quadratic (n=8, eps=0.1)", "noisy-quadratic", 8, 2, 400, 0.1, -1);
    mk("local noisy quadratic (n=8, eps=0.1)", "local-noisy-quadratic", 8, 2, 400, 0.1, -1);

    bool all = true;
    for (auto& q : quick) {
        auto rows = run_trials(q.spec);
        bool ok = rows[0].successes == rows[0].trials;
        std::printf("%-38s %s (%d/%d)\n", q.name.c_str(), ok ? "PASS" : "FAIL", rows[0].successes,
                    rows[0].trials);
        all &= ok;
    }

    RngStream rng(seed, 99);
    bool circuits_ok = true;
    for (int t = 0; t < 20; ++t) {
        ZqPoly f = random_zq_poly(5, 2, 4, rng);
        std::vector<std::pair<Monomial, int>> terms;
        for (auto& [mm, c] : f.terms())
            if (popcount64(mm) != 2 || c % 2 == 0) terms.push_back({mm, c});
        ZqPoly aligned = ZqPoly::from_terms(5, 4, terms);
        Circuit c = synthesize(aligned, 2);
        circuits_ok &= (phase_polynomial(c) == aligned.without_constant());
        circuits_ok &= circuits_equivalent(parse_circuit(to_text(c)), c);
    }
    std::printf("%-38s %s\n", "circuit synthesize/parse roundtrip", circuits_ok ? "PASS" : "FAIL");
    all &= circuits_ok;

    for (const auto& c : verify_numerics()) {
        std::printf("%-38s %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL");
        all &= c.pass;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-state learning toolkit"};
    app.require_subcommand(1);

    LearnOptions lopt;
    auto* learn = app.add_subcommand("learn", "learn one hidden instance and report the outcome");
    learn->add_option("--learner", lopt.learner,
                      "binary|sparse|generalized|stabilizer|noisy-quadratic|local-noisy-quadratic");
    learn->add_option("--n", lopt.n, "qubit count (random-instance mode)");
    learn->add_option("--d", lopt.d, "polynomial degree bound");
    learn->add_option("--q", lopt.q, "modulus (generalized)");
    learn->add_option("--s", lopt.s, "sparsity cap (sparse)");
    learn->add_option("--gd", lopt.gd, "graph-degree bound (local noise)");
    learn->add_option("--eps", lopt.eps, "depolarizing strength");
    learn->add_option("--m", lopt.m, "samples per round (0 = default scale)");
    learn->add_option("--m-support", lopt.m_support, "support samples (stabilizer)");
    learn->add_option("--support-dim", lopt.support_dim, "hidden support dimension (stabilizer)");
    learn->add_option("--mode", lopt.mode, "candidate search: auto|brute|exclusion");
    learn->add_option("--seed", lopt.seed, "root seed (or PHASELEARN_SEED)");
    learn->add_option("--f2-file", lopt.f2_file, "hidden binary polynomial file");
    learn->add_option("--zq-file", lopt.zq_file, "hidden Z_q polynomial file");
    learn->add_option("--circuit-file", lopt.circuit_file, "hidden circuit file");
    learn->add_option("--noise", lopt.noise, "noise clause: none|global:<eps>|local:<eps>");

    std::string config_path, out_override, nlist;
    ExperimentSpec sweep_cli;
    bool timings = false;
    double fit_rate = 0.95;
    bool do_fit = false;
    auto* sweep = app.add_subcommand("sweep", "run a seeded success-rate sweep over a sample grid");
    sweep->add_option("--config", config_path, "key=value config file");
    auto* olr = sweep->add_option("--learner", sweep_cli.learner, "learner id override");
    auto* on = sweep->add_option("--n", sweep_cli.n, "qubit count override");
    auto* od = sweep->add_option("--d", sweep_cli.d, "degree override");
    auto* oq = sweep->add_option("--q", sweep_cli.q, "modulus override");
    auto* os_ = sweep->add_option("--s", sweep_cli.s, "sparsity override");
    auto* ogd = sweep->add_option("--gd", sweep_cli.gd, "graph degree override");
    auto* oeps = sweep->add_option("--eps", sweep_cli.eps, "noise override");
    auto* odim = sweep->add_option("--support-dim", sweep_cli.support_dim, "support dimension");
    auto* omsup = sweep->add_option("--m-support", sweep_cli.m_support, "support samples");
    auto* otr = sweep->add_option("--trials", sweep_cli.trials, "trials per grid point");
    auto* osd = sweep->add_option("--seed", sweep_cli.seed, "root seed");
    auto* owk = sweep->add_option("--workers", sweep_cli.workers, "worker threads");
    std::string grid_csv;
    auto* ogr = sweep->add_option("--grid", grid_csv, "comma-separated m grid");
    sweep->add_option("--out", out_override, "output CSV path");
    sweep->add_flag("--timings", timings, "emit wall-clock timings (nondeterministic)");
    sweep->add_flag("--fit", do_fit, "fit log m* vs log n over --n-list");
    sweep->add_option("--n-list", nlist, "comma-separated n values for --fit");
    sweep->add_option("--rate", fit_rate, "success-rate threshold for m*");

    auto* verify = app.add_subcommand("verify", "run the dense-numerics verification table");

    std::string rin, rout;
    int rm = 0;
    std::uint64_t rseed = 0;
    auto* rec = app.add_subcommand("reconstruct", "learn a circuit from sampling access");
    rec->add_option("--in", rin, "hidden circuit file")->required();
    rec->add_option("--out", rout, "write the reconstructed circuit here");
    rec->add_option("--m", rm, "samples per round (0 = default scale)");
    rec->add_option("--seed", rseed, "root seed (or PHASELEARN_SEED)");

    std::uint64_t stseed = 0;
    auto* selftest = app.add_subcommand("selftest", "quick end-to-end smoke checks");
    selftest->add_option("--seed", stseed, "root seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (learn->parsed()) return run_learn(lopt);
        if (verify->parsed()) return run_verify();
        if (selftest->parsed()) return run_selftest(stseed ? stseed : env_seed_default());
        if (rec->parsed()) {
            std::uint64_t seed = rseed ? rseed : env_seed_default();
            Circuit hidden = parse_circuit(read_file(rin));
            auto o = oracle_from_circuit(hidden, seed);
            if (!rm)
                rm = default_m(o.is_binary() ? "binary" : "generalized", hidden.n, hidden.level,
                               hidden.q(), 4);
            auto rep = reconstruct(o, hidden.n, hidden.level, rm);
            if (rep.success) {
                std::string text = to_text(rep.circuit);
                if (!rout.empty()) write_file(rout, text);
                else std::cout << text;
            }
            bool ok = rep.success && circuits_equivalent(rep.circuit, hidden);
            std::cout << "samples used: " << rep.learn.samples_used << "\n";
            std::cout << "verdict: " << (ok ? "EQUIVALENT" : rep.success ? "DIFFERENT" : "FAILED")
                      << "\n";
            return ok ? 0 : 1;
        }
        if (sweep->parsed()) {
            ExperimentSpec spec;
            if (!config_path.empty()) spec = parse_experiment_config(read_file(config_path));
            if (*olr) spec.learner = sweep_cli.learner;
            if (*on) spec.n = sweep_cli.n;
            if (*od) spec.d = sweep_cli.d;
            if (*oq) spec.q = sweep_cli.q;
            if (*os_) spec.s = sweep_cli.s;
            if (*ogd) spec.gd = sweep_cli.gd;
            if (*oeps) spec.eps = sweep_cli.eps;
            if (*odim) spec.support_dim = sweep_cli.support_dim;
            if (*omsup) spec.m_support = sweep_cli.m_support;
            if (*otr) spec.trials = sweep_cli.trials;
            if (*osd) spec.seed = sweep_cli.seed;
            if (*owk) spec.workers = sweep_cli.workers;
            if (*ogr) {
                spec.m_grid.clear();
                std::istringstream ms(grid_csv);
                std::string tok;
                while (std::getline(ms, tok, ',')) spec.m_grid.push_back(std::stoi(tok));
            }
            if (!out_override.empty()) spec.out_path = out_override;

            if (do_fit) {
                if (nlist.empty()) throw std::runtime_error("--fit requires --n-list");
                std::vector<std::pair<double, double>> pts;
                std::istringstream ns(nlist);
                std::string tok;
                while (std::getline(ns, tok, ',')) {
                    ExperimentSpec per = spec;
                    per.n = std::stoi(tok);
                    auto point = threshold_scan(per, fit_rate,
                                                int(count_monomials_up_to(per.n - 1, per.d - 1)));
                    std::printf("n=%d  m*=%.1f  total samples=%.0f\n", point.n, point.m_per_round,
                                point.total_samples);
                    pts.push_back({double(point.n), point.total_samples});
                }
                auto fit = fit_exponent(pts);
                std::printf("fitted exponent: %.3f +- %.3f\n", fit.exponent, fit.half_width);
                return 0;
            }

            auto rows = run_trials(spec);
            std::string csv = to_csv(spec, rows, timings);
            if (!spec.out_path.empty()) {
                write_file(spec.out_path, csv);
                std::cerr << "wrote " << spec.out_path << "\n";
            } else {
                std::cout << csv;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
