// harness.hpp - experiment orchestration: seeded trial sweeps, CSV emission,
// threshold estimation and log-log scaling fits, plus the numerics
// verification table behind the `verify` subcommand.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "phaselearn/learners.hpp"
#include "phaselearn/oracle.hpp"
#include "phaselearn/pgm.hpp"

namespace phaselearn {

// --- hidden-instance generators ----------------------------------------------

// Random upper-triangular quadratic; the diagonal shows up as linear terms.
inline F2Poly random_quadratic_instance(int n, RngStream& rng) {
    std::vector<Monomial> terms;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            if (rng.bit()) terms.push_back((std::uint64_t(1) << i) | (std::uint64_t(1) << j));
    return F2Poly::from_terms(n, terms);
}

// Random symmetric adjacency with every row degree <= gd, plus a random
// diagonal.
inline F2Poly random_bounded_degree_instance(int n, int gd, RngStream& rng) {
    std::vector<int> deg(n, 0);
    std::vector<Monomial> edges;
    for (int attempt = 0; attempt < 6 * n * std::max(gd, 1); ++attempt) {
        int i = int(rng.below(std::uint64_t(n)));
        int j = int(rng.below(std::uint64_t(n)));
        if (i == j || deg[i] >= gd || deg[j] >= gd) continue;
        Monomial m = (std::uint64_t(1) << i) | (std::uint64_t(1) << j);
        bool dup = false;
        for (Monomial e : edges) dup |= (e == m);
        if (dup) continue;
        edges.push_back(m);
        ++deg[i];
        ++deg[j];
    }
    for (int i = 0; i < n; ++i)
        if (rng.bit()) edges.push_back(std::uint64_t(1) << i);
    return F2Poly::from_terms(n, edges);
}

// Random q=4 phase polynomial with quadratic coefficients in {0,2}.
inline ZqPoly random_stabilizer_phase(int n, RngStream& rng) {
    std::vector<std::pair<Monomial, int>> terms;
    for (Monomial m : monomials_up_to(n, 2)) {
        if (m == 0) continue;
        int c = popcount64(m) == 2 ? 2 * rng.bit() : int(rng.below(4));
        if (c) terms.push_back({m, c});
    }
    return ZqPoly::from_terms(n, 4, terms);
}

inline StabSupport random_support_instance(int n, int dim, RngStream& rng) {
    StabSupport s;
    s.n = n;
    s.a = rng.bits(n);
    while (s.dim() < dim) {
        std::uint64_t v = s.reduce(rng.bits(n));
        if (v) s.basis.push_back(v);
    }
    return s;
}

// Phase equivalence on a support: h(u) - f(frame.point(u)) constant mod q.
inline bool support_phase_equivalent(const ZqPoly& h, const StabSupport& frame, const ZqPoly& f) {
    int q = f.q();
    int diff0 = ((h.eval(0) - f.eval(frame.point(0))) % q + q) % q;
    for (std::uint64_t u = 0; u < (std::uint64_t(1) << frame.dim()); ++u)
        if (((h.eval(u) - f.eval(frame.point(u))) % q + q) % q != diff0) return false;
    return true;
}

// --- experiment sweeps ---------------------------------------------------------

struct ExperimentSpec {
    std::string learner = "binary";  // binary|sparse|generalized|stabilizer|
                                     // noisy-quadratic|local-noisy-quadratic
    int n = 8;
    int d = 2;
    int q = 4;
    int s = 4;
    int gd = 2;
    double eps = 0.0;
    int support_dim = -1;  // stabilizer only; -1 means n/2
    int m_support = 0;     // stabilizer only; 0 means ceil(4 n ln n)
    std::vector<int> m_grid;
    int trials = 100;
    std::uint64_t seed = 1;
    std::string out_path;
    int workers = 1;

    void validate() const {
        if (m_grid.empty()) throw std::invalid_argument("experiment: empty sample grid");
        if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
        if (n < 1 || n > 24) throw std::invalid_argument("experiment: n out of range");
        if (workers < 1) throw std::invalid_argument("experiment: workers must be >= 1");
        if (d < 1 || d > n) throw std::invalid_argument("experiment: d out of range");
        if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("experiment: eps outside [0,1)");
        if (learner == "generalized" && q != (1 << d))
            throw std::invalid_argument("experiment: generalized learner needs q = 2^d");
        if (learner == "sparse" &&
            (s < 0 || std::uint64_t(s) > count_monomials_up_to(n, d) - 1))
            throw std::invalid_argument("experiment: infeasible sparsity");
        if (learner == "stabilizer" && support_dim > n)
            throw std::invalid_argument("experiment: support dimension exceeds n");
        static const char* known[] = {"binary",     "sparse",          "generalized",
                                      "stabilizer", "noisy-quadratic", "local-noisy-quadratic"};
        for (const char* k : known)
            if (learner == k) return;
        throw std::invalid_argument("experiment: unknown learner '" + learner + "'");
    }
};

struct TrialRow {
    int m = 0;
    int successes = 0;
    int trials = 0;
    double mean_samples = 0.0;
    double mean_wall_ms = 0.0;
};

namespace detail {

struct TrialResult {
    bool success = false;
    std::uint64_t samples = 0;
    double ms = 0.0;
};

inline TrialResult run_one_trial(const ExperimentSpec& spec, int m, std::uint64_t stream_id) {
    RngStream inst(spec.seed, 2 * stream_id);
    std::uint64_t oracle_stream = 2 * stream_id + 1;
    TrialResult res;
    if (spec.learner == "binary" || spec.learner == "sparse") {
        F2Poly f = spec.learner == "sparse" ? random_sparse_poly(spec.n, spec.d, spec.s, inst)
                                            : random_poly(spec.n, spec.d, inst);
        auto o = PhaseOracle::binary(f, NoiseModel::none(), spec.seed, oracle_stream);
        LearnReport rep = spec.learner == "sparse"
                              ? learn_sparse(o, spec.n, spec.d, spec.s, m)
                              : learn_binary(o, spec.n, spec.d, m);
        res = {rep.success && rep.f2 && equal_mod_constant(*rep.f2, f), rep.samples_used,
               rep.wall_ms};
    } else if (spec.learner == "generalized") {
        ZqPoly f = random_zq_poly(spec.n, spec.d, spec.q, inst);
        auto o = PhaseOracle::generalized(f, spec.seed, oracle_stream);
        LearnReport rep = learn_generalized(o, spec.n, spec.d, spec.q, m);
        res = {rep.success && rep.zq && equivalent(*rep.zq, f), rep.samples_used, rep.wall_ms};
    } else if (spec.learner == "stabilizer") {
        int dim = spec.support_dim >= 0 ? spec.support_dim : spec.n / 2;
        int msup = spec.m_support > 0
                       ? spec.m_support
                       : int(std::ceil(4.0 * spec.n * std::log(std::max(spec.n, 2))));
        StabSupport sup = random_support_instance(spec.n, dim, inst);
        ZqPoly f = random_stabilizer_phase(spec.n, inst);
        auto o = PhaseOracle::stabilizer(sup, f, spec.seed, oracle_stream);
        LearnReport rep = learn_stabilizer(o, spec.n, msup, m);
        bool ok = rep.success && rep.support && rep.zq && rep.support->same_subspace(sup) &&
                  support_phase_equivalent(*rep.zq, *rep.support, f);
        res = {ok, rep.samples_used, rep.wall_ms};
    } else if (spec.learner == "noisy-quadratic") {
        F2Poly f = random_quadratic_instance(spec.n, inst);
        auto o = PhaseOracle::binary(f, NoiseModel::global(spec.eps), spec.seed, oracle_stream);
        LearnReport rep = learn_noisy_quadratic(o, spec.n, spec.eps, m);
        res = {rep.success && rep.f2 && *rep.f2 == f, rep.samples_used, rep.wall_ms};
    } else {  // local-noisy-quadratic
        F2Poly f = random_bounded_degree_instance(spec.n, spec.gd, inst);
        auto o = PhaseOracle::binary(f, NoiseModel::local(spec.eps), spec.seed, oracle_stream);
        LearnReport rep = learn_local_noise_quadratic(o, spec.n, spec.eps, spec.gd, m);
        res = {rep.success && rep.f2 && *rep.f2 == f, rep.samples_used, rep.wall_ms};
    }
    return res;
}

}  // namespace detail

// One row per grid point; a fresh hidden instance and oracle per trial.
// Deterministic under a fixed seed: every (grid point, trial) pair owns a
// counter-derived stream, so worker count and scheduling do not matter.
// Learner failures count against the success tally; they never abort a sweep.
inline std::vector<TrialRow> run_trials(const ExperimentSpec& spec) {
    spec.validate();
    std::size_t points = spec.m_grid.size();
    std::size_t total = points * std::size_t(spec.trials);
    std::vector<detail::TrialResult> results(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t task = next.fetch_add(1); task < total; task = next.fetch_add(1)) {
            std::size_t p = task / spec.trials;
            std::size_t trial = task % spec.trials;
            // Streams are keyed by the m value, not the grid position, so a
            // reordered or extended grid reproduces identical per-trial
            // outcomes.
            std::uint64_t stream_id = (std::uint64_t(spec.m_grid[p]) << 32) | trial;
            try {
                results[task] = detail::run_one_trial(spec, spec.m_grid[p], stream_id);
            } catch (const std::exception&) {
                results[task] = {};
            }
        }
    };
    if (spec.workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < spec.workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::vector<TrialRow> rows(points);
    for (std::size_t p = 0; p < points; ++p) {
        TrialRow& row = rows[p];
        row.m = spec.m_grid[p];
        row.trials = spec.trials;
        for (int t = 0; t < spec.trials; ++t) {
            const auto& r = results[p * spec.trials + t];
            row.successes += r.success;
            row.mean_samples += double(r.samples);
            row.mean_wall_ms += r.ms;
        }
        row.mean_samples /= spec.trials;
        row.mean_wall_ms /= spec.trials;
    }
    return rows;
}

// CSV with the resolved configuration in the header. Timing is informational
// and nondeterministic, so it is zeroed unless explicitly requested; the
// default output is bit-exact under a fixed seed and version.
inline std::string to_csv(const ExperimentSpec& spec, const std::vector<TrialRow>& rows,
                          bool with_timings = false) {
    std::ostringstream os;
    os << "# phaselearn sweep\n";
    os << "# learner=" << spec.learner << " n=" << spec.n << " d=" << spec.d << " q=" << spec.q
       << " s=" << spec.s << " gd=" << spec.gd << " eps=" << spec.eps
       << " support_dim=" << spec.support_dim << " m_support=" << spec.m_support
       << " trials=" << spec.trials << " seed=" << spec.seed << " workers=" << spec.workers
       << "\n";
    os << "m,successes,trials,mean_samples,mean_wall_ms\n";
    for (const TrialRow& r : rows) {
        os << r.m << "," << r.successes << "," << r.trials << "," << r.mean_samples << ","
           << (with_timings ? r.mean_wall_ms : 0.0) << "\n";
    }
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << content;
}

// Smallest grid m whose success rate reaches the target, or -1.
inline int threshold_m(const std::vector<TrialRow>& rows, double rate) {
    for (const TrialRow& r : rows)
        if (r.successes >= rate * r.trials - 1e-9) return r.m;
    return -1;
}

struct FitResult {
    double exponent = 0.0;
    double half_width = 0.0;  // ~2 standard errors
};

// Least-squares slope of log m* against log n.
inline FitResult fit_exponent(const std::vector<std::pair<double, double>>& n_to_mstar) {
    std::size_t k = n_to_mstar.size();
    if (k < 3) throw std::invalid_argument("fit_exponent: need at least three points");
    double sx = 0, sy = 0;
    std::vector<double> xs(k), ys(k);
    for (std::size_t i = 0; i < k; ++i) {
        xs[i] = std::log(n_to_mstar[i].first);
        ys[i] = std::log(n_to_mstar[i].second);
        sx += xs[i];
        sy += ys[i];
    }
    double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    double slope = sxy / sxx;
    double intercept = my - slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < k; ++i) {
        double r = ys[i] - (intercept + slope * xs[i]);
        ss_res += r * r;
    }
    double se = k > 2 ? std::sqrt(ss_res / double(k - 2) / sxx) : 0.0;
    return {slope, 2.0 * se};
}

// Total samples consumed at the success threshold, per n: a coarse geometric
// sweep to bracket the threshold, then a fine linear sweep inside the
// bracket. Feeds fit_exponent.
struct ScalingPoint {
    int n = 0;
    double m_per_round = 0.0;   // interpolated threshold
    double total_samples = 0.0;
};

// Continuous threshold estimate: a coarse geometric sweep brackets the rate
// crossing, a fine linear sweep resolves it, and the crossing is linearly
// interpolated between the bracketing grid points. Interpolation matters:
// the integer threshold can sit exactly on the target rate and flip between
// seeds, which a log-log fit over three points amplifies.
inline ScalingPoint threshold_scan(ExperimentSpec spec, double rate, int anchor) {
    // Coarse probes run point by point with a reduced trial count and stop at
    // the first qualifying m.
    ExperimentSpec coarse_spec = spec;
    coarse_spec.trials = std::min(spec.trials, 200);
    int lo = std::max(1, anchor / 2), hi = -1;
    int prev = lo;
    for (double r = 1.0; r <= 24.0; r *= 1.35) {
        int m = std::max(prev + 1, int(anchor * r));
        coarse_spec.m_grid = {m};
        auto row = run_trials(coarse_spec)[0];
        if (row.successes >= rate * row.trials - 1e-9) {
            hi = m;
            lo = prev;
            break;
        }
        prev = m;
    }
    if (hi < 0) throw std::runtime_error("threshold_scan: no grid point reached the target rate");
    int step = std::max(1, (hi - lo) / 10);
    std::vector<int> fine;
    for (int m = lo; m <= hi; m += step) fine.push_back(m);
    fine.push_back(hi);
    spec.m_grid = fine;
    auto fine_rows = run_trials(spec);
    double mstar = double(hi);
    for (std::size_t i = 0; i < fine_rows.size(); ++i) {
        double r = double(fine_rows[i].successes) / fine_rows[i].trials;
        if (r < rate - 1e-9) continue;
        if (i == 0) {
            mstar = fine_rows[0].m;
        } else {
            double r0 = double(fine_rows[i - 1].successes) / fine_rows[i - 1].trials;
            double t = (rate - r0) / std::max(r - r0, 1e-12);
            mstar = fine_rows[i - 1].m + t * (fine_rows[i].m - fine_rows[i - 1].m);
        }
        break;
    }
    // Samples-per-m from the most successful row: failed trials abort early
    // and would understate the per-sample cost.
    const TrialRow* best = &fine_rows.back();
    for (const TrialRow& r : fine_rows)
        if (r.successes > best->successes) best = &r;
    double samples_per_m = best->m > 0 ? best->mean_samples / best->m : 0.0;
    return {spec.n, mstar, mstar * samples_per_m};
}

// --- numerics verification table ------------------------------------------------

struct CheckLine {
    std::string name;
    bool pass = false;
    double achieved = 0.0;
    double tolerance = 0.0;
};

// The dense-numerics checks behind the `verify` subcommand, with their pinned
// tolerances.
inline std::vector<CheckLine> verify_numerics() {
    std::vector<CheckLine> out;

    for (int n : {3, 4}) {
        auto rep = second_moment_average(n, 2);
        out.push_back({"second-moment closed form (n=" + std::to_string(n) + ", d=2)",
                       rep.exact && rep.max_abs_diff < 1e-12, rep.max_abs_diff, 1e-12});
    }

    for (int copies : {1, 2}) {
        Ensemble e = binary_ensemble(3, 2, copies, true);
        auto pr = pgm_success(e);
        double lo = pr[0], hi = pr[0];
        for (double p : pr) {
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        out.push_back({"pgm uniformity (n=3, d=2, M=" + std::to_string(copies) + ")",
                       hi - lo < 1e-9, hi - lo, 1e-9});
    }

    double worst_ghz = 0.0;
    for (int n = 1; n <= 6; ++n)
        for (int e10 = 0; e10 <= 10; ++e10) {
            double eps = e10 / 10.0;
            double got = ghz_noise_distance(n, eps);
            double want = 2.0 * std::pow(1.0 - eps, n);
            worst_ghz = std::max(worst_ghz, std::abs(got - want));
        }
    out.push_back({"ghz depolarized trace distance (n<=6)", worst_ghz < 1e-10, worst_ghz, 1e-10});

    double worst_gap = 1e300;
    for (int n : {3, 4}) {
        double margin = measurement_entropy(n, 2, BasisChoice::Identity) - (n - 2);
        worst_gap = std::min(worst_gap, margin);
        margin = measurement_entropy(n, 2, BasisChoice::HadamardAll) - (n - 2);
        worst_gap = std::min(worst_gap, margin);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            margin = measurement_entropy(n, 2, BasisChoice::RandomSeeded, seed) - (n - 2);
            worst_gap = std::min(worst_gap, margin);
        }
    }
    out.push_back({"measurement entropy >= n-2 (n in {3,4})", worst_gap >= 0.0, worst_gap, 0.0});

    return out;
}

// --- plain-text configuration -----------------------------------------------------

// key=value lines with # comments; unknown keys are an error.
inline ExperimentSpec parse_experiment_config(const std::string& text) {
    ExperimentSpec spec;
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string s = raw.substr(0, raw.find('#'));
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
        std::size_t b = s.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        s = s.substr(b);
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line) + ": expected key=value");
        std::string key = s.substr(0, eq), val = s.substr(eq + 1);
        try {
            if (key == "learner") spec.learner = val;
            else if (key == "n") spec.n = std::stoi(val);
            else if (key == "d") spec.d = std::stoi(val);
            else if (key == "q") spec.q = std::stoi(val);
            else if (key == "s") spec.s = std::stoi(val);
            else if (key == "gd") spec.gd = std::stoi(val);
            else if (key == "eps") spec.eps = std::stod(val);
            else if (key == "support_dim") spec.support_dim = std::stoi(val);
            else if (key == "m_support") spec.m_support = std::stoi(val);
            else if (key == "trials") spec.trials = std::stoi(val);
            else if (key == "seed") spec.seed = std::stoull(val);
            else if (key == "out") spec.out_path = val;
            else if (key == "workers") spec.workers = std::stoi(val);
            else if (key == "m_grid") {
                spec.m_grid.clear();
                std::istringstream ms(val);
                std::string tok;
                while (std::getline(ms, tok, ',')) spec.m_grid.push_back(std::stoi(tok));
            } else {
                throw std::invalid_argument("unknown key");
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("config line " + std::to_string(line) + ": bad entry '" + s +
                                        "'");
        }
    }
    return spec;
}

}  // namespace phaselearn
