// learners.hpp - the learning algorithms. Every learner consumes only oracle
// samples and reports the copies it used.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "phaselearn/f2poly.hpp"
#include "phaselearn/f2solve.hpp"
#include "phaselearn/oracle.hpp"
#include "phaselearn/zqpoly.hpp"

namespace phaselearn {

struct RoundDiag {
    int round = 0;
    int rank = -1;       // linear-system rank, where applicable
    int survivors = -1;  // candidate survivors, where applicable
    std::string note;
};

struct LearnReport {
    bool success = false;
    std::string failure;
    std::optional<F2Poly> f2;
    std::optional<ZqPoly> zq;
    std::optional<StabSupport> support;
    std::uint64_t samples_used = 0;
    double wall_ms = 0.0;
    std::vector<RoundDiag> per_round;

    std::string to_text() const {
        std::ostringstream os;
        os << "{\"success\": " << (success ? "true" : "false");
        if (!success) os << ", \"failure\": \"" << failure << "\"";
        os << ", \"samples_used\": " << samples_used;
        os << ", \"wall_ms\": " << wall_ms;
        if (f2) os << ", \"result\": \"f2 poly, degree " << f2->degree()
                   << ", sparsity " << f2->sparsity() << "\"";
        if (zq) os << ", \"result\": \"zq poly, q " << zq->q()
                   << ", degree " << zq->degree() << "\"";
        if (support) os << ", \"support_dim\": " << support->dim();
        os << ", \"rounds\": " << per_round.size() << "}";
        return os.str();
    }
};

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline LearnReport fail_report(std::string why, std::uint64_t samples, double ms,
                               std::vector<RoundDiag> rounds = {}) {
    LearnReport r;
    r.success = false;
    r.failure = std::move(why);
    r.samples_used = samples;
    r.wall_ms = ms;
    r.per_round = std::move(rounds);
    return r;
}

}  // namespace detail

// --- binary phase states, dense route ---------------------------------------
//
// n rounds of partial-derivative sampling; each round solves the linear
// system over the monomials of size <= d-1 and the rounds are stitched by
// majority. Fails (never guesses) if any round's system is not unique.
inline LearnReport learn_binary(PhaseOracle& o, int n, int d, int m_per_round) {
    detail::Stopwatch clock;
    std::uint64_t start = o.counter().copies;
    if (d > n) throw std::invalid_argument("learn_binary: d > n");
    std::vector<F2Poly> derivs;
    std::vector<RoundDiag> rounds;
    for (int t = 1; t <= n; ++t) {
        std::vector<std::uint64_t> pts(m_per_round);
        BitVec labels(m_per_round);
        for (int j = 0; j < m_per_round; ++j) {
            auto [y, b] = o.rpds(t);
            pts[j] = y;
            labels.set(j, b);
        }
        EvalMatrix a = eval_matrix(pts, n - 1, d);
        SolveOutcome out = gauss_solve(a, labels);
        rounds.push_back({t, out.rank, -1, ""});
        if (out.status != SolveOutcome::Status::Unique) {
            std::ostringstream why;
            why << "round " << t << ": derivative system "
                << (out.status == SolveOutcome::Status::Ambiguous ? "ambiguous" : "inconsistent")
                << " (rank " << out.rank << "/" << a.cols << ")";
            return detail::fail_report(why.str(), o.counter().copies - start, clock.ms(),
                                       std::move(rounds));
        }
        derivs.push_back(poly_from_coeffs(out.particular, a.col_monomials, n - 1));
    }
    LearnReport r;
    r.success = true;
    r.f2 = stitch(derivs);
    r.samples_used = o.counter().copies - start;
    r.wall_ms = clock.ms();
    r.per_round = std::move(rounds);
    return r;
}

// --- binary phase states, sparse route ---------------------------------------
//
// Same rounds, but each derivative is decoded as the minimum-weight solution
// with weight cap s. Fails on ambiguity, infeasibility or decoder budget;
// never silently returns a heavier-than-cap answer.
inline LearnReport learn_sparse(PhaseOracle& o, int n, int d, int s, int m_per_round,
                                std::uint64_t node_budget = 10'000'000) {
    detail::Stopwatch clock;
    std::uint64_t start = o.counter().copies;
    if (d > n) throw std::invalid_argument("learn_sparse: d > n");
    std::vector<F2Poly> derivs;
    std::vector<RoundDiag> rounds;
    for (int t = 1; t <= n; ++t) {
        std::vector<std::uint64_t> pts(m_per_round);
        BitVec labels(m_per_round);
        for (int j = 0; j < m_per_round; ++j) {
            auto [y, b] = o.rpds(t);
            pts[j] = y;
            labels.set(j, b);
        }
        if (s == 0) {
            // Zero decode work: the labels themselves must vanish.
            if (!labels.is_zero())
                return detail::fail_report("sparsity cap 0 but nonzero derivative observed",
                                           o.counter().copies - start, clock.ms());
            derivs.push_back(F2Poly::zero(n - 1));
            rounds.push_back({t, -1, -1, "zero"});
            continue;
        }
        EvalMatrix a = eval_matrix(pts, n - 1, d);
        MinWeightOutcome out = min_weight_solution(a, labels, s, node_budget);
        rounds.push_back({t, -1, -1, ""});
        if (out.status != MinWeightOutcome::Status::Found) {
            const char* what = out.status == MinWeightOutcome::Status::Ambiguous ? "ambiguous"
                               : out.status == MinWeightOutcome::Status::Infeasible
                                   ? "infeasible under the sparsity cap"
                                   : "decoder budget exceeded";
            std::ostringstream why;
            why << "round " << t << ": min-weight decode " << what;
            return detail::fail_report(why.str(), o.counter().copies - start, clock.ms(),
                                       std::move(rounds));
        }
        derivs.push_back(poly_from_coeffs(out.solution, a.col_monomials, n - 1));
    }
    LearnReport r;
    r.success = true;
    r.f2 = stitch(derivs);
    r.samples_used = o.counter().copies - start;
    r.wall_ms = clock.ms();
    r.per_round = std::move(rounds);
    return r;
}

// --- generalized phase states -------------------------------------------------

enum class GenSearchMode { Auto, BruteForce, Exclusion };

namespace detail {

struct GenRoundResult {
    bool ok = false;
    ZqPoly g;
    int survivors = 0;
    std::string failure;
};

// Identify the unique g in P_q(vars, d-1) consistent with m disequality
// constraints g(y) != b.
//
// Brute force scans the whole candidate space (the default).
// Exclusion mode turns repeat observations of the same y into pinned
// equalities g(y) = v once every other value has been excluded, then solves
// the Z_{2^d} linear system by bitwise lifting: solve mod 2, subtract, halve,
// d times.
inline GenRoundResult identify_from_disequalities(
    int vars, int d, int q, const std::vector<std::pair<std::uint64_t, int>>& constraints,
    GenSearchMode mode, std::uint64_t brute_cap = std::uint64_t(1) << 24) {
    GenRoundResult res;
    std::vector<Monomial> monos = monomials_up_to(vars, d - 1);
    int ncols = int(monos.size());

    double log_candidates = ncols * std::log2(double(q));
    bool brute_fits = log_candidates <= std::log2(double(brute_cap)) + 1e-9;
    if (mode == GenSearchMode::BruteForce && !brute_fits) {
        res.failure = "candidate-space cap exceeded for brute-force search";
        return res;
    }
    bool use_brute = mode == GenSearchMode::BruteForce || (mode == GenSearchMode::Auto && brute_fits);

    if (use_brute) {
        std::uint64_t total = 1;
        for (int i = 0; i < ncols; ++i) total *= std::uint64_t(q);
        std::vector<int> coeff(ncols, 0);
        std::vector<ZqPoly> survivors;
        for (std::uint64_t cand = 0; cand < total; ++cand) {
            bool alive = true;
            for (auto& [y, b] : constraints) {
                long long acc = 0;
                for (int i = 0; i < ncols; ++i)
                    if (coeff[i] && (y & monos[i]) == monos[i]) acc += coeff[i];
                if (int(acc % q) == b) { alive = false; break; }
            }
            if (alive) {
                std::vector<std::pair<Monomial, int>> terms;
                for (int i = 0; i < ncols; ++i)
                    if (coeff[i]) terms.push_back({monos[i], coeff[i]});
                survivors.push_back(ZqPoly::from_terms(vars, q, std::move(terms)));
                if (survivors.size() > 1) break;
            }
            for (int i = 0; i < ncols; ++i) {
                if (++coeff[i] < q) break;
                coeff[i] = 0;
            }
        }
        res.survivors = int(survivors.size());
        if (survivors.size() == 1) {
            res.ok = true;
            res.g = std::move(survivors[0]);
        } else if (survivors.empty()) {
            res.failure = "no candidate consistent with the constraints";
        } else {
            res.failure = "more than one candidate consistent with the constraints";
        }
        return res;
    }

    // Exclusion mode.
    std::map<std::uint64_t, std::uint32_t> excluded;
    for (auto& [y, b] : constraints) excluded[y] |= std::uint32_t(1) << b;
    std::vector<std::uint64_t> pins;
    std::vector<int> pin_val;
    std::uint32_t all = q == 32 ? ~std::uint32_t(0) : (std::uint32_t(1) << q) - 1;
    for (auto& [y, mask] : excluded) {
        if (popcount64(mask) != q - 1) continue;
        pins.push_back(y);
        pin_val.push_back(std::countr_zero(~mask & all));
    }
    if (int(pins.size()) < ncols) {
        res.failure = "not enough fully-excluded points to pin the system";
        return res;
    }
    EvalMatrix a = eval_matrix(pins, vars, d);
    std::vector<long long> residual(pins.size());
    for (std::size_t i = 0; i < pins.size(); ++i) residual[i] = pin_val[i];
    std::vector<int> alpha(ncols, 0);
    for (int stage = 0; stage < d; ++stage) {
        BitVec rhs(int(pins.size()));
        for (std::size_t i = 0; i < pins.size(); ++i) rhs.set(int(i), residual[i] & 1);
        SolveOutcome out = gauss_solve(a, rhs);
        if (out.status != SolveOutcome::Status::Unique) {
            res.failure = out.status == SolveOutcome::Status::Ambiguous
                              ? "pinned system underdetermined"
                              : "pinned system inconsistent";
            return res;
        }
        for (int c = 0; c < ncols; ++c)
            if (out.particular.get(c)) alpha[c] += 1 << stage;
        for (std::size_t i = 0; i < pins.size(); ++i) {
            long long dot = 0;
            for (int c = 0; c < ncols; ++c)
                if (out.particular.get(c) && (pins[i] & monos[c]) == monos[c]) ++dot;
            residual[i] = (residual[i] - dot) / 2;
        }
    }
    std::vector<std::pair<Monomial, int>> terms;
    for (int c = 0; c < ncols; ++c)
        if (alpha[c] % q) terms.push_back({monos[c], alpha[c] % q});
    ZqPoly g = ZqPoly::from_terms(vars, q, std::move(terms));
    for (auto& [y, b] : constraints)
        if (g.eval(y) == b) {
            res.failure = "lifted solution violates a disequality constraint";
            return res;
        }
    res.ok = true;
    res.g = std::move(g);
    res.survivors = 1;
    return res;
}

// Reassemble f from its n derivative polynomials by Hamming-weight induction
// with f(0^n) = 0, then convert the learned point values on the weight-<=d
// down-set into coefficients.
inline ZqPoly stitch_derivatives_q(const std::vector<ZqPoly>& derivs, int n, int d, int q) {
    std::map<std::uint64_t, int> value;
    std::map<std::uint64_t, int> alpha;
    value[0] = 0;
    std::vector<std::pair<Monomial, int>> terms;
    for (Monomial j : monomials_up_to(n, d)) {
        if (j == 0) continue;
        int t = std::countr_zero(j) + 1;
        std::uint64_t below = j & (j - 1);  // j with its lowest index cleared
        int v = (derivs[t - 1].eval(remove_bit(j, t)) + value.at(below)) % q;
        value[j] = v;
        long long sub = 0;
        for (std::uint64_t s = (j - 1) & j;; s = (s - 1) & j) {
            auto it = alpha.find(s);
            if (it != alpha.end()) sub += it->second;
            if (s == 0) break;
        }
        int a = int((((v - sub) % q) + q) % q);
        if (a) {
            alpha[j] = a;
            terms.push_back({j, a});
        }
    }
    return ZqPoly::from_terms(n, q, std::move(terms));
}

using GenSampler = std::function<std::pair<std::uint64_t, int>(int)>;

inline LearnReport learn_generalized_core(int n, int d, int q, int m_per_round, GenSearchMode mode,
                                          GenSampler sample, std::uint64_t start_copies,
                                          const SampleCounter& counter, Stopwatch clock) {
    std::vector<ZqPoly> derivs;
    std::vector<RoundDiag> rounds;
    for (int t = 1; t <= n; ++t) {
        std::vector<std::pair<std::uint64_t, int>> constraints(m_per_round);
        for (int j = 0; j < m_per_round; ++j) constraints[j] = sample(t);
        GenRoundResult rr =
            identify_from_disequalities(n - 1, d, q, constraints, mode);
        rounds.push_back({t, -1, rr.survivors, ""});
        if (!rr.ok) {
            std::ostringstream why;
            why << "round " << t << ": " << rr.failure;
            return fail_report(why.str(), counter.copies - start_copies, clock.ms(),
                               std::move(rounds));
        }
        derivs.push_back(std::move(rr.g));
    }
    LearnReport r;
    r.success = true;
    r.zq = stitch_derivatives_q(derivs, n, d, q);
    r.samples_used = counter.copies - start_copies;
    r.wall_ms = clock.ms();
    r.per_round = std::move(rounds);
    return r;
}

}  // namespace detail

// Learn f in P_q(n,d), q = 2^d, up to equivalence, from per-direction
// disequality constraints gathered with the q-outcome POVM.
inline LearnReport learn_generalized(PhaseOracle& o, int n, int d, int q, int m_per_round,
                                     GenSearchMode mode = GenSearchMode::Auto) {
    if (q != (1 << d)) throw std::invalid_argument("learn_generalized: q must equal 2^d");
    detail::Stopwatch clock;
    std::uint64_t start = o.counter().copies;
    return detail::learn_generalized_core(
        n, d, q, m_per_round, mode, [&](int t) { return o.povm_sample(t); }, start, o.counter(),
        clock);
}

// Learn a stabilizer state: the affine support from computational-basis
// samples, then the q=4 phase polynomial on the support coordinates via the
// generalized learner in the support-aligned frame. The support phase is
// reported as a polynomial over dim(support) variables together with the
// learned frame.
inline LearnReport learn_stabilizer(PhaseOracle& o, int n, int m_support, int m_per_round,
                                    GenSearchMode mode = GenSearchMode::Auto) {
    detail::Stopwatch clock;
    std::uint64_t start = o.counter().copies;
    if (m_support < 2) throw std::invalid_argument("learn_stabilizer: m_support must be >= 2");
    std::vector<std::uint64_t> pts(m_support);
    for (int i = 0; i < m_support; ++i) pts[i] = o.basis_sample();
    StabSupport support = affine_basis(pts, n);
    // The basis rank must have stabilized over the second half of the
    // samples, otherwise the support is under-sampled.
    std::vector<std::uint64_t> half(pts.begin(), pts.begin() + m_support / 2);
    if (affine_basis(half, n).dim() != support.dim())
        return detail::fail_report("support basis rank did not stabilize",
                                   o.counter().copies - start, clock.ms());
    int r = support.dim();
    if (r == 0) {
        LearnReport rep;
        rep.success = true;
        rep.support = support;
        rep.zq = ZqPoly::zero(0, 4);
        rep.samples_used = o.counter().copies - start;
        rep.wall_ms = clock.ms();
        return rep;
    }
    LearnReport rep;
    try {
        rep = detail::learn_generalized_core(
            r, 2, 4, m_per_round, mode,
            [&](int t) { return o.povm_sample_in_frame(support, t); }, start, o.counter(), clock);
    } catch (const OracleError& e) {
        return detail::fail_report(std::string("support frame rejected: ") + e.what(),
                                   o.counter().copies - start, clock.ms());
    }
    rep.support = support;
    return rep;
}

// --- learning parities under noise --------------------------------------------

struct LpnOutcome {
    bool ok = false;
    std::uint64_t secret = 0;
    std::int64_t best_score = 0;    // agreements minus disagreements
    std::int64_t second_score = 0;
    std::string failure;
};

// Exact maximum-likelihood decoding of a parity with noisy labels: the
// agreement counts of all 2^n candidates at once via a Walsh-Hadamard
// transform; ties are a reported failure, never a guess.
inline LpnOutcome lpn_decode(const std::vector<std::pair<std::uint64_t, int>>& samples, int n,
                             double eta, int ml_cap = 24) {
    if (n > ml_cap) throw std::invalid_argument("lpn_decode: n above the maximum-likelihood cap");
    if (eta <= 0.0) throw std::invalid_argument("lpn_decode: correlation must be positive");
    LpnOutcome out;
    std::size_t size = std::size_t(1) << n;
    std::vector<std::int64_t> v(size, 0);
    std::uint64_t mask = size - 1;
    for (auto& [z, b] : samples) v[z & mask] += b ? -1 : 1;
    for (std::size_t len = 1; len < size; len <<= 1)
        for (std::size_t i = 0; i < size; i += len << 1)
            for (std::size_t j = i; j < i + len; ++j) {
                std::int64_t x = v[j], y = v[j + len];
                v[j] = x + y;
                v[j + len] = x - y;
            }
    std::size_t best = 0;
    std::int64_t best_score = v[0], second = std::numeric_limits<std::int64_t>::min();
    for (std::size_t c = 1; c < size; ++c) {
        if (v[c] > best_score) {
            second = best_score;
            best_score = v[c];
            best = c;
        } else if (v[c] > second) {
            second = v[c];
        }
    }
    out.best_score = best_score;
    out.second_score = second;
    if (second == best_score) {
        out.failure = "maximum-likelihood tie";
        return out;
    }
    out.ok = true;
    out.secret = best;
    return out;
}

namespace detail {

inline LearnReport learn_quadratic_noisy_core(PhaseOracle& o, int n, double eps, int m_bell,
                                              bool local, double eta) {
    Stopwatch clock;
    std::uint64_t start = o.counter().copies;
    std::vector<BellSample> samples(m_bell);
    for (int j = 0; j < m_bell; ++j)
        samples[j] = local ? o.bell_sample_local() : o.bell_sample();

    std::vector<std::uint64_t> brow(n, 0);
    std::vector<RoundDiag> rounds;
    std::vector<std::pair<std::uint64_t, int>> lpn(m_bell);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m_bell; ++j)
            lpn[j] = {samples[j].z, int((samples[j].w >> i) & 1)};
        LpnOutcome dec = lpn_decode(lpn, n, eta);
        rounds.push_back({i + 1, -1, -1,
                          "score margin " + std::to_string(dec.best_score - dec.second_score)});
        if (!dec.ok) {
            std::ostringstream why;
            why << "adjacency row " << i + 1 << ": " << dec.failure;
            return fail_report(why.str(), o.counter().copies - start, clock.ms(),
                               std::move(rounds));
        }
        brow[i] = dec.secret;
    }
    for (int i = 0; i < n; ++i) {
        if ((brow[i] >> i) & 1)
            return fail_report("adjacency has a diagonal entry: rows inconsistent",
                               o.counter().copies - start, clock.ms(), std::move(rounds));
        for (int j = i + 1; j < n; ++j)
            if (((brow[i] >> j) & 1) != ((brow[j] >> i) & 1))
                return fail_report("adjacency not symmetric: rows inconsistent",
                                   o.counter().copies - start, clock.ms(), std::move(rounds));
    }

    std::vector<Monomial> offdiag;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if ((brow[i] >> j) & 1)
                offdiag.push_back((std::uint64_t(1) << i) | (std::uint64_t(1) << j));
    F2Poly correction = F2Poly::from_terms(n, offdiag);
    PhaseOracle corrected = o.apply_correction(correction);

    int repeats = int(std::ceil(24.0 * std::log(std::max(n, 2)) / ((1.0 - eps) * (1.0 - eps))));
    repeats |= 1;
    std::vector<int> ones(n, 0);
    for (int rep = 0; rep < repeats; ++rep) {
        std::uint64_t x = corrected.bv_sample();
        for (int i = 0; i < n; ++i) ones[i] += int((x >> i) & 1);
    }
    std::vector<Monomial> terms = offdiag;
    for (int i = 0; i < n; ++i) {
        if (2 * ones[i] == repeats)
            return fail_report("diagonal majority inconclusive", o.counter().copies - start,
                               clock.ms(), std::move(rounds));
        if (2 * ones[i] > repeats) terms.push_back(std::uint64_t(1) << i);
    }
    LearnReport r;
    r.success = true;
    r.f2 = F2Poly::from_terms(n, std::move(terms));
    r.samples_used = o.counter().copies - start;
    r.wall_ms = clock.ms();
    r.per_round = std::move(rounds);
    return r;
}

}  // namespace detail

// Quadratic phase state under global depolarizing noise: Bell samples feed a
// per-row parity decoder, the off-diagonal part is corrected away, and the
// diagonal is read out by repeated linear readouts with a per-bit majority.
inline LearnReport learn_noisy_quadratic(PhaseOracle& o, int n, double eps, int m_bell) {
    if (eps >= 1.0) throw std::invalid_argument("learn_noisy_quadratic: eps must be < 1");
    double eta = (1.0 - eps) * (1.0 - eps) / 2.0;
    return detail::learn_quadratic_noisy_core(o, n, eps, m_bell, /*local=*/false, eta);
}

// Local-noise variant: identical pipeline; each Bell bit survives
// independently, so the per-row label correlation scales with the graph
// degree bound as (1-eps)^{2(gd+1)}.
inline LearnReport learn_local_noise_quadratic(PhaseOracle& o, int n, double eps, int gd_bound,
                                               int m_bell) {
    if (eps >= 1.0) throw std::invalid_argument("learn_local_noise_quadratic: eps must be < 1");
    double eta = std::pow(1.0 - eps, 2.0 * (gd_bound + 1)) / 2.0;
    return detail::learn_quadratic_noisy_core(o, n, eps, m_bell, /*local=*/true, eta);
}

}  // namespace phaselearn
