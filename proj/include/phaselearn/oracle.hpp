// oracle.hpp - statevector-free simulation of the measurement primitives on
// phase states. The hidden polynomial is never exposed by any sampling
// operation; per-sample cost is polynomial in n and sparsity.
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "phaselearn/bits.hpp"
#include "phaselearn/f2poly.hpp"
#include "phaselearn/f2solve.hpp"
#include "phaselearn/rng.hpp"
#include "phaselearn/zqpoly.hpp"

namespace phaselearn {

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class NoiseKind { None, Global, Local };

struct NoiseModel {
    NoiseKind kind = NoiseKind::None;
    double eps = 0.0;

    static NoiseModel none() { return {}; }
    static NoiseModel global(double eps) { return {NoiseKind::Global, eps}; }
    static NoiseModel local(double eps) { return {NoiseKind::Local, eps}; }
};

// "noise=none" / "noise=global:0.2" / "noise=local:0.1" (the `noise=` prefix
// is optional).
inline NoiseModel parse_noise_clause(std::string s) {
    if (s.rfind("noise=", 0) == 0) s = s.substr(6);
    if (s == "none" || s.empty()) return NoiseModel::none();
    auto colon = s.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("noise clause: expected kind:eps");
    std::string kind = s.substr(0, colon);
    double eps = std::stod(s.substr(colon + 1));
    if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("noise clause: eps outside [0,1]");
    if (kind == "global") return NoiseModel::global(eps);
    if (kind == "local") return NoiseModel::local(eps);
    throw std::invalid_argument("noise clause: unknown kind '" + kind + "'");
}

struct BellSample {
    std::uint64_t z = 0;
    std::uint64_t w = 0;
};

// Copies consumed, split per primitive. Shared across oracles derived with
// apply_correction so a learner's total is one counter read.
struct SampleCounter {
    std::uint64_t copies = 0;
    std::uint64_t rpds = 0, povm = 0, bell = 0, basis = 0, bv = 0;
};

class PhaseOracle {
public:
    // --- construction -------------------------------------------------------

    static PhaseOracle binary(F2Poly f, NoiseModel noise, std::uint64_t seed,
                              std::uint64_t stream_id = 0) {
        PhaseOracle o;
        o.n_ = f.vars();
        o.state_ = BinaryState{std::move(f)};
        o.noise_ = noise;
        o.rng_ = RngStream(seed, stream_id);
        o.counter_ = std::make_shared<SampleCounter>();
        return o;
    }

    static PhaseOracle generalized(ZqPoly f, std::uint64_t seed, std::uint64_t stream_id = 0) {
        if (f.q() & 1) throw OracleError("generalized oracle: q must be even");
        PhaseOracle o;
        o.n_ = f.vars();
        o.state_ = GeneralizedState{std::move(f)};
        o.rng_ = RngStream(seed, stream_id);
        o.counter_ = std::make_shared<SampleCounter>();
        return o;
    }

    static PhaseOracle stabilizer(StabSupport support, ZqPoly f, std::uint64_t seed,
                                  std::uint64_t stream_id = 0) {
        if (f.q() != 4) throw OracleError("stabilizer oracle: phase polynomial must have q=4");
        if (f.vars() != support.n) throw OracleError("stabilizer oracle: polynomial/support size mismatch");
        for (auto& [m, c] : f.terms())
            if (popcount64(m) == 2 && c != 2)
                throw OracleError("stabilizer oracle: quadratic coefficients must lie in {0,2}");
        if (f.degree() > 2) throw OracleError("stabilizer oracle: phase polynomial degree must be <= 2");
        PhaseOracle o;
        o.n_ = support.n;
        o.state_ = StabilizerState{std::move(support), std::move(f)};
        o.rng_ = RngStream(seed, stream_id);
        o.counter_ = std::make_shared<SampleCounter>();
        return o;
    }

    int qubits() const { return n_; }
    NoiseModel noise() const { return noise_; }
    const SampleCounter& counter() const { return *counter_; }

    bool is_binary() const { return std::holds_alternative<BinaryState>(state_); }
    bool is_generalized() const { return std::holds_alternative<GeneralizedState>(state_); }
    bool is_stabilizer() const { return std::holds_alternative<StabilizerState>(state_); }

    // --- separable single-copy primitives -----------------------------------

    // Random partial derivative sample along e_k: all qubits measured in Z
    // except qubit k in X. Returns uniform y in {0,1}^{n-1} and D_k f(y).
    // Noiseless binary oracles only; consumes 1 copy.
    std::pair<std::uint64_t, int> rpds(int k) {
        const F2Poly& f = require_binary("rpds");
        if (noise_.kind != NoiseKind::None) throw OracleError("rpds: oracle is noisy");
        check_direction(k);
        consume(1, &SampleCounter::rpds);
        std::uint64_t y = rng_.bits(n_ - 1);
        if (deriv_cache_.empty()) deriv_cache_.resize(n_);
        if (!deriv_cache_[k - 1]) deriv_cache_[k - 1] = derivative(f, k);
        return {y, deriv_cache_[k - 1]->eval(y)};
    }

    // q-outcome single-qubit POVM on qubit k after measuring the rest in Z:
    // uniform y plus b with Pr(b|y) = (2/q) sin^2(pi (c-b)/q) where
    // c = f(y^{k=1}) - f(y^{k=0}); b = c has probability exactly zero.
    // Consumes 1 copy.
    std::pair<std::uint64_t, int> povm_sample(int k) {
        const ZqPoly& f = require_generalized("povm_sample");
        check_direction(k);
        consume(1, &SampleCounter::povm);
        std::uint64_t y = rng_.bits(n_ - 1);
        int c = diff_mod_q(f, y, k);
        return {y, sample_povm_outcome(c, f.q())};
    }

    // Same POVM after the learner-chosen affine change of frame aligning the
    // stabilizer support with coordinate qubits: the state in that frame is a
    // generalized phase state on dim(support) qubits with polynomial
    // h(u) = f(frame.point(u)). The frame must describe the support exactly.
    std::pair<std::uint64_t, int> povm_sample_in_frame(const StabSupport& frame, int k) {
        const StabilizerState& st = require_stabilizer("povm_sample_in_frame");
        if (!st.support.same_subspace(frame))
            throw OracleError("povm_sample_in_frame: frame does not match the state's support");
        int r = frame.dim();
        if (k < 1 || k > r) throw OracleError("povm_sample_in_frame: direction out of range");
        consume(1, &SampleCounter::povm);
        std::uint64_t y = r > 1 ? rng_.bits(r - 1) : 0;
        int q = st.f.q();
        int c = st.f.eval(frame.point(insert_bit(y, k, 1))) -
                st.f.eval(frame.point(insert_bit(y, k, 0)));
        c = ((c % q) + q) % q;
        return {y, sample_povm_outcome(c, q)};
    }

    // Computational-basis sample of a stabilizer state: uniform over the
    // affine support. Consumes 1 copy.
    std::uint64_t basis_sample() {
        const StabilizerState& st = require_stabilizer("basis_sample");
        consume(1, &SampleCounter::basis);
        int r = st.support.dim();
        std::uint64_t u = r ? rng_.bits(r) : 0;
        return st.support.point(u);
    }

    // Hadamard-everywhere readout of a linear phase state: returns the linear
    // coefficient vector exactly on the clean branch. Global noise keeps the
    // whole output w.p. 1-eps and replaces it by a uniform string otherwise;
    // local noise flips each bit independently w.p. eps/2 (X-basis readout of
    // a depolarized |+->-product state). Consumes 1 copy.
    std::uint64_t bv_sample() {
        const F2Poly& f = require_binary("bv_sample");
        if (f.degree() > 1) throw OracleError("bv_sample: residual polynomial is not linear");
        consume(1, &SampleCounter::bv);
        std::uint64_t coeff = 0;
        for (Monomial m : f.terms())
            if (m != 0) coeff |= m;
        switch (noise_.kind) {
            case NoiseKind::None: return coeff;
            case NoiseKind::Global:
                return rng_.uniform() < 1.0 - noise_.eps ? coeff : rng_.bits(n_);
            case NoiseKind::Local: {
                std::uint64_t out = coeff;
                for (int i = 0; i < n_; ++i)
                    if (rng_.uniform() < noise_.eps / 2.0) out ^= std::uint64_t(1) << i;
                return out;
            }
        }
        return coeff;
    }

    // --- two-copy primitives -------------------------------------------------

    // Transversal-CNOT Bell sample of a quadratic phase state f(x) = x^T A x:
    // uniform z, and w = (A+A^T) z on the clean branch, which under global
    // depolarizing noise occurs w.p. (1-eps)^2, otherwise w is uniform.
    // Consumes 2 copies.
    BellSample bell_sample() {
        const F2Poly& f = require_binary("bell_sample");
        if (noise_.kind == NoiseKind::Local)
            throw OracleError("bell_sample: use bell_sample_local for local noise");
        if (f.degree() > 2) throw OracleError("bell_sample: polynomial degree must be <= 2");
        consume(2, &SampleCounter::bell);
        ensure_adjacency(f);
        std::uint64_t z = rng_.bits(n_);
        std::uint64_t w_clean = mat_vec(z);
        last_clean_ = {z, w_clean};
        double keep = noise_.kind == NoiseKind::None ? 1.0 : (1.0 - noise_.eps) * (1.0 - noise_.eps);
        std::uint64_t w = (keep >= 1.0 || rng_.uniform() < keep) ? w_clean : rng_.bits(n_);
        return {z, w};
    }

    // Local-noise variant: each of the 2n output bits independently equals its
    // noiseless value w.p. (1-eps)^2 and is replaced by a fresh uniform bit
    // otherwise. Consumes 2 copies.
    BellSample bell_sample_local() {
        const F2Poly& f = require_binary("bell_sample_local");
        if (noise_.kind != NoiseKind::Local)
            throw OracleError("bell_sample_local: oracle noise is not local");
        if (f.degree() > 2) throw OracleError("bell_sample_local: polynomial degree must be <= 2");
        consume(2, &SampleCounter::bell);
        ensure_adjacency(f);
        std::uint64_t z = rng_.bits(n_);
        std::uint64_t w = mat_vec(z);
        last_clean_ = {z, w};
        double keep = (1.0 - noise_.eps) * (1.0 - noise_.eps);
        BellSample out{z, w};
        for (int i = 0; i < n_; ++i)
            if (rng_.uniform() >= keep) out.z = (out.z & ~(std::uint64_t(1) << i)) | (std::uint64_t(rng_.bit()) << i);
        for (int i = 0; i < n_; ++i)
            if (rng_.uniform() >= keep) out.w = (out.w & ~(std::uint64_t(1) << i)) | (std::uint64_t(rng_.bit()) << i);
        return out;
    }

    // --- phase corrections ----------------------------------------------------

    // New oracle whose hidden polynomial is f + g mod 2 (the learner applied
    // diagonal sign gates). Noise configuration preserved; the copy counter is
    // shared with this oracle.
    PhaseOracle apply_correction(const F2Poly& g) const {
        const F2Poly& f = require_binary("apply_correction");
        if (g.vars() != n_) throw OracleError("apply_correction: variable count mismatch");
        PhaseOracle o;
        o.n_ = n_;
        o.state_ = BinaryState{f + g};
        o.noise_ = noise_;
        o.rng_ = rng_.spawn();
        o.counter_ = counter_;
        return o;
    }

private:
    struct BinaryState { F2Poly f; };
    struct GeneralizedState { ZqPoly f; };
    struct StabilizerState { StabSupport support; ZqPoly f; };

    friend struct OracleInspector;

    const F2Poly& require_binary(const char* op) const {
        if (auto* s = std::get_if<BinaryState>(&state_)) return s->f;
        throw OracleError(std::string(op) + ": oracle is not a binary phase state");
    }
    const ZqPoly& require_generalized(const char* op) const {
        if (auto* s = std::get_if<GeneralizedState>(&state_)) return s->f;
        throw OracleError(std::string(op) + ": oracle is not a generalized phase state");
    }
    const StabilizerState& require_stabilizer(const char* op) const {
        if (auto* s = std::get_if<StabilizerState>(&state_)) return *s;
        throw OracleError(std::string(op) + ": oracle is not a stabilizer state");
    }
    void check_direction(int k) const {
        if (k < 1 || k > n_) throw OracleError("measurement direction out of range");
    }
    void consume(int copies, std::uint64_t SampleCounter::*which) {
        counter_->copies += copies;
        (*counter_).*which += 1;
    }

    int diff_mod_q(const ZqPoly& f, std::uint64_t y, int k) const {
        int q = f.q();
        int c = f.eval(insert_bit(y, k, 1)) - f.eval(insert_bit(y, k, 0));
        return ((c % q) + q) % q;
    }

    int sample_povm_outcome(int c, int q) {
        // Pr(b) = (2/q) sin^2(pi (c-b)/q); walk the cumulative distribution
        // skipping b = c, which has probability exactly zero.
        double u = rng_.uniform();
        double acc = 0.0;
        constexpr double pi = 3.14159265358979323846;
        int last = -1;
        for (int b = 0; b < q; ++b) {
            if (b == c) continue;
            double s = std::sin(pi * double(c - b) / double(q));
            acc += 2.0 / double(q) * s * s;
            last = b;
            if (u < acc) return b;
        }
        return last;  // float dust: u landed within 1 ulp of the total
    }

    // Adjacency rows of B = A + A^T from the size-2 monomials.
    void ensure_adjacency(const F2Poly& f) {
        if (!brows_.empty()) return;
        brows_.assign(n_, 0);
        for (Monomial m : f.terms()) {
            if (popcount64(m) != 2) continue;
            int i = std::countr_zero(m);
            int j = std::countr_zero(m & (m - 1));
            brows_[i] |= std::uint64_t(1) << j;
            brows_[j] |= std::uint64_t(1) << i;
        }
    }
    std::uint64_t mat_vec(std::uint64_t z) const {
        std::uint64_t w = 0;
        for (int i = 0; i < n_; ++i)
            if (parity64(brows_[i] & z)) w |= std::uint64_t(1) << i;
        return w;
    }

    int n_ = 0;
    std::variant<BinaryState, GeneralizedState, StabilizerState> state_;
    NoiseModel noise_;
    mutable RngStream rng_;
    std::shared_ptr<SampleCounter> counter_;
    std::vector<std::uint64_t> brows_;
    std::vector<std::optional<F2Poly>> deriv_cache_;
    BellSample last_clean_;
};

}  // namespace phaselearn
