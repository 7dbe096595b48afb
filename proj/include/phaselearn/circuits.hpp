// circuits.hpp - diagonal dyadic-phase circuits and their phase polynomials.
//
// A gate applies the phase exp(i pi a / 2^{d-1}) = w_{2^d}^a on basis states
// with x_j = 1 for every target j. Commuting diagonal gates accumulate their
// numerators additively into the coefficient of the target monomial, so a
// circuit's action on |+>^n is the generalized phase state of that
// polynomial.
#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaselearn/f2poly.hpp"
#include "phaselearn/learners.hpp"
#include "phaselearn/oracle.hpp"
#include "phaselearn/zqpoly.hpp"

namespace phaselearn {

struct CircuitParseError : std::runtime_error {
    CircuitParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_no(line) {}
    int line_no;
};

struct Gate {
    Monomial targets = 0;  // nonempty
    int numerator = 0;     // in [0, 2^d); phase exp(i pi numerator / 2^{d-1})
};

struct Circuit {
    int n = 0;
    int level = 1;  // d
    bool hadamard_frame = false;
    std::vector<Gate> gates;
    int dropped_constant = 0;  // global phase removed during synthesis

    int q() const { return 1 << level; }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline int parse_int(const std::string& tok, int line, const char* what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw CircuitParseError(line, std::string("bad ") + what + " '" + tok + "'");
    }
}

inline Monomial parse_targets(const std::vector<std::string>& toks, std::size_t lo, std::size_t hi,
                              int n, int d, int line) {
    if (hi <= lo) throw CircuitParseError(line, "gate has no targets");
    Monomial m = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        int t = parse_int(toks[i], line, "target");
        if (t < 1 || t > n) throw CircuitParseError(line, "target out of range");
        Monomial bit = std::uint64_t(1) << (t - 1);
        if (m & bit) throw CircuitParseError(line, "duplicate target");
        m |= bit;
    }
    if (popcount64(m) > d) throw CircuitParseError(line, "gate touches more than d qubits");
    return m;
}

}  // namespace detail

// Grammar: header `n=<n> d=<d>`; then one gate per line with `#` comments.
//   Z t | CZ t1 t2 | CCZ t1 t2 t3          (numerator 2^{d-1})
//   CPHASE t1 ... tk : a / 2^(d-1)         (denominator written as a value)
//   H all                                  (leading/trailing frame only)
inline Circuit parse_circuit(const std::string& text) {
    std::istringstream is(text);
    std::string raw;
    Circuit c;
    bool have_header = false, leading_h = false, trailing_h = false, any_gate = false;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string s = raw.substr(0, raw.find('#'));
        auto toks = detail::split_ws(s);
        if (toks.empty()) continue;
        if (!have_header) {
            int n = -1, d = -1;
            if (std::sscanf(s.c_str(), "n=%d d=%d", &n, &d) != 2)
                throw CircuitParseError(line, "expected header 'n=<n> d=<d>'");
            if (n < 1 || n > 64) throw CircuitParseError(line, "qubit count out of range");
            if (d < 1 || d > 16) throw CircuitParseError(line, "hierarchy level out of range");
            c.n = n;
            c.level = d;
            have_header = true;
            continue;
        }
        if (toks[0] == "H") {
            if (toks.size() != 2 || toks[1] != "all")
                throw CircuitParseError(line, "only the 'H all' frame is allowed");
            if (trailing_h) throw CircuitParseError(line, "gates after the trailing Hadamard frame");
            if (!any_gate && !leading_h) leading_h = true;
            else if (leading_h && !trailing_h) trailing_h = true;
            else throw CircuitParseError(line, "unexpected Hadamard frame");
            continue;
        }
        if (trailing_h) throw CircuitParseError(line, "gates after the trailing Hadamard frame");
        any_gate = true;
        int half = 1 << (c.level - 1);
        if (toks[0] == "Z" || toks[0] == "CZ" || toks[0] == "CCZ") {
            std::size_t want = toks[0].size();  // Z:1, CZ:2, CCZ:3 targets
            if (toks.size() != want + 1)
                throw CircuitParseError(line, toks[0] + " expects " + std::to_string(want) + " targets");
            Monomial m = detail::parse_targets(toks, 1, toks.size(), c.n, c.level, line);
            c.gates.push_back({m, half});
        } else if (toks[0] == "CPHASE") {
            std::size_t colon = toks.size();
            for (std::size_t i = 1; i < toks.size(); ++i)
                if (toks[i] == ":") { colon = i; break; }
            if (colon == toks.size() || colon + 4 != toks.size() || toks[colon + 2] != "/")
                throw CircuitParseError(line, "CPHASE expects 'targets : a / denominator'");
            Monomial m = detail::parse_targets(toks, 1, colon, c.n, c.level, line);
            int a = detail::parse_int(toks[colon + 1], line, "numerator");
            int denom = detail::parse_int(toks[colon + 3], line, "denominator");
            if (denom != half) throw CircuitParseError(line, "denominator must equal 2^(d-1)");
            if (a < 0 || a >= 2 * half) throw CircuitParseError(line, "numerator outside [0, 2^d)");
            c.gates.push_back({m, a});
        } else {
            throw CircuitParseError(line, "unknown or non-diagonal gate '" + toks[0] + "'");
        }
    }
    if (!have_header) throw CircuitParseError(line, "missing header");
    if (leading_h != trailing_h) throw CircuitParseError(line, "unmatched Hadamard frame");
    c.hadamard_frame = leading_h;
    return c;
}

inline std::string to_text(const Circuit& c) {
    std::ostringstream os;
    os << "n=" << c.n << " d=" << c.level << "\n";
    if (c.dropped_constant)
        os << "# global phase w_" << c.q() << "^" << c.dropped_constant << " dropped\n";
    if (c.hadamard_frame) os << "H all\n";
    int half = 1 << (c.level - 1);
    for (const Gate& g : c.gates) {
        auto idx = monomial_indices(g.targets);
        if (g.numerator == half && idx.size() <= 3) {
            os << (idx.size() == 1 ? "Z" : idx.size() == 2 ? "CZ" : "CCZ");
            for (int i : idx) os << " " << i;
        } else {
            os << "CPHASE";
            for (int i : idx) os << " " << i;
            os << " : " << g.numerator << " / " << half;
        }
        os << "\n";
    }
    if (c.hadamard_frame) os << "H all\n";
    return os.str();
}

// Per-gate numerators accumulate additively into the coefficients c_T mod
// 2^d, independent of gate order.
inline ZqPoly phase_polynomial(const Circuit& c) {
    std::vector<std::pair<Monomial, int>> terms;
    for (const Gate& g : c.gates) terms.push_back({g.targets, g.numerator});
    return ZqPoly::from_terms(c.n, c.q(), std::move(terms));
}

// F2 view when every coefficient is a multiple of 2^{d-1}: the state equals
// the binary phase state of this polynomial.
inline std::optional<F2Poly> binary_view(const ZqPoly& f, int d) {
    int half = 1 << (d - 1);
    std::vector<Monomial> terms;
    for (auto& [m, coef] : f.terms()) {
        if (coef % half) return std::nullopt;
        if ((coef / half) & 1) terms.push_back(m);
    }
    return F2Poly::from_terms(f.vars(), std::move(terms));
}

// One gate per nonzero coefficient, canonical order. Coefficients must lie in
// the dyadic constraint set c_T = 0 mod 2^{|T|-1}; the constant term is a
// global phase and is dropped (recorded on the circuit).
inline Circuit synthesize(const ZqPoly& f, int d, bool hadamard_frame = true) {
    if (f.q() != (1 << d)) throw std::invalid_argument("synthesize: modulus must be 2^d");
    Circuit c;
    c.n = f.vars();
    c.level = d;
    c.hadamard_frame = hadamard_frame;
    for (auto& [m, coef] : f.terms()) {
        if (m == 0) {
            c.dropped_constant = coef;
            continue;
        }
        int size = popcount64(m);
        if (size > d)
            throw std::invalid_argument("synthesize: monomial size exceeds the hierarchy level");
        int align = 1 << (size - 1);
        if (coef % align)
            throw std::invalid_argument("synthesize: coefficient outside the dyadic constraint set");
        c.gates.push_back({m, coef});
    }
    return c;
}

inline PhaseOracle oracle_from_circuit(const Circuit& c, std::uint64_t seed,
                                       std::uint64_t stream_id = 0) {
    ZqPoly f = phase_polynomial(c);
    if (auto f2 = binary_view(f, c.level))
        return PhaseOracle::binary(*f2, NoiseModel::none(), seed, stream_id);
    return PhaseOracle::generalized(f, seed, stream_id);
}

struct ReconstructReport {
    bool success = false;
    Circuit circuit;
    LearnReport learn;
};

// Learn the hidden circuit's phase polynomial from oracle samples and emit a
// circuit for it. Binary oracles take the partial-derivative route, which
// yields coefficients at the 2^{d-1} embedding; generalized oracles take the
// disequality route.
inline ReconstructReport reconstruct(PhaseOracle& o, int n, int d, int m_per_round) {
    ReconstructReport rep;
    if (o.is_binary()) {
        rep.learn = learn_binary(o, n, d, m_per_round);
        if (!rep.learn.success) return rep;
        rep.circuit = synthesize(embed_binary(*rep.learn.f2, 1 << d), d);
    } else {
        rep.learn = learn_generalized(o, n, d, 1 << d, m_per_round);
        if (!rep.learn.success) return rep;
        rep.circuit = synthesize(rep.learn.zq->without_constant(), d);
    }
    rep.success = true;
    return rep;
}

// Same state up to global phase: equal phase polynomials modulo the constant.
inline bool circuits_equivalent(const Circuit& a, const Circuit& b) {
    if (a.n != b.n || a.level != b.level) return false;
    return equivalent(phase_polynomial(a), phase_polynomial(b));
}

}  // namespace phaselearn
