// zqpoly.hpp - polynomials {0,1}^n -> Z_q with even q.
#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phaselearn/bits.hpp"
#include "phaselearn/f2poly.hpp"
#include "phaselearn/rng.hpp"

namespace phaselearn {

// f(x) = sum_J alpha_J prod_{j in J} x_j mod q. Zero coefficients are never
// stored; terms are kept in the canonical graded-lex monomial order.
// Learner paths additionally assume q = 2^d.
class ZqPoly {
public:
    ZqPoly() = default;
    ZqPoly(int vars, int q) : vars_(vars), q_(q) {
        if (vars < 0 || vars > 64) throw std::invalid_argument("ZqPoly: variable count must be in [0,64]");
        if (q < 2 || (q & 1)) throw std::invalid_argument("ZqPoly: modulus must be even and >= 2");
    }

    static ZqPoly zero(int vars, int q) { return ZqPoly(vars, q); }

    static ZqPoly from_terms(int vars, int q, std::vector<std::pair<Monomial, int>> terms) {
        ZqPoly f(vars, q);
        std::uint64_t range = vars == 64 ? ~std::uint64_t(0)
                                         : (std::uint64_t(1) << vars) - 1;
        std::sort(terms.begin(), terms.end(),
                  [](auto& a, auto& b) { return monomial_less(a.first, b.first); });
        for (std::size_t i = 0; i < terms.size();) {
            Monomial m = terms[i].first;
            if ((m & ~range) != 0) throw std::invalid_argument("ZqPoly: monomial out of range");
            long long c = 0;
            std::size_t j = i;
            while (j < terms.size() && terms[j].first == m) c += terms[j++].second;
            int cc = int(((c % q) + q) % q);
            if (cc != 0) f.terms_.push_back({m, cc});
            i = j;
        }
        return f;
    }

    int vars() const { return vars_; }
    int q() const { return q_; }
    const std::vector<std::pair<Monomial, int>>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree() const {
        int d = 0;
        for (auto& [m, c] : terms_) d = std::max(d, popcount64(m));
        return d;
    }

    int coeff(Monomial m) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                                   [](const std::pair<Monomial, int>& t, Monomial v) {
                                       return monomial_less(t.first, v);
                                   });
        return (it != terms_.end() && it->first == m) ? it->second : 0;
    }

    int eval(std::uint64_t x) const {
        long long acc = 0;
        for (auto& [m, c] : terms_)
            if ((x & m) == m) acc += c;
        return int(acc % q_);
    }

    ZqPoly without_constant() const {
        ZqPoly g = *this;
        if (!g.terms_.empty() && g.terms_.front().first == 0) g.terms_.erase(g.terms_.begin());
        return g;
    }

    bool operator==(const ZqPoly& o) const {
        return vars_ == o.vars_ && q_ == o.q_ && terms_ == o.terms_;
    }

private:
    int vars_ = 0;
    int q_ = 2;
    std::vector<std::pair<Monomial, int>> terms_;
};

// g(y) = f(y^{k=1}) - f(y^{k=0}) mod q over n-1 variables (indices above k
// shift down). Exactly the monomials containing k survive, with coefficients
// unchanged, so degree drops by at least one.
inline ZqPoly derivative_q(const ZqPoly& f, int k) {
    if (k < 1 || k > f.vars()) throw std::out_of_range("derivative_q: direction out of range");
    std::vector<std::pair<Monomial, int>> out;
    std::uint64_t km = std::uint64_t(1) << (k - 1);
    for (auto& [m, c] : f.terms())
        if (m & km) out.push_back({remove_bit(m, k), c});
    return ZqPoly::from_terms(f.vars() - 1, f.q(), std::move(out));
}

// True iff f - g is a constant function on {0,1}^n, i.e. the states differ
// only by a global phase.
inline bool equivalent(const ZqPoly& f, const ZqPoly& g) {
    if (f.vars() != g.vars() || f.q() != g.q())
        throw std::invalid_argument("equivalent: mismatched n or q");
    return f.without_constant() == g.without_constant();
}

// Exact fraction of x with f(x) != c, by full enumeration. Test oracle for
// the 2^-d miss-fraction bound.
inline double nonconstant_miss_fraction(const ZqPoly& f, int c, int enum_cap = 24) {
    if (f.vars() > enum_cap) throw std::invalid_argument("nonconstant_miss_fraction: n above enumeration cap");
    std::uint64_t total = std::uint64_t(1) << f.vars();
    std::uint64_t miss = 0;
    int cc = ((c % f.q()) + f.q()) % f.q();
    for (std::uint64_t x = 0; x < total; ++x) miss += (f.eval(x) != cc);
    return double(miss) / double(total);
}

// Binary polynomial embedded at the half-way coefficient: r*f' with q = 2r
// satisfies w_q^{r f'} = (-1)^{f'} pointwise.
inline ZqPoly embed_binary(const F2Poly& f, int q) {
    if (q & 1) throw std::invalid_argument("embed_binary: q must be even");
    std::vector<std::pair<Monomial, int>> terms;
    for (Monomial m : f.terms()) terms.push_back({m, q / 2});
    return ZqPoly::from_terms(f.vars(), q, std::move(terms));
}

// Uniform over P_q(n,d) with zero constant term.
inline ZqPoly random_zq_poly(int n, int d, int q, RngStream& rng) {
    if (d > n) throw std::invalid_argument("random_zq_poly: d > n");
    std::vector<std::pair<Monomial, int>> terms;
    for (Monomial m : monomials_up_to(n, d)) {
        if (m == 0) continue;
        int c = int(rng.below(std::uint64_t(q)));
        if (c) terms.push_back({m, c});
    }
    return ZqPoly::from_terms(n, q, std::move(terms));
}

// --- text format -----------------------------------------------------------
//
//   n=<n> q=<q> d=<d>
//   <coeff>:<sorted space-separated indices>
//
// Mirrors the F2 format; the constant term is dropped on write.

inline std::string to_text(const ZqPoly& f) {
    std::ostringstream os;
    os << "n=" << f.vars() << " q=" << f.q() << " d=" << f.degree() << "\n";
    for (auto& [m, c] : f.terms()) {
        if (m == 0) continue;
        os << c << ":";
        auto idx = monomial_indices(m);
        for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? " " : "") << idx[i];
        os << "\n";
    }
    return os.str();
}

inline ZqPoly zqpoly_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("zq polynomial text: empty input");
    int n = -1, q = -1, d = -1;
    if (std::sscanf(line.c_str(), "n=%d q=%d d=%d", &n, &q, &d) != 3)
        throw std::invalid_argument("zq polynomial text: bad header '" + line + "'");
    std::vector<std::pair<Monomial, int>> terms;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("zq polynomial text: missing ':' in '" + line + "'");
        int c = std::stoi(line.substr(0, colon));
        if (c < 1 || c >= q) throw std::invalid_argument("zq polynomial text: coefficient out of [1,q-1]");
        std::istringstream ls(line.substr(colon + 1));
        Monomial m = 0;
        int prev = 0, idx = 0, size = 0;
        while (ls >> idx) {
            if (idx < 1 || idx > n) throw std::invalid_argument("zq polynomial text: index out of range");
            if (idx <= prev) throw std::invalid_argument("zq polynomial text: indices must be sorted and distinct");
            m |= std::uint64_t(1) << (idx - 1);
            prev = idx;
            ++size;
        }
        if (!ls.eof()) throw std::invalid_argument("zq polynomial text: bad monomial line '" + line + "'");
        if (size == 0 || size > d) throw std::invalid_argument("zq polynomial text: monomial size out of range");
        for (auto& t : terms)
            if (t.first == m) throw std::invalid_argument("zq polynomial text: duplicate monomial");
        terms.push_back({m, c});
    }
    return ZqPoly::from_terms(n, q, std::move(terms));
}

}  // namespace phaselearn
