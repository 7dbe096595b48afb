// f2poly.hpp - multilinear polynomials over F2 in algebraic normal form.
#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaselearn/bits.hpp"
#include "phaselearn/rng.hpp"

namespace phaselearn {

// f(x) = sum_J prod_{j in J} x_j over F2, stored as the set of monomial masks
// present, kept sorted in the canonical graded-lex order. Immutable by
// convention after construction; safe to share across threads.
class F2Poly {
public:
    F2Poly() = default;
    explicit F2Poly(int vars) : vars_(vars) { check_vars(vars); }

    static F2Poly zero(int vars) { return F2Poly(vars); }

    static F2Poly from_terms(int vars, std::vector<Monomial> terms) {
        check_vars(vars);
        F2Poly f(vars);
        std::uint64_t range = vars == 64 ? ~std::uint64_t(0)
                                         : (std::uint64_t(1) << vars) - 1;
        for (Monomial m : terms)
            if ((m & ~range) != 0) throw std::invalid_argument("F2Poly: monomial out of range");
        std::sort(terms.begin(), terms.end(), monomial_less);
        // A repeated mask is an F2 cancellation, not an error.
        for (std::size_t i = 0; i < terms.size();) {
            std::size_t j = i;
            while (j < terms.size() && terms[j] == terms[i]) ++j;
            if ((j - i) & 1) f.terms_.push_back(terms[i]);
            i = j;
        }
        return f;
    }

    int vars() const { return vars_; }
    const std::vector<Monomial>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree() const {
        int d = 0;
        for (Monomial m : terms_) d = std::max(d, popcount64(m));
        return d;
    }

    // Number of nonempty monomials (the constant does not count).
    int sparsity() const {
        int s = 0;
        for (Monomial m : terms_) s += (m != 0);
        return s;
    }

    bool has_term(Monomial m) const {
        return std::binary_search(terms_.begin(), terms_.end(), m, monomial_less);
    }
    bool constant_term() const { return !terms_.empty() && terms_.front() == 0; }

    void toggle(Monomial m) {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), m, monomial_less);
        if (it != terms_.end() && *it == m) terms_.erase(it);
        else terms_.insert(it, m);
    }

    F2Poly without_constant() const {
        F2Poly g = *this;
        if (g.constant_term()) g.terms_.erase(g.terms_.begin());
        return g;
    }

    // XOR of monomial sets.
    F2Poly operator+(const F2Poly& o) const {
        if (vars_ != o.vars_) throw std::invalid_argument("F2Poly: variable count mismatch");
        F2Poly r(vars_);
        std::set_symmetric_difference(terms_.begin(), terms_.end(),
                                      o.terms_.begin(), o.terms_.end(),
                                      std::back_inserter(r.terms_), monomial_less);
        return r;
    }

    bool operator==(const F2Poly& o) const { return vars_ == o.vars_ && terms_ == o.terms_; }

    int eval(std::uint64_t x) const {
        int acc = 0;
        for (Monomial m : terms_) acc ^= int((x & m) == m);
        return acc;
    }

private:
    static void check_vars(int vars) {
        if (vars < 0 || vars > 64) throw std::invalid_argument("F2Poly: variable count must be in [0,64]");
    }
    int vars_ = 0;
    std::vector<Monomial> terms_;
};

inline bool equal_mod_constant(const F2Poly& a, const F2Poly& b) {
    return a.without_constant() == b.without_constant();
}

// Directional derivative D_k f(y) = f(y^{k=1}) + f(y^{k=0}) over n-1
// variables; indices above k shift down by one.
inline F2Poly derivative(const F2Poly& f, int k) {
    if (k < 1 || k > f.vars()) throw std::out_of_range("derivative: direction out of range");
    std::vector<Monomial> out;
    std::uint64_t km = std::uint64_t(1) << (k - 1);
    for (Monomial m : f.terms())
        if (m & km) out.push_back(remove_bit(m, k));
    return F2Poly::from_terms(f.vars() - 1, std::move(out));
}

// Reassemble f from its n directional derivatives: the coefficient of J is
// the majority of the J\{t} coefficients over the derivatives t in J. The
// constant term is canonicalized to zero (a phase state never determines it).
inline F2Poly stitch(const std::vector<F2Poly>& derivs) {
    int n = int(derivs.size());
    if (n == 0) return F2Poly::zero(0);
    for (const F2Poly& g : derivs)
        if (g.vars() != n - 1) throw std::invalid_argument("stitch: derivative over wrong variable count");
    std::vector<Monomial> candidates;
    for (int t = 1; t <= n; ++t)
        for (Monomial s : derivs[t - 1].terms())
            candidates.push_back(insert_bit(s, t, 1));
    std::sort(candidates.begin(), candidates.end(), monomial_less);
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<Monomial> out;
    for (Monomial j : candidates) {
        int votes = 0, voters = popcount64(j);
        for (std::uint64_t rest = j; rest;) {
            int t = std::countr_zero(rest) + 1;
            rest &= rest - 1;
            votes += derivs[t - 1].has_term(remove_bit(j, t));
        }
        if (2 * votes > voters) out.push_back(j);
    }
    return F2Poly::from_terms(n, std::move(out));
}

// Bit-packed m x |M(v, d-1)| matrix whose row k holds the evaluations of the
// k-th point under every monomial of size <= d-1, canonical column order.
struct EvalMatrix {
    int rows = 0;
    int cols = 0;
    int words_per_row = 0;
    std::vector<Monomial> col_monomials;
    std::vector<std::uint64_t> bits;  // row-major

    bool get(int r, int c) const {
        return (bits[std::size_t(r) * words_per_row + (c >> 6)] >> (c & 63)) & 1;
    }
    const std::uint64_t* row(int r) const { return bits.data() + std::size_t(r) * words_per_row; }
    std::uint64_t* row(int r) { return bits.data() + std::size_t(r) * words_per_row; }

    // Raw constructor for plain F2 systems (no monomial semantics).
    static EvalMatrix from_rows(const std::vector<std::vector<int>>& rows_in) {
        EvalMatrix a;
        a.rows = int(rows_in.size());
        a.cols = a.rows ? int(rows_in[0].size()) : 0;
        a.words_per_row = (a.cols + 63) / 64;
        a.bits.assign(std::size_t(a.rows) * a.words_per_row, 0);
        for (int r = 0; r < a.rows; ++r) {
            if (int(rows_in[r].size()) != a.cols)
                throw std::invalid_argument("EvalMatrix: ragged rows");
            for (int c = 0; c < a.cols; ++c)
                if (rows_in[r][c]) a.bits[std::size_t(r) * a.words_per_row + (c >> 6)] |= std::uint64_t(1) << (c & 63);
        }
        return a;
    }
};

// Rows of monomial evaluations used by the round-t linear systems: points
// live on v variables, columns are the monomials of size <= d-1.
inline EvalMatrix eval_matrix(const std::vector<std::uint64_t>& points, int vars, int d) {
    if (d < 1) throw std::invalid_argument("eval_matrix: degree bound must be >= 1");
    EvalMatrix a;
    a.col_monomials = monomials_up_to(vars, d - 1);
    a.rows = int(points.size());
    a.cols = int(a.col_monomials.size());
    a.words_per_row = (a.cols + 63) / 64;
    a.bits.assign(std::size_t(a.rows) * a.words_per_row, 0);
    for (int r = 0; r < a.rows; ++r) {
        std::uint64_t* row = a.row(r);
        for (int c = 0; c < a.cols; ++c) {
            Monomial m = a.col_monomials[c];
            if ((points[r] & m) == m) row[c >> 6] |= std::uint64_t(1) << (c & 63);
        }
    }
    return a;
}

// Coefficient vector (over the matrix's column order) back to a polynomial.
inline F2Poly poly_from_coeffs(const BitVec& beta, const std::vector<Monomial>& cols, int vars) {
    std::vector<Monomial> terms;
    for (int c = 0; c < int(cols.size()); ++c)
        if (beta.get(c)) terms.push_back(cols[c]);
    return F2Poly::from_terms(vars, std::move(terms));
}

// Uniform over P(n,d) with zero constant term.
inline F2Poly random_poly(int n, int d, RngStream& rng) {
    if (d > n) throw std::invalid_argument("random_poly: d > n");
    std::vector<Monomial> terms;
    for (Monomial m : monomials_up_to(n, d))
        if (m != 0 && rng.bit()) terms.push_back(m);
    return F2Poly::from_terms(n, std::move(terms));
}

// Uniform over supports of exactly s nonempty monomials of size <= d.
inline F2Poly random_sparse_poly(int n, int d, int s, RngStream& rng) {
    if (d > n) throw std::invalid_argument("random_sparse_poly: d > n");
    std::vector<Monomial> pool = monomials_up_to(n, d);
    pool.erase(pool.begin());  // drop the constant
    if (s < 0 || s > int(pool.size()))
        throw std::invalid_argument("random_sparse_poly: infeasible sparsity");
    for (int i = 0; i < s; ++i)
        std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    pool.resize(s);
    return F2Poly::from_terms(n, std::move(pool));
}

// Truth table of f on all 2^n points (n <= 24 guard), via the fast zeta
// transform over subsets.
inline std::vector<std::uint8_t> truth_table(const F2Poly& f) {
    int n = f.vars();
    if (n > 24) throw std::invalid_argument("truth_table: too many variables");
    std::vector<std::uint8_t> t(std::size_t(1) << n, 0);
    for (Monomial m : f.terms()) t[m] ^= 1;
    for (int i = 0; i < n; ++i)
        for (std::size_t x = 0; x < t.size(); ++x)
            if (x & (std::size_t(1) << i)) t[x] ^= t[x ^ (std::size_t(1) << i)];
    return t;
}

// --- text format -----------------------------------------------------------
//
//   n=<n> d=<d>
//   <sorted space-separated indices>     (one monomial per line)
//
// No monomial lines means the zero polynomial. The format covers canonical
// polynomials (zero constant term); writing drops any constant term.

inline std::string to_text(const F2Poly& f) {
    std::ostringstream os;
    os << "n=" << f.vars() << " d=" << f.degree() << "\n";
    for (Monomial m : f.terms()) {
        if (m == 0) continue;
        auto idx = monomial_indices(m);
        for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? " " : "") << idx[i];
        os << "\n";
    }
    return os.str();
}

inline F2Poly f2poly_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("polynomial text: empty input");
    int n = -1, d = -1;
    if (std::sscanf(line.c_str(), "n=%d d=%d", &n, &d) != 2)
        throw std::invalid_argument("polynomial text: bad header '" + line + "'");
    std::vector<Monomial> terms;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Monomial m = 0;
        int prev = 0, idx = 0, size = 0;
        while (ls >> idx) {
            if (idx < 1 || idx > n) throw std::invalid_argument("polynomial text: index out of range");
            if (idx <= prev) throw std::invalid_argument("polynomial text: indices must be sorted and distinct");
            m |= std::uint64_t(1) << (idx - 1);
            prev = idx;
            ++size;
        }
        if (!ls.eof()) throw std::invalid_argument("polynomial text: bad monomial line '" + line + "'");
        if (size == 0 || size > d) throw std::invalid_argument("polynomial text: monomial size out of range");
        for (Monomial seen : terms)
            if (seen == m) throw std::invalid_argument("polynomial text: duplicate monomial");
        terms.push_back(m);
    }
    return F2Poly::from_terms(n, std::move(terms));
}

}  // namespace phaselearn
