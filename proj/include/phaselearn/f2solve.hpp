// f2solve.hpp - bit-packed linear algebra over F2: solving, null spaces, and
// exact minimum-weight coset search.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaselearn/bits.hpp"
#include "phaselearn/f2poly.hpp"

namespace phaselearn {

struct SolveOutcome {
    enum class Status { Unique, Ambiguous, Inconsistent };
    Status status = Status::Inconsistent;
    BitVec particular;               // valid for Unique and Ambiguous
    std::vector<BitVec> null_basis;  // nonempty exactly when Ambiguous
    int rank = 0;
};

namespace detail {

// Row-reduce [A|b] to RREF with deterministic pivoting (lowest column index,
// first matching row). Returns pivot column per reduced row, or -1 rows
// dropped; fills rank and the consistency flag.
struct Rref {
    int rows = 0, cols = 0, words = 0, rank = 0;
    bool consistent = true;
    std::vector<std::uint64_t> m;  // row-major, cols+1 bits per row (b last)
    std::vector<int> pivot_col;    // size rank
    std::vector<int> col_to_pivot_row;  // size cols, -1 if free

    bool get(int r, int c) const { return (m[std::size_t(r) * words + (c >> 6)] >> (c & 63)) & 1; }
    void xor_rows(int dst, int src) {
        std::uint64_t* d = m.data() + std::size_t(dst) * words;
        const std::uint64_t* s = m.data() + std::size_t(src) * words;
        for (int i = 0; i < words; ++i) d[i] ^= s[i];
    }
};

inline Rref rref(const EvalMatrix& a, const BitVec& b) {
    if (a.rows != b.n) throw std::invalid_argument("gauss_solve: row count and label count differ");
    Rref r;
    r.rows = a.rows;
    r.cols = a.cols;
    r.words = (a.cols + 1 + 63) / 64;
    r.m.assign(std::size_t(r.rows) * r.words, 0);
    for (int i = 0; i < a.rows; ++i) {
        std::uint64_t* row = r.m.data() + std::size_t(i) * r.words;
        for (int c = 0; c < a.cols; ++c)
            if (a.get(i, c)) row[c >> 6] |= std::uint64_t(1) << (c & 63);
        if (b.get(i)) row[a.cols >> 6] |= std::uint64_t(1) << (a.cols & 63);
    }
    r.col_to_pivot_row.assign(a.cols, -1);
    int next = 0;
    for (int c = 0; c < r.cols && next < r.rows; ++c) {
        int sel = -1;
        for (int i = next; i < r.rows; ++i)
            if (r.get(i, c)) { sel = i; break; }
        if (sel < 0) continue;
        if (sel != next)
            for (int w = 0; w < r.words; ++w)
                std::swap(r.m[std::size_t(sel) * r.words + w], r.m[std::size_t(next) * r.words + w]);
        for (int i = 0; i < r.rows; ++i)
            if (i != next && r.get(i, c)) r.xor_rows(i, next);
        r.pivot_col.push_back(c);
        r.col_to_pivot_row[c] = next;
        ++next;
    }
    r.rank = next;
    for (int i = r.rank; i < r.rows; ++i)
        if (r.get(i, r.cols)) { r.consistent = false; break; }
    return r;
}

}  // namespace detail

// Exact solve of A beta = b over F2.
inline SolveOutcome gauss_solve(const EvalMatrix& a, const BitVec& b) {
    detail::Rref r = detail::rref(a, b);
    SolveOutcome out;
    out.rank = r.rank;
    if (!r.consistent) {
        out.status = SolveOutcome::Status::Inconsistent;
        return out;
    }
    out.particular = BitVec(a.cols);
    for (int i = 0; i < r.rank; ++i)
        if (r.get(i, a.cols)) out.particular.set(r.pivot_col[i], true);
    if (r.rank == a.cols) {
        out.status = SolveOutcome::Status::Unique;
        return out;
    }
    out.status = SolveOutcome::Status::Ambiguous;
    for (int c = 0; c < a.cols; ++c) {
        if (r.col_to_pivot_row[c] >= 0) continue;
        BitVec v(a.cols);
        v.set(c, true);
        for (int i = 0; i < r.rank; ++i)
            if (r.get(i, c)) v.set(r.pivot_col[i], true);
        out.null_basis.push_back(std::move(v));
    }
    return out;
}

struct MinWeightOutcome {
    enum class Status { Found, Ambiguous, Infeasible, BudgetExceeded };
    Status status = Status::Infeasible;
    BitVec solution;  // valid for Found
    int weight = -1;  // valid for Found and Ambiguous
    std::uint64_t nodes = 0;
};

namespace detail {

// Gray-code walk over the solution coset when the null space is small.
inline MinWeightOutcome min_weight_by_nullspace(const SolveOutcome& s, int s_cap) {
    MinWeightOutcome out;
    int k = int(s.null_basis.size());
    BitVec cur = s.particular;
    int best = -1;
    std::uint64_t best_count = 0;
    BitVec best_vec;
    auto consider = [&](const BitVec& v) {
        int w = v.popcount();
        if (w > s_cap) return;
        if (best < 0 || w < best) { best = w; best_count = 1; best_vec = v; }
        else if (w == best) ++best_count;
    };
    consider(cur);
    std::uint64_t total = std::uint64_t(1) << k;
    for (std::uint64_t g = 1; g < total; ++g) {
        int bit = std::countr_zero(g);
        cur.xor_with(s.null_basis[bit]);
        consider(cur);
    }
    out.nodes = total;
    if (best < 0) { out.status = MinWeightOutcome::Status::Infeasible; return out; }
    out.weight = best;
    if (best_count > 1) { out.status = MinWeightOutcome::Status::Ambiguous; return out; }
    out.status = MinWeightOutcome::Status::Found;
    out.solution = std::move(best_vec);
    return out;
}

// Support enumeration in increasing weight: branch over column choices,
// XOR-ing column vectors into the running residual. Exact for weight <= s_cap.
struct SupportSearch {
    int cols = 0, words = 0;
    std::vector<std::uint64_t> colvec;  // packed m-bit column vectors
    std::vector<std::uint64_t> target;
    std::uint64_t budget = 0, nodes = 0;
    std::vector<int> chosen;
    int found_count = 0;
    std::vector<int> first_support;
    bool over_budget = false;

    bool dfs(int start, int remaining, std::vector<std::uint64_t>& acc) {
        if (++nodes > budget) { over_budget = true; return true; }
        if (remaining == 0) {
            if (acc == target) {
                if (++found_count == 1) first_support = chosen;
                if (found_count >= 2) return true;
            }
            return false;
        }
        for (int c = start; c <= cols - remaining; ++c) {
            for (int w = 0; w < words; ++w) acc[w] ^= colvec[std::size_t(c) * words + w];
            chosen.push_back(c);
            bool stop = dfs(c + 1, remaining - 1, acc);
            chosen.pop_back();
            for (int w = 0; w < words; ++w) acc[w] ^= colvec[std::size_t(c) * words + w];
            if (stop) return true;
        }
        return false;
    }
};

inline MinWeightOutcome min_weight_by_support(const EvalMatrix& a, const BitVec& b, int s_cap,
                                              std::uint64_t budget) {
    MinWeightOutcome out;
    SupportSearch ss;
    ss.cols = a.cols;
    ss.words = (a.rows + 63) / 64;
    ss.budget = budget;
    ss.colvec.assign(std::size_t(a.cols) * ss.words, 0);
    for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < a.cols; ++c)
            if (a.get(r, c)) ss.colvec[std::size_t(c) * ss.words + (r >> 6)] |= std::uint64_t(1) << (r & 63);
    ss.target.assign(ss.words, 0);
    for (int r = 0; r < a.rows; ++r)
        if (b.get(r)) ss.target[r >> 6] |= std::uint64_t(1) << (r & 63);

    std::vector<std::uint64_t> acc(ss.words, 0);
    for (int w = 0; w <= s_cap && w <= a.cols; ++w) {
        ss.found_count = 0;
        ss.dfs(0, w, acc);
        out.nodes = ss.nodes;
        if (ss.over_budget) { out.status = MinWeightOutcome::Status::BudgetExceeded; return out; }
        if (ss.found_count >= 2) {
            out.status = MinWeightOutcome::Status::Ambiguous;
            out.weight = w;
            return out;
        }
        if (ss.found_count == 1) {
            out.status = MinWeightOutcome::Status::Found;
            out.weight = w;
            out.solution = BitVec(a.cols);
            for (int c : ss.first_support) out.solution.set(c, true);
            return out;
        }
    }
    out.status = MinWeightOutcome::Status::Infeasible;
    return out;
}

}  // namespace detail

// argmin |beta| subject to A beta = b and |beta| <= s_cap. Reports ambiguity
// when two distinct solutions share the minimum weight, infeasible when no
// solution of weight <= s_cap exists, and a distinct budget-exceeded status
// when the search-node cap is hit. Deterministic branching order.
inline MinWeightOutcome min_weight_solution(const EvalMatrix& a, const BitVec& b, int s_cap,
                                            std::uint64_t node_budget = 10'000'000,
                                            int nullspace_enum_cap = 24) {
    if (s_cap < 1) throw std::invalid_argument("min_weight_solution: s_cap must be >= 1");
    SolveOutcome s = gauss_solve(a, b);
    if (s.status == SolveOutcome::Status::Inconsistent) {
        MinWeightOutcome out;
        out.status = MinWeightOutcome::Status::Infeasible;
        return out;
    }
    if (s.status == SolveOutcome::Status::Unique) {
        MinWeightOutcome out;
        int w = s.particular.popcount();
        if (w > s_cap) { out.status = MinWeightOutcome::Status::Infeasible; return out; }
        out.status = MinWeightOutcome::Status::Found;
        out.solution = std::move(s.particular);
        out.weight = w;
        return out;
    }
    if (int(s.null_basis.size()) <= nullspace_enum_cap)
        return detail::min_weight_by_nullspace(s, s_cap);
    return detail::min_weight_by_support(a, b, s_cap, node_budget);
}

// Affine subspace a + span(basis) of F2^n; basis vectors kept linearly
// independent in reduced echelon form (distinct leading bits).
struct StabSupport {
    int n = 0;
    std::uint64_t a = 0;
    std::vector<std::uint64_t> basis;

    int dim() const { return int(basis.size()); }
    std::uint64_t size() const { return std::uint64_t(1) << dim(); }

    // Reduce v against the basis; zero result means v is in the span.
    std::uint64_t reduce(std::uint64_t v) const {
        for (std::uint64_t bv : basis) {
            std::uint64_t top = std::uint64_t(1) << (63 - std::countl_zero(bv));
            if (v & top) v ^= bv;
        }
        return v;
    }

    bool contains(std::uint64_t x) const { return reduce(x ^ a) == 0; }

    // Point for coordinate vector u in {0,1}^dim: a xor sum of chosen basis vectors.
    std::uint64_t point(std::uint64_t u) const {
        std::uint64_t x = a;
        for (int j = 0; j < dim(); ++j)
            if ((u >> j) & 1) x ^= basis[j];
        return x;
    }

    bool same_subspace(const StabSupport& o) const {
        if (n != o.n || dim() != o.dim()) return false;
        if (reduce(a ^ o.a) != 0) return false;
        for (std::uint64_t v : o.basis)
            if (reduce(v) != 0) return false;
        return true;
    }
};

// Plain-text bitmap of a packed matrix plus labels, for debugging solver
// inputs.
inline std::string to_bitmap(const EvalMatrix& a, const BitVec* b = nullptr) {
    std::string out;
    out.reserve(std::size_t(a.rows) * (a.cols + 4));
    for (int r = 0; r < a.rows; ++r) {
        for (int c = 0; c < a.cols; ++c) out += a.get(r, c) ? '1' : '.';
        if (b) {
            out += " | ";
            out += b->get(r) ? '1' : '.';
        }
        out += '\n';
    }
    return out;
}

// a = first point; basis spans {x xor a}. Every input point lies in the
// returned affine subspace.
inline StabSupport affine_basis(const std::vector<std::uint64_t>& points, int n) {
    if (points.empty()) throw std::invalid_argument("affine_basis: empty point list");
    StabSupport s;
    s.n = n;
    s.a = points[0];
    for (std::uint64_t x : points) {
        std::uint64_t v = s.reduce(x ^ s.a);
        if (v == 0) continue;
        s.basis.push_back(v);
        // Keep echelon form: eliminate the new leading bit from earlier rows.
        std::sort(s.basis.begin(), s.basis.end(), std::greater<std::uint64_t>());
        for (std::size_t i = s.basis.size(); i-- > 1;) {
            std::uint64_t top = std::uint64_t(1) << (63 - std::countl_zero(s.basis[i]));
            for (std::size_t j = 0; j < i; ++j)
                if (s.basis[j] & top) s.basis[j] ^= s.basis[i];
        }
    }
    return s;
}

}  // namespace phaselearn
