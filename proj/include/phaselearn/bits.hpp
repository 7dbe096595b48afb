// bits.hpp - packed F2 vectors, monomial masks and their canonical order.
#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phaselearn {

// A monomial over variables x_1..x_64 is a bitmask: bit i-1 <-> variable x_i.
// The empty mask is the constant monomial 1.
using Monomial = std::uint64_t;

inline int popcount64(std::uint64_t v) { return std::popcount(v); }
inline int parity64(std::uint64_t v) { return std::popcount(v) & 1; }

// Canonical monomial order: graded by size, then lexicographic on the sorted
// index lists ({1,4} before {2,3}). Every matrix column order, file format and
// test in this project depends on this order.
inline bool monomial_less(Monomial a, Monomial b) {
    int pa = popcount64(a), pb = popcount64(b);
    if (pa != pb) return pa < pb;
    if (a == b) return false;
    std::uint64_t diff = a ^ b;
    return (a & (diff & -diff)) != 0;
}

// All monomials over `vars` variables of size <= max_size, canonical order.
inline std::vector<Monomial> monomials_up_to(int vars, int max_size) {
    if (vars < 0 || vars > 64) throw std::invalid_argument("monomials_up_to: bad variable count");
    std::vector<Monomial> out;
    out.push_back(0);
    std::vector<int> idx;
    for (int k = 1; k <= max_size && k <= vars; ++k) {
        idx.assign(k, 0);
        for (int i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            Monomial m = 0;
            for (int i : idx) m |= std::uint64_t(1) << i;
            out.push_back(m);
            int p = k - 1;
            while (p >= 0 && idx[p] == vars - k + p) --p;
            if (p < 0) break;
            ++idx[p];
            for (int i = p + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
        }
    }
    return out;
}

inline std::vector<int> monomial_indices(Monomial m) {
    std::vector<int> out;
    while (m) {
        int b = std::countr_zero(m);
        out.push_back(b + 1);
        m &= m - 1;
    }
    return out;
}

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    if (k > n - k) k = n - k;
    for (int i = 1; i <= k; ++i) r = r * std::uint64_t(n - k + i) / std::uint64_t(i);
    return r;
}

inline std::uint64_t count_monomials_up_to(int vars, int max_size) {
    std::uint64_t total = 0;
    for (int j = 0; j <= max_size; ++j) total += binomial(vars, j);
    return total;
}

// Insert a bit with the given value at 1-based position k (bits at and above
// k shift up). Maps an (n-1)-bit point y to the n-bit point y^{k=value}.
inline std::uint64_t insert_bit(std::uint64_t y, int k, int value) {
    std::uint64_t low = y & ((std::uint64_t(1) << (k - 1)) - 1);
    std::uint64_t high = k == 64 ? 0 : (y >> (k - 1)) << k;
    return high | (std::uint64_t(value) << (k - 1)) | low;
}

// Delete the bit at 1-based position k (bits above k shift down).
inline std::uint64_t remove_bit(std::uint64_t x, int k) {
    std::uint64_t low = x & ((std::uint64_t(1) << (k - 1)) - 1);
    std::uint64_t high = k == 64 ? 0 : (x >> k) << (k - 1);
    return high | low;
}

// Growable packed bit vector for coefficient/label vectors wider than 64 bits.
struct BitVec {
    int n = 0;
    std::vector<std::uint64_t> w;

    BitVec() = default;
    explicit BitVec(int nbits) : n(nbits), w((nbits + 63) / 64, 0) {}

    bool get(int i) const { return (w[i >> 6] >> (i & 63)) & 1; }
    void set(int i, bool v) {
        std::uint64_t mask = std::uint64_t(1) << (i & 63);
        if (v) w[i >> 6] |= mask; else w[i >> 6] &= ~mask;
    }
    void flip(int i) { w[i >> 6] ^= std::uint64_t(1) << (i & 63); }
    void xor_with(const BitVec& o) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] ^= o.w[i];
    }
    int popcount() const {
        int c = 0;
        for (auto x : w) c += popcount64(x);
        return c;
    }
    bool is_zero() const {
        for (auto x : w) if (x) return false;
        return true;
    }
    bool operator==(const BitVec& o) const { return n == o.n && w == o.w; }

    std::string to_string() const {
        std::string s(n, '0');
        for (int i = 0; i < n; ++i) if (get(i)) s[i] = '1';
        return s;
    }
};

}  // namespace phaselearn
