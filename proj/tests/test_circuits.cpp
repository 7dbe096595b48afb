#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "phaselearn/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

using namespace phaselearn;

namespace {

Monomial mono(std::initializer_list<int> idx) {
    Monomial m = 0;
    for (int i : idx) m |= std::uint64_t(1) << (i - 1);
    return m;
}

// Random circuit from the binary gate set {Z, CZ, CCZ}.
Circuit random_binary_circuit(int n, int d, int gates, RngStream& rng) {
    Circuit c;
    c.n = n;
    c.level = d;
    c.hadamard_frame = true;
    for (int i = 0; i < gates; ++i) {
        int size = 1 + int(rng.below(std::uint64_t(std::min(d, 3))));
        Monomial m = 0;
        while (popcount64(m) < size) m |= std::uint64_t(1) << rng.below(std::uint64_t(n));
        c.gates.push_back({m, 1 << (d - 1)});
    }
    return c;
}

// Random circuit from the dyadic generator set: numerators 2^{|T|-1} times an
// odd or even factor, always inside the constraint set.
Circuit random_dyadic_circuit(int n, int d, int gates, RngStream& rng) {
    Circuit c;
    c.n = n;
    c.level = d;
    c.hadamard_frame = true;
    int q = 1 << d;
    for (int i = 0; i < gates; ++i) {
        int size = 1 + int(rng.below(std::uint64_t(d)));
        Monomial m = 0;
        while (popcount64(m) < size) m |= std::uint64_t(1) << rng.below(std::uint64_t(n));
        int align = 1 << (size - 1);
        int a = align * (1 + int(rng.below(std::uint64_t(q / align - 1))));
        c.gates.push_back({m, a});
    }
    return c;
}

}  // namespace

TEST_CASE("parse accepts the documented grammar") {
    Circuit c = parse_circuit("n=3 d=3\nH all\nCCZ 1 2 3\nZ 2\nH all\n");
    CHECK_EQ(c.n, 3);
    CHECK_EQ(c.level, 3);
    CHECK(c.hadamard_frame);
    REQUIRE_EQ(c.gates.size(), 2u);
    CHECK_EQ(c.gates[0].targets, mono({1, 2, 3}));
    CHECK_EQ(c.gates[0].numerator, 4);
    CHECK_EQ(c.gates[1].targets, mono({2}));

    Circuit p = parse_circuit("n=3 d=3\nCPHASE 1 2 : 1 / 4\n");
    REQUIRE_EQ(p.gates.size(), 1u);
    CHECK_EQ(p.gates[0].targets, mono({1, 2}));
    CHECK_EQ(p.gates[0].numerator, 1);
    CHECK_FALSE(p.hadamard_frame);

    // Comments and blank lines are fine.
    Circuit k = parse_circuit("# graph state\nn=2 d=2\n\nCZ 1 2  # edge\n");
    CHECK_EQ(k.gates.size(), 1u);
}

TEST_CASE("parse rejects malformed circuits with line numbers") {
    auto line_of = [](const std::string& text) {
        try {
            parse_circuit(text);
        } catch (const CircuitParseError& e) {
            return e.line_no;
        }
        return -1;
    };
    CHECK_EQ(line_of("n=3 d=2\nCZ 1 1\n"), 2);            // duplicate target
    CHECK_EQ(line_of("n=3 d=2\nCZ 0 2\n"), 2);            // target out of range
    CHECK_EQ(line_of("n=3 d=2\nCCZ 1 2 3\n"), 2);         // |T| > d
    CHECK_EQ(line_of("n=3 d=2\nCPHASE 1 : 4 / 2\n"), 2);  // numerator range
    CHECK_EQ(line_of("n=3 d=2\nCPHASE 1 : 1 / 4\n"), 2);  // wrong denominator
    CHECK_EQ(line_of("n=3 d=2\nX 1\n"), 2);               // non-diagonal gate
    CHECK_EQ(line_of("n=3 d=2\nH 1\n"), 2);               // partial Hadamard
    CHECK_EQ(line_of("n=3 d=2\nH all\nCZ 1 2\n"), 3);     // unmatched frame
    CHECK_EQ(line_of("d=2\nCZ 1 2\n"), 1);                // bad header
}

TEST_CASE("phase polynomial accumulates gate numerators") {
    Circuit cz = parse_circuit("n=2 d=2\nCZ 1 2\n");
    ZqPoly f = phase_polynomial(cz);
    CHECK_EQ(f.q(), 4);
    CHECK_EQ(f.coeff(mono({1, 2})), 2);  // (-1)^{x1 x2}

    Circuit twice = parse_circuit("n=3 d=3\nCCZ 1 2 3\nCCZ 1 2 3\n");
    CHECK(phase_polynomial(twice).is_zero());
}

TEST_CASE("phase polynomial equals the product of per-gate phases pointwise") {
    RngStream rng(51, 0);
    constexpr double pi = 3.14159265358979323846;
    for (int trial = 0; trial < 30; ++trial) {
        Circuit c = random_dyadic_circuit(6, 3, 20, rng);
        ZqPoly f = phase_polynomial(c);
        for (std::uint64_t x = 0; x < 64; ++x) {
            std::complex<double> prod = 1.0;
            for (const Gate& g : c.gates)
                if ((x & g.targets) == g.targets)
                    prod *= std::polar(1.0, pi * g.numerator / double(1 << (c.level - 1)));
            std::complex<double> want = std::polar(1.0, 2.0 * pi * f.eval(x) / double(f.q()));
            CHECK_LT(std::abs(prod - want), 1e-9);
        }
    }
}

TEST_CASE("phase polynomial is invariant under gate reordering") {
    RngStream rng(52, 0);
    for (int trial = 0; trial < 20; ++trial) {
        Circuit c = random_dyadic_circuit(5, 3, 12, rng);
        Circuit shuffled = c;
        for (std::size_t i = shuffled.gates.size(); i > 1; --i)
            std::swap(shuffled.gates[i - 1], shuffled.gates[rng.below(i)]);
        CHECK_EQ(phase_polynomial(c), phase_polynomial(shuffled));
    }
}

TEST_CASE("synthesize inverts phase_polynomial") {
    CHECK(synthesize(ZqPoly::zero(3, 4), 2).gates.empty());

    ZqPoly single = ZqPoly::from_terms(2, 4, {{mono({1, 2}), 2}});
    Circuit c = synthesize(single, 2);
    REQUIRE_EQ(c.gates.size(), 1u);
    CHECK_EQ(to_text(c), "n=2 d=2\nH all\nCZ 1 2\nH all\n");

    RngStream rng(53, 0);
    for (int trial = 0; trial < 200; ++trial) {
        Circuit orig = random_dyadic_circuit(6, 3, 15, rng);
        ZqPoly f = phase_polynomial(orig);
        CHECK_EQ(phase_polynomial(synthesize(f, 3)), f);
    }

    // Constants are dropped as a global phase but recorded.
    ZqPoly with_const = ZqPoly::from_terms(2, 4, {{0, 3}, {mono({1}), 1}});
    Circuit dropped = synthesize(with_const, 2);
    CHECK_EQ(dropped.dropped_constant, 3);
    CHECK_EQ(phase_polynomial(dropped), with_const.without_constant());

    // Coefficient outside the dyadic constraint set.
    CHECK_THROWS(synthesize(ZqPoly::from_terms(2, 4, {{mono({1, 2}), 1}}), 2));
}

TEST_CASE("generator words always satisfy the dyadic constraint") {
    // Generators Z^{1/2^{d-1}} and C^i Z^{1/2^j} with i + j = d - 1 carry
    // numerator 2^{|T|-1}; random words stay synthesizable.
    RngStream rng(54, 0);
    int d = 3, n = 5;
    for (int trial = 0; trial < 100; ++trial) {
        Circuit c;
        c.n = n;
        c.level = d;
        int len = 1 + int(rng.below(20));
        for (int g = 0; g < len; ++g) {
            int i = int(rng.below(std::uint64_t(d)));  // controls; |T| = i+1
            Monomial m = 0;
            while (popcount64(m) < i + 1) m |= std::uint64_t(1) << rng.below(std::uint64_t(n));
            c.gates.push_back({m, 1 << i});
        }
        ZqPoly f = phase_polynomial(c);
        for (auto& [m, coef] : f.terms()) {
            if (m == 0) continue;
            CHECK_EQ(coef % (1 << (popcount64(m) - 1)), 0);
        }
        CHECK_EQ(phase_polynomial(synthesize(f, d)), f);
    }
}

TEST_CASE("circuit text round-trips") {
    RngStream rng(55, 0);
    for (int trial = 0; trial < 50; ++trial) {
        Circuit c = synthesize(phase_polynomial(random_dyadic_circuit(6, 3, 10, rng)), 3);
        Circuit back = parse_circuit(to_text(c));
        CHECK_EQ(back.n, c.n);
        CHECK_EQ(back.level, c.level);
        CHECK_EQ(back.hadamard_frame, c.hadamard_frame);
        CHECK(circuits_equivalent(back, c));
        CHECK_EQ(to_text(back), to_text(c));
    }
}

TEST_CASE("binary view exists exactly for half-multiple coefficients") {
    ZqPoly f = ZqPoly::from_terms(3, 8, {{mono({1, 2}), 4}, {mono({3}), 4}});
    auto v = binary_view(f, 3);
    REQUIRE(v.has_value());
    CHECK(v->has_term(mono({1, 2})));
    CHECK(v->has_term(mono({3})));
    ZqPoly g = ZqPoly::from_terms(3, 8, {{mono({1, 2}), 2}});
    CHECK_FALSE(binary_view(g, 3).has_value());
}

TEST_CASE("reconstruct a single-CZ circuit") {
    Circuit hidden = parse_circuit("n=4 d=2\nH all\nCZ 2 3\nH all\n");
    auto o = oracle_from_circuit(hidden, 61);
    CHECK(o.is_binary());
    auto rep = reconstruct(o, 4, 2, 64);
    REQUIRE(rep.success);
    CHECK(circuits_equivalent(rep.circuit, hidden));
    REQUIRE_EQ(rep.circuit.gates.size(), 1u);
    CHECK_EQ(rep.circuit.gates[0].targets, mono({2, 3}));
}

TEST_CASE("reconstruct binary and dyadic circuits") {
    RngStream rng(62, 0);
    int ok = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Circuit hidden = random_binary_circuit(6, 3, 15, rng);
        auto o = oracle_from_circuit(hidden, 63, trial);
        REQUIRE(o.is_binary());
        auto rep = reconstruct(o, 6, 3, 4 * 8 * int(count_monomials_up_to(5, 2)));
        if (rep.success && circuits_equivalent(rep.circuit, hidden)) ++ok;
    }
    CHECK_GE(ok, 19);

    int okd = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Circuit hidden = random_dyadic_circuit(4, 2, 8, rng);
        ZqPoly f = phase_polynomial(hidden);
        auto o = oracle_from_circuit(hidden, 64, trial);
        auto rep = reconstruct(o, 4, 2, 160);
        if (rep.success && equivalent(phase_polynomial(rep.circuit), f)) ++okd;
    }
    CHECK_GE(okd, 19);
}
