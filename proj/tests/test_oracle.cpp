#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "phaselearn/oracle.hpp"
#include "phaselearn/oracle_debug.hpp"

#include <cmath>
#include <map>
#include <vector>

using namespace phaselearn;

namespace {

Monomial mono(std::initializer_list<int> idx) {
    Monomial m = 0;
    for (int i : idx) m |= std::uint64_t(1) << (i - 1);
    return m;
}

F2Poly poly(int vars, std::initializer_list<std::initializer_list<int>> monos) {
    std::vector<Monomial> terms;
    for (auto& m : monos) terms.push_back(mono(m));
    return F2Poly::from_terms(vars, terms);
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("rpds returns the directional derivative at a uniform point") {
    auto zero = PhaseOracle::binary(F2Poly::zero(4), NoiseModel::none(), 1);
    for (int i = 0; i < 50; ++i) CHECK_EQ(zero.rpds(2).second, 0);

    auto o = PhaseOracle::binary(poly(4, {{1, 2}}), NoiseModel::none(), 2);
    for (int i = 0; i < 200; ++i) {
        auto [y, b] = o.rpds(1);
        CHECK_EQ(b, int(y & 1));  // D_1(x1 x2) = former x2
    }

    // b is a deterministic function of y given the hidden polynomial.
    auto o2 = PhaseOracle::binary(poly(5, {{1, 2, 3}, {2}, {4, 5}}), NoiseModel::none(), 3);
    const F2Poly& hidden = OracleInspector::binary_poly(o2);
    std::map<std::uint64_t, int> seen;
    for (int i = 0; i < 500; ++i) {
        auto [y, b] = o2.rpds(3);
        CHECK_EQ(b, derivative(hidden, 3).eval(y));
        auto it = seen.find(y);
        if (it != seen.end()) CHECK_EQ(it->second, b);
        seen[y] = b;
    }
    CHECK_EQ(o2.counter().copies, 500u);
    CHECK_EQ(o2.counter().rpds, 500u);
}

TEST_CASE("rpds points pass a chi-square uniformity test at n=6") {
    RngStream rng(4, 0);
    auto o = PhaseOracle::binary(random_poly(6, 3, rng), NoiseModel::none(), 5);
    const int draws = 100000, bins = 32;
    std::vector<int> count(bins, 0);
    for (int i = 0; i < draws; ++i) count[o.rpds(1).first]++;
    double expected = double(draws) / bins, stat = 0;
    for (int c : count) stat += (c - expected) * (c - expected) / expected;
    CHECK_LT(stat, 61.1);  // chi-square(31) at p = 0.001
}

TEST_CASE("rpds rejects wrong oracle kinds and noise") {
    auto gen = PhaseOracle::generalized(ZqPoly::zero(3, 4), 6);
    CHECK_THROWS_AS(gen.rpds(1), OracleError);
    auto noisy = PhaseOracle::binary(poly(3, {{1, 2}}), NoiseModel::global(0.1), 7);
    CHECK_THROWS_AS(noisy.rpds(1), OracleError);
    CHECK_THROWS_AS(noisy.povm_sample(1), OracleError);
}

TEST_CASE("povm outcome distribution follows the sine-squared law") {
    // q=4, c=2 at every point: f = 2 x1, direction 1.
    auto o = PhaseOracle::generalized(ZqPoly::from_terms(3, 4, {{mono({1}), 2}}), 8);
    const int draws = 100000;
    std::vector<int> count(4, 0);
    for (int i = 0; i < draws; ++i) count[o.povm_sample(1).second]++;
    CHECK_EQ(count[2], 0);  // Pr(c) = 0 exactly
    CHECK_EQ(std::abs(count[0] / double(draws) - 0.5) < 0.01, true);
    CHECK_EQ(std::abs(count[1] / double(draws) - 0.25) < 0.01, true);
    CHECK_EQ(std::abs(count[3] / double(draws) - 0.25) < 0.01, true);

    // q=2 reduces to a deterministic complement of the derivative bit.
    auto o2 = PhaseOracle::generalized(embed_binary(poly(3, {{1, 2}, {3}}), 2), 9);
    for (int i = 0; i < 200; ++i) {
        auto [y, b] = o2.povm_sample(2);
        int c = derivative(poly(3, {{1, 2}, {3}}), 2).eval(y);
        CHECK_EQ(b ^ 1, c);
    }
}

TEST_CASE("povm frequencies at q=8 match the closed form within 0.01") {
    // f = 3 x2 gives c = 3 along direction 2 at every point.
    auto o = PhaseOracle::generalized(ZqPoly::from_terms(4, 8, {{mono({2}), 3}}), 10);
    const int draws = 100000;
    std::vector<int> count(8, 0);
    for (int i = 0; i < draws; ++i) count[o.povm_sample(2).second]++;
    for (int b = 0; b < 8; ++b) {
        double s = std::sin(kPi * (3 - b) / 8.0);
        double want = 2.0 / 8.0 * s * s;
        CHECK_LT(std::abs(count[b] / double(draws) - want), 0.01);
    }
    CHECK_EQ(count[3], 0);
}

TEST_CASE("povm never returns the true difference") {
    RngStream rng(11, 0);
    auto f = random_zq_poly(5, 2, 4, rng);
    auto o = PhaseOracle::generalized(f, 12);
    const ZqPoly& hidden = OracleInspector::zq_poly(o);
    for (int i = 0; i < 20000; ++i) {
        int k = 1 + int(rng.below(5));
        auto [y, b] = o.povm_sample(k);
        int c = ((hidden.eval(insert_bit(y, k, 1)) - hidden.eval(insert_bit(y, k, 0))) % 4 + 4) % 4;
        CHECK_NE(b, c);
    }
}

TEST_CASE("bell sampling clean and noisy branches") {
    // eps = 0: w = (A+A^T) z always; A = 0 gives w = 0.
    auto zero = PhaseOracle::binary(F2Poly::zero(5), NoiseModel::global(0.0), 13);
    for (int i = 0; i < 100; ++i) CHECK_EQ(zero.bell_sample().w, 0u);

    F2Poly f = poly(6, {{1, 2}, {2, 5}, {3, 6}, {4}});
    auto clean = PhaseOracle::binary(f, NoiseModel::none(), 14);
    for (int i = 0; i < 500; ++i) {
        auto s = clean.bell_sample();
        // Independent check per row of B.
        for (int r = 1; r <= 6; ++r) {
            int want = 0;
            for (Monomial m : f.terms()) {
                if (popcount64(m) != 2 || !(m & mono({r}))) continue;
                std::uint64_t other = m & ~mono({r});
                want ^= int((s.z & other) != 0);
            }
            CHECK_EQ(int((s.w >> (r - 1)) & 1), want);
        }
    }
    CHECK_EQ(clean.counter().copies, 1000u);

    // eps = 0.5: w matches the clean value with frequency 0.25 + 0.75 2^-n.
    auto noisy = PhaseOracle::binary(f, NoiseModel::global(0.5), 15);
    const int draws = 100000;
    int match = 0;
    for (int i = 0; i < draws; ++i) {
        auto s = noisy.bell_sample();
        match += (s.w == OracleInspector::last_clean_bell(noisy).w);
    }
    double want = 0.25 + 0.75 / 64.0;
    CHECK_LT(std::abs(match / double(draws) - want), 0.01);
}

TEST_CASE("local bell sampling corrupts bits independently") {
    F2Poly f = poly(5, {{1, 2}, {3, 4}, {2, 5}});
    auto o = PhaseOracle::binary(f, NoiseModel::local(0.0), 16);
    for (int i = 0; i < 100; ++i) {
        auto s = o.bell_sample_local();
        auto clean = OracleInspector::last_clean_bell(o);
        CHECK_EQ(s.z, clean.z);
        CHECK_EQ(s.w, clean.w);
    }

    auto all = PhaseOracle::binary(f, NoiseModel::local(1.0), 17);
    const int draws = 100000;
    std::vector<int> zmatch(5, 0), wmatch(5, 0);
    for (int i = 0; i < draws; ++i) {
        auto s = all.bell_sample_local();
        auto clean = OracleInspector::last_clean_bell(all);
        for (int b = 0; b < 5; ++b) {
            zmatch[b] += int(((s.z ^ clean.z) >> b) & 1) ^ 1;
            wmatch[b] += int(((s.w ^ clean.w) >> b) & 1) ^ 1;
        }
    }
    for (int b = 0; b < 5; ++b) {
        CHECK_LT(std::abs(zmatch[b] / double(draws) - 0.5), 0.01);
        CHECK_LT(std::abs(wmatch[b] / double(draws) - 0.5), 0.01);
    }

    auto mid = PhaseOracle::binary(f, NoiseModel::local(0.3), 18);
    std::vector<int> agree(10, 0);
    for (int i = 0; i < draws; ++i) {
        auto s = mid.bell_sample_local();
        auto clean = OracleInspector::last_clean_bell(mid);
        for (int b = 0; b < 5; ++b) {
            agree[b] += int(((s.z ^ clean.z) >> b) & 1) ^ 1;
            agree[5 + b] += int(((s.w ^ clean.w) >> b) & 1) ^ 1;
        }
    }
    double keep = 0.49, want = keep + (1 - keep) / 2;
    for (int b = 0; b < 10; ++b)
        CHECK_LT(std::abs(agree[b] / double(draws) - want), 0.01);
}

TEST_CASE("basis sampling is uniform over the affine support") {
    StabSupport fixed;
    fixed.n = 3;
    fixed.a = 0b101;
    auto point = PhaseOracle::stabilizer(fixed, ZqPoly::zero(3, 4), 19);
    for (int i = 0; i < 50; ++i) CHECK_EQ(point.basis_sample(), 0b101u);

    StabSupport full;
    full.n = 4;
    full.a = 0;
    full.basis = {0b1000, 0b0100, 0b0010, 0b0001};
    auto o = PhaseOracle::stabilizer(full, ZqPoly::zero(4, 4), 20);
    const int draws = 100000;
    std::vector<int> count(16, 0);
    for (int i = 0; i < draws; ++i) count[o.basis_sample()]++;
    double expected = draws / 16.0, stat = 0;
    for (int c : count) stat += (c - expected) * (c - expected) / expected;
    CHECK_LT(stat, 37.7);  // chi-square(15) at p = 0.001

    RngStream rng(21, 0);
    StabSupport sub;
    sub.n = 6;
    sub.a = rng.bits(6);
    while (sub.dim() < 3) {
        std::uint64_t v = sub.reduce(rng.bits(6));
        if (v) sub.basis.push_back(v);
    }
    auto o2 = PhaseOracle::stabilizer(sub, ZqPoly::zero(6, 4), 22);
    for (int i = 0; i < 1000; ++i) CHECK(sub.contains(o2.basis_sample()));
}

TEST_CASE("bv readout of a linear residual") {
    auto exact = PhaseOracle::binary(poly(6, {{1}, {3}}), NoiseModel::global(0.0), 23);
    for (int i = 0; i < 50; ++i) CHECK_EQ(exact.bv_sample(), mono({1, 3}));
    auto zero = PhaseOracle::binary(F2Poly::zero(6), NoiseModel::global(0.0), 24);
    CHECK_EQ(zero.bv_sample(), 0u);

    auto quad = PhaseOracle::binary(poly(3, {{1, 2}}), NoiseModel::none(), 25);
    CHECK_THROWS_AS(quad.bv_sample(), OracleError);

    auto noisy = PhaseOracle::binary(poly(8, {{2}, {5}}), NoiseModel::global(0.4), 26);
    const int draws = 100000;
    int hit = 0;
    for (int i = 0; i < draws; ++i) hit += (noisy.bv_sample() == mono({2, 5}));
    double want = 0.6 + 0.4 / 256.0;
    CHECK_LT(std::abs(hit / double(draws) - want), 0.01);
}

TEST_CASE("apply_correction shifts the hidden polynomial") {
    F2Poly f = poly(5, {{1, 2}, {3}, {4, 5}});
    auto o = PhaseOracle::binary(f, NoiseModel::global(0.0), 27);
    auto cancelled = o.apply_correction(f);
    CHECK_EQ(cancelled.bv_sample(), 0u);

    auto same = o.apply_correction(F2Poly::zero(5));
    CHECK_EQ(OracleInspector::binary_poly(same), f);

    // Correct away the off-diagonal part of a quadratic: residual is the
    // diagonal, recoverable by one exact bv readout.
    F2Poly quad = poly(4, {{1, 2}, {2, 3}, {1}, {4}});
    F2Poly offdiag = poly(4, {{1, 2}, {2, 3}});
    auto oq = PhaseOracle::binary(quad, NoiseModel::global(0.0), 28);
    auto corrected = oq.apply_correction(offdiag);
    CHECK_EQ(OracleInspector::binary_poly(corrected), quad + offdiag);
    CHECK_EQ(corrected.bv_sample(), mono({1, 4}));

    // Shared copy accounting across derived oracles.
    CHECK_EQ(oq.counter().copies, corrected.counter().copies);
    CHECK_THROWS_AS(o.apply_correction(F2Poly::zero(4)), OracleError);
}

TEST_CASE("povm in a support-aligned frame") {
    RngStream rng(29, 0);
    StabSupport sup;
    sup.n = 6;
    sup.a = rng.bits(6);
    while (sup.dim() < 3) {
        std::uint64_t v = sup.reduce(rng.bits(6));
        if (v) sup.basis.push_back(v);
    }
    std::vector<std::pair<Monomial, int>> terms;
    for (Monomial m : monomials_up_to(6, 2)) {
        if (m == 0) continue;
        int c = popcount64(m) == 2 ? 2 * int(rng.bit()) : int(rng.below(4));
        if (c) terms.push_back({m, c});
    }
    ZqPoly f = ZqPoly::from_terms(6, 4, terms);
    auto o = PhaseOracle::stabilizer(sup, f, 30);

    // A re-derived frame for the same subspace is accepted; the sampled
    // disequality always holds for h(u) = f(point(u)).
    std::vector<std::uint64_t> pts;
    for (int i = 0; i < 32; ++i) pts.push_back(sup.point(rng.bits(3)));
    StabSupport frame = affine_basis(pts, 6);
    REQUIRE(frame.same_subspace(sup));
    for (int i = 0; i < 2000; ++i) {
        int k = 1 + int(rng.below(3));
        auto [y, b] = o.povm_sample_in_frame(frame, k);
        int c = (f.eval(frame.point(insert_bit(y, k, 1))) -
                 f.eval(frame.point(insert_bit(y, k, 0))) + 8) % 4;
        CHECK_NE(b, c);
    }

    StabSupport wrong = frame;
    wrong.a ^= wrong.n ? 1u : 0u;
    if (!wrong.same_subspace(sup)) CHECK_THROWS_AS(o.povm_sample_in_frame(wrong, 1), OracleError);
}

TEST_CASE("stabilizer construction validates the phase polynomial") {
    StabSupport s;
    s.n = 3;
    CHECK_THROWS_AS(PhaseOracle::stabilizer(s, ZqPoly::from_terms(3, 4, {{mono({1, 2}), 1}}), 31),
                    OracleError);
    CHECK_THROWS_AS(PhaseOracle::stabilizer(s, ZqPoly::zero(3, 8), 32), OracleError);
}
