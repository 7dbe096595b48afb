// pgm.hpp - dense complex-vector numerics for entangled-measurement and
// noise-bound checks at tiny scale: second-moment averages, pretty good
// measurement success probabilities, depolarized GHZ trace distances, and
// measurement entropies.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "phaselearn/f2poly.hpp"
#include "phaselearn/rng.hpp"
#include "phaselearn/zqpoly.hpp"

namespace phaselearn {

// Total Hilbert dimension cap for dense work: 2^{n M} entries in a state,
// squared for operators.
inline constexpr std::uint64_t kDenseDimCap = std::uint64_t(1) << 14;

struct StateVector {
    int n = 0;
    Eigen::VectorXcd amp;
};

// |psi_f> with amplitudes (-1)^{f(x)} / sqrt(2^n).
inline StateVector build_state(const F2Poly& f) {
    if ((std::uint64_t(1) << f.vars()) > kDenseDimCap)
        throw std::invalid_argument("build_state: dense cap exceeded");
    std::uint64_t dim = std::uint64_t(1) << f.vars();
    StateVector s;
    s.n = f.vars();
    s.amp.resize(dim);
    double norm = 1.0 / std::sqrt(double(dim));
    for (std::uint64_t x = 0; x < dim; ++x)
        s.amp[x] = f.eval(x) ? -norm : norm;
    return s;
}

// |psi_f> with amplitudes w_q^{f(x)} / sqrt(2^n).
inline StateVector build_state(const ZqPoly& f) {
    if ((std::uint64_t(1) << f.vars()) > kDenseDimCap)
        throw std::invalid_argument("build_state: dense cap exceeded");
    std::uint64_t dim = std::uint64_t(1) << f.vars();
    StateVector s;
    s.n = f.vars();
    s.amp.resize(dim);
    double norm = 1.0 / std::sqrt(double(dim));
    constexpr double pi = 3.14159265358979323846;
    for (std::uint64_t x = 0; x < dim; ++x) {
        double theta = 2.0 * pi * f.eval(x) / double(f.q());
        s.amp[x] = std::polar(norm, theta);
    }
    return s;
}

struct Ensemble {
    int n = 0;
    int copies = 1;  // M
    std::vector<StateVector> members;
};

// All binary phase states of P(n,d); optionally duplicated over the constant
// term (duplicates are equal up to global phase, i.e. the same density
// matrix).
inline Ensemble binary_ensemble(int n, int d, int copies, bool include_constant) {
    std::vector<Monomial> monos = monomials_up_to(n, d);
    monos.erase(monos.begin());
    if (monos.size() > 24) throw std::invalid_argument("binary_ensemble: polynomial family too large");
    Ensemble e;
    e.n = n;
    e.copies = copies;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << monos.size()); ++mask) {
        std::vector<Monomial> terms;
        for (std::size_t i = 0; i < monos.size(); ++i)
            if ((mask >> i) & 1) terms.push_back(monos[i]);
        for (int c = 0; c < (include_constant ? 2 : 1); ++c) {
            auto t = terms;
            if (c) t.push_back(0);
            e.members.push_back(build_state(F2Poly::from_terms(n, t)));
        }
    }
    return e;
}

namespace detail {

inline Eigen::VectorXcd kron_power(const Eigen::VectorXcd& v, int m) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Ones(1);
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXcd next(out.size() * v.size());
        for (Eigen::Index a = 0; a < out.size(); ++a)
            for (Eigen::Index b = 0; b < v.size(); ++b)
                next[a * v.size() + b] = out[a] * v[b];
        out = std::move(next);
    }
    return out;
}

}  // namespace detail

// Success probabilities of the pretty good measurement on M-copy blocks:
// S = sum sigma_f, E_f = S^{-1/2} sigma_f S^{-1/2},
// Pr(f) = <Psi_f|S^{-1/2}|Psi_f>^2 with the inverse square root taken over
// eigenvalues above the threshold.
inline std::vector<double> pgm_success(const Ensemble& e, double eig_threshold = 1e-10) {
    std::uint64_t dim = 1;
    for (int i = 0; i < e.copies; ++i) {
        dim *= std::uint64_t(1) << e.n;
        if (dim > kDenseDimCap) throw std::invalid_argument("pgm_success: dense cap exceeded");
    }
    std::vector<Eigen::VectorXcd> blocks;
    blocks.reserve(e.members.size());
    for (auto& s : e.members) blocks.push_back(detail::kron_power(s.amp, e.copies));

    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(Eigen::Index(dim), Eigen::Index(dim));
    for (auto& b : blocks) gram.noalias() += b * b.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
    if (eig.info() != Eigen::Success) throw std::runtime_error("pgm_success: eigendecomposition failed");
    if (eig.eigenvalues().minCoeff() < -1e-10)
        throw std::runtime_error("pgm_success: Gram matrix not positive semidefinite");

    std::vector<double> pr;
    pr.reserve(blocks.size());
    for (auto& b : blocks) {
        Eigen::VectorXcd proj = eig.eigenvectors().adjoint() * b;
        double amp = 0.0;
        for (Eigen::Index i = 0; i < proj.size(); ++i) {
            double lambda = eig.eigenvalues()[i];
            if (lambda > eig_threshold) amp += std::norm(proj[i]) / std::sqrt(lambda);
        }
        pr.push_back(amp * amp);
    }
    return pr;
}

// Max-norm error of POVM completeness: || sum_f E_f - P_support ||_max where
// P_support is the projector onto the support of S. A direct numeric check
// that the computed inverse square root behaves like one.
inline double pgm_completeness_error(const Ensemble& e, double eig_threshold = 1e-10) {
    std::uint64_t dim = 1;
    for (int i = 0; i < e.copies; ++i) dim *= std::uint64_t(1) << e.n;
    if (dim > kDenseDimCap) throw std::invalid_argument("pgm_completeness_error: dense cap exceeded");
    std::vector<Eigen::VectorXcd> blocks;
    for (auto& s : e.members) blocks.push_back(detail::kron_power(s.amp, e.copies));
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(Eigen::Index(dim), Eigen::Index(dim));
    for (auto& b : blocks) gram.noalias() += b * b.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);

    Eigen::MatrixXcd inv_sqrt = Eigen::MatrixXcd::Zero(Eigen::Index(dim), Eigen::Index(dim));
    Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(Eigen::Index(dim), Eigen::Index(dim));
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        double lambda = eig.eigenvalues()[i];
        if (lambda <= eig_threshold) continue;
        Eigen::VectorXcd v = eig.eigenvectors().col(i);
        inv_sqrt.noalias() += v * v.adjoint() / std::sqrt(lambda);
        proj.noalias() += v * v.adjoint();
    }
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(Eigen::Index(dim), Eigen::Index(dim));
    for (auto& b : blocks) {
        Eigen::VectorXcd u = inv_sqrt * b;
        total.noalias() += u * u.adjoint();
    }
    return (total - proj).cwiseAbs().maxCoeff();
}

// (1/m) sum over ordered pairs f != g of |<psi_f|psi_g>|^{2k}; the quantity
// whose smallness certifies that k copies suffice for the PGM.
inline double avg_pairwise_overlap(const Ensemble& e, int k) {
    double acc = 0.0;
    std::size_t m = e.members.size();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            std::complex<double> ip = e.members[i].amp.dot(e.members[j].amp);
            acc += std::pow(std::abs(ip), 2 * k);
        }
    return acc / double(m);
}

struct SecondMomentReport {
    int n = 0, d = 0;
    bool exact = true;
    std::uint64_t family_size = 0;  // polynomials averaged
    double max_abs_diff = 0.0;      // vs the closed form
    double std_error = 0.0;         // 0 in exact mode
};

// E_f[|psi_f><psi_f|^{x2}] over uniform degree-d polynomials versus the
// closed form (I + SWAP)/4^n + |Phi+><Phi+|/2^n - (2/4^n) sum_x |xx><xx|.
// Exact enumeration up to 2^20 polynomials; uniform Monte Carlo with a
// reported standard error beyond that.
inline SecondMomentReport second_moment_average(int n, int d, std::uint64_t mc_samples = 1 << 16,
                                                std::uint64_t exact_cap = std::uint64_t(1) << 20,
                                                std::uint64_t seed = 1) {
    if (d < 2) throw std::invalid_argument("second_moment_average: requires d >= 2");
    if (n > 5) throw std::invalid_argument("second_moment_average: n above dense cap");
    SecondMomentReport rep;
    rep.n = n;
    rep.d = d;
    std::vector<Monomial> monos = monomials_up_to(n, d);
    monos.erase(monos.begin());
    int nm = int(monos.size());
    std::uint64_t family = nm >= 63 ? ~std::uint64_t(0) : (std::uint64_t(1) << nm);
    rep.exact = family <= exact_cap;
    std::uint64_t count = rep.exact ? family : mc_samples;
    rep.family_size = count;
    rep.std_error = rep.exact ? 0.0 : 1.0 / std::sqrt(double(count));

    std::uint64_t dim = std::uint64_t(1) << n;      // 2^n
    std::uint64_t pairs = dim * dim;                // 4^n row indices (w,x)
    std::size_t words = std::size_t((count + 63) / 64);

    // signs[(w,x)] over the family: bit_i = f_i(w) xor f_i(x).
    std::vector<std::uint64_t> signs(pairs * words, 0);
    RngStream rng(seed, 0);
    std::vector<std::uint8_t> tt(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t mask = rep.exact ? i : rng.bits(nm);
        std::vector<Monomial> terms;
        for (int b = 0; b < nm; ++b)
            if ((mask >> b) & 1) terms.push_back(monos[b]);
        F2Poly f = F2Poly::from_terms(n, terms);
        auto table = truth_table(f);
        for (std::uint64_t x = 0; x < dim; ++x) tt[x] = table[x];
        std::uint64_t word = i >> 6, bit = i & 63;
        for (std::uint64_t w = 0; w < dim; ++w)
            for (std::uint64_t x = 0; x < dim; ++x)
                if (tt[w] ^ tt[x]) signs[(w * dim + x) * words + word] |= std::uint64_t(1) << bit;
    }

    double scale = 1.0 / double(pairs);  // 1/4^n
    double max_diff = 0.0;
    for (std::uint64_t r = 0; r < pairs; ++r) {
        std::uint64_t w = r / dim, x = r % dim;
        const std::uint64_t* rw = signs.data() + r * words;
        for (std::uint64_t c = r; c < pairs; ++c) {
            std::uint64_t y = c / dim, z = c % dim;
            const std::uint64_t* cw = signs.data() + c * words;
            std::int64_t ham = 0;
            for (std::size_t k = 0; k < words; ++k) ham += popcount64(rw[k] ^ cw[k]);
            double avg = double(std::int64_t(count) - 2 * ham) / double(count);
            double got = avg * scale;
            double want = ((w == y && x == z ? 1.0 : 0.0) + (w == z && x == y ? 1.0 : 0.0) +
                           (w == x && y == z ? 1.0 : 0.0) -
                           (w == x && x == y && y == z ? 2.0 : 0.0)) *
                          scale;
            max_diff = std::max(max_diff, std::abs(got - want));
        }
    }
    rep.max_abs_diff = max_diff;
    return rep;
}

// Exact n-qubit tensor-power of the single-qubit depolarizing channel applied
// to a density matrix.
inline Eigen::MatrixXcd depolarize_all(Eigen::MatrixXcd rho, int n, double eps) {
    std::uint64_t dim = std::uint64_t(1) << n;
    for (int jq = 0; jq < n; ++jq) {
        std::uint64_t bit = std::uint64_t(1) << jq;
        Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(Eigen::Index(dim), Eigen::Index(dim));
        for (std::uint64_t r = 0; r < dim; ++r)
            for (std::uint64_t c = 0; c < dim; ++c) {
                std::complex<double> v = (1.0 - eps) * rho(Eigen::Index(r), Eigen::Index(c));
                if ((r & bit) == (c & bit)) {
                    std::uint64_t r0 = r & ~bit, c0 = c & ~bit;
                    v += eps * 0.5 *
                         (rho(Eigen::Index(r0), Eigen::Index(c0)) +
                          rho(Eigen::Index(r0 | bit), Eigen::Index(c0 | bit)));
                }
                next(Eigen::Index(r), Eigen::Index(c)) = v;
            }
        rho = std::move(next);
    }
    return rho;
}

// Trace distance between the n-fold depolarized GHZ-like states
// (|0^n> +- |1^n>)/sqrt(2); equals 2 (1-eps)^n exactly.
inline double ghz_noise_distance(int n, double eps) {
    std::uint64_t dim = std::uint64_t(1) << n;
    if (dim > kDenseDimCap) throw std::invalid_argument("ghz_noise_distance: dense cap exceeded");
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(Eigen::Index(dim));
    Eigen::VectorXcd minus = Eigen::VectorXcd::Zero(Eigen::Index(dim));
    double r = 1.0 / std::sqrt(2.0);
    plus[0] = r;
    plus[Eigen::Index(dim - 1)] = r;
    minus[0] = r;
    minus[Eigen::Index(dim - 1)] = -r;
    Eigen::MatrixXcd dp = depolarize_all(plus * plus.adjoint(), n, eps);
    Eigen::MatrixXcd dm = depolarize_all(minus * minus.adjoint(), n, eps);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dp - dm);
    return eig.eigenvalues().cwiseAbs().sum();
}

enum class BasisChoice { Identity, HadamardAll, RandomSeeded };

// Haar-ish random unitary via QR of a seeded complex Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(std::uint64_t dim, std::uint64_t seed) {
    RngStream rng(seed, 0);
    Eigen::Index idim = Eigen::Index(dim);
    Eigen::MatrixXcd a(idim, idim);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            a(i, j) = std::complex<double>(rng.normal(), rng.normal());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    return q;
}

// Average over all f in P(n,d) of the Shannon entropy (bits) of the outcome
// distribution |<x|U|psi_f>|^2.
inline double measurement_entropy(int n, int d, BasisChoice basis, std::uint64_t seed = 0) {
    if (n > 4) throw std::invalid_argument("measurement_entropy: n above enumeration cap");
    if (d < 2) throw std::invalid_argument("measurement_entropy: requires d >= 2");
    std::uint64_t dim = std::uint64_t(1) << n;
    Eigen::MatrixXcd u;
    if (basis == BasisChoice::RandomSeeded) u = random_unitary(dim, seed);

    std::vector<Monomial> monos = monomials_up_to(n, d);
    monos.erase(monos.begin());
    int nm = int(monos.size());
    double total = 0.0;
    std::uint64_t family = std::uint64_t(1) << nm;
    for (std::uint64_t mask = 0; mask < family; ++mask) {
        std::vector<Monomial> terms;
        for (int b = 0; b < nm; ++b)
            if ((mask >> b) & 1) terms.push_back(monos[b]);
        StateVector s = build_state(F2Poly::from_terms(n, terms));
        Eigen::VectorXcd out;
        switch (basis) {
            case BasisChoice::Identity: out = s.amp; break;
            case BasisChoice::HadamardAll: {
                out = s.amp;
                for (std::uint64_t len = 1; len < dim; len <<= 1)
                    for (std::uint64_t i = 0; i < dim; i += len << 1)
                        for (std::uint64_t j = i; j < i + len; ++j) {
                            auto a = out[Eigen::Index(j)], b = out[Eigen::Index(j + len)];
                            out[Eigen::Index(j)] = a + b;
                            out[Eigen::Index(j + len)] = a - b;
                        }
                out /= std::sqrt(double(dim));
                break;
            }
            case BasisChoice::RandomSeeded: out = u * s.amp; break;
        }
        double h = 0.0;
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            double p = std::norm(out[i]);
            if (p > 1e-300) h -= p * std::log2(p);
        }
        total += h;
    }
    return total / double(family);
}

}  // namespace phaselearn
