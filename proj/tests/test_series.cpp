#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <hardy/series.hpp>

using namespace hardy;
using R = Real128;
using C = Complex128;

namespace {

double err(const R& a, const R& b) { return static_cast<double>(abs(R(a - b))); }
double err(const C& a, const C& b) { return static_cast<double>(abs(C(a - b))); }

const double eps128 = static_cast<double>(std::numeric_limits<R>::epsilon());

}  // namespace

TEST(HarmonicNumbers, SmallCases) {
    auto h0 = harmonic_numbers<Rational>(0);
    ASSERT_EQ(h0.size(), 1u);
    EXPECT_EQ(h0[0], 0);
    auto h3 = harmonic_numbers<Rational>(3);
    EXPECT_EQ(h3[1], Rational(1));
    EXPECT_EQ(h3[2], Rational(3, 2));
    EXPECT_EQ(h3[3], Rational(11, 6));
}

TEST(HarmonicNumbers, HundredDigitsAgainstPlainHighPrecisionSum) {
    // compensated sum at ~101 digits vs an uncompensated reverse-order sum at 154 digits
    using R336 = Float<336>;
    using R512 = Float<512>;
    const std::size_t N = 100000;
    auto h = harmonic_numbers<R336>(N);
    R512 ref(0);
    for (std::size_t m = N; m >= 1; --m) ref += R512(1) / R512(m);
    R512 rel = abs(R512(R512(h[N]) - ref)) / ref;
    EXPECT_LT(rel, R512("1e-90"));
}

TEST(GkCoefficients, ExamplesAgainstLogSeries) {
    auto g = gk_coefficients<R>(2, 3);
    using std::log;
    EXPECT_LT(err(g[0], R(-log(R(2)))), 4 * eps128);
    EXPECT_EQ(g[1], R(1));
    EXPECT_EQ(g[2], R(-1) / R(2));
    EXPECT_EQ(g[3], R(1) / R(3));
    auto g3 = gk_coefficients<LogLinear>(3, 6);
    EXPECT_EQ(g3[6], LogLinear(Rational(-1, 3)));
    EXPECT_EQ(g3[0], LogLinear(Rational(0), Rational(-1)));
    for (unsigned k : {2u, 7u, 31u}) {
        EXPECT_LT(err(gk_coefficients<R>(k, 0)[0], R(-log(R(k)))), 4 * eps128);
    }
}

TEST(GkCoefficients, RejectsSmallK) {
    EXPECT_THROW(gk_coefficients<R>(1, 5), std::invalid_argument);
    EXPECT_THROW(hk_coefficients<R>(0, 5), std::invalid_argument);
}

TEST(FormalLog, OnePlusZ) {
    TruncatedSeries<Rational> P;
    P.coeffs = {1, 1};
    auto L = formal_log_series(P, 4);
    std::vector<Rational> expect{0, 1, Rational(-1, 2), Rational(1, 3), Rational(-1, 4)};
    EXPECT_EQ(L.coeffs, expect);
}

TEST(FormalLog, Constant) {
    TruncatedSeries<R> P;
    P.coeffs = {R(5)};
    auto L = formal_log_series(P, 6);
    using std::log;
    EXPECT_LT(err(L[0], R(log(R(5)))), 4 * eps128);
    for (std::size_t n = 1; n <= 6; ++n) EXPECT_EQ(L[n], R(0));
}

TEST(FormalLog, RejectsBranchPoint) {
    TruncatedSeries<R> P;
    P.coeffs = {R(0), R(1)};
    EXPECT_THROW(formal_log_series(P, 3), std::domain_error);
}

TEST(FormalLog, SatisfiesDerivativeRelation) {
    // L' P = P' up to order N-1, checked exactly over the rationals
    TruncatedSeries<Rational> P;
    P.coeffs = {1, Rational(2, 3), Rational(-1, 5), Rational(1, 7)};
    const std::size_t N = 12;
    auto L = formal_log_series(P, N);
    for (std::size_t n = 0; n + 1 <= N; ++n) {
        Rational lhs = 0;
        for (std::size_t m = 0; m <= n && m < P.coeffs.size(); ++m) lhs += Rational(n - m + 1) * L[n - m + 1] * P[m];
        Rational rhs = n + 1 < P.coeffs.size() ? Rational(n + 1) * P[n + 1] : Rational(0);
        EXPECT_EQ(lhs, rhs) << "n=" << n;
    }
}

TEST(GkCoefficients, ClosedFormMatchesFormalLog) {
    for (unsigned k = 2; k <= 50; k += 3) {
        TruncatedSeries<R> P;
        P.coeffs.assign(k, R(1) / R(k));
        const std::size_t N = 600;
        auto L = formal_log_series(P, N);
        auto g = gk_coefficients<R>(k, N);
        for (std::size_t n = 0; n <= N; ++n) {
            double scale = std::max(1.0, std::abs(static_cast<double>(g[n])));
            ASSERT_LE(err(L[n], g[n]), 10 * eps128 * scale) << "k=" << k << " n=" << n;
        }
    }
}

TEST(GkCoefficients, ClosedFormMatchesFormalLogExactly) {
    // with P(0) scaled to 1 the rational parts must agree exactly: log(P/P(0)) = g_k + log k
    for (unsigned k : {2u, 3u, 6u}) {
        TruncatedSeries<Rational> P;
        P.coeffs.assign(k, Rational(1));
        auto L = formal_log_series(P, 60);
        auto g = gk_coefficients<LogLinear>(k, 60);
        for (std::size_t n = 1; n <= 60; ++n) {
            EXPECT_EQ(L[n], g[n].rational);
            EXPECT_EQ(g[n].log_multiple, 0);
        }
    }
}

TEST(HkCoefficients, KTwoExample) {
    auto h = hk_coefficients<R>(2, 4);
    const double expect[] = {-0.6931471805599453, 0.3068528194400547, -0.1931471805599453, 0.1401861527733880,
                             -0.1098138472266120};
    for (int n = 0; n <= 4; ++n) EXPECT_NEAR(static_cast<double>(h[n]), expect[n], 1e-15);
    auto hx = hk_coefficients<LogLinear>(2, 4);
    EXPECT_EQ(hx[4], LogLinear(Rational(25, 12) - Rational(3, 2), Rational(-1)));
}

TEST(HkCoefficients, ConstantTerm) {
    for (unsigned k : {2u, 9u, 40u}) {
        auto h = hk_coefficients<LogLinear>(k, 0);
        EXPECT_EQ(h[0], LogLinear(Rational(0), Rational(-1)));
    }
}

TEST(HkCoefficients, CumulativeSumsOfGkExactly) {
    for (unsigned k : {2u, 3u, 5u, 12u}) {
        auto h = hk_coefficients<LogLinear>(k, 400);
        auto g = gk_coefficients<LogLinear>(k, 400);
        EXPECT_EQ(div_by_one_minus_z(g).coeffs, h.coeffs);
        EXPECT_EQ(mul_by_one_minus_z(h).coeffs, g.coeffs);
    }
}

TEST(HkCoefficients, FloatMatchesExactEvaluation) {
    for (unsigned k : {2u, 7u}) {
        auto h = hk_coefficients<R>(k, 300);
        auto hx = hk_coefficients<LogLinear>(k, 300);
        for (std::size_t n = 0; n <= 300; ++n) EXPECT_LT(err(h[n], hx[n].evaluate<R>(k)), 8 * eps128);
    }
}

TEST(HkCoefficients, DecayBound) {
    // |h_k(n)| <= (7/6) k/n for n >= k, and the looser 2k/n for n >= 2k^2, up to n = 10^6
    const std::size_t N = 1000000;
    auto H = harmonic_numbers<R>(N);
    double worst_ratio = 0.0;
    for (unsigned k : {2u, 3u, 5u, 10u, 20u, 50u, 100u}) {
        auto h = hk_coefficients<R, R>(k, N, std::span<const R>(H));
        for (std::size_t n = k; n <= N; ++n) {
            double a = std::abs(static_cast<double>(h[n]));
            double ratio = a * static_cast<double>(n) / k;
            worst_ratio = std::max(worst_ratio, ratio);
            ASSERT_LE(ratio, kHkDecayConstant) << "k=" << k << " n=" << n;
            if (n >= 2ull * k * k) ASSERT_LE(a, 2.0 * k / static_cast<double>(n));
        }
    }
    EXPECT_GT(worst_ratio, 0.2);  // the bound is not vacuous
    auto h5 = hk_coefficients<R>(5, N);
    EXPECT_LE(std::abs(static_cast<double>(h5[N])), 2.0 * 5 / 1e6);
}

TEST(ShiftFactors, Examples) {
    TruncatedSeries<Rational> c;
    c.coeffs = {3, 0, 0, 0};
    EXPECT_EQ(mul_by_one_minus_z(c).coeffs, (std::vector<Rational>{3, -3, 0, 0}));
    TruncatedSeries<Rational> one;
    one.coeffs = {1, 0, 0, 0, 0};
    EXPECT_EQ(div_by_one_minus_z(one).coeffs, (std::vector<Rational>{1, 1, 1, 1, 1}));
    TruncatedSeries<Rational> zero;
    zero.coeffs = {0, 0, 0};
    EXPECT_EQ(div_by_one_minus_z(zero).coeffs, zero.coeffs);
}

TEST(ShiftFactors, InversePairOnRandomRationals) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        TruncatedSeries<Rational> f;
        for (int n = 0; n < 30; ++n) f.coeffs.emplace_back(long(rng() % 201) - 100, long(rng() % 17) + 1);
        EXPECT_EQ(mul_by_one_minus_z(div_by_one_minus_z(f)).coeffs, f.coeffs);
        EXPECT_EQ(div_by_one_minus_z(mul_by_one_minus_z(f)).coeffs, f.coeffs);
    }
}

TEST(ShiftFactors, HkToGkInFloat) {
    auto h = hk_coefficients<R>(6, 5000);
    auto g = gk_coefficients<R>(6, 5000);
    auto mg = mul_by_one_minus_z(h);
    for (std::size_t n = 0; n <= 5000; ++n) ASSERT_LT(err(mg[n], g[n]), 16 * eps128);
}

TEST(Rotation, IdentityAndInverse) {
    auto h = hk_coefficients<R>(4, 200);
    auto one = RotationParameter<R>::from_turns(0);
    auto u = rotate(h, one);
    for (std::size_t n = 0; n <= 200; ++n) EXPECT_EQ(u[n], C(h[n], R(0)));
    auto zeta = RotationParameter<R>::from_turns(0.1234);
    auto back = RotationParameter<R>::from_angle(R(-zeta.angle()));
    auto w = rotate(rotate(h, zeta), back);
    for (std::size_t n = 0; n <= 200; ++n) EXPECT_LT(err(w[n], C(h[n], R(0))), 1e-34);
}

TEST(Rotation, RejectsNonUnimodular) {
    EXPECT_THROW(RotationParameter<R>::from_complex(C(R("1.001"), R(0))), std::domain_error);
    EXPECT_NO_THROW(RotationParameter<R>::from_complex(C(R(0), R(-1))));
}

TEST(Rotation, QuarterTurnsAreExact) {
    auto z = RotationParameter<R>::from_turns(0.25).value();
    EXPECT_EQ(z, C(R(0), R(1)));
    auto m = RotationParameter<R>::from_turns(0.5).value();
    EXPECT_EQ(m, C(R(-1), R(0)));
}

TEST(Rotation, RotationIdentityFloat) {
    // (zeta - z) h_k(conj(zeta) z) = zeta g_k(conj(zeta) z)
    std::mt19937_64 rng(11);
    for (unsigned k : {2u, 5u, 13u}) {
        auto h = hk_coefficients<R>(k, 1000);
        auto g = gk_coefficients<R>(k, 1000);
        for (int t = 0; t < 5; ++t) {
            auto zeta = RotationParameter<R>::from_turns(static_cast<double>(rng() >> 11) * 0x1.0p-53);
            C z = zeta.value();
            auto lhs = mul_by_zeta_minus_z(rotate(h, zeta), z);
            auto rhs = rotate(g, zeta);
            for (std::size_t n = 0; n <= 1000; ++n) ASSERT_LT(err(lhs[n], C(z * rhs[n])), 1e-33);
        }
    }
}

TEST(Rotation, RotationIdentityExactGaussian) {
    // rational unimodular zeta, on the rational and the log k parts separately
    const unsigned k = 3;
    auto hx = hk_coefficients<LogLinear>(k, 40);
    auto gx = gk_coefficients<LogLinear>(k, 40);
    for (Rational t : {Rational(1, 2), Rational(3, 7), Rational(-5, 4)}) {
        Gaussian<Rational> z = rational_unimodular(t);
        Gaussian<Rational> zc = conjugate(z);
        for (int part = 0; part < 2; ++part) {
            auto pick = [&](const LogLinear& v) { return part == 0 ? v.rational : v.log_multiple; };
            TruncatedSeries<Gaussian<Rational>> uh, ug;
            Gaussian<Rational> p{1, 0};
            for (std::size_t n = 0; n <= 40; ++n) {
                uh.coeffs.push_back(p * Gaussian<Rational>{pick(hx[n]), 0});
                ug.coeffs.push_back(p * Gaussian<Rational>{pick(gx[n]), 0});
                p = p * zc;
            }
            auto lhs = mul_by_zeta_minus_z(uh, z);
            for (std::size_t n = 0; n <= 40; ++n) EXPECT_EQ(lhs[n], z * ug[n]);
        }
    }
}

TEST(Rotation, RotationIdentitySymbolic) {
    SymbolicZeta zs;
    for (unsigned k : {2u, 9u}) {
        auto lhs = mul_by_zeta_minus_z(rotate(hk_coefficients<LogLinear>(k, 300), zs), zs);
        auto rg = rotate(gk_coefficients<LogLinear>(k, 300), zs);
        for (std::size_t n = 0; n <= 300; ++n) EXPECT_EQ(lhs[n], times_zeta(zs, rg[n]));
    }
}

TEST(Deflation, Examples) {
    TruncatedSeries<R> z;
    z.coeffs = {R(0), R(1), R(0), R(0)};
    auto d = deflate_at(z, R(1), R(1));
    EXPECT_EQ(d.quotient.coeffs, (std::vector<R>{R(1), R(0), R(0), R(0)}));

    auto zeta = RotationParameter<R>::from_turns(0.3).value();
    TruncatedSeries<C> z2;
    z2.coeffs = {C(0), C(0), C(1), C(0), C(0)};
    auto d2 = deflate_at(z2, C(zeta * zeta), zeta);
    EXPECT_LT(err(d2.quotient[0], zeta), 1e-36);
    EXPECT_LT(err(d2.quotient[1], C(1)), 1e-36);
    for (std::size_t n = 2; n < 5; ++n) EXPECT_LT(err(d2.quotient[n], C(0)), 1e-36);
    EXPECT_TRUE(d2.converged);
}

TEST(Deflation, RoundTripExact) {
    std::mt19937_64 rng(3);
    for (Rational t : {Rational(2), Rational(1, 3)}) {
        Gaussian<Rational> zeta = rational_unimodular(t);
        TruncatedSeries<Gaussian<Rational>> f;
        for (int n = 0; n < 25; ++n) f.coeffs.push_back({Rational(long(rng() % 19) - 9, 4), Rational(long(rng() % 7) - 3)});
        Gaussian<Rational> a{Rational(5, 3), Rational(-1, 2)};
        auto g = deflate_at(f, a, zeta).quotient;
        // a + (z - zeta) g = f up to order N - 1
        for (std::size_t n = 0; n + 1 < f.coeffs.size(); ++n) {
            Gaussian<Rational> v = Gaussian<Rational>{0, 0} - zeta * g[n];
            if (n == 0) v += a;
            if (n > 0) v += g[n - 1];
            EXPECT_EQ(v, f[n]) << n;
        }
    }
}

TEST(Deflation, HkAtOneDecays) {
    auto h = hk_coefficients<R>(2, 1 << 16);
    auto d = deflate_at(h, R(-0.5), R(1), 1e-4);
    EXPECT_TRUE(d.converged);
    EXPECT_LT(d.residual, 1e-5);
    auto bad = deflate_at(h, R(-0.4), R(1));
    EXPECT_FALSE(bad.converged);
}

TEST(InnerProduct, ConstantAndMonomialTargets) {
    for (unsigned k : {2u, 6u}) {
        auto h = hk_coefficients<R>(k, 500);
        auto one = monomial_series<R>(0, 500);
        auto ip = inner_product(one, h);
        using std::log;
        EXPECT_LT(err(ip.value, R(-log(R(k)))), 4 * eps128);
        EXPECT_EQ(ip.tail_bound, 0.0);
        auto z7 = monomial_series<R>(7, 500);
        EXPECT_EQ(inner_product(z7, h).value, h[7]);
    }
}

TEST(InnerProduct, TailBoundSelfConsistency) {
    auto h_small = hk_coefficients<R>(2, 100000);
    auto h_big = hk_coefficients<R>(2, 1000000);
    auto a = inner_product(h_small, h_small);
    auto b = inner_product(h_big, h_big);
    EXPECT_LE(std::abs(static_cast<double>(b.value - a.value)), a.tail_bound);
    EXPECT_NEAR(a.tail_bound, std::pow(kHkDecayConstant * 2, 2) / 100000, 1e-15);
}

TEST(InnerProduct, ConjugateSymmetricAndPositive) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        TruncatedSeries<C> f, g;
        const int len = 1 + int(rng() % 40);
        for (int n = 0; n < len; ++n) {
            f.coeffs.push_back(C(R(u(rng)), R(u(rng))));
            g.coeffs.push_back(C(R(u(rng)), R(u(rng))));
        }
        auto fg = inner_product(f, g).value;
        auto gf = inner_product(g, f).value;
        EXPECT_LT(err(fg, C(conj(gf))), 1e-35);
        auto ff = inner_product(f, f).value;
        EXPECT_GT(real(ff), R(0));
        EXPECT_EQ(imag(ff), R(0));
    }
}

TEST(Determinism, RepeatedGenerationIsBitIdentical) {
    auto a = hk_coefficients<R>(17, 20000);
    auto b = hk_coefficients<R>(17, 20000);
    EXPECT_EQ(a.coeffs, b.coeffs);
    EXPECT_EQ(inner_product(a, a).value, inner_product(b, b).value);
}
