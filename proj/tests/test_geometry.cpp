#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "twosphere/geometry.hpp"

using namespace twosphere;

namespace {

// log-uniform half-gaps in [1e-8, 1e3]
std::vector<double> random_gaps(int count, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> e(-8.0, 3.0);
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(std::pow(10.0, e(rng)));
    }
    return out;
}

double binom(int n, int k)
{
    return std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0));
}

} // namespace

TEST(Frame, DefiningRelationsHoldForRandomGaps)
{
    for (double h : random_gaps(500, 7)) {
        const auto f = frame_from_gap(h);
        EXPECT_NEAR(std::cosh(f.alpha) / (1.0 + h), 1.0, 1e-12) << h;
        EXPECT_NEAR(f.c * f.c / (h * (2.0 + h)), 1.0, 1e-12) << h;
        EXPECT_GT(f.alpha, 0.0);
        EXPECT_GT(f.c, 0.0);
    }
}

TEST(Frame, ReferenceGapHalf)
{
    // sqrt(1.25) and arccosh(1.5) at 20 digits (mpmath)
    const auto f = frame_from_gap(0.5);
    EXPECT_NEAR(f.c, 1.1180339887498948482, 1e-15);
    EXPECT_NEAR(f.alpha, 0.962423650119206895, 1e-15);
}

TEST(Frame, ShrinksMonotonicallyAsGapCloses)
{
    double prev_a = INFINITY, prev_c = INFINITY;
    for (double h = 1.0; h > 1e-10; h *= 0.5) {
        const auto f = frame_from_gap(h);
        EXPECT_LT(f.alpha, prev_a);
        EXPECT_LT(f.c, prev_c);
        prev_a = f.alpha;
        prev_c = f.c;
    }
    EXPECT_LT(prev_a, 1e-4);
}

TEST(Frame, RejectsBadGaps)
{
    EXPECT_THROW((void)frame_from_gap(0.0), DomainError);
    EXPECT_THROW((void)frame_from_gap(-1.0), DomainError);
    EXPECT_THROW((void)frame_from_gap(NAN), DomainError);
    EXPECT_THROW((void)frame_from_gap(INFINITY), DomainError);
}

TEST(Bipolar, OnAxisPoint)
{
    const auto f = frame_from_gap(0.5);
    const auto q = to_bipolar({0.0, 3.0}, f);
    EXPECT_NEAR(q.zeta, 0.78305888118427348677, 1e-14);
    EXPECT_EQ(q.eta, 0.0);
}

TEST(Bipolar, RoundTripOnGrid)
{
    for (double h : {1e-4, 0.01, 0.5, 5.0}) {
        const auto f = frame_from_gap(h);
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                const AxisymPoint p{0.03 + 0.41 * i, 0.01 + 0.37 * j};
                const auto back = from_bipolar(to_bipolar(p, f), f);
                EXPECT_NEAR(back.rho, p.rho, 1e-10 * std::max(1.0, p.rho));
                EXPECT_NEAR(back.z, p.z, 1e-10 * std::max(1.0, p.z));
            }
        }
    }
}

TEST(Bipolar, SatisfiesDefiningFormulas)
{
    const auto f = frame_from_gap(0.3);
    for (const AxisymPoint p : {AxisymPoint{0.2, 0.1}, AxisymPoint{1.5, 2.0}, AxisymPoint{0.0, 4.0}}) {
        const auto q = to_bipolar(p, f);
        const double den = std::cosh(q.zeta) - std::cos(q.eta);
        EXPECT_NEAR(f.c * std::sinh(q.zeta) / den, p.z, 1e-10 * std::max(1.0, p.z));
        EXPECT_NEAR(f.c * std::sin(q.eta) / den, p.rho, 1e-10 * std::max(1.0, p.rho));
    }
}

TEST(Bipolar, CoordinateSurfaceIsTheSphere)
{
    for (double h : {1e-3, 0.5, 3.0}) {
        const auto f = frame_from_gap(h);
        for (int k = 0; k < 50; ++k) {
            const double eta = std::numbers::pi * k / 49.0;
            const auto p = from_bipolar({f.alpha, eta}, f);
            EXPECT_NEAR(std::hypot(p.rho, p.z - (1.0 + h)), 1.0, 1e-10);
            // (z - c coth a)^2 + rho^2 = (c / sinh a)^2
            const double zc = p.z - f.c / std::tanh(f.alpha);
            EXPECT_NEAR(zc * zc + p.rho * p.rho, std::pow(f.c / std::sinh(f.alpha), 2), 1e-10);
        }
    }
}

TEST(Bipolar, NearGapPole)
{
    const auto f = frame_from_gap(0.5);
    const auto p = from_bipolar({f.alpha, std::numbers::pi}, f);
    EXPECT_NEAR(p.z, f.c * std::sinh(f.alpha) / (std::cosh(f.alpha) + 1.0), 1e-14);
    EXPECT_NEAR(p.z, 0.5, 1e-14);
    EXPECT_NEAR(p.rho, 0.0, 1e-15);
}

TEST(Bipolar, QuarterAngle)
{
    const auto f = frame_from_gap(0.5);
    const double zeta = 0.4;
    const auto p = from_bipolar({zeta, std::numbers::pi / 2}, f);
    EXPECT_NEAR(p.z, f.c * std::sinh(zeta) / std::cosh(zeta), 1e-14);
    EXPECT_NEAR(p.rho, f.c / std::cosh(zeta), 1e-14);
}

TEST(Bipolar, Errors)
{
    const auto f = frame_from_gap(0.5);
    EXPECT_THROW((void)to_bipolar({0.0, f.c}, f), SingularityError);
    EXPECT_THROW((void)to_bipolar({0.1, -0.2}, f), DomainError);
    EXPECT_THROW((void)to_bipolar({-0.1, 0.2}, f), DomainError);
    EXPECT_THROW((void)from_bipolar({0.0, 0.0}, f), SingularityError);
    EXPECT_THROW((void)from_bipolar({0.1, 4.0}, f), DomainError);
}

TEST(Bipolar, MetricDenominatorMatchesDirectForm)
{
    for (double zeta : {0.01, 0.5, 2.0}) {
        for (double eta : {0.1, 1.0, 3.0}) {
            EXPECT_NEAR(bipolar_metric_denominator(zeta, eta), std::cosh(zeta) - std::cos(eta), 1e-13);
        }
    }
}

TEST(Legendre, BaseCasesAndClosedForm)
{
    for (double x : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
        const auto p = legendre_P(2, x);
        EXPECT_EQ(p[0], 1.0);
        EXPECT_EQ(p[1], x);
    }
    EXPECT_DOUBLE_EQ(legendre_P(2, 0.5)[2], -0.125);
}

TEST(Legendre, ValuesAndSlopesAtOne)
{
    const auto p = legendre_P(50, 1.0);
    const auto dp = legendre_dP(50, 1.0);
    for (int n = 0; n <= 50; ++n) {
        EXPECT_NEAR(p[n], 1.0, 1e-13) << n;
        EXPECT_NEAR(dp[n], legendre_dP_at_one(n), 1e-10 * std::max(1.0, legendre_dP_at_one(n))) << n;
    }
}

TEST(Legendre, RecurrenceMatchesExplicitSum)
{
    for (double x = -1.0; x <= 1.0; x += 0.05) {
        const auto p = legendre_P(10, x);
        for (int n = 0; n <= 10; ++n) {
            double s = 0.0;
            for (int k = 0; 2 * k <= n; ++k) {
                s += (k % 2 ? -1.0 : 1.0) * binom(n, k) * binom(2 * n - 2 * k, n) * std::pow(x, n - 2 * k);
            }
            EXPECT_NEAR(p[n], std::ldexp(s, -n), 1e-12) << "n=" << n << " x=" << x;
        }
    }
}

TEST(Legendre, DerivativeMatchesFiniteDifference)
{
    const double x = 0.37;
    const double d = 1e-6;
    const auto dp = legendre_dP(12, x);
    const auto pp = legendre_P(12, x + d);
    const auto pm = legendre_P(12, x - d);
    for (int n = 0; n <= 12; ++n) {
        EXPECT_NEAR(dp[n], (pp[n] - pm[n]) / (2 * d), 1e-7) << n;
    }
}

TEST(Legendre, Errors)
{
    EXPECT_THROW((void)legendre_P(3, 1.0001), DomainError);
    EXPECT_THROW((void)legendre_P(-1, 0.0), DomainError);
}

TEST(Gegenbauer, VanishesAtBothEnds)
{
    for (int n = 1; n <= 40; ++n) {
        EXPECT_NEAR(gegenbauer_Cm12(n, 1.0), 0.0, 1e-14);
        EXPECT_NEAR(gegenbauer_Cm12(n, -1.0), 0.0, 1e-14);
    }
}

TEST(Gegenbauer, LowestMode)
{
    for (double x : {-0.8, 0.0, 0.25, 0.9}) {
        EXPECT_NEAR(gegenbauer_Cm12(1, x), (1.0 - (3.0 * x * x - 1.0) / 2.0) / 3.0, 1e-15);
    }
}

TEST(Gegenbauer, BatchFormMatchesLegendreDifference)
{
    for (double x : {-0.95, -0.2, 0.4, 0.99}) {
        const auto all = gegenbauer_Cm12_all(30, x);
        for (int n = 1; n <= 30; ++n) {
            EXPECT_NEAR(all[n], gegenbauer_Cm12(n, x), 1e-13) << n;
        }
    }
}

TEST(Gegenbauer, RejectsIndexZero)
{
    EXPECT_THROW((void)gegenbauer_Cm12(0, 0.5), DomainError);
}
