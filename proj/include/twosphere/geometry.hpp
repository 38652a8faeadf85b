/// @file geometry.hpp
/// @brief Bipolar (bispherical) coordinates for two unit spheres and the
/// Legendre / Gegenbauer kernels of the axisymmetric stream-function series.
///
/// Conventions: sphere radius 1, the two spheres are centred at z = +-(1 + h),
/// so the gap between them is 2h. Only the half-space z >= 0 is mapped; the
/// lower sphere is recovered by mirror symmetry.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "twosphere/errors.hpp"

namespace twosphere {

/// Frame induced by the half-gap h: cosh(alpha) = 1 + h, c = sinh(alpha).
/// The upper sphere is the coordinate surface zeta = alpha.
struct BipolarFrame {
    double h;
    double alpha;
    double c;
};

/// Cylindrical point (rho, z) of an axisymmetric field.
struct AxisymPoint {
    double rho;
    double z;
};

/// Bipolar point; zeta in [0, inf), eta in [0, pi].
struct BipolarPoint {
    double zeta;
    double eta;
};

[[nodiscard]] inline BipolarFrame frame_from_gap(double h)
{
    if (!std::isfinite(h) || !(h > 0.0)) {
        throw DomainError("frame_from_gap: half-gap must be positive and finite");
    }
    // log1p form keeps alpha accurate when 1 + h rounds to 1.
    const double c = std::sqrt(h * (2.0 + h));
    return {h, std::log1p(h + c), c};
}

[[nodiscard]] inline BipolarPoint to_bipolar(const AxisymPoint& p, const BipolarFrame& frame)
{
    if (!(p.rho >= 0.0) || !std::isfinite(p.rho) || !std::isfinite(p.z)) {
        throw DomainError("to_bipolar: rho must be finite and non-negative");
    }
    if (p.z < 0.0) {
        throw DomainError("to_bipolar: only the half-space z >= 0 is represented");
    }
    const double c = frame.c;
    const double dz = p.z - c;
    const double den = dz * dz + p.rho * p.rho;
    if (den <= 1e-28 * c * c) {
        throw SingularityError("to_bipolar: point coincides with a bipolar focus");
    }
    // zeta + i eta = ln((rho + i(z + c)) / (rho + i(z - c)))
    const double zeta = 0.5 * std::log1p(4.0 * p.z * c / den);
    const double eta = std::atan2(2.0 * c * p.rho, p.rho * p.rho + p.z * p.z - c * c);
    return {zeta, eta};
}

/// cosh(zeta) - cos(eta) without cancellation near the point at infinity.
[[nodiscard]] inline double bipolar_metric_denominator(double zeta, double eta)
{
    const double sh = std::sinh(0.5 * zeta);
    const double s = std::sin(0.5 * eta);
    return 2.0 * (sh * sh + s * s);
}

[[nodiscard]] inline AxisymPoint from_bipolar(const BipolarPoint& q, const BipolarFrame& frame)
{
    if (!(q.zeta >= 0.0) || !(q.eta >= 0.0) || !(q.eta <= std::numbers::pi)) {
        throw DomainError("from_bipolar: require zeta >= 0 and 0 <= eta <= pi");
    }
    if (q.zeta == 0.0 && q.eta == 0.0) {
        throw SingularityError("from_bipolar: (0, 0) is the point at infinity");
    }
    const double den = bipolar_metric_denominator(q.zeta, q.eta);
    return {frame.c * std::sin(q.eta) / den, frame.c * std::sinh(q.zeta) / den};
}

/// P_0(x) .. P_{n_max}(x) by the upward three-term recurrence.
[[nodiscard]] inline std::vector<double> legendre_P(int n_max, double x)
{
    if (n_max < 0) {
        throw DomainError("legendre_P: n_max must be non-negative");
    }
    if (!(std::abs(x) <= 1.0)) {
        throw DomainError("legendre_P: |x| must not exceed 1");
    }
    std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
    p[0] = 1.0;
    if (n_max >= 1) {
        p[1] = x;
    }
    for (int n = 1; n < n_max; ++n) {
        p[n + 1] = ((2.0 * n + 1.0) * x * p[n] - n * p[n - 1]) / (n + 1.0);
    }
    return p;
}

/// P_0'(x) .. P_{n_max}'(x) via P'_{n+1} = P'_{n-1} + (2n + 1) P_n.
[[nodiscard]] inline std::vector<double> legendre_dP(int n_max, double x)
{
    const auto p = legendre_P(n_max, x);
    std::vector<double> dp(p.size(), 0.0);
    if (n_max >= 1) {
        dp[1] = 1.0;
    }
    for (int n = 1; n < n_max; ++n) {
        dp[n + 1] = dp[n - 1] + (2.0 * n + 1.0) * p[n];
    }
    return dp;
}

/// P_n'(1) = n(n+1)/2.
[[nodiscard]] constexpr double legendre_dP_at_one(int n) noexcept
{
    return 0.5 * n * (n + 1.0);
}

/// C_{n+1}^{-1/2}(x) = (P_{n-1}(x) - P_{n+1}(x)) / (2n + 1), n >= 1.
[[nodiscard]] inline double gegenbauer_Cm12(int n, double x)
{
    if (n < 1) {
        throw DomainError("gegenbauer_Cm12: index n must be at least 1");
    }
    const auto p = legendre_P(n + 1, x);
    return (p[n - 1] - p[n + 1]) / (2.0 * n + 1.0);
}

/// C_{n+1}^{-1/2}(x) for n = 0 .. n_max (entry 0 is unused and set to 0).
///
/// Uses the equivalent form (1 - x^2) P_n'(x) / (n(n+1)), which does not
/// cancel catastrophically near x = +-1 where the stream function is sampled
/// close to the symmetry axis.
[[nodiscard]] inline std::vector<double> gegenbauer_Cm12_all(int n_max, double x)
{
    const auto dp = legendre_dP(n_max, x);
    const double one_minus_x2 = (1.0 - x) * (1.0 + x);
    std::vector<double> g(dp.size(), 0.0);
    for (int n = 1; n <= n_max; ++n) {
        g[n] = one_minus_x2 * dp[n] / (n * (n + 1.0));
    }
    return g;
}

} // namespace twosphere
