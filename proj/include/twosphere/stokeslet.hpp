/// @file stokeslet.hpp
/// @brief Free-space Oseen tensor and the opposed stokeslet pair that models
/// the two flagella.
#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "twosphere/errors.hpp"

namespace twosphere {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

[[nodiscard]] inline double norm(const Vec3& v) noexcept
{
    return std::hypot(v[0], v[1], v[2]);
}

[[nodiscard]] inline Vec3 operator-(const Vec3& a, const Vec3& b) noexcept
{
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

[[nodiscard]] inline Vec3 operator+(const Vec3& a, const Vec3& b) noexcept
{
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

[[nodiscard]] inline Vec3 operator*(double s, const Vec3& a) noexcept
{
    return {s * a[0], s * a[1], s * a[2]};
}

[[nodiscard]] inline Vec3 operator*(const Mat3& m, const Vec3& v) noexcept
{
    Vec3 out{};
    for (std::size_t i = 0; i < 3; ++i) {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    }
    return out;
}

/// G(x) = (1 / 8 pi) (I / |x| + x x^T / |x|^3)
[[nodiscard]] inline Mat3 oseen_tensor(const Vec3& x)
{
    const double r = norm(x);
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw SingularityError("oseen_tensor: evaluation at the singularity");
    }
    const double k = 1.0 / (8.0 * std::numbers::pi * r);
    const double r2 = r * r;
    Mat3 g{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            g[i][j] = k * ((i == j ? 1.0 : 0.0) + x[i] * x[j] / r2);
        }
    }
    return g;
}

/// Two opposed point forces at the flagellum tips, each a distance lambda
/// behind its sphere: x_p1 = (0, 0, -(2 + h + lambda)) pushing along +z and
/// x_p2 = (0, 0, 2 + h + lambda) pushing along -z.
class StokesletPair {
public:
    StokesletPair(double f_p, double lambda, double h) : f_p_(f_p), lambda_(lambda), h_(h)
    {
        if (!(f_p > 0.0) || !(lambda > 0.0) || !(h > 0.0) || !std::isfinite(f_p + lambda + h)) {
            throw DomainError("StokesletPair: f_p, lambda and h must be positive and finite");
        }
    }

    [[nodiscard]] double f_p() const noexcept { return f_p_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] double h() const noexcept { return h_; }

    [[nodiscard]] Vec3 x_p1() const noexcept { return {0.0, 0.0, -tip()}; }
    [[nodiscard]] Vec3 x_p2() const noexcept { return {0.0, 0.0, tip()}; }
    [[nodiscard]] static constexpr Vec3 d1() noexcept { return {0.0, 0.0, 1.0}; }
    [[nodiscard]] static constexpr Vec3 d2() noexcept { return {0.0, 0.0, -1.0}; }

private:
    [[nodiscard]] double tip() const noexcept { return 2.0 + h_ + lambda_; }

    double f_p_;
    double lambda_;
    double h_;
};

/// u_Phi(x) = f_p [G(x - x_p1) d1 + G(x - x_p2) d2]
[[nodiscard]] inline Vec3 ambient_field(const StokesletPair& pair, const Vec3& x)
{
    const Vec3 u1 = oseen_tensor(x - pair.x_p1()) * StokesletPair::d1();
    const Vec3 u2 = oseen_tensor(x - pair.x_p2()) * StokesletPair::d2();
    return pair.f_p() * (u1 + u2);
}

} // namespace twosphere
