/// @file series.hpp
/// @brief Exact truncated-series solution for two no-slip unit spheres
/// translating along their line of centres with equal and opposite speeds.
///
/// The flow is described in the upper half-space, where the sphere
/// zeta = alpha moves towards the symmetry plane with speed W_bc (the lower
/// sphere is its mirror image). The stream function obeys
///
///     u_z = -(1/rho) d(psi)/d(rho),   u_rho = (1/rho) d(psi)/dz,
///
/// and is expanded as
///
///     psi = (cosh zeta - cos eta)^(-3/2) sum_n U_n(zeta) C_{n+1}^{-1/2}(cos eta),
///     U_n(zeta) = b_n sinh((n - 1/2) zeta) + d_n sinh((n + 3/2) zeta).
///
/// U_n is odd in zeta because the flow is antisymmetric under z -> -z.
///
/// Coefficients are stored with the factor exp(-(2n+1) alpha) removed, so
/// that neither the coefficients nor the hyperbolic functions they multiply
/// overflow for large mode numbers.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "twosphere/errors.hpp"
#include "twosphere/geometry.hpp"

namespace twosphere {

/// Gaps below this are outside the numerical range of the series.
inline constexpr double kMinSeriesGap = 1e-8;

struct SeriesTruncation {
    int n_max = 20;          ///< retained modes (initial guess when adaptive)
    double tail_tol = 1e-10; ///< relative tail bound on sum_n U_n(alpha)
    bool adaptive = true;    ///< add modes until tail_tol is met
    int hard_cap = 1 << 18;
};

inline void validate(const SeriesTruncation& t)
{
    if (t.n_max < 1) {
        throw DomainError("SeriesTruncation: n_max must be at least 1");
    }
    if (!(t.tail_tol > 0.0) || !std::isfinite(t.tail_tol)) {
        throw DomainError("SeriesTruncation: tail_tol must be positive");
    }
    if (t.hard_cap < t.n_max) {
        throw DomainError("SeriesTruncation: hard_cap below n_max");
    }
}

class SeriesSolution;
SeriesSolution coefficients_bd(const BipolarFrame& frame, double w_bc, SeriesTruncation trunc);

/// Truncated coefficient arrays for the translating pair.
class SeriesSolution {
public:
    [[nodiscard]] const BipolarFrame& frame() const noexcept { return frame_; }
    [[nodiscard]] double w_bc() const noexcept { return w_bc_; }
    /// Truncation actually used; n_max is the number of retained modes.
    [[nodiscard]] const SeriesTruncation& truncation() const noexcept { return truncation_; }
    [[nodiscard]] int modes() const noexcept { return static_cast<int>(b_scaled_.size()); }
    /// Estimated relative tail of sum_n U_n(alpha) beyond the last mode.
    [[nodiscard]] double tail_estimate() const noexcept { return tail_; }

    /// b_n e^{(2n+1) alpha}
    [[nodiscard]] double b_scaled(int n) const { return b_scaled_.at(index(n)); }
    /// d_n e^{(2n+1) alpha}
    [[nodiscard]] double d_scaled(int n) const { return d_scaled_.at(index(n)); }

    [[nodiscard]] double b(int n) const { return b_scaled(n) * mode_decay(n); }
    [[nodiscard]] double d(int n) const { return d_scaled(n) * mode_decay(n); }

    [[nodiscard]] std::vector<double> b_sequence() const { return unscale(b_scaled_); }
    [[nodiscard]] std::vector<double> d_sequence() const { return unscale(d_scaled_); }

    /// e^{-(2n+1) alpha}
    [[nodiscard]] double mode_decay(int n) const { return std::exp(-(2.0 * n + 1.0) * frame_.alpha); }

private:
    friend SeriesSolution coefficients_bd(const BipolarFrame&, double, SeriesTruncation);

    [[nodiscard]] std::size_t index(int n) const
    {
        if (n < 1 || n > modes()) {
            throw DomainError("SeriesSolution: mode index " + std::to_string(n) + " outside 1.." +
                              std::to_string(modes()));
        }
        return static_cast<std::size_t>(n - 1);
    }

    [[nodiscard]] std::vector<double> unscale(const std::vector<double>& v) const
    {
        std::vector<double> out(v.size());
        for (int n = 1; n <= modes(); ++n) {
            out[n - 1] = v[n - 1] * mode_decay(n);
        }
        return out;
    }

    BipolarFrame frame_{};
    double w_bc_ = 0.0;
    SeriesTruncation truncation_{};
    double tail_ = 0.0;
    std::vector<double> b_scaled_;
    std::vector<double> d_scaled_;
};

namespace detail {

/// e^{-2m alpha} (2 sinh(2m alpha) - 2m sinh(2 alpha)), m = n + 1/2.
/// For small 2m alpha the two terms cancel to O((2m alpha)^3); the Taylor
/// form sum_k x^{2k+1} (1 - m^{-2k}) / (2k+1)! has no cancellation.
[[nodiscard]] inline double scaled_mode_denominator(double m, double alpha)
{
    const double x = 2.0 * m * alpha;
    if (x <= 4.0) {
        const double x2 = x * x;
        const double inv_m2 = 1.0 / (m * m);
        double term = x; // x^{2k+1} / (2k+1)!
        double inv_m_pow = 1.0;
        double sum = 0.0;
        for (int k = 1; k < 40; ++k) {
            term *= x2 / ((2.0 * k) * (2.0 * k + 1.0));
            inv_m_pow *= inv_m2;
            const double contrib = term * (1.0 - inv_m_pow);
            sum += contrib;
            if (contrib < 1e-18 * sum) {
                break;
            }
        }
        return 2.0 * sum * std::exp(-x);
    }
    const double u = std::exp(-x);
    return (1.0 - u * u) - 2.0 * m * std::sinh(2.0 * alpha) * u;
}

/// sinh(q x) / sinh(p x) with q = p + 2, overflow-free.
[[nodiscard]] inline double sinh_ratio(double p, double x)
{
    return std::exp(2.0 * x) * std::expm1(-2.0 * (p + 2.0) * x) / std::expm1(-2.0 * p * x);
}

/// Boundary data U_n(alpha) for unit W (closed form of the no-slip condition).
[[nodiscard]] inline double boundary_mode(const BipolarFrame& f, int n)
{
    const double p = n - 0.5;
    const double q = n + 1.5;
    const double k = n * (n + 1.0) / std::numbers::sqrt2;
    return f.c * f.c * k * std::exp(-p * f.alpha) * (1.0 / (2.0 * p) - std::exp(-2.0 * f.alpha) / (2.0 * q));
}

inline void append_modes(const BipolarFrame& f, double w, int from, int to, std::vector<double>& b,
                         std::vector<double>& d)
{
    const double a = f.alpha;
    const double c2 = f.c * f.c;
    const double c_up = f.c * std::exp(a);
    const double c_down = f.c * std::exp(-a);
    for (int n = from; n <= to; ++n) {
        const double m = n + 0.5;
        const double u = std::exp(-2.0 * m * a);
        const double den = scaled_mode_denominator(m, a);
        const double pref = w * c2 * n * (n + 1.0) / std::numbers::sqrt2;
        b.push_back(pref / (2.0 * n - 1.0) * (2.0 * (1.0 + u) + 4.0 * m * c_up) / den);
        d.push_back(-pref / (2.0 * n + 3.0) * (2.0 * (1.0 + u) + 4.0 * m * c_down) / den);
    }
}

/// Relative tail of a geometrically decaying positive series.
[[nodiscard]] inline double geometric_tail(double last, double previous, double sum)
{
    if (sum == 0.0 || last == 0.0) {
        return 0.0;
    }
    const double r = last / previous;
    if (!(r < 1.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return last * r / (1.0 - r) / std::abs(sum);
}

} // namespace detail

/// Builds the coefficient arrays b_n, d_n (sphere radius 1) for boundary
/// speed w_bc, growing the number of modes until the tail criterion holds.
inline SeriesSolution coefficients_bd(const BipolarFrame& frame, double w_bc, SeriesTruncation trunc)
{
    validate(trunc);
    if (!(frame.h >= kMinSeriesGap)) {
        throw DomainError("coefficients_bd: half-gap below the series range (1e-8)");
    }
    if (!std::isfinite(w_bc)) {
        throw DomainError("coefficients_bd: boundary speed must be finite");
    }

    SeriesSolution sol;
    sol.frame_ = frame;
    sol.w_bc_ = w_bc;

    int n_target = trunc.n_max;
    if (trunc.adaptive) {
        // U_n(alpha) ~ n^2 e^{-n alpha}: start near the predicted mode count.
        double guess = std::log(1.0 / trunc.tail_tol) / frame.alpha;
        guess = (std::log(1.0 / trunc.tail_tol) + 2.0 * std::log(guess)) / frame.alpha;
        n_target = std::max(n_target, static_cast<int>(std::min(guess, static_cast<double>(trunc.hard_cap))));
    }
    double boundary_sum = 0.0;
    int summed = 0;
    for (;;) {
        sol.b_scaled_.reserve(static_cast<std::size_t>(n_target));
        sol.d_scaled_.reserve(static_cast<std::size_t>(n_target));
        detail::append_modes(frame, w_bc, sol.modes() + 1, n_target, sol.b_scaled_, sol.d_scaled_);
        for (int n = summed + 1; n <= n_target; ++n) {
            boundary_sum += detail::boundary_mode(frame, n);
        }
        summed = n_target;
        const double last = detail::boundary_mode(frame, n_target);
        const double prev = n_target > 1 ? detail::boundary_mode(frame, n_target - 1) : last * 2.0;
        sol.tail_ = detail::geometric_tail(last, prev, boundary_sum);
        if (!trunc.adaptive || sol.tail_ <= trunc.tail_tol) {
            break;
        }
        if (n_target >= trunc.hard_cap) {
            throw TruncationError("coefficients_bd: tail not converged at the hard cap", sol.tail_, n_target);
        }
        n_target = std::min(n_target + std::max(n_target / 4, 8), trunc.hard_cap);
    }
    sol.truncation_ = trunc;
    sol.truncation_.n_max = sol.modes();
    return sol;
}

/// G_m of the nonpenetration relation b_n = G_m - d_n sinh((m+1)a)/sinh((m-1)a),
/// m = n + 1/2, for unit boundary speed. Returned with the factor
/// e^{-(2n+1) alpha} removed.
[[nodiscard]] inline double G_m_scaled(const BipolarFrame& frame, int n)
{
    if (n < 1) {
        throw DomainError("G_m: mode index must be at least 1");
    }
    const double m = n + 0.5;
    const double p = m - 1.0;
    const double q = m + 1.0;
    const double a = frame.alpha;
    return std::numbers::sqrt2 * frame.c * frame.c * n * (n + 1.0) / (p * q) * std::exp(a) *
           (m * std::sinh(a) + std::cosh(a)) / (-std::expm1(-2.0 * p * a));
}

[[nodiscard]] inline double G_m(const BipolarFrame& frame, int n)
{
    return G_m_scaled(frame, n) * std::exp(-(2.0 * n + 1.0) * frame.alpha);
}

struct NonpenetrationReport {
    std::vector<double> residual_w_scaled; ///< per-mode, with G_m multiplied by W_bc
    std::vector<double> residual_plain;    ///< per-mode, G_m taken as printed
    double max_w_scaled = 0.0;
    double max_plain = 0.0;
    bool w_scaled_wins = true; ///< the W-scaled variant has the smaller (or equal) residual
};

/// Relative residual of the nonpenetration relation for every retained mode.
[[nodiscard]] inline NonpenetrationReport check_nonpenetration(const SeriesSolution& sol)
{
    NonpenetrationReport rep;
    const auto& f = sol.frame();
    const double w = sol.w_bc();
    auto rel = [](double b, double g, double dr) {
        const double scale = std::max({std::abs(b), std::abs(g), std::abs(dr)});
        const double num = std::abs(b - g + dr);
        return scale == 0.0 ? num : num / scale;
    };
    for (int n = 1; n <= sol.modes(); ++n) {
        const double b = sol.b_scaled(n);
        const double dr = sol.d_scaled(n) * detail::sinh_ratio(n - 0.5, f.alpha);
        const double g = G_m_scaled(f, n);
        rep.residual_w_scaled.push_back(rel(b, w * g, dr));
        rep.residual_plain.push_back(rel(b, g, dr));
        rep.max_w_scaled = std::max(rep.max_w_scaled, rep.residual_w_scaled.back());
        rep.max_plain = std::max(rep.max_plain, rep.residual_plain.back());
    }
    rep.w_scaled_wins = rep.max_w_scaled <= rep.max_plain;
    return rep;
}

namespace detail {

inline void require_mode_point(const SeriesSolution& sol, int n, double xi)
{
    if (n < 1 || n > sol.modes()) {
        throw DomainError("U_n: mode index outside the truncation");
    }
    if (!(xi > 0.0) || xi > sol.frame().alpha * (1.0 + 1e-14)) {
        throw DomainError("U_n: xi must lie in (0, alpha]");
    }
}

/// U_n(xi) from the stored coefficients, xi in [0, alpha].
[[nodiscard]] inline double U_n_unchecked(const SeriesSolution& sol, int n, double xi)
{
    const double p = n - 0.5;
    const double q = n + 1.5;
    const double two_m_alpha = (2.0 * n + 1.0) * sol.frame().alpha;
    // b_n sinh(p xi) = b^_n e^{p xi - 2m alpha} (1 - e^{-2 p xi}) / 2
    const double sb = 0.5 * std::exp(p * xi - two_m_alpha) * -std::expm1(-2.0 * p * xi);
    const double sd = 0.5 * std::exp(q * xi - two_m_alpha) * -std::expm1(-2.0 * q * xi);
    return sol.b_scaled(n) * sb + sol.d_scaled(n) * sd;
}

} // namespace detail

/// U_n(xi) = b_n sinh((n - 1/2) xi) + d_n sinh((n + 3/2) xi).
[[nodiscard]] inline double U_n_eval(const SeriesSolution& sol, int n, double xi)
{
    detail::require_mode_point(sol, n, xi);
    return detail::U_n_unchecked(sol, n, xi);
}

/// U_n(xi) rebuilt from G_m and d_n alone:
/// [W G_m + d_n (sinh(q xi)/sinh(p xi) - sinh(q a)/sinh(p a))] sinh(p xi).
[[nodiscard]] inline double U_n_eval_reciprocal(const SeriesSolution& sol, int n, double xi)
{
    detail::require_mode_point(sol, n, xi);
    const auto& f = sol.frame();
    const double p = n - 0.5;
    const double bracket = detail::sinh_ratio(p, xi) - detail::sinh_ratio(p, f.alpha);
    const double core = sol.w_bc() * G_m_scaled(f, n) + sol.d_scaled(n) * bracket;
    return core * 0.5 * std::exp(p * xi - (2.0 * n + 1.0) * f.alpha) * -std::expm1(-2.0 * p * xi);
}

/// sinh(q xi)/sinh(p xi) - sinh(q a)/sinh(p a), negative on (0, alpha).
[[nodiscard]] inline double sinh_ratio_bracket(const BipolarFrame& frame, int n, double xi)
{
    const double p = n - 0.5;
    return detail::sinh_ratio(p, xi) - detail::sinh_ratio(p, frame.alpha);
}

/// f(xi) = sinh((m+1) xi) sinh((m-1) a) - sinh((m-1) xi) sinh((m+1) a).
[[nodiscard]] inline double positivity_auxiliary(const BipolarFrame& frame, int n, double xi)
{
    const double m = n + 0.5;
    const double a = frame.alpha;
    return std::sinh((m + 1.0) * xi) * std::sinh((m - 1.0) * a) -
           std::sinh((m - 1.0) * xi) * std::sinh((m + 1.0) * a);
}

namespace detail {

[[nodiscard]] inline double stream_psi_impl(const SeriesSolution& sol, const BipolarPoint& q,
                                            double gegenbauer_scale)
{
    const auto& f = sol.frame();
    if (q.zeta > f.alpha * (1.0 + 1e-14)) {
        throw DomainError("stream_psi: point lies inside the sphere (zeta > alpha)");
    }
    if (!(q.eta >= 0.0) || !(q.eta <= std::numbers::pi) || !(q.zeta >= 0.0)) {
        throw DomainError("stream_psi: bipolar point out of range");
    }
    if (q.zeta == 0.0 && q.eta == 0.0) {
        throw SingularityError("stream_psi: (0, 0) is the point at infinity");
    }
    const int n_max = sol.modes();
    const double x = std::cos(q.eta);
    const double s = std::sin(q.eta);
    const auto dp = legendre_dP(n_max, x);
    double sum = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double gegen = s * s * dp[n] / (n * (n + 1.0)) * gegenbauer_scale;
        sum += U_n_unchecked(sol, n, std::min(q.zeta, f.alpha)) * gegen;
    }
    const double den = bipolar_metric_denominator(q.zeta, q.eta);
    return sum / (den * std::sqrt(den));
}

} // namespace detail

/// Stream function at a fluid point (zeta <= alpha).
[[nodiscard]] inline double stream_psi(const SeriesSolution& sol, const BipolarPoint& q)
{
    return detail::stream_psi_impl(sol, q, 1.0);
}

/// Axial velocity on the symmetry axis behind the lower sphere, at
/// x = (0, 0, -z0), in the direction that sphere travels (+z).
///
/// The series frame holds the upper sphere moving towards the symmetry
/// plane; by mirror symmetry this equals -u_z(0, 0, +z0) there, i.e.
/// +lim (1/rho) d(psi)/d(rho) at (rho, z) -> (0, z0). On the axis
/// beyond the sphere eta = 0 and the limit evaluates to
///
///     sqrt(cosh(zeta0) - 1) / c^2 * sum_n U_n(zeta0),
///     zeta0 = ln((z0 + c)/(z0 - c)).
///
/// z0 must satisfy z0 >= 2 + h (outside the sphere); at z0 = 2 + h the
/// result is the boundary speed W_bc.
[[nodiscard]] inline double axis_velocity_uz(const SeriesSolution& sol, double z0)
{
    const auto& f = sol.frame();
    if (!std::isfinite(z0) || z0 < (2.0 + f.h) * (1.0 - 1e-14)) {
        throw DomainError("axis_velocity_uz: z0 must lie on the axis outside the sphere (z0 >= 2 + h)");
    }
    const double zeta0 = std::min(std::log1p(2.0 * f.c / (z0 - f.c)), f.alpha);
    double sum = 0.0;
    for (int n = 1; n <= sol.modes(); ++n) {
        sum += detail::U_n_unchecked(sol, n, zeta0);
    }
    return std::numbers::sqrt2 * std::sinh(0.5 * zeta0) * sum / (f.c * f.c);
}

/// Drag on either sphere, (2 sqrt(2) pi / c) sum_n (b_n + d_n), unit viscosity.
/// Positive for an approaching pair (W_bc > 0).
[[nodiscard]] inline double passive_drag(const SeriesSolution& sol)
{
    double sum = 0.0;
    for (int n = 1; n <= sol.modes(); ++n) {
        sum += (sol.b_scaled(n) + sol.d_scaled(n)) * sol.mode_decay(n);
    }
    return 2.0 * std::numbers::sqrt2 * std::numbers::pi / sol.frame().c * sum;
}

/// Flagellum tip distance from the symmetry plane for tail length lambda.
[[nodiscard]] inline double flagellum_tip(double h, double lambda) noexcept
{
    return 2.0 + h + lambda;
}

inline void require_gap(double h, const char* what)
{
    if (!std::isfinite(h) || !(h > 0.0)) {
        throw DomainError(std::string(what) + ": half-gap must be positive and finite");
    }
    if (h < kMinSeriesGap) {
        throw DomainError(std::string(what) + ": half-gap below the series range (1e-8)");
    }
}

inline void require_positive(double v, const char* what, const char* name)
{
    if (!std::isfinite(v) || !(v > 0.0)) {
        throw DomainError(std::string(what) + ": " + name + " must be positive and finite");
    }
}

/// Drag per sphere for unit approach speed; tends to 6 pi as h -> infinity
/// and behaves like (3 pi / 2) / h as h -> 0.
[[nodiscard]] inline double kappa_pass_noslip(double h, SeriesTruncation trunc = {})
{
    require_gap(h, "kappa_pass_noslip");
    return passive_drag(coefficients_bd(frame_from_gap(h), 1.0, trunc));
}

/// kappa_prop from an existing solution: normalized trailing axis velocity
/// at the flagellum tip.
[[nodiscard]] inline double kappa_prop_from(const SeriesSolution& sol, double lambda)
{
    require_positive(lambda, "kappa_prop", "lambda");
    return axis_velocity_uz(sol, flagellum_tip(sol.frame().h, lambda)) / sol.w_bc();
}

/// Drag on a held sphere produced by unit propulsion stokeslets, via the
/// reciprocal identity with the unit translation flow.
[[nodiscard]] inline double kappa_prop_noslip(double h, double lambda, SeriesTruncation trunc = {})
{
    require_gap(h, "kappa_prop_noslip");
    require_positive(lambda, "kappa_prop_noslip", "lambda");
    return kappa_prop_from(coefficients_bd(frame_from_gap(h), 1.0, trunc), lambda);
}

/// W = -(f_p / F_drag(u1)) u1_z(x_p): the rigid-body speed picked up by a
/// force-free pair from its own propulsion stokeslets. Negative: propulsion
/// alone pushes the spheres apart.
[[nodiscard]] inline double swim_contribution_W(double h, double lambda, double f_p, SeriesTruncation trunc = {})
{
    require_gap(h, "swim_contribution_W");
    require_positive(lambda, "swim_contribution_W", "lambda");
    require_positive(f_p, "swim_contribution_W", "f_p");
    const auto sol = coefficients_bd(frame_from_gap(h), 1.0, trunc);
    return -(f_p / passive_drag(sol)) * axis_velocity_uz(sol, flagellum_tip(h, lambda));
}

} // namespace twosphere
