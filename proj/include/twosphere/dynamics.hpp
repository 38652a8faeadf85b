/// @file dynamics.hpp
/// @brief Approach dynamics of two head-on swimmers (or externally pushed
/// passive spheres): integration of
///
///     m h'' + kappa_pass(h) h' + F(h) = 0,
///
/// with F = f_p (1 - kappa_prop) for swimmers and F = f_ext for pushed
/// spheres, plus diagnostics for the collision / no-collision behaviour.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "twosphere/drag.hpp"
#include "twosphere/errors.hpp"

namespace twosphere {

struct ActiveSwimmers {};

struct PassiveForced {
    double f_ext = 1.0;
};

using SwimMode = std::variant<ActiveSwimmers, PassiveForced>;

struct SwimmerScenario {
    double h0 = 0.5;     ///< initial half-gap
    double s0 = 0.0;     ///< initial approach speed, -h'(0)
    double m = 0.0;      ///< mass of each swimmer
    double f_p = 1.0;    ///< propulsion strength
    double lambda = 1.0; ///< flagellum length behind the sphere
    BoundaryCondition bc{};
    SwimMode mode = ActiveSwimmers{};

    [[nodiscard]] bool passive() const noexcept { return std::holds_alternative<PassiveForced>(mode); }
};

inline void validate(const SwimmerScenario& s)
{
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!std::isfinite(s.h0) || !(s.h0 > 0.0)) {
        throw DomainError("scenario: h0 must be positive");
    }
    if (!finite_nonneg(s.s0) || !finite_nonneg(s.m) || !finite_nonneg(s.f_p)) {
        throw DomainError("scenario: s0, m and f_p must be finite and non-negative");
    }
    if (!std::isfinite(s.lambda) || !(s.lambda > 0.0)) {
        throw DomainError("scenario: lambda must be positive");
    }
    validate(s.bc);
    if (const auto* p = std::get_if<PassiveForced>(&s.mode); p && !(p->f_ext > 0.0 && std::isfinite(p->f_ext))) {
        throw DomainError("scenario: passive mode requires f_ext > 0");
    }
}

struct Rates {
    double hdot = 0.0;
    double hddot = 0.0; ///< zero in the massless (algebraic) branch
    double kappa_pass = 0.0;
    double kappa_prop = 0.0;
};

/// Force pushing the spheres together and the kappa_prop it used.
[[nodiscard]] inline std::pair<double, double> driving_force(double h, const SwimmerScenario& s,
                                                             const DragModel& model)
{
    if (const auto* p = std::get_if<PassiveForced>(&s.mode)) {
        return {p->f_ext, 0.0};
    }
    if (s.f_p == 0.0) {
        return {0.0, 0.0};
    }
    const double kp = model.kappa_prop(h, s.lambda, s.bc);
    return {s.f_p * (1.0 - kp), kp};
}

/// Right-hand side of the force balance at (h, hdot). For m = 0 the velocity
/// is algebraic: hdot = -F / kappa_pass, and the supplied hdot is ignored.
[[nodiscard]] inline Rates rhs(double h, double hdot, const SwimmerScenario& s, const DragModel& model)
{
    if (!(h > 0.0)) {
        throw DomainError("rhs: half-gap must be positive");
    }
    const double kpass = model.kappa_pass(h, s.bc);
    const auto [force, kprop] = driving_force(h, s, model);
    if (s.m == 0.0) {
        return {-force / kpass, 0.0, kpass, kprop};
    }
    return {hdot, (-kpass * hdot - force) / s.m, kpass, kprop};
}

struct TrajectoryPoint {
    double t = 0.0;
    double h = 0.0;
    double hdot = 0.0;
    double kappa_pass = 0.0;
    double kappa_prop = 0.0;
};

enum class Termination { Collision, HorizonReached, SpeedReversed };

[[nodiscard]] inline std::string to_string(Termination t)
{
    switch (t) {
    case Termination::Collision: return "collision";
    case Termination::HorizonReached: return "horizon_reached";
    case Termination::SpeedReversed: return "speed_reversed";
    }
    return "unknown";
}

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    Termination termination = Termination::HorizonReached;
    std::optional<double> t_coll; ///< set iff termination == Collision
    double h_floor = 0.0;
    SwimmerScenario scenario;

    [[nodiscard]] double min_h() const
    {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& p : points) {
            v = std::min(v, p.h);
        }
        return v;
    }
};

struct SimulationOptions {
    double t_max = 100.0;
    double h_floor = 0.0; ///< 0 selects 1e-7 (no-slip) or 1e-9 (Navier)
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_dlogh = 0.1; ///< largest |d ln h| per step once h < 0.1
    long max_steps = 20'000'000;
};

[[nodiscard]] inline double default_h_floor(const BoundaryCondition& bc) noexcept
{
    return bc.kind == BcKind::NoSlip ? 1e-7 : 1e-9;
}

namespace detail {

/// Dormand-Prince 5(4) tableau.
struct DormandPrince {
    static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    static constexpr std::array<double, 7> e{71.0 / 57600,  0.0,          -71.0 / 16695, 71.0 / 1920,
                                             -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
};

using State = std::array<double, 2>; // {ln h, hdot}

/// Integrates in ln h so that steps scale with the gap near contact.
class ApproachSystem {
public:
    ApproachSystem(const SwimmerScenario& s, const DragModel& model) : s_(s), model_(model) {}

    [[nodiscard]] State derivative(const State& y) const
    {
        const double h = std::exp(y[0]);
        const Rates r = rhs(h, y[1], s_, model_);
        return {r.hdot / h, r.hddot};
    }

    /// Velocity to report at a state (algebraic when massless).
    [[nodiscard]] double velocity(const State& y) const
    {
        return s_.m == 0.0 ? rhs(std::exp(y[0]), 0.0, s_, model_).hdot : y[1];
    }

private:
    const SwimmerScenario& s_;
    const DragModel& model_;
};

struct StepResult {
    State y;
    double error_norm;
};

inline StepResult dp_step(const ApproachSystem& sys, const State& y0, const State& k1, double dt, double rtol,
                          double atol)
{
    using T = DormandPrince;
    std::array<State, 7> k{};
    k[0] = k1;
    for (int s = 1; s < 7; ++s) {
        State ys = y0;
        for (int j = 0; j < s; ++j) {
            ys[0] += dt * T::a[s][j] * k[j][0];
            ys[1] += dt * T::a[s][j] * k[j][1];
        }
        k[s] = sys.derivative(ys);
    }
    State y1 = y0;
    for (int j = 0; j < 6; ++j) {
        y1[0] += dt * T::a[6][j] * k[j][0];
        y1[1] += dt * T::a[6][j] * k[j][1];
    }
    double err = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        double e = 0.0;
        for (int j = 0; j < 7; ++j) {
            e += T::e[j] * k[j][i];
        }
        const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        err = std::max(err, std::abs(dt * e) / scale);
    }
    return {y1, err};
}

} // namespace detail

/// Integrates the approach until h reaches h_floor (collision), the speed
/// changes sign, or t_max. Deterministic for fixed inputs.
inline Trajectory simulate(const SwimmerScenario& scenario, const SimulationOptions& opt,
                           const DragModel& model = detail::default_drag_model())
{
    validate(scenario);
    if (!(opt.t_max > 0.0) || !std::isfinite(opt.t_max)) {
        throw DomainError("simulate: t_max must be positive");
    }
    const double h_floor = opt.h_floor > 0.0 ? opt.h_floor : default_h_floor(scenario.bc);
    if (!(h_floor < scenario.h0)) {
        throw DomainError("simulate: h_floor must lie below h0");
    }
    if (scenario.bc.kind == BcKind::NoSlip && h_floor < kMinSeriesGap) {
        throw DomainError("simulate: no-slip h_floor below the series range (1e-8)");
    }

    Trajectory traj;
    traj.scenario = scenario;
    traj.h_floor = h_floor;
    const double log_floor = std::log(h_floor);
    const detail::ApproachSystem sys(scenario, model);

    auto record = [&](double t, const detail::State& y) {
        const double h = std::exp(y[0]);
        const auto c = rhs(h, y[1], scenario, model);
        traj.points.push_back({t, h, scenario.m == 0.0 ? c.hdot : y[1], c.kappa_pass, c.kappa_prop});
    };

    detail::State y{std::log(scenario.h0), -scenario.s0};
    double t = 0.0;
    record(t, y);
    detail::State k1 = sys.derivative(y);
    double dt = std::min(opt.t_max, 1e-3);
    if (k1[0] != 0.0) {
        dt = std::min(dt, 0.01 / std::abs(k1[0]));
    }

    long steps = 0;
    while (t < opt.t_max) {
        if (++steps > opt.max_steps) {
            throw StiffnessError("simulate: step budget exhausted", t, std::exp(y[0]), y[1]);
        }
        dt = std::min(dt, opt.t_max - t);
        if (dt < 1e-14 * std::max(1.0, t)) {
            throw StiffnessError("simulate: step size underflow", t, std::exp(y[0]), y[1]);
        }

        detail::StepResult step{};
        try {
            step = detail::dp_step(sys, y, k1, dt, opt.rtol, opt.atol);
        } catch (const DomainError&) {
            // A trial stage left the range of the drag law (below the floor).
            dt *= 0.25;
            continue;
        }
        const bool near_contact = std::min(y[0], step.y[0]) < std::log(0.1);
        if (!(step.error_norm <= 1.0) || (near_contact && std::abs(step.y[0] - y[0]) > opt.max_dlogh)) {
            const double shrink = std::isfinite(step.error_norm)
                                      ? std::clamp(0.9 * std::pow(step.error_norm, -0.2), 0.1, 0.5)
                                      : 0.1;
            dt *= shrink;
            continue;
        }

        if (step.y[0] <= log_floor) {
            // Localize h = h_floor by bisection on the length of a single step.
            double lo = 0.0;
            double hi = dt;
            detail::State y_hi = step.y;
            while (hi - lo > 1e-12 * std::max(1.0, t)) {
                const double mid = 0.5 * (lo + hi);
                detail::State y_mid{};
                try {
                    y_mid = detail::dp_step(sys, y, k1, mid, opt.rtol, opt.atol).y;
                } catch (const DomainError&) {
                    hi = mid;
                    continue;
                }
                if (y_mid[0] <= log_floor) {
                    hi = mid;
                    y_hi = y_mid;
                } else {
                    lo = mid;
                }
            }
            t += hi;
            y_hi[0] = std::min(y_hi[0], log_floor);
            const double h = std::exp(y_hi[0]);
            const double v = scenario.m == 0.0 ? rhs(h, 0.0, scenario, model).hdot : y_hi[1];
            const auto c = rhs(h, y_hi[1], scenario, model);
            traj.points.push_back({t, h, v, c.kappa_pass, c.kappa_prop});
            traj.termination = Termination::Collision;
            traj.t_coll = t;
            return traj;
        }

        t += dt;
        y = step.y;
        k1 = sys.derivative(y);
        record(t, y);
        if (traj.points.back().hdot > 0.0) {
            traj.termination = Termination::SpeedReversed;
            return traj;
        }
        const double grow = step.error_norm > 0.0 ? 0.9 * std::pow(step.error_norm, -0.2) : 5.0;
        dt *= std::clamp(grow, 0.2, 5.0);
    }
    traj.termination = Termination::HorizonReached;
    return traj;
}

/// Exponential lower bound h(t) >= C1 exp(-C2 t) certified on a trajectory.
struct LowerBoundFit {
    bool ok = false;
    std::string message;
    double C1 = 0.0;
    double C2 = 0.0;
    double fit_residual = 0.0; ///< RMS residual of the ln h fit over the tail
    double intercept = 0.0;    ///< fitted ln h at t = 0
    bool holds = false;        ///< bound verified at every trajectory point
};

/// Least-squares fit of ln h against t over the second half of the run;
/// C2 is the fitted decay rate and C1 the largest constant for which the
/// bound holds at every computed point.
[[nodiscard]] inline LowerBoundFit noslip_lower_bound_fit(const Trajectory& traj)
{
    LowerBoundFit fit;
    const auto& pts = traj.points;
    if (pts.size() < 4) {
        fit.message = "trajectory too short";
        return fit;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].h > pts[i - 1].h * (1.0 + 1e-12)) {
            fit.message = "trajectory is not monotonically decreasing in h";
            return fit;
        }
    }
    const double t_half = 0.5 * pts.back().t;
    double n = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (const auto& p : pts) {
        if (p.t < t_half) {
            continue;
        }
        const double ly = std::log(p.h);
        n += 1.0;
        st += p.t;
        sy += ly;
        stt += p.t * p.t;
        sty += p.t * ly;
    }
    const double den = n * stt - st * st;
    if (n < 3.0 || !(den > 0.0)) {
        fit.message = "not enough tail points to fit";
        return fit;
    }
    const double slope = (n * sty - st * sy) / den;
    fit.intercept = (sy - slope * st) / n;
    fit.C2 = -slope;
    double ss = 0.0;
    for (const auto& p : pts) {
        if (p.t >= t_half) {
            const double r = std::log(p.h) - (fit.intercept + slope * p.t);
            ss += r * r;
        }
    }
    fit.fit_residual = std::sqrt(ss / n);
    if (!(fit.C2 > 0.0)) {
        fit.message = "fitted decay rate is not positive";
        return fit;
    }
    double log_c1 = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        log_c1 = std::min(log_c1, std::log(p.h) + fit.C2 * p.t);
    }
    fit.C1 = std::exp(log_c1);
    fit.holds = std::all_of(pts.begin(), pts.end(), [&](const TrajectoryPoint& p) {
        return p.h >= fit.C1 * std::exp(-fit.C2 * p.t) * (1.0 - 1e-12);
    });
    fit.ok = fit.holds;
    fit.message = fit.ok ? "bound holds" : "bound violated";
    return fit;
}

struct CollisionQuadrature {
    bool divergent = false;
    double t_coll = std::numeric_limits<double>::infinity();
    double error_estimate = 0.0;
    /// (h U^{-1}) at 1e-7 over its value at 1e-5; tends to 1 for a 1/h drag
    /// (logarithmic divergence), to 0 when the integral converges.
    double divergence_indicator = 0.0;
};

/// T_coll = int_0^{h0} dh / U(h), U = -h' = F(h) / kappa_pass(h), massless.
/// Integrated in s = ln h; below the smaller of beta and the kappa_prop clamp
/// the Navier integrand is integrated in closed form.
[[nodiscard]] inline CollisionQuadrature collision_time_quadrature(const SwimmerScenario& s,
                                                                   const DragModel& model = detail::default_drag_model(),
                                                                   double rel_tol = 1e-10)
{
    validate(s);
    if (s.m != 0.0) {
        throw DomainError("collision_time_quadrature: requires a massless scenario");
    }
    auto speed = [&](double h) {
        const double u = driving_force(h, s, model).first / model.kappa_pass(h, s.bc);
        if (!(u > 0.0)) {
            throw InvalidRegimeError("collision_time_quadrature: approach speed is not positive, no collision");
        }
        return u;
    };

    CollisionQuadrature out;
    if (s.bc.kind == BcKind::NoSlip) {
        const double g_small = 1e-7 / speed(1e-7);
        const double g_large = 1e-5 / speed(1e-5);
        out.divergence_indicator = g_small / g_large;
        speed(s.h0);
        if (out.divergence_indicator > 0.5) {
            out.divergent = true;
            return out;
        }
        throw InvalidRegimeError("collision_time_quadrature: no-slip integrand did not diverge as expected");
    }

    using boost::math::quadrature::gauss_kronrod;
    auto integrand = [&](double sl) {
        const double h = std::exp(sl);
        return h / speed(h);
    };
    const double beta = s.bc.beta;
    const double h_low = std::min({beta, kPropulsionClampGap, s.h0});
    double total = 0.0;
    double err_total = 0.0;
    auto add_piece = [&](double a, double b) {
        if (b <= a) {
            return;
        }
        double err = 0.0;
        total += gauss_kronrod<double, 15>::integrate(integrand, a, b, 20, rel_tol, &err);
        err_total += err;
    };
    const double ln_low = std::log(h_low);
    const double ln_beta = std::log(beta);
    const double ln_h0 = std::log(s.h0);
    add_piece(ln_low, std::min(ln_beta, ln_h0));
    add_piece(ln_beta, ln_h0);

    // int_0^{h_low} kappa(beta) (1 + ln(beta/h)) / F dh with F frozen at h_low.
    const double k_beta = model.kappa_pass(beta, s.bc);
    const double force = driving_force(h_low, s, model).first;
    if (!(force > 0.0)) {
        throw InvalidRegimeError("collision_time_quadrature: non-positive driving force");
    }
    total += k_beta * h_low * (2.0 + std::log(beta / h_low)) / force;
    out.t_coll = total;
    out.error_estimate = err_total;
    return out;
}

enum class ProbeOutcome { CriticalSpeed, CollidesForAll, NoCollision, NonBracketing };

[[nodiscard]] inline std::string to_string(ProbeOutcome o)
{
    switch (o) {
    case ProbeOutcome::CriticalSpeed: return "critical_speed";
    case ProbeOutcome::CollidesForAll: return "collides_for_all_probed";
    case ProbeOutcome::NoCollision: return "no_collision_for_all_probed";
    case ProbeOutcome::NonBracketing: return "non_bracketing";
    }
    return "unknown";
}

struct ProbeSample {
    double s0 = 0.0;
    bool collided = false;
    double t_end = 0.0;
};

struct ProbeReport {
    ProbeOutcome outcome = ProbeOutcome::NonBracketing;
    std::optional<double> critical_s0;
    std::vector<ProbeSample> samples; ///< sorted by s0
    bool monotone = true; ///< collision at s0 = a implies collision at every probed b > a
};

/// Scans s0 over [s_lo, s_hi] and bisects a no-collision / collision
/// transition if one is bracketed.
[[nodiscard]] inline ProbeReport threshold_speed_probe(const SwimmerScenario& base, double s_lo, double s_hi,
                                                       const SimulationOptions& opt, int grid_points = 5,
                                                       double s_tol = 1e-3,
                                                       const DragModel& model = detail::default_drag_model())
{
    if (!(s_lo >= 0.0) || !(s_hi > s_lo) || grid_points < 2) {
        throw DomainError("threshold_speed_probe: require 0 <= s_lo < s_hi and at least two grid points");
    }
    auto run = [&](double s0) {
        SwimmerScenario sc = base;
        sc.s0 = s0;
        const auto tr = simulate(sc, opt, model);
        return ProbeSample{s0, tr.termination == Termination::Collision, tr.points.back().t};
    };

    ProbeReport rep;
    for (int i = 0; i < grid_points; ++i) {
        const double s0 = s_lo + (s_hi - s_lo) * i / (grid_points - 1);
        rep.samples.push_back(run(s0));
    }
    bool seen = false;
    for (const auto& smp : rep.samples) {
        if (seen && !smp.collided) {
            rep.monotone = false;
        }
        seen = seen || smp.collided;
    }
    const auto collided = std::count_if(rep.samples.begin(), rep.samples.end(),
                                        [](const ProbeSample& p) { return p.collided; });
    if (!rep.monotone) {
        rep.outcome = ProbeOutcome::NonBracketing;
        return rep;
    }
    if (collided == static_cast<long>(rep.samples.size())) {
        rep.outcome = ProbeOutcome::CollidesForAll;
        return rep;
    }
    if (collided == 0) {
        rep.outcome = ProbeOutcome::NoCollision;
        return rep;
    }
    const auto first = std::find_if(rep.samples.begin(), rep.samples.end(),
                                    [](const ProbeSample& p) { return p.collided; });
    double lo = std::prev(first)->s0;
    double hi = first->s0;
    while (hi - lo > s_tol) {
        const double mid = 0.5 * (lo + hi);
        const auto smp = run(mid);
        rep.samples.push_back(smp);
        (smp.collided ? hi : lo) = mid;
    }
    std::sort(rep.samples.begin(), rep.samples.end(),
              [](const ProbeSample& a, const ProbeSample& b) { return a.s0 < b.s0; });
    rep.outcome = ProbeOutcome::CriticalSpeed;
    rep.critical_s0 = 0.5 * (lo + hi);
    return rep;
}

} // namespace twosphere
