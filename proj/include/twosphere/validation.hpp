/// @file validation.hpp
/// @brief Machine-checkable invariants of the library, run as one suite by
/// `twosphere validate`.
#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "twosphere/drag.hpp"
#include "twosphere/dynamics.hpp"
#include "twosphere/geometry.hpp"
#include "twosphere/series.hpp"
#include "twosphere/stokeslet.hpp"

namespace twosphere {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct ValidationOptions {
    /// Test-mode mutation: scales the angular kernel of the stream function.
    double gegenbauer_scale = 1.0;
};

/// Trailing axis velocity from the stream function alone: g(rho) = 2 psi / rho^2
/// sampled at rho = 1e-3 and 5e-4 and extrapolated quadratically to rho = 0.
[[nodiscard]] inline double axis_velocity_from_stream(const SeriesSolution& sol, double z0,
                                                      double gegenbauer_scale = 1.0)
{
    auto g = [&](double rho) {
        const auto q = to_bipolar({rho, z0}, sol.frame());
        return 2.0 * detail::stream_psi_impl(sol, q, gegenbauer_scale) / (rho * rho);
    };
    const double g1 = g(1e-3);
    const double g2 = g(5e-4);
    return (4.0 * g2 - g1) / 3.0;
}

namespace detail {

inline double rel_diff(double a, double b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

using Check = std::pair<std::string, std::function<std::pair<bool, std::string>()>>;

inline std::vector<Check> geometry_checks()
{
    std::vector<Check> checks;
    checks.emplace_back("frame_invariants", [] {
        double worst = 0.0;
        for (double e = -8.0; e <= 3.0; e += 0.25) {
            const double h = std::pow(10.0, e);
            const auto f = frame_from_gap(h);
            worst = std::max({worst, rel_diff(std::cosh(f.alpha), 1.0 + h), rel_diff(f.c * f.c, h * (2.0 + h))});
        }
        return std::pair{worst <= 1e-12, "max relative defect " + fmt(worst)};
    });
    checks.emplace_back("bipolar_roundtrip", [] {
        const auto f = frame_from_gap(0.5);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                const AxisymPoint p{0.05 + 0.3 * i, 0.02 + 0.35 * j};
                const auto back = from_bipolar(to_bipolar(p, f), f);
                worst = std::max({worst, std::abs(back.rho - p.rho) / std::max(1.0, p.rho),
                                  std::abs(back.z - p.z) / std::max(1.0, p.z)});
            }
        }
        return std::pair{worst <= 1e-10, "max error " + fmt(worst)};
    });
    checks.emplace_back("sphere_surface", [] {
        double worst = 0.0;
        for (double h : {0.01, 0.5, 3.0}) {
            const auto f = frame_from_gap(h);
            for (int k = 0; k < 50; ++k) {
                const double eta = std::numbers::pi * k / 49.0;
                const auto p = from_bipolar({f.alpha, eta}, f);
                worst = std::max(worst, std::abs(std::hypot(p.rho, p.z - (1.0 + h)) - 1.0));
            }
        }
        return std::pair{worst <= 1e-10, "max radius defect " + fmt(worst)};
    });
    checks.emplace_back("legendre_vs_explicit", [] {
        double worst = 0.0;
        for (double x = -1.0; x <= 1.0; x += 0.125) {
            const auto p = legendre_P(10, x);
            for (int n = 0; n <= 10; ++n) {
                // P_n(x) = 2^-n sum_k (-1)^k C(n,k) C(2n-2k,n) x^(n-2k)
                double s = 0.0;
                for (int k = 0; 2 * k <= n; ++k) {
                    s += (k % 2 ? -1.0 : 1.0) * std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)) *
                         std::tgamma(2.0 * n - 2.0 * k + 1.0) /
                         (std::tgamma(n + 1.0) * std::tgamma(n - 2.0 * k + 1.0)) * std::pow(x, n - 2 * k);
                }
                worst = std::max(worst, std::abs(p[n] - std::ldexp(s, -n)));
            }
        }
        return std::pair{worst <= 1e-12, "max difference " + fmt(worst)};
    });
    return checks;
}

inline std::vector<Check> series_checks(const ValidationOptions& opt)
{
    std::vector<Check> checks;
    checks.emplace_back("dual_formula_U_n", [] {
        double worst = 0.0;
        for (double h : {0.01, 0.1, 0.5}) {
            const auto sol = coefficients_bd(frame_from_gap(h), 1.0, {50, 1e-10, false});
            const double a = sol.frame().alpha;
            for (int n = 1; n <= 50; ++n) {
                for (double xi : {0.25 * a, 0.5 * a, 0.9 * a, a}) {
                    worst = std::max(worst, rel_diff(U_n_eval(sol, n, xi), U_n_eval_reciprocal(sol, n, xi)));
                }
            }
        }
        return std::pair{worst <= 1e-9, "max relative difference " + fmt(worst)};
    });
    checks.emplace_back("nonpenetration", [] {
        const auto sol = coefficients_bd(frame_from_gap(0.5), 2.0, {30, 1e-10, false});
        const auto rep = check_nonpenetration(sol);
        return std::pair{rep.w_scaled_wins && rep.max_w_scaled < 1e-8,
                         "W-scaled residual " + fmt(rep.max_w_scaled) + ", printed-form residual " + fmt(rep.max_plain)};
    });
    checks.emplace_back("positivity_chain", [] {
        int bad = 0;
        for (double h : {0.01, 0.1, 0.5}) {
            const auto sol = coefficients_bd(frame_from_gap(h), 1.0, {});
            const auto& f = sol.frame();
            for (double lam : {0.1, 1.0, 5.0}) {
                const double z0 = flagellum_tip(h, lam);
                const double zeta0 = std::log1p(2.0 * f.c / (z0 - f.c));
                for (int n = 1; n <= sol.modes(); ++n) {
                    bad += !(G_m(f, n) > 0.0 || G_m_scaled(f, n) > 0.0);
                    bad += !(sinh_ratio_bracket(f, n, zeta0) < 0.0);
                    bad += !(U_n_eval(sol, n, zeta0) > 0.0);
                }
                bad += !(axis_velocity_uz(sol, z0) > 0.0);
                bad += !(swim_contribution_W(h, lam, 1.0) < 0.0);
            }
        }
        return std::pair{bad == 0, std::to_string(bad) + " violations"};
    });
    checks.emplace_back("axis_velocity_vs_stream_function", [scale = opt.gegenbauer_scale] {
        double worst = 0.0;
        for (double h : {0.1, 0.5}) {
            const auto sol = coefficients_bd(frame_from_gap(h), 1.0, {});
            for (double lam : {0.1, 0.5, 1.0, 2.0, 5.0}) {
                const double z0 = flagellum_tip(h, lam);
                worst = std::max(worst, rel_diff(axis_velocity_uz(sol, z0), axis_velocity_from_stream(sol, z0, scale)));
            }
        }
        return std::pair{worst <= 1e-6, "max relative difference " + fmt(worst)};
    });
    checks.emplace_back("kappa_pass_limits", [] {
        const double far = kappa_pass_noslip(100.0);
        const double slope =
            std::log(kappa_pass_noslip(1e-3) / kappa_pass_noslip(1e-4)) / std::log(1e-3 / 1e-4);
        bool monotone = true;
        double prev = std::numeric_limits<double>::infinity();
        double max_kh = 0.0;
        for (double e = -5.0; e <= 2.0; e += 0.25) {
            const double h = std::pow(10.0, e);
            const double k = kappa_pass_noslip(h);
            monotone = monotone && k < prev && k > 0.0;
            prev = k;
            if (h <= 1.0) {
                max_kh = std::max(max_kh, k * h);
            }
        }
        const bool ok = std::abs(far / (6.0 * std::numbers::pi) - 1.0) < 0.02 && std::abs(slope + 1.0) <= 0.05 &&
                        monotone && max_kh < 40.0;
        return std::pair{ok, "kappa(100)/6pi=" + fmt(far / (6.0 * std::numbers::pi)) + " slope=" + fmt(slope) +
                                 " max h*kappa=" + fmt(max_kh)};
    });
    checks.emplace_back("kappa_prop_grid", [] {
        bool ok = kappa_prop_noslip(0.01, 0.01) > 0.9;
        for (double h : {0.01, 0.1, 0.5}) {
            double prev = 1.0;
            for (double lam : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
                const double k = kappa_prop_noslip(h, lam);
                ok = ok && k > 0.0 && k < 1.0 && k < prev;
                prev = k;
            }
        }
        return std::pair{ok, ok ? "0 < kappa_prop < 1, decreasing in lambda" : "grid violation"};
    });
    checks.emplace_back("swim_speed_consistency", [] {
        double worst = 0.0;
        for (double h : {0.01, 0.1, 1.0}) {
            for (double lam : {0.1, 1.0, 5.0}) {
                const double w = swim_contribution_W(h, lam, 1.0);
                worst = std::max(worst, rel_diff(w, -kappa_prop_noslip(h, lam) / kappa_pass_noslip(h)));
            }
        }
        return std::pair{worst <= 1e-8, "max relative difference " + fmt(worst)};
    });
    checks.emplace_back("truncation_robustness", [] {
        double worst = 0.0;
        for (double h : {0.5, 0.01}) {
            const auto f = frame_from_gap(h);
            const auto sol = coefficients_bd(f, 1.0, {});
            const auto twice = coefficients_bd(f, 1.0, {2 * sol.modes(), 1e-10, false});
            worst = std::max({worst, rel_diff(passive_drag(sol), passive_drag(twice)),
                              rel_diff(kappa_prop_from(sol, 1.0), kappa_prop_from(twice, 1.0))});
        }
        return std::pair{worst < 1e-10, "max relative change " + fmt(worst)};
    });
    return checks;
}

inline std::vector<Check> model_checks()
{
    std::vector<Check> checks;
    checks.emplace_back("navier_model", [] {
        const auto nav = BoundaryCondition::navier(0.1);
        const double kb = kappa_pass(0.1, nav);
        const double left = kappa_pass(std::nextafter(0.1, 0.0), nav);
        bool ok = rel_diff(kb, left) <= 1e-10;
        // slope of kappa against ln(1/h) over [1e-6, 1e-2]
        double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (double e = -6.0; e <= -2.0; e += 0.5) {
            const double x = -e * std::numbers::ln10;
            const double y = kappa_pass(std::pow(10.0, e), nav);
            n += 1;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        ok = ok && std::abs(slope / kb - 1.0) < 0.05;
        for (double h : {1e-3, 1e-2, 0.3, 2.0}) {
            ok = ok && kappa_pass(h, BoundaryCondition::navier(0.0)) == kappa_pass(h, BoundaryCondition::no_slip());
            ok = ok && rel_diff(kappa_pass(h, BoundaryCondition::navier(1e-8)), kappa_pass(h, {})) < 1e-8;
        }
        double lo = 1e300, hi = 0.0;
        for (double e = -12.0; e <= -2.0; e += 1.0) {
            const double h = std::pow(10.0, e);
            const double r = kappa_pass(h, nav) * 0.1 / std::log(1.0 / h);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        ok = ok && lo > 0.0 && hi < 1e3;
        return std::pair{ok, "slope/(A/beta)=" + fmt(slope / kb) + " beta*kappa/ln(1/h) in [" + fmt(lo) + ", " +
                                 fmt(hi) + "]"};
    });
    checks.emplace_back("cache_transparency", [] {
        const DragModel model;
        std::vector<double> hs;
        for (int i = 0; i < 16; ++i) {
            hs.push_back(0.003 * (i + 1));
        }
        std::vector<double> got(hs.size() * 4);
        std::vector<std::thread> pool;
        for (int t = 0; t < 4; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = 0; i < hs.size(); ++i) {
                    got[t * hs.size() + i] = model.kappa_pass(hs[i], {});
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        bool ok = true;
        for (std::size_t k = 0; k < got.size(); ++k) {
            ok = ok && got[k] == kappa_pass_noslip(hs[k % hs.size()]);
        }
        return std::pair{ok, ok ? "cached values identical to fresh evaluation" : "cache changed a value"};
    });
    checks.emplace_back("stokeslet_incompressible", [] {
        const StokesletPair pair(1.0, 1.0, 0.5);
        double worst = 0.0;
        const double d = 1e-4;
        for (int k = 0; k < 20; ++k) {
            const Vec3 x{0.3 + 0.17 * k, -0.5 + 0.05 * k, -4.0 + 0.4 * k};
            double div = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                Vec3 xp = x, xm = x;
                xp[i] += d;
                xm[i] -= d;
                div += (ambient_field(pair, xp)[i] - ambient_field(pair, xm)[i]) / (2.0 * d);
            }
            worst = std::max(worst, std::abs(div));
        }
        return std::pair{worst < 1e-6, "max divergence " + fmt(worst)};
    });
    return checks;
}

inline std::vector<Check> dynamics_checks()
{
    std::vector<Check> checks;
    checks.emplace_back("pure_drag_decelerates", [] {
        SwimmerScenario s;
        s.m = 0.5;
        s.f_p = 0.0;
        s.s0 = 1.0;
        SimulationOptions o;
        o.t_max = 0.1; // speed stays well above atol
        const auto tr = simulate(s, o);
        bool ok = true;
        for (std::size_t i = 1; i < tr.points.size(); ++i) {
            ok = ok && std::abs(tr.points[i].hdot) <= std::abs(tr.points[i - 1].hdot);
        }
        return std::pair{ok, std::to_string(tr.points.size()) + " points"};
    });
    checks.emplace_back("no_slip_no_collision", [] {
        SwimmerScenario s;
        SimulationOptions o;
        o.t_max = 200.0;
        const auto a = simulate(s, o);
        const auto b = simulate(s, o);
        bool same = a.points.size() == b.points.size();
        for (std::size_t i = 0; same && i < a.points.size(); ++i) {
            same = a.points[i].t == b.points[i].t && a.points[i].h == b.points[i].h;
        }
        const auto fit = noslip_lower_bound_fit(a);
        const bool ok = a.termination == Termination::HorizonReached && a.min_h() > o.h_floor && fit.holds && same;
        return std::pair{ok, "min h " + fmt(a.min_h()) + ", C1=" + fmt(fit.C1) + " C2=" + fmt(fit.C2) +
                                 (same ? ", deterministic" : ", NOT deterministic")};
    });
    checks.emplace_back("navier_collision", [] {
        SwimmerScenario s;
        s.bc = BoundaryCondition::navier(0.1);
        s.m = 0.1;
        s.s0 = 1.0;
        SimulationOptions o;
        o.t_max = 1e4;
        const auto tr = simulate(s, o);
        const bool hit = tr.termination == Termination::Collision && tr.t_coll && std::isfinite(*tr.t_coll);
        const double miss = std::abs(tr.points.back().h - default_h_floor(s.bc));
        return std::pair{hit && miss < 1e-10, "T_coll=" + fmt(tr.t_coll.value_or(-1.0)) +
                                                  " |h(T)-h_floor|=" + fmt(miss)};
    });
    checks.emplace_back("quadrature_vs_event", [] {
        SwimmerScenario s;
        s.bc = BoundaryCondition::navier(0.1);
        SimulationOptions o;
        o.t_max = 1e5;
        const auto tr = simulate(s, o);
        const auto q = collision_time_quadrature(s);
        SimulationOptions fine = o;
        fine.rtol *= 0.1;
        fine.atol *= 0.1;
        fine.h_floor = 0.1 * default_h_floor(s.bc);
        const auto tr_fine = simulate(s, fine);
        const double d_quad = rel_diff(tr.t_coll.value_or(0.0), q.t_coll);
        const double d_ref = rel_diff(tr.t_coll.value_or(0.0), tr_fine.t_coll.value_or(0.0));
        return std::pair{d_quad < 0.02 && d_ref < 1e-3,
                         "quadrature " + fmt(d_quad) + ", refinement " + fmt(d_ref) + " relative"};
    });
    checks.emplace_back("no_slip_quadrature_diverges", [] {
        const auto q = collision_time_quadrature(SwimmerScenario{});
        return std::pair{q.divergent, "indicator " + fmt(q.divergence_indicator)};
    });
    return checks;
}

} // namespace detail

/// Runs every check; exceptions count as failures.
[[nodiscard]] inline std::vector<CheckResult> run_validation_suite(const ValidationOptions& opt = {},
                                                                   const std::function<void(const CheckResult&)>& on_result = {})
{
    std::vector<detail::Check> all;
    for (auto&& group : {detail::geometry_checks(), detail::series_checks(opt), detail::model_checks(),
                         detail::dynamics_checks()}) {
        all.insert(all.end(), group.begin(), group.end());
    }
    std::vector<CheckResult> results;
    for (const auto& [name, fn] : all) {
        CheckResult r{name};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            std::tie(r.passed, r.detail) = fn();
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_result) {
            on_result(r);
        }
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace twosphere
