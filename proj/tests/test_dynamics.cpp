#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "twosphere/dynamics.hpp"

using namespace twosphere;

namespace {

double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

SwimmerScenario base_swimmers()
{
    SwimmerScenario s;
    s.h0 = 0.5;
    s.m = 0.0;
    s.f_p = 1.0;
    s.lambda = 1.0;
    return s;
}

SwimmerScenario massless_navier(double beta = 0.1)
{
    SwimmerScenario s = base_swimmers();
    s.bc = BoundaryCondition::navier(beta);
    return s;
}

SimulationOptions horizon(double t_max)
{
    SimulationOptions o;
    o.t_max = t_max;
    return o;
}

// Composite Simpson in s = ln h.
double integrate_log(const std::function<double(double)>& f, double a, double b, int n = 4000)
{
    const double la = std::log(a), lb = std::log(b), dx = (lb - la) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double h = std::exp(la + i * dx);
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * f(h) * h;
    }
    return sum * dx / 3.0;
}

} // namespace

TEST(Rhs, EquilibriumWithoutPropulsion)
{
    SwimmerScenario s = base_swimmers();
    s.f_p = 0.0;
    s.m = 1.0;
    const auto r = rhs(0.3, 0.0, s, detail::default_drag_model());
    EXPECT_EQ(r.hdot, 0.0);
    EXPECT_EQ(r.hddot, 0.0);
}

TEST(Rhs, PassiveMasslessVelocity)
{
    SwimmerScenario s = base_swimmers();
    s.mode = PassiveForced{2.0};
    for (double h : {1e-3, 0.1, 1.0}) {
        const auto r = rhs(h, 0.0, s, detail::default_drag_model());
        EXPECT_LT(r.hdot, 0.0);
        EXPECT_DOUBLE_EQ(r.hdot, -2.0 / kappa_pass(h, {}));
    }
}

TEST(Rhs, InertialBalance)
{
    SwimmerScenario s = base_swimmers();
    s.m = 0.25;
    const double h = 0.2, v = -0.3;
    const auto r = rhs(h, v, s, detail::default_drag_model());
    const double kp = kappa_pass(h, {});
    const double kq = kappa_prop(h, 1.0, {});
    EXPECT_DOUBLE_EQ(r.hdot, v);
    EXPECT_NEAR(r.hddot, (-kp * v - (1.0 - kq)) / 0.25, 1e-12);
}

TEST(Rhs, SpeedEqualsSumOfPassiveAndSwimContributions)
{
    int k = 0;
    for (double h : {0.005, 0.05, 0.5, 2.0, 8.0}) {
        for (double lam : {0.3, 3.0}) {
            SwimmerScenario s = base_swimmers();
            s.lambda = lam;
            const double hdot = rhs(h, 0.0, s, detail::default_drag_model()).hdot;
            const double v = 1.0 / kappa_pass_noslip(h);
            const double w = swim_contribution_W(h, lam, 1.0);
            EXPECT_LT(rel(-hdot, v + w), 1e-8) << h << " " << lam;
            ++k;
        }
    }
    EXPECT_EQ(k, 10);
}

TEST(Rhs, RejectsNonPositiveGap)
{
    EXPECT_THROW((void)rhs(0.0, 0.0, base_swimmers(), detail::default_drag_model()), DomainError);
}

TEST(Scenario, Validation)
{
    SwimmerScenario s = base_swimmers();
    s.h0 = 0.0;
    EXPECT_THROW(validate(s), DomainError);
    s = base_swimmers();
    s.lambda = 0.0;
    EXPECT_THROW(validate(s), DomainError);
    s = base_swimmers();
    s.mode = PassiveForced{0.0};
    EXPECT_THROW(validate(s), DomainError);
    s = base_swimmers();
    s.s0 = -1.0;
    EXPECT_THROW(validate(s), DomainError);
}

TEST(Simulate, NoSlipNeverReachesFloor)
{
    const auto tr = simulate(base_swimmers(), horizon(200.0));
    EXPECT_EQ(tr.termination, Termination::HorizonReached);
    EXPECT_FALSE(tr.t_coll.has_value());
    EXPECT_GT(tr.min_h(), 1e-7);
    EXPECT_DOUBLE_EQ(tr.points.back().t, 200.0);
}

TEST(Simulate, TrajectoryInvariants)
{
    const auto tr = simulate(massless_navier(), horizon(1e4));
    ASSERT_EQ(tr.termination, Termination::Collision);
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
        const auto& a = tr.points[i - 1];
        const auto& b = tr.points[i];
        EXPECT_GT(b.t, a.t);
        EXPECT_GE(b.h, 0.0);
        if (std::min(a.h, b.h) < 0.1) {
            EXPECT_LE(std::abs(std::log(b.h / a.h)), 0.1 + 1e-12) << i;
        }
    }
    EXPECT_LE(tr.points.back().h, tr.h_floor);
    EXPECT_LT(std::abs(tr.points.back().h - tr.h_floor), 1e-10);
    EXPECT_EQ(*tr.t_coll, tr.points.back().t);
}

TEST(Simulate, NavierCollidesWithInertia)
{
    SwimmerScenario s = massless_navier();
    s.m = 1.0;
    s.s0 = 2.0;
    const auto tr = simulate(s, horizon(1e4));
    EXPECT_EQ(tr.termination, Termination::Collision);
    ASSERT_TRUE(tr.t_coll.has_value());
    EXPECT_TRUE(std::isfinite(*tr.t_coll));
    EXPECT_GT(*tr.t_coll, 0.0);
}

TEST(Simulate, Deterministic)
{
    const auto a = simulate(massless_navier(), horizon(1e4));
    const auto b = simulate(massless_navier(), horizon(1e4));
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(a.points[i].t, b.points[i].t);
        EXPECT_EQ(a.points[i].h, b.points[i].h);
        EXPECT_EQ(a.points[i].hdot, b.points[i].hdot);
    }
}

TEST(Simulate, RefinementConverges)
{
    const auto s = massless_navier();
    const auto coarse = simulate(s, horizon(1e4));
    SimulationOptions half = horizon(1e4);
    half.rtol *= 0.5;
    half.atol *= 0.5;
    SimulationOptions fine = horizon(1e4);
    fine.rtol *= 0.1;
    fine.atol *= 0.1;
    fine.h_floor = 0.1 * default_h_floor(s.bc);
    EXPECT_LT(rel(*coarse.t_coll, *simulate(s, half).t_coll), 1e-3);
    EXPECT_LT(rel(*coarse.t_coll, *simulate(s, fine).t_coll), 1e-3);
}

TEST(Simulate, PureDragDecelerates)
{
    SwimmerScenario s = base_swimmers();
    s.m = 0.5;
    s.f_p = 0.0;
    s.s0 = 1.0;
    const auto tr = simulate(s, horizon(0.1));
    ASSERT_GT(tr.points.size(), 10U);
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
        EXPECT_LE(std::abs(tr.points[i].hdot), std::abs(tr.points[i - 1].hdot));
    }
}

TEST(Simulate, SpeedReversalStops)
{
    // kappa_prop > 1 would push the swimmers apart
    const DragModel repulsive({}, [](double, double, const BoundaryCondition&) { return 1.5; });
    const auto tr = simulate(base_swimmers(), horizon(10.0), repulsive);
    EXPECT_EQ(tr.termination, Termination::SpeedReversed);
    EXPECT_GT(tr.points.back().hdot, 0.0);
}

TEST(Simulate, StepBudgetRaisesStiffnessError)
{
    SimulationOptions o = horizon(1e4);
    o.max_steps = 5;
    try {
        (void)simulate(massless_navier(), o);
        FAIL() << "expected StiffnessError";
    } catch (const StiffnessError& e) {
        EXPECT_GT(e.h(), 0.0);
        EXPECT_GT(e.t(), 0.0);
    }
}

TEST(Simulate, RejectsBadOptions)
{
    EXPECT_THROW((void)simulate(base_swimmers(), horizon(0.0)), DomainError);
    SimulationOptions o = horizon(1.0);
    o.h_floor = 1.0;
    EXPECT_THROW((void)simulate(base_swimmers(), o), DomainError);
    o.h_floor = 1e-9;
    EXPECT_THROW((void)simulate(base_swimmers(), o), DomainError);
}

TEST(LowerBound, HoldsOnNoSlipTrajectory)
{
    const auto tr = simulate(base_swimmers(), horizon(200.0));
    const auto fit = noslip_lower_bound_fit(tr);
    EXPECT_TRUE(fit.ok) << fit.message;
    EXPECT_TRUE(fit.holds);
    EXPECT_GT(fit.C1, 0.0);
    EXPECT_GT(fit.C2, 0.0);
    for (const auto& p : tr.points) {
        EXPECT_GE(p.h, fit.C1 * std::exp(-fit.C2 * p.t) * (1.0 - 1e-12));
    }
}

TEST(LowerBound, PassiveDecayRateLinearInForce)
{
    SwimmerScenario s = base_swimmers();
    s.mode = PassiveForced{1.0};
    const auto one = simulate(s, horizon(100.0));
    s.mode = PassiveForced{2.0};
    const auto two = simulate(s, horizon(100.0));
    const auto f1 = noslip_lower_bound_fit(one);
    const auto f2 = noslip_lower_bound_fit(two);
    ASSERT_TRUE(f1.ok && f2.ok);
    EXPECT_TRUE(f1.holds);
    EXPECT_TRUE(f2.holds);
    const double ratio = f2.C2 / f1.C2;
    EXPECT_GE(ratio, 1.8);
    EXPECT_LE(ratio, 2.2);
}

TEST(LowerBound, ReportsNonMonotoneTrajectory)
{
    Trajectory tr;
    for (int i = 0; i < 10; ++i) {
        tr.points.push_back({double(i), i == 5 ? 0.9 : 1.0 / (i + 1), -0.1, 1.0, 0.5});
    }
    const auto fit = noslip_lower_bound_fit(tr);
    EXPECT_FALSE(fit.ok);
    EXPECT_NE(fit.message.find("monoton"), std::string::npos);
}

TEST(Quadrature, MatchesEventTime)
{
    for (double beta : {0.05, 0.1, 0.2}) {
        const auto s = massless_navier(beta);
        const auto q = collision_time_quadrature(s);
        const auto tr = simulate(s, horizon(1e5));
        ASSERT_TRUE(tr.t_coll.has_value());
        EXPECT_FALSE(q.divergent);
        EXPECT_LT(rel(q.t_coll, *tr.t_coll), 0.02) << beta;
    }
}

TEST(Quadrature, MatchesIndependentSimpsonRule)
{
    SwimmerScenario s = massless_navier(0.1);
    s.mode = PassiveForced{1.0};
    s.h0 = 1.0;
    const auto q = collision_time_quadrature(s);
    // T = int_0^1 kappa(h) dh; below 1e-9 the log law integrates in closed form
    const auto bc = s.bc;
    const double kb = kappa_pass(0.1, bc);
    const double lo = 1e-9;
    const double tail = kb * lo * (2.0 + std::log(0.1 / lo));
    const double body = integrate_log([&](double h) { return kappa_pass(h, bc); }, lo, 0.1) +
                        integrate_log([&](double h) { return kappa_pass(h, bc); }, 0.1, 1.0);
    EXPECT_LT(rel(q.t_coll, tail + body), 1e-6);
}

TEST(Quadrature, NoSlipDiverges)
{
    const auto q = collision_time_quadrature(base_swimmers());
    EXPECT_TRUE(q.divergent);
    EXPECT_TRUE(std::isinf(q.t_coll));
    EXPECT_GT(q.divergence_indicator, 0.9);
}

TEST(Quadrature, Errors)
{
    SwimmerScenario s = massless_navier();
    s.m = 0.1;
    EXPECT_THROW((void)collision_time_quadrature(s), DomainError);
    const DragModel repulsive({}, [](double, double, const BoundaryCondition&) { return 1.5; });
    EXPECT_THROW((void)collision_time_quadrature(massless_navier(), repulsive), InvalidRegimeError);
}

TEST(Probe, NavierSwimmersCollideAtAnySpeed)
{
    SwimmerScenario s = massless_navier();
    s.m = 1.0;
    const auto rep = threshold_speed_probe(s, 0.0, 2.0, horizon(1e4), 3);
    EXPECT_EQ(rep.outcome, ProbeOutcome::CollidesForAll);
    EXPECT_TRUE(rep.monotone);
    EXPECT_FALSE(rep.critical_s0.has_value());
}

TEST(Probe, NoSlipFamilyNeverCollides)
{
    SwimmerScenario s = base_swimmers();
    s.m = 0.1;
    const auto rep = threshold_speed_probe(s, 0.0, 5.0, horizon(50.0), 3);
    EXPECT_EQ(rep.outcome, ProbeOutcome::NoCollision);
    EXPECT_TRUE(rep.monotone);
}

TEST(Probe, CoastingThresholdMatchesDragImpulse)
{
    // f_p = 0: m s0* = int_{h_floor}^{h0} kappa_pass dh
    SwimmerScenario s = massless_navier(0.1);
    s.f_p = 0.0;
    s.m = 1.0;
    const double lo = default_h_floor(s.bc);
    const auto k = [&](double h) { return kappa_pass(h, s.bc); };
    const double oracle = integrate_log(k, lo, 0.1) + integrate_log(k, 0.1, s.h0);

    const auto rep = threshold_speed_probe(s, 0.0, 2.0 * oracle, horizon(200.0), 5, 0.002 * oracle);
    ASSERT_EQ(rep.outcome, ProbeOutcome::CriticalSpeed);
    EXPECT_TRUE(rep.monotone);
    EXPECT_LT(rel(*rep.critical_s0, oracle), 0.01);
}

TEST(Probe, RejectsBadBounds)
{
    EXPECT_THROW((void)threshold_speed_probe(base_swimmers(), 1.0, 0.5, horizon(1.0)), DomainError);
}
