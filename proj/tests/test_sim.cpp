#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "carfollow/errors.hpp"
#include "carfollow/rk4.hpp"
#include "carfollow/sim.hpp"

using namespace carfollow;
using namespace carfollow::sim;

namespace {

double sup_diff(const SimTrace& a, const SimTrace& b, double TraceRow::*f, std::size_t stride_b)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        worst = std::max(worst, std::abs(a.rows[i].*f - b.rows[i * stride_b].*f));
    }
    return worst;
}

Scenario with_dt(Scenario s, double dt)
{
    s.dt = dt;
    return s;
}

}  // namespace

TEST(Lead, Examples)
{
    EXPECT_EQ(lead_speed(ConstantSpeed{20.0}, 0.0), 20.0);
    EXPECT_EQ(lead_speed(ConstantSpeed{20.0}, 1234.5), 20.0);
    EXPECT_EQ(lead_speed(DecelToStop{20.0, 2.0}, 10.0), 0.0);
    EXPECT_EQ(lead_speed(DecelToStop{20.0, 2.0}, 25.0), 0.0);
    EXPECT_DOUBLE_EQ(lead_speed(DecelToStop{20.0, 2.0}, 4.0), 12.0);
    EXPECT_EQ(lead_acceleration(DecelToStop{20.0, 2.0}, 4.0), -2.0);
    EXPECT_EQ(lead_acceleration(DecelToStop{20.0, 2.0}, 11.0), 0.0);
    EXPECT_NEAR(lead_speed(Sinusoid{15.0, 15.0, 0.05}, 15.0), 0.0, 1e-12);
    EXPECT_GE(lead_speed(Sinusoid{15.0, 15.0, 0.05}, 15.0), 0.0);
    EXPECT_GE(lead_speed(Sinusoid{5.0, 15.0, 0.05}, 15.0), 0.0);
}

TEST(Lead, PiecewiseTable)
{
    const PiecewiseTable tbl{{{0.0, 10.0}, {10.0, 20.0}, {20.0, 20.0}}};
    EXPECT_EQ(lead_speed(tbl, -1.0 + 1.0), 10.0);
    EXPECT_DOUBLE_EQ(lead_speed(tbl, 5.0), 15.0);
    EXPECT_EQ(lead_speed(tbl, 100.0), 20.0);
    EXPECT_DOUBLE_EQ(lead_acceleration(tbl, 5.0), 1.0);
    EXPECT_THROW(validate(PiecewiseTable{{{1.0, 2.0}, {0.5, 3.0}}}), ParameterError);
    EXPECT_THROW(validate(PiecewiseTable{}), ParameterError);
}

TEST(Scenario, Validation)
{
    Scenario s;
    EXPECT_NO_THROW(s.validate());
    s.dt = 0.0;
    EXPECT_THROW(s.validate(), ParameterError);
    s = Scenario{};
    s.dt = 50.0;
    EXPECT_THROW(s.validate(), ParameterError);
    s = Scenario{};
    s.disturbance = {plant::DisturbanceKind::ConstantDelta, 0.5};
    EXPECT_THROW(s.validate(), ParameterError);
    s.plant = plant::PlantKind::Disturbed;
    EXPECT_NO_THROW(s.validate());
    s.plant = plant::PlantKind::Lag;
    EXPECT_THROW(s.validate(), ParameterError);
    s = Scenario{};
    s.plant = plant::PlantKind::Lag;
    s.physics.tau = 0.0;
    EXPECT_THROW(s.validate(), ParameterError);
    s = Scenario{};
    s.initial.h = -1.0;
    EXPECT_THROW(s.validate(), ParameterError);
}

TEST(Catalog, NamesAndInitialConditions)
{
    const auto names = builtin_scenario_names();
    for (const char* n : {"fig4", "fig4-linear", "fig5", "fig5-linear", "fig6", "fig6-linear", "fig7", "fig7-linear",
                          "fig8a", "fig8b", "fig9a", "fig9b", "fig10a", "fig10b"}) {
        EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    }
    const auto f4 = find_scenario("fig4");
    EXPECT_EQ(f4.initial.h, 90.0);
    EXPECT_EQ(f4.initial.v_F, 28.0);
    EXPECT_EQ(lead_speed(f4.lead, 0.0), 20.0);
    const auto f9 = find_scenario("fig9a");
    const auto& sin = std::get<Sinusoid>(f9.lead);
    EXPECT_EQ(sin.v0, 15.0);
    EXPECT_EQ(sin.f, 0.05);
    const auto f10 = find_scenario("fig10b");
    EXPECT_EQ(f10.params.k_i, 0.1);
    EXPECT_EQ(f10.physics.tau, 0.8);
    EXPECT_TRUE(f10.integral_action);
    const auto lin = find_scenario("fig6-linear");
    EXPECT_EQ(lin.controller, control::ControllerKind::Linear);
    EXPECT_EQ(lin.range_policy, control::RangePolicy::FollowerBased);
    EXPECT_THROW((void)find_scenario("fig99"), LookupError);
    for (const auto& s : builtin_scenarios()) {
        EXPECT_NO_THROW(s.validate()) << s.name;
    }
}

TEST(Step, EquilibriumIsFixedPoint)
{
    Scenario s;
    auto state = initial_state(s);
    for (int i = 0; i < 100; ++i) {
        const auto next = step(s, state, i * s.dt);
        ASSERT_NEAR(next.plant.h, state.plant.h, 1e-12);
        ASSERT_NEAR(next.plant.v_F, state.plant.v_F, 1e-12);
        state = next;
    }
}

TEST(Step, Rk4ExactForConstantInput)
{
    auto f = [](double, const std::array<double, 2>& x) { return std::array<double, 2>{20.0 - x[1], -0.5}; };
    const auto next = rk4_step(f, 0.0, std::array<double, 2>{25.0, 20.0}, 0.01);
    EXPECT_NEAR(next[1], 20.0 - 0.5 * 0.01, 1e-14);
    EXPECT_NEAR(next[0], 25.0 + 0.5 * 0.5 * 0.01 * 0.01, 1e-14);
}

TEST(Run, TraceShape)
{
    const auto s = find_scenario("fig4");
    const auto tr = run(s);
    ASSERT_EQ(tr.rows.size(), 4001u);
    EXPECT_EQ(tr.rows.front().t, 0.0);
    EXPECT_DOUBLE_EQ(tr.rows.back().t, 40.0);
    for (std::size_t i = 1; i < tr.rows.size(); ++i) {
        ASSERT_GT(tr.rows[i].t, tr.rows[i - 1].t);
        ASSERT_NEAR(tr.rows[i].t - tr.rows[i - 1].t, 0.01, 1e-12);
    }
    EXPECT_FALSE(tr.has_a_F);
    EXPECT_TRUE(run(find_scenario("fig10b")).has_a_F);
}

TEST(Run, Deterministic)
{
    for (const char* n : {"fig6", "fig9b", "fig10b"}) {
        const auto a = run(find_scenario(n));
        const auto b = run(find_scenario(n));
        ASSERT_EQ(a.rows.size(), b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            ASSERT_EQ(std::memcmp(&a.rows[i], &b.rows[i], sizeof(TraceRow)), 0) << n << ' ' << i;
        }
    }
}

TEST(Run, InitialCommandHasNoIntegral)
{
    const auto tr = run(find_scenario("fig10a"));
    EXPECT_EQ(tr.rows.front().u, tr.rows.front().a_des);
}

TEST(Run, Examples)
{
    const auto f6 = run(find_scenario("fig6"));
    double min_h = 1e9;
    for (const auto& r : f6.rows) min_h = std::min(min_h, r.h);
    EXPECT_GT(min_h, 5.0);

    for (const char* n : {"fig8a", "fig8b"}) {
        const auto tr = run(find_scenario(n));
        EXPECT_NEAR(tr.rows.back().h, 5.0, 0.2) << n;
        EXPECT_LT(tr.rows.back().v_F, 0.01) << n;
        for (const auto& r : tr.rows) ASSERT_GE(r.v_F, 0.0);
    }
}

TEST(Run, RefinementInvariance)
{
    const std::vector<double TraceRow::*> fields = {&TraceRow::h,    &TraceRow::h_des, &TraceRow::v_F,
                                                    &TraceRow::v_des, &TraceRow::S,    &TraceRow::a_des,
                                                    &TraceRow::a_fb, &TraceRow::a_fb_bar, &TraceRow::a_cf,
                                                    &TraceRow::u};
    for (const char* n : {"fig4", "fig5", "fig6", "fig7", "fig8a", "fig8b"}) {
        const auto s = find_scenario(n);
        const auto coarse = run(s);
        const auto fine = run(with_dt(s, s.dt / 2));
        ASSERT_EQ(fine.rows.size(), 2 * coarse.rows.size() - 1);
        for (auto f : fields) {
            EXPECT_LT(sup_diff(coarse, fine, f, 2), 1e-5) << n;
        }
    }
    const auto s = find_scenario("fig4");
    const auto a = run(s).rows.back();
    const auto b = run(with_dt(s, 0.005)).rows.back();
    EXPECT_LT(std::abs(a.h - b.h), 1e-6);
    EXPECT_LT(std::abs(a.v_F - b.v_F), 1e-6);
}

TEST(Run, SettlesFromEveryConstantLeadStart)
{
    for (const char* n : {"fig4", "fig5", "fig6", "fig7"}) {
        auto s = find_scenario(n);
        s.duration = 60.0;
        const auto tr = run(s);
        const auto& last = tr.rows.back();
        EXPECT_LT(std::abs(last.v_P - last.v_F), 0.05) << n;
        EXPECT_LT(std::abs(last.h - last.h_des), 0.1) << n;

        // |v_hat| and |h_hat| decrease after the last sign change of S
        std::size_t k = 1;
        for (std::size_t i = 1; i < tr.rows.size(); ++i) {
            if (std::signbit(tr.rows[i].S) != std::signbit(tr.rows[i - 1].S)) k = i;
        }
        double worst_v = 0.0;
        double worst_h = 0.0;
        for (std::size_t i = k + 1; i < tr.rows.size(); ++i) {
            const auto& r = tr.rows[i];
            const auto& p = tr.rows[i - 1];
            worst_v = std::max(worst_v, std::abs(r.v_P - r.v_F) - std::abs(p.v_P - p.v_F));
            worst_h = std::max(worst_h, std::abs(r.h - r.h_des) - std::abs(p.h - p.h_des));
        }
        EXPECT_LE(worst_v, 1e-9) << n;
        EXPECT_LE(worst_h, 1e-9) << n;
    }
}

TEST(Run, ComfortableApproach)
{
    const auto tr = run(find_scenario("fig4"));
    const double a_com = find_scenario("fig4").params.a_com;
    for (const auto& r : tr.rows) {
        if (r.t < 2.0) continue;
        if (std::abs(r.h - r.h_des) < 5.0) break;
        ASSERT_GE(r.a_des, -a_com - 0.3) << r.t;
        ASSERT_LE(r.a_des, 0.1) << r.t;
    }
}

TEST(Run, CutInSafetyProperty)
{
    std::mt19937_64 rng(0x5afe01);
    std::uniform_real_distribution<double> hs(6.0, 30.0);
    std::uniform_real_distribution<double> vFs(10.0, 30.0);
    std::uniform_real_distribution<double> frac(0.3, 1.0);
    int tested = 0;
    while (tested < 100) {
        Scenario s;
        s.name = "cut-in";
        s.initial.h = hs(rng);
        s.initial.v_F = vFs(rng);
        const double v_P = s.initial.v_F * frac(rng);
        s.lead = ConstantSpeed{v_P};
        s.duration = 30.0;
        const double closing = s.initial.v_F - v_P;
        // only cut-ins that a_min can resolve before h_min
        if (closing * closing / (2.0 * (s.initial.h - s.params.h_min)) > -s.params.a_min) continue;
        ++tested;
        const auto tr = run(s);
        double min_h = 1e9;
        for (const auto& r : tr.rows) min_h = std::min(min_h, r.h);
        ASSERT_GE(min_h, s.params.h_min - 0.5) << s.initial.h << ' ' << s.initial.v_F << ' ' << v_P;
    }
}

TEST(Run, LagCollapsesToIdeal)
{
    const auto ideal = run(find_scenario("fig4"));
    for (double tau : {0.05, 0.01}) {
        auto s = find_scenario("fig4");
        s.plant = plant::PlantKind::Lag;
        s.physics.tau = tau;
        const auto lag = run(s);
        const double dh = sup_diff(ideal, lag, &TraceRow::h, 1);
        const double dv = sup_diff(ideal, lag, &TraceRow::v_F, 1);
        EXPECT_LT(dh, 2.0 * tau) << tau;
        EXPECT_LT(dv, 1.0 * tau) << tau;
    }
}

TEST(Run, PhysicsWithMatchedNominalsTracksIdeal)
{
    const auto ideal = run(find_scenario("fig4"));
    auto s = find_scenario("fig4");
    s.plant = plant::PlantKind::Physics;
    s.physics.tau = 0.01;
    const auto phys = run(s);
    EXPECT_LT(sup_diff(ideal, phys, &TraceRow::h, 1), 1e-2);
}

TEST(Run, PhysicsDerivedDisturbanceIsSettledByIntegralAction)
{
    auto s = find_scenario("fig10a");
    s.plant = plant::PlantKind::Physics;
    s.disturbance = {plant::DisturbanceKind::PhysicsDerived, 0.0};
    s.physics.mu = 0.02;
    s.physics.rho = 0.5;
    s.physics.tau = 0.05;
    s.duration = 80.0;
    const auto tr = run(s);
    EXPECT_LT(std::abs(tr.rows.back().h - tr.rows.back().h_des), 0.5);
}

TEST(Run, AbortKeepsPartialTrace)
{
    Scenario s;
    s.name = "crash";
    s.initial.h = 0.5;
    s.initial.v_F = 30.0;
    s.lead = ConstantSpeed{0.0};
    s = as_linear_variant(s);
    try {
        (void)run(s);
        FAIL() << "expected an abort";
    } catch (const SimulationError& e) {
        EXPECT_FALSE(e.partial_trace().rows.empty());
        EXPECT_LT(e.partial_trace().rows.size(), s.steps() + 1);
        for (const auto& r : e.partial_trace().rows) ASSERT_GT(r.h, 0.0);
    }
}
