#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "carfollow/errors.hpp"
#include "carfollow/plant.hpp"
#include "carfollow/rk4.hpp"

using namespace carfollow::plant;
using carfollow::ParameterError;

TEST(Ideal, Examples)
{
    auto d = deriv_ideal({25.0, 20.0}, 20.0, 0.0);
    EXPECT_EQ(d.h_dot, 0.0);
    EXPECT_EQ(d.v_F_dot, 0.0);
    d = deriv_ideal({90.0, 28.0}, 20.0, -0.5);
    EXPECT_EQ(d.h_dot, -8.0);
    EXPECT_EQ(d.v_F_dot, -0.5);
}

TEST(Ideal, DistanceRateSignProperty)
{
    std::mt19937_64 rng(0xbeef01);
    std::uniform_real_distribution<double> vs(0.0, 40.0);
    for (int i = 0; i < 1000; ++i) {
        const double vP = vs(rng);
        const double vF = vs(rng);
        const auto d = deriv_ideal({10.0, vF}, vP, 1.0);
        ASSERT_EQ(std::signbit(d.h_dot), std::signbit(vP - vF));
    }
}

TEST(Disturbed, Examples)
{
    const PlantState s{30.0, 18.0};
    const auto a = deriv_disturbed(s, 20.0, 0.7, 0.0);
    const auto b = deriv_ideal(s, 20.0, 0.7);
    EXPECT_EQ(a.h_dot, b.h_dot);
    EXPECT_EQ(a.v_F_dot, b.v_F_dot);
    EXPECT_EQ(deriv_disturbed(s, 20.0, -0.5, 0.5).v_F_dot, 0.0);
}

TEST(Lag, FixedPointAndErrors)
{
    const PlantState s{30.0, 18.0, 1.2};
    EXPECT_EQ(deriv_lag(s, 20.0, 0.7, 0.5, 0.8).a_F_dot, 0.0);
    EXPECT_EQ(deriv_lag(s, 20.0, 0.7, 0.5, 0.8).v_F_dot, 1.2);
    EXPECT_THROW((void)deriv_lag(s, 20.0, 0.7, 0.5, 0.0), ParameterError);
    EXPECT_THROW((void)deriv_lag(s, 20.0, 0.7, 0.5, -1.0), ParameterError);
}

TEST(Lag, StepResponseTimeConstant)
{
    const double tau = 0.8;
    const double u = 1.5;
    const double dh = 0.5;
    std::array<double, 3> x{30.0, 20.0, 0.0};
    auto f = [&](double, const std::array<double, 3>& y) {
        const auto d = deriv_lag({y[0], y[1], y[2]}, 20.0, u, dh, tau);
        return std::array<double, 3>{d.h_dot, d.v_F_dot, d.a_F_dot};
    };
    const double dt = 0.001;
    for (int i = 0; i < 800; ++i) {
        x = carfollow::rk4_step(f, i * dt, x, dt);
    }
    const double target = (u + dh) * (1.0 - std::exp(-1.0));
    EXPECT_NEAR(x[2] / (u + dh), 0.632, 0.01);
    EXPECT_NEAR(x[2], target, 1e-9);
}

TEST(Physics, ParamsValidation)
{
    PhysicsParams p;
    EXPECT_NO_THROW(p.validate());
    EXPECT_GT(p.effective_mass(), p.m);
    p.J = 0.0;
    EXPECT_DOUBLE_EQ(p.effective_mass(), p.m);
    p.R = 0.0;
    EXPECT_THROW(p.validate(), ParameterError);
}

TEST(Physics, TorqueControllerExamples)
{
    PhysicsParams p;
    p.mu_nominal = 0.0;
    EXPECT_EQ(torque_controller(p, 0.0, 0.0, 0.0), 0.0);

    // matched nominals, no wind: feedback linearization is exact
    const PhysicsParams q;
    std::mt19937_64 rng(0xbeef02);
    std::uniform_real_distribution<double> us(-3.0, 3.0);
    std::uniform_real_distribution<double> vs(0.0, 35.0);
    for (int i = 0; i < 1000; ++i) {
        const double u = us(rng);
        const double v = vs(rng);
        const double T = torque_controller(q, u, v, q.phi);
        ASSERT_NEAR(physics_acceleration(q, T, v), u, 1e-12 * std::max(1.0, v * v));
    }
}

TEST(Physics, EquilibriumTorqueHoldsSpeed)
{
    const PhysicsParams p;
    const double T = torque_controller(p, 0.0, 20.0, 0.0);
    const auto d = deriv_physics({25.0, 20.0, 0.0, T}, 20.0, T, p);
    EXPECT_NEAR(d.v_F_dot, 0.0, 1e-13);
    EXPECT_EQ(d.T_dot, 0.0);
    EXPECT_EQ(d.h_dot, 0.0);
}

TEST(Physics, ModelDisturbanceIdentity)
{
    std::mt19937_64 rng(0xbeef03);
    std::uniform_real_distribution<double> us(-3.0, 3.0);
    std::uniform_real_distribution<double> vs(0.0, 35.0);
    std::uniform_real_distribution<double> mus(0.0, 0.03);
    std::uniform_real_distribution<double> rhos(0.1, 0.8);
    std::uniform_real_distribution<double> phis(-0.1, 0.1);
    for (int i = 0; i < 2000; ++i) {
        PhysicsParams p;
        p.mu = mus(rng);
        p.rho = rhos(rng);
        p.phi = phis(rng);
        const double u = us(rng);
        const double v = vs(rng);
        const double m_eff = p.effective_mass();
        const double expected = (p.mu_nominal - p.mu) * (p.m / m_eff) * p.g * std::cos(p.phi)
                                + (p.rho_nominal - p.rho) / m_eff * v * v;
        const double T = torque_controller(p, u, v, p.phi);
        const double measured = physics_acceleration(p, T, v) - u;
        ASSERT_NEAR(measured, expected, 1e-9 * std::max(std::abs(expected), 1e-3));
        ASSERT_NEAR(model_disturbance(p, v), expected, 1e-12 * std::max(std::abs(expected), 1e-3));
    }
}

TEST(Physics, LagDisturbanceMatchesAccelerationDynamics)
{
    // a_F = v_F' along the physics flow; the lag form requires
    // delta_hat = tau a_F' + a_F - u.
    std::mt19937_64 rng(0xbeef04);
    std::uniform_real_distribution<double> us(-3.0, 3.0);
    std::uniform_real_distribution<double> vs(1.0, 35.0);
    std::uniform_real_distribution<double> Ts(-400.0, 400.0);
    for (int i = 0; i < 500; ++i) {
        PhysicsParams p;
        p.mu = 0.015;
        p.rho = 0.45;
        const double u = us(rng);
        const double v = vs(rng);
        const double T = Ts(rng);
        const double T_des = torque_controller(p, u, v, p.phi);
        const auto d = deriv_physics({0.0, v, 0.0, T}, v, T_des, p);
        const double a = d.v_F_dot;
        const double hT = 1e-3;
        const double hv = 1e-5;
        const double da_dT = (physics_acceleration(p, T + hT, v) - physics_acceleration(p, T - hT, v)) / (2 * hT);
        const double da_dv = (physics_acceleration(p, T, v + hv) - physics_acceleration(p, T, v - hv)) / (2 * hv);
        const double a_dot = da_dT * d.T_dot + da_dv * d.v_F_dot;
        const double expected = p.tau * a_dot + a - u;
        ASSERT_NEAR(lag_disturbance(p, v, a), expected, 1e-6 * std::max(1.0, std::abs(expected)));
    }
}

TEST(Physics, InstantTorqueWhenTauZero)
{
    PhysicsParams p;
    p.tau = 0.0;
    const double T_des = torque_controller(p, 1.0, 10.0, 0.0);
    const auto d = deriv_physics({25.0, 10.0, 0.0, 0.0}, 10.0, T_des, p);
    EXPECT_NEAR(d.v_F_dot, 1.0, 1e-12);
    EXPECT_EQ(d.T_dot, 0.0);
}

TEST(Strings, RoundTrip)
{
    for (auto k : {PlantKind::Ideal, PlantKind::Disturbed, PlantKind::Lag, PlantKind::Physics}) {
        EXPECT_EQ(parse_plant_kind(to_string(k)), k);
    }
    for (auto k : {DisturbanceKind::None, DisturbanceKind::ConstantDelta, DisturbanceKind::ConstantDeltaHat,
                   DisturbanceKind::PhysicsDerived}) {
        EXPECT_EQ(parse_disturbance_kind(to_string(k)), k);
    }
    EXPECT_THROW((void)parse_plant_kind("boat"), ParameterError);
}
