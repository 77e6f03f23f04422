#include "carfollow/plant.hpp"

#include <cmath>

#include "carfollow/errors.hpp"

namespace carfollow::plant {

void PhysicsParams::validate() const
{
    if (!(m > 0.0) || !(R > 0.0) || !(eta > 0.0)) {
        throw ParameterError("physics: m, R and eta must be positive");
    }
    if (J < 0.0 || tau < 0.0 || g <= 0.0) {
        throw ParameterError("physics: J and tau must be non-negative, g positive");
    }
    for (double v : {m, J, R, eta, mu, rho, phi, v_w, g, mu_nominal, rho_nominal, tau}) {
        if (!std::isfinite(v)) {
            throw ParameterError("physics parameters must be finite");
        }
    }
}

PlantDerivative deriv_ideal(const PlantState& s, double v_P, double a_cmd)
{
    return {v_P - s.v_F, a_cmd, 0.0, 0.0};
}

PlantDerivative deriv_disturbed(const PlantState& s, double v_P, double u, double delta)
{
    return {v_P - s.v_F, u + delta, 0.0, 0.0};
}

PlantDerivative deriv_lag(const PlantState& s, double v_P, double u, double delta_hat, double tau)
{
    if (!(tau > 0.0)) {
        throw ParameterError("lag plant: tau must be positive");
    }
    return {v_P - s.v_F, s.a_F, (-s.a_F + u + delta_hat) / tau, 0.0};
}

double torque_controller(const PhysicsParams& p, double u, double v_F, double phi)
{
    const double grade = p.m * p.g * std::sin(phi);
    const double rolling = p.mu_nominal * p.m * p.g * std::cos(phi);
    return p.R / p.eta * (p.effective_mass() * u + grade + rolling + p.rho_nominal * v_F * v_F);
}

double physics_acceleration(const PhysicsParams& p, double T, double v_F)
{
    const double air = v_F + p.v_w;
    const double force = p.eta * T / p.R - p.m * p.g * std::sin(p.phi) - p.mu * p.m * p.g * std::cos(p.phi)
                         - p.rho * air * air;
    return force / p.effective_mass();
}

PlantDerivative deriv_physics(const PlantState& s, double v_P, double T_des, const PhysicsParams& p)
{
    if (p.tau == 0.0) {
        return {v_P - s.v_F, physics_acceleration(p, T_des, s.v_F), 0.0, 0.0};
    }
    return {v_P - s.v_F, physics_acceleration(p, s.T, s.v_F), 0.0, (-s.T + T_des) / p.tau};
}

double model_disturbance(const PhysicsParams& p, double v_F)
{
    const double m_eff = p.effective_mass();
    return (p.mu_nominal - p.mu) * p.m / m_eff * p.g * std::cos(p.phi) + (p.rho_nominal - p.rho) / m_eff * v_F * v_F;
}

double lag_disturbance(const PhysicsParams& p, double v_F, double a_F, double phi_dot)
{
    const double m_eff = p.effective_mass();
    return model_disturbance(p, v_F) + p.m * p.g * phi_dot * p.tau / m_eff * (p.mu * std::sin(p.phi) - std::cos(p.phi))
           - 2.0 * p.rho * p.tau * v_F * a_F / m_eff;
}

std::string to_string(PlantKind kind)
{
    switch (kind) {
    case PlantKind::Ideal: return "ideal";
    case PlantKind::Disturbed: return "disturbed";
    case PlantKind::Lag: return "lag";
    case PlantKind::Physics: return "physics";
    }
    return "?";
}

PlantKind parse_plant_kind(const std::string& s)
{
    if (s == "ideal") return PlantKind::Ideal;
    if (s == "disturbed") return PlantKind::Disturbed;
    if (s == "lag") return PlantKind::Lag;
    if (s == "physics") return PlantKind::Physics;
    throw ParameterError("unknown plant '" + s + "' (expected ideal|disturbed|lag|physics)");
}

std::string to_string(DisturbanceKind kind)
{
    switch (kind) {
    case DisturbanceKind::None: return "none";
    case DisturbanceKind::ConstantDelta: return "delta";
    case DisturbanceKind::ConstantDeltaHat: return "delta_hat";
    case DisturbanceKind::PhysicsDerived: return "physics";
    }
    return "?";
}

DisturbanceKind parse_disturbance_kind(const std::string& s)
{
    if (s == "none") return DisturbanceKind::None;
    if (s == "delta") return DisturbanceKind::ConstantDelta;
    if (s == "delta_hat") return DisturbanceKind::ConstantDeltaHat;
    if (s == "physics") return DisturbanceKind::PhysicsDerived;
    throw ParameterError("unknown disturbance '" + s + "' (expected none|delta|delta_hat|physics)");
}

}  // namespace carfollow::plant
