#pragma once

#include <string>

namespace carfollow::plant {

enum class PlantKind { Ideal, Disturbed, Lag, Physics };

/// Longitudinal vehicle parameters. Fields named *_nominal are the values
/// the low-level torque controller believes; the others drive the plant.
struct PhysicsParams {
    double m = 1500.0;           ///< static mass [kg]
    double J = 3.60375;          ///< rotating inertia [kg m^2] (J/R^2 = 37.5 kg)
    double R = 0.31;             ///< wheel radius [m]
    double eta = 10.0;           ///< net drive ratio [-]
    double mu = 0.01;            ///< rolling resistance [-]
    double rho = 0.38;           ///< air drag constant [kg/m]
    double phi = 0.0;            ///< road grade [rad]
    double v_w = 0.0;            ///< headwind [m/s]
    double g = 9.81;             ///< gravity [m/s^2]
    double mu_nominal = 0.01;    ///< [-]
    double rho_nominal = 0.38;   ///< [kg/m]
    double tau = 0.8;            ///< actuator time constant [s]; 0 means T = T_des

    void validate() const;
    [[nodiscard]] double effective_mass() const { return m + J / (R * R); }

    friend bool operator==(const PhysicsParams&, const PhysicsParams&) = default;
};

enum class DisturbanceKind { None, ConstantDelta, ConstantDeltaHat, PhysicsDerived };

struct Disturbance {
    DisturbanceKind kind = DisturbanceKind::None;
    double value = 0.0;  ///< [m/s^2], used by the constant kinds
};

/// Plant state. a_F is used by the lag model, T by the physics model.
struct PlantState {
    double h = 0.0;
    double v_F = 0.0;
    double a_F = 0.0;
    double T = 0.0;
};

struct PlantDerivative {
    double h_dot = 0.0;
    double v_F_dot = 0.0;
    double a_F_dot = 0.0;
    double T_dot = 0.0;
};

/// h' = v_P - v_F, v_F' = a_cmd.
[[nodiscard]] PlantDerivative deriv_ideal(const PlantState& s, double v_P, double a_cmd);

/// h' = v_P - v_F, v_F' = u + delta.
[[nodiscard]] PlantDerivative deriv_disturbed(const PlantState& s, double v_P, double u, double delta);

/// First-order acceleration lag: a_F' = (-a_F + u + delta_hat) / tau.
[[nodiscard]] PlantDerivative deriv_lag(const PlantState& s, double v_P, double u, double delta_hat, double tau);

/// Feedback-linearizing torque command for acceleration u at grade phi,
/// using the nominal resistance parameters.
[[nodiscard]] double torque_controller(const PhysicsParams& p, double u, double v_F, double phi);

/// Follower acceleration produced by wheel torque T under the true
/// resistance parameters.
[[nodiscard]] double physics_acceleration(const PhysicsParams& p, double T, double v_F);

/// Longitudinal dynamics with first-order torque actuator. With tau == 0
/// the torque tracks T_des exactly and T_dot is reported as 0.
[[nodiscard]] PlantDerivative deriv_physics(const PlantState& s, double v_P, double T_des, const PhysicsParams& p);

/// Residual acceleration (v_F' - u) when the torque tracks T_des exactly and
/// there is no headwind.
[[nodiscard]] double model_disturbance(const PhysicsParams& p, double v_F);

/// Residual input of the acceleration-lag form of the physics model:
/// a_F' = (-a_F + u + delta_hat) / tau.
[[nodiscard]] double lag_disturbance(const PhysicsParams& p, double v_F, double a_F, double phi_dot = 0.0);

[[nodiscard]] std::string to_string(PlantKind kind);
[[nodiscard]] PlantKind parse_plant_kind(const std::string& s);
[[nodiscard]] std::string to_string(DisturbanceKind kind);
[[nodiscard]] DisturbanceKind parse_disturbance_kind(const std::string& s);

}  // namespace carfollow::plant
