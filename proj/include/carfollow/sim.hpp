#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "carfollow/controller.hpp"
#include "carfollow/plant.hpp"

namespace carfollow::sim {

struct ConstantSpeed {
    double v0 = 20.0;
};

/// Constant deceleration from v0 until standstill, then held at zero.
struct DecelToStop {
    double v0 = 20.0;
    double decel = 2.0;  ///< magnitude [m/s^2]
};

struct Sinusoid {
    double v0 = 15.0;
    double amp = 5.0;  ///< [m/s]
    double f = 0.05;   ///< [Hz]
};

/// Linear interpolation through (t, v) samples, held constant outside.
struct PiecewiseTable {
    std::vector<std::pair<double, double>> samples;
};

using LeadProfile = std::variant<ConstantSpeed, DecelToStop, Sinusoid, PiecewiseTable>;

/// Predecessor speed at time t, floored at zero.
[[nodiscard]] double lead_speed(const LeadProfile& profile, double t);

/// Time derivative of lead_speed (one-sided from the right at kinks).
[[nodiscard]] double lead_acceleration(const LeadProfile& profile, double t);

void validate(const LeadProfile& profile);

struct InitialState {
    double h = 25.0;
    double v_F = 20.0;
    std::optional<double> a_F;  ///< lag model; defaults to 0
    std::optional<double> T;    ///< physics model; defaults to the speed-holding torque
};

struct Scenario {
    std::string name = "custom";
    InitialState initial;
    LeadProfile lead = ConstantSpeed{20.0};
    plant::PlantKind plant = plant::PlantKind::Ideal;
    plant::Disturbance disturbance;
    control::ControllerKind controller = control::ControllerKind::Nonlinear;
    control::RangePolicy range_policy = control::RangePolicy::PredecessorBased;
    bool integral_action = false;  ///< u = a_des + k_i e when set, else u = a_des
    control::ControllerParams params;
    plant::PhysicsParams physics;
    double duration = 40.0;
    double dt = 0.01;

    void validate() const;
    [[nodiscard]] std::size_t steps() const;
};

/// Switch a scenario to the linear reference controller with the
/// follower-speed range policy used for comparison runs.
[[nodiscard]] Scenario as_linear_variant(Scenario s);

struct TraceRow {
    double t = 0.0;
    double h = 0.0;
    double h_des = 0.0;
    double v_P = 0.0;
    double v_F = 0.0;
    double v_des = 0.0;
    double S = 0.0;
    double a_des = 0.0;
    double a_fb = 0.0;
    double a_fb_bar = 0.0;
    double a_cf = 0.0;
    double u = 0.0;
    double a_F = 0.0;  ///< meaningful only when SimTrace::has_a_F
};

struct SimTrace {
    std::string scenario;
    double dt = 0.0;
    bool has_a_F = false;
    std::size_t saturated_samples = 0;  ///< rows where the surface clamp was active
    std::vector<TraceRow> rows;

    [[nodiscard]] std::vector<double> column(double TraceRow::*field) const;
};

/// Full closed-loop state integrated by the simulator.
struct SimState {
    plant::PlantState plant;
    control::IntegratorState integrator;
};

/// Thrown when the state becomes non-finite or leaves the controller's
/// domain. Carries the valid prefix of the trace.
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, SimTrace partial)
        : std::runtime_error(what), partial_(std::move(partial))
    {
    }
    [[nodiscard]] const SimTrace& partial_trace() const { return partial_; }

private:
    SimTrace partial_;
};

[[nodiscard]] SimState initial_state(const Scenario& scenario);

/// One RK4 step of the closed loop (controller evaluated at every stage),
/// followed by the follower speed floor. Throws DomainError on a
/// non-finite result.
[[nodiscard]] SimState step(const Scenario& scenario, const SimState& state, double t);

/// Controller output and command at a given state; what the trace logs.
struct Evaluation {
    control::ControlOutput out;
    double u = 0.0;
    double v_P = 0.0;
};
[[nodiscard]] Evaluation evaluate_at(const Scenario& scenario, const SimState& state, double t);

[[nodiscard]] SimTrace run(const Scenario& scenario);

[[nodiscard]] std::vector<Scenario> builtin_scenarios();
[[nodiscard]] std::vector<std::string> builtin_scenario_names();
[[nodiscard]] Scenario find_scenario(const std::string& name);

}  // namespace carfollow::sim
