#include "carfollow/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "carfollow/errors.hpp"
#include "carfollow/rk4.hpp"

namespace carfollow::sim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Augmented state: h, v_F, a_F, T, e.
using Vec = std::array<double, 5>;

Vec pack(const SimState& s)
{
    return {s.plant.h, s.plant.v_F, s.plant.a_F, s.plant.T, s.integrator.e};
}

SimState unpack(const Vec& x)
{
    return {{x[0], x[1], x[2], x[3]}, {x[4]}};
}

struct StageValues {
    control::ControlOutput out;
    double u = 0.0;
    double v_P = 0.0;
    Vec dx{};
};

StageValues closed_loop(const Scenario& sc, const SimState& s, double t)
{
    StageValues r;
    r.v_P = lead_speed(sc.lead, t);
    // Speed sensors never report reverse motion.
    const control::Measurement meas{s.plant.h, r.v_P, std::max(s.plant.v_F, 0.0)};
    r.out = control::evaluate(sc.params, sc.controller, sc.range_policy, meas);
    r.u = sc.integral_action ? s.integrator.command(sc.params, r.out.a_des) : r.out.a_des;

    using plant::DisturbanceKind;
    using plant::PlantKind;
    plant::PlantDerivative d;
    switch (sc.plant) {
    case PlantKind::Ideal:
        d = plant::deriv_ideal(s.plant, r.v_P, r.u);
        break;
    case PlantKind::Disturbed: {
        double delta = 0.0;
        if (sc.disturbance.kind == DisturbanceKind::ConstantDelta) {
            delta = sc.disturbance.value;
        } else if (sc.disturbance.kind == DisturbanceKind::PhysicsDerived) {
            delta = plant::model_disturbance(sc.physics, s.plant.v_F);
        }
        d = plant::deriv_disturbed(s.plant, r.v_P, r.u, delta);
        break;
    }
    case PlantKind::Lag: {
        double delta_hat = 0.0;
        if (sc.disturbance.kind == DisturbanceKind::ConstantDeltaHat) {
            delta_hat = sc.disturbance.value;
        } else if (sc.disturbance.kind == DisturbanceKind::PhysicsDerived) {
            delta_hat = plant::lag_disturbance(sc.physics, s.plant.v_F, s.plant.a_F);
        }
        d = plant::deriv_lag(s.plant, r.v_P, r.u, delta_hat, sc.physics.tau);
        break;
    }
    case PlantKind::Physics: {
        const double T_des = plant::torque_controller(sc.physics, r.u, s.plant.v_F, sc.physics.phi);
        d = plant::deriv_physics(s.plant, r.v_P, T_des, sc.physics);
        break;
    }
    }
    r.dx = {d.h_dot, d.v_F_dot, d.a_F_dot, d.T_dot, r.out.S};
    return r;
}

bool all_finite(const Vec& x)
{
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

double lead_speed(const LeadProfile& profile, double t)
{
    const double v = std::visit(
        Overloaded{
            [](const ConstantSpeed& p) { return p.v0; },
            [t](const DecelToStop& p) { return p.v0 - p.decel * t; },
            [t](const Sinusoid& p) { return p.v0 + p.amp * std::sin(2.0 * std::numbers::pi * p.f * t); },
            [t](const PiecewiseTable& p) {
                const auto& s = p.samples;
                if (t <= s.front().first) return s.front().second;
                if (t >= s.back().first) return s.back().second;
                const auto it = std::upper_bound(s.begin(), s.end(), t,
                                                 [](double x, const auto& sample) { return x < sample.first; });
                const auto& [t1, v1] = *it;
                const auto& [t0, v0] = *(it - 1);
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            },
        },
        profile);
    return std::max(v, 0.0);
}

double lead_acceleration(const LeadProfile& profile, double t)
{
    return std::visit(
        Overloaded{
            [](const ConstantSpeed&) { return 0.0; },
            [t](const DecelToStop& p) { return p.v0 - p.decel * t > 0.0 ? -p.decel : 0.0; },
            [t](const Sinusoid& p) {
                const double w = 2.0 * std::numbers::pi * p.f;
                if (p.v0 + p.amp * std::sin(w * t) < 0.0) return 0.0;
                return p.amp * w * std::cos(w * t);
            },
            [t](const PiecewiseTable& p) {
                const auto& s = p.samples;
                if (t < s.front().first || t >= s.back().first) return 0.0;
                const auto it = std::upper_bound(s.begin(), s.end(), t,
                                                 [](double x, const auto& sample) { return x < sample.first; });
                const auto& [t1, v1] = *it;
                const auto& [t0, v0] = *(it - 1);
                if (v0 + (v1 - v0) * (t - t0) / (t1 - t0) < 0.0) return 0.0;
                return (v1 - v0) / (t1 - t0);
            },
        },
        profile);
}

void validate(const LeadProfile& profile)
{
    std::visit(Overloaded{
                   [](const ConstantSpeed& p) {
                       if (!std::isfinite(p.v0) || p.v0 < 0.0) throw ParameterError("lead: v0 must be >= 0");
                   },
                   [](const DecelToStop& p) {
                       if (!std::isfinite(p.v0) || p.v0 < 0.0) throw ParameterError("lead: v0 must be >= 0");
                       if (!(p.decel > 0.0) || !std::isfinite(p.decel))
                           throw ParameterError("lead: decel must be positive");
                   },
                   [](const Sinusoid& p) {
                       if (!std::isfinite(p.v0) || !std::isfinite(p.amp) || !std::isfinite(p.f))
                           throw ParameterError("lead: sinusoid parameters must be finite");
                       if (p.f < 0.0 || p.amp < 0.0) throw ParameterError("lead: amp and f must be >= 0");
                   },
                   [](const PiecewiseTable& p) {
                       if (p.samples.empty()) throw ParameterError("lead: table needs at least one sample");
                       for (std::size_t i = 0; i < p.samples.size(); ++i) {
                           if (!std::isfinite(p.samples[i].first) || !std::isfinite(p.samples[i].second))
                               throw ParameterError("lead: table samples must be finite");
                           if (i > 0 && !(p.samples[i].first > p.samples[i - 1].first))
                               throw ParameterError("lead: table times must be strictly increasing");
                       }
                   },
               },
               profile);
}

void Scenario::validate() const
{
    if (!(duration > 0.0) || !(dt > 0.0) || dt > duration || !std::isfinite(duration)) {
        throw ParameterError("scenario '" + name + "': need duration > 0 and 0 < dt <= duration");
    }
    if (!std::isfinite(initial.h) || !std::isfinite(initial.v_F) || initial.v_F < 0.0 || !(initial.h > 0.0)) {
        throw ParameterError("scenario '" + name + "': initial h must be > 0 and v_F >= 0");
    }
    params.validate();
    physics.validate();
    sim::validate(lead);

    using plant::DisturbanceKind;
    using plant::PlantKind;
    const auto dk = disturbance.kind;
    bool ok = true;
    switch (plant) {
    case PlantKind::Ideal: ok = dk == DisturbanceKind::None; break;
    case PlantKind::Disturbed: ok = dk != DisturbanceKind::ConstantDeltaHat; break;
    case PlantKind::Lag:
        ok = dk != DisturbanceKind::ConstantDelta;
        if (!(physics.tau > 0.0)) throw ParameterError("lag plant needs physics.tau > 0");
        break;
    case PlantKind::Physics: ok = dk == DisturbanceKind::None || dk == DisturbanceKind::PhysicsDerived; break;
    }
    if (!ok) {
        throw ParameterError("scenario '" + name + "': disturbance '" + plant::to_string(dk)
                             + "' does not apply to plant '" + plant::to_string(plant) + "'");
    }
    if (!std::isfinite(disturbance.value)) {
        throw ParameterError("scenario '" + name + "': disturbance value must be finite");
    }
}

std::size_t Scenario::steps() const
{
    return static_cast<std::size_t>(std::llround(duration / dt));
}

Scenario as_linear_variant(Scenario s)
{
    s.controller = control::ControllerKind::Linear;
    s.range_policy = control::RangePolicy::FollowerBased;
    if (s.name.find("-linear") == std::string::npos) {
        s.name += "-linear";
    }
    return s;
}

std::vector<double> SimTrace::column(double TraceRow::*field) const
{
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.*field);
    }
    return out;
}

SimState initial_state(const Scenario& sc)
{
    SimState s;
    s.plant.h = sc.initial.h;
    s.plant.v_F = sc.initial.v_F;
    s.plant.a_F = sc.initial.a_F.value_or(0.0);
    if (sc.initial.T) {
        s.plant.T = *sc.initial.T;
    } else {
        const auto& p = sc.physics;
        const double air = sc.initial.v_F + p.v_w;
        s.plant.T = p.R / p.eta
                    * (p.m * p.g * std::sin(p.phi) + p.mu * p.m * p.g * std::cos(p.phi) + p.rho * air * air);
    }
    return s;
}

Evaluation evaluate_at(const Scenario& sc, const SimState& state, double t)
{
    const auto r = closed_loop(sc, state, t);
    return {r.out, r.u, r.v_P};
}

SimState step(const Scenario& sc, const SimState& state, double t)
{
    auto rhs = [&sc](double tt, const Vec& x) { return closed_loop(sc, unpack(x), tt).dx; };
    Vec next = rk4_step(rhs, t, pack(state), sc.dt);
    if (!all_finite(next)) {
        std::ostringstream os;
        os << "non-finite state after step at t=" << t;
        throw DomainError(os.str());
    }
    next[1] = std::max(next[1], 0.0);
    return unpack(next);
}

SimTrace run(const Scenario& sc)
{
    sc.validate();
    SimTrace trace;
    trace.scenario = sc.name;
    trace.dt = sc.dt;
    trace.has_a_F = sc.plant == plant::PlantKind::Lag || sc.plant == plant::PlantKind::Physics;

    const std::size_t n = sc.steps();
    trace.rows.reserve(n + 1);
    SimState state = initial_state(sc);
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * sc.dt;
        try {
            const auto r = closed_loop(sc, state, t);
            TraceRow row;
            row.t = t;
            row.h = state.plant.h;
            row.h_des = r.out.h_des;
            row.v_P = r.v_P;
            row.v_F = state.plant.v_F;
            row.v_des = r.out.v_des;
            row.S = r.out.S;
            row.a_des = r.out.a_des;
            row.a_fb = r.out.a_fb;
            row.a_fb_bar = r.out.a_fb_bar;
            row.a_cf = r.out.a_cf;
            row.u = r.u;
            row.a_F = sc.plant == plant::PlantKind::Physics ? r.dx[1] : state.plant.a_F;
            if (r.out.S != r.out.S_hat) {
                ++trace.saturated_samples;
            }
            trace.rows.push_back(row);
            if (i == n) {
                break;
            }
            state = step(sc, state, t);
        } catch (const std::domain_error& e) {
            std::ostringstream os;
            os << "simulation '" << sc.name << "' aborted at t=" << t << ": " << e.what();
            throw SimulationError(os.str(), std::move(trace));
        }
    }
    return trace;
}

std::vector<Scenario> builtin_scenarios()
{
    std::vector<Scenario> out;
    auto constant_lead = [](std::string name, double h, double v_P, double v_F) {
        Scenario s;
        s.name = std::move(name);
        s.initial.h = h;
        s.initial.v_F = v_F;
        s.lead = ConstantSpeed{v_P};
        s.duration = 40.0;
        return s;
    };
    // Far-but-slow, far-and-fast, close-and-slow, close-but-fast predecessor.
    for (auto s : {constant_lead("fig4", 90.0, 20.0, 28.0), constant_lead("fig5", 80.0, 20.0, 16.0),
                   constant_lead("fig6", 10.0, 20.0, 25.0), constant_lead("fig7", 10.0, 20.0, 16.0)}) {
        out.push_back(s);
        out.push_back(as_linear_variant(s));
    }

    for (auto [name, decel] : {std::pair{"fig8a", 2.0}, std::pair{"fig8b", 4.0}}) {
        Scenario s;
        s.name = name;
        s.initial = {25.0, 20.0, {}, {}};
        s.lead = DecelToStop{20.0, decel};
        s.duration = 30.0;
        out.push_back(s);
    }
    for (auto [name, amp] : {std::pair{"fig9a", 5.0}, std::pair{"fig9b", 15.0}}) {
        Scenario s;
        s.name = name;
        s.initial = {20.0, 15.0, {}, {}};
        s.lead = Sinusoid{15.0, amp, 0.05};
        s.duration = 80.0;
        out.push_back(s);
    }

    Scenario disturbed = constant_lead("fig10a", 90.0, 20.0, 28.0);
    disturbed.plant = plant::PlantKind::Disturbed;
    disturbed.disturbance = {plant::DisturbanceKind::ConstantDelta, 0.5};
    disturbed.integral_action = true;
    out.push_back(disturbed);

    Scenario lag = constant_lead("fig10b", 90.0, 20.0, 28.0);
    lag.plant = plant::PlantKind::Lag;
    lag.disturbance = {plant::DisturbanceKind::ConstantDeltaHat, 0.5};
    lag.integral_action = true;
    lag.physics.tau = 0.8;
    out.push_back(lag);
    return out;
}

std::vector<std::string> builtin_scenario_names()
{
    std::vector<std::string> names;
    for (const auto& s : builtin_scenarios()) {
        names.push_back(s.name);
    }
    return names;
}

Scenario find_scenario(const std::string& name)
{
    for (auto& s : builtin_scenarios()) {
        if (s.name == name) {
            return s;
        }
    }
    throw LookupError("unknown scenario '" + name + "'");
}

}  // namespace carfollow::sim
