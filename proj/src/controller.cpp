#include "carfollow/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "carfollow/analysis.hpp"
#include "carfollow/errors.hpp"

namespace carfollow::control {
namespace {

void require(bool ok, const char* message)
{
    if (!ok) {
        throw ParameterError(message);
    }
}

bool finite_all(std::initializer_list<double> values)
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

void ControllerParams::validate() const
{
    require(finite_all({h0, t_h, h_min, eps, v_max, c, a_sat, a_min, a_com, k1, k2, k_i}),
            "controller parameters must be finite");
    require(h0 > 0.0, "h0 must be positive");
    require(t_h > 0.0, "t_h must be positive");
    require(h_min > 0.0, "h_min must be positive");
    require(eps > 0.0, "eps must be positive");
    require(v_max > 0.0, "v_max must be positive");
    require(c > 0.0, "c must be positive");
    require(a_sat > 0.0, "a_sat must be positive");
    require(a_com > 0.0, "a_com must be positive");
    require(a_min < 0.0, "a_min must be negative");
    require(k1 > 0.0 && k2 > 0.0, "k1 and k2 must be positive for plant stability");
}

std::vector<std::string> design_warnings(const ControllerParams& p)
{
    std::vector<std::string> out;
    const double b = p.a_com / p.k2;
    if (p.c > 2.0 * b) {
        std::ostringstream os;
        os << "slackness c=" << p.c << " exceeds 2*a_com/k2=" << 2.0 * b
           << "; the linear zone may dominate the transient";
        out.push_back(os.str());
    }
    if (!analysis::string_stable(p.k1, p.k2, p.t_h)) {
        std::ostringstream os;
        os << "gains k1=" << p.k1 << ", k2=" << p.k2 << " are not string stable at t_h=" << p.t_h;
        out.push_back(os.str());
    }
    if (std::fabs(1.0 - p.k2 * p.t_h) > 0.5) {
        std::ostringstream os;
        os << "k2=" << p.k2 << " is far from 1/t_h=" << 1.0 / p.t_h
           << "; surface tracking bound |1-k2*t_h|=" << std::fabs(1.0 - p.k2 * p.t_h);
        out.push_back(os.str());
    }
    return out;
}

void Measurement::validate() const
{
    if (!finite_all({h, v_P, v_F})) {
        throw DomainError("measurement must be finite");
    }
    if (!(h > 0.0)) {
        throw DomainError("measurement: distance must be positive");
    }
    if (v_P < 0.0 || v_F < 0.0) {
        throw DomainError("measurement: speeds must be non-negative");
    }
}

double desired_distance(const ControllerParams& p, RangePolicy policy, double v_P, double v_F)
{
    if (v_P < 0.0 || v_F < 0.0) {
        throw DomainError("desired_distance: speeds must be non-negative");
    }
    const double v = policy == RangePolicy::PredecessorBased ? v_P : v_F;
    return p.h0 + p.t_h * v;
}

TrackingErrors tracking_errors(const Measurement& m, double h_des)
{
    return {m.v_P - m.v_F, m.h - h_des};
}

double collision_free_feedforward(const ControllerParams& p, const Measurement& m)
{
    const double v_hat = m.v_P - m.v_F;
    // Heaviside taken as 0 at v_hat == 0; the numerator vanishes there anyway.
    if (!(v_hat < 0.0)) {
        return 0.0;
    }
    const double braking_distance = std::max(m.h - p.h_min, p.eps);
    return std::max(-v_hat * v_hat / (2.0 * braking_distance), p.a_min);
}

Surface surface(const ControllerParams& p, const Measurement& m, double h_des)
{
    const auto err = tracking_errors(m, h_des);
    const double s_hat = err.v_hat + shaping::shaper(p.k2 * err.h_hat, p.shaper());
    const double s = std::max(std::min(s_hat, p.v_max - m.v_F), -m.v_F);
    return {s_hat, s};
}

Feedback feedback(const ControllerParams& p, const Measurement& m, double h_des)
{
    const auto err = tracking_errors(m, h_des);
    const auto s = surface(p, m, h_des);
    const double underlying = shaping::shaper_derivative(p.k2 * err.h_hat, p.shaper()) * p.k2 * err.v_hat;
    const double total = underlying + p.a_sat * shaping::wrapper(p.k1 * s.clamped / p.a_sat);
    return {total, underlying};
}

double desired_speed(const ControllerParams& p, const Measurement& m, double h_des)
{
    const auto err = tracking_errors(m, h_des);
    const double unclamped = m.v_P + shaping::shaper(p.k2 * err.h_hat, p.shaper());
    return std::max(std::min(unclamped, p.v_max), 0.0);
}

ControlOutput control(const ControllerParams& p, RangePolicy policy, const Measurement& m)
{
    m.validate();
    ControlOutput out;
    out.h_des = desired_distance(p, policy, m.v_P, m.v_F);
    const auto err = tracking_errors(m, out.h_des);
    out.v_hat = err.v_hat;
    out.h_hat = err.h_hat;

    const auto s = surface(p, m, out.h_des);
    out.S_hat = s.unclamped;
    out.S = s.clamped;

    const auto fb = feedback(p, m, out.h_des);
    out.a_fb = fb.total;
    out.a_fb_bar = fb.underlying;
    out.a_cf = collision_free_feedforward(p, m);
    out.a_des = out.a_cf + out.a_fb;
    out.v_des = desired_speed(p, m, out.h_des);
    return out;
}

double linear_control(const ControllerParams& p, RangePolicy policy, const Measurement& m)
{
    m.validate();
    const double h_des = desired_distance(p, policy, m.v_P, m.v_F);
    const auto err = tracking_errors(m, h_des);
    return (p.k1 + p.k2) * err.v_hat + p.k1 * p.k2 * err.h_hat;
}

ControlOutput linear_control_output(const ControllerParams& p, RangePolicy policy, const Measurement& m)
{
    ControlOutput out;
    out.a_fb = linear_control(p, policy, m);
    out.h_des = desired_distance(p, policy, m.v_P, m.v_F);
    const auto err = tracking_errors(m, out.h_des);
    out.v_hat = err.v_hat;
    out.h_hat = err.h_hat;
    out.S_hat = err.v_hat + p.k2 * err.h_hat;
    out.S = out.S_hat;
    out.v_des = m.v_P + p.k2 * err.h_hat;
    out.a_fb_bar = p.k2 * err.v_hat;
    out.a_cf = 0.0;
    out.a_des = out.a_fb;
    return out;
}

ControlOutput evaluate(const ControllerParams& p, ControllerKind kind, RangePolicy policy, const Measurement& m)
{
    return kind == ControllerKind::Nonlinear ? control(p, policy, m) : linear_control_output(p, policy, m);
}

IntegratorState IntegratorState::advanced(double S, double dt) const
{
    if (!(dt > 0.0)) {
        throw ParameterError("integrator: dt must be positive");
    }
    return {e + S * dt};
}

Controller::Controller(ControllerParams params, ControllerKind kind, RangePolicy policy)
    : params_(params), kind_(kind), policy_(policy)
{
    params_.validate();
}

std::string to_string(RangePolicy policy)
{
    return policy == RangePolicy::PredecessorBased ? "predecessor" : "follower";
}

std::string to_string(ControllerKind kind)
{
    return kind == ControllerKind::Nonlinear ? "nonlinear" : "linear";
}

RangePolicy parse_range_policy(const std::string& s)
{
    if (s == "predecessor") return RangePolicy::PredecessorBased;
    if (s == "follower") return RangePolicy::FollowerBased;
    throw ParameterError("unknown range policy '" + s + "' (expected predecessor|follower)");
}

ControllerKind parse_controller_kind(const std::string& s)
{
    if (s == "nonlinear") return ControllerKind::Nonlinear;
    if (s == "linear") return ControllerKind::Linear;
    throw ParameterError("unknown controller '" + s + "' (expected nonlinear|linear)");
}

}  // namespace carfollow::control
