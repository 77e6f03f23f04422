#pragma once

#include <string>
#include <vector>

#include "carfollow/shaping.hpp"

namespace carfollow::control {

/// Gains and limits of the car-following controller. Defaults are the
/// reference tuning used by every built-in scenario.
struct ControllerParams {
    double h0 = 5.0;       ///< standstill distance [m]
    double t_h = 1.0;      ///< desired time headway [s]
    double h_min = 5.0;    ///< minimum allowed distance [m]
    double eps = 0.5;      ///< singularity guard on the braking distance [m]
    double v_max = 35.0;   ///< preset maximum speed [m/s]
    double c = 1.0;        ///< shaper slackness [m/s]
    double a_sat = 4.0;    ///< bound of the wrapped speed-tracking term [m/s^2]
    double a_min = -10.0;  ///< physical minimum acceleration [m/s^2]
    double a_com = 0.5;    ///< comfortable transient acceleration [m/s^2]
    double k1 = 1.5;       ///< speed-tracking gain [1/s]
    double k2 = 1.0;       ///< distance-shaping gain [1/s]
    double k_i = 0.1;      ///< integral gain on the surface [1/s]

    /// Throws ParameterError on any violated sign constraint, including the
    /// plant-stability gate k1 > 0, k2 > 0.
    void validate() const;

    [[nodiscard]] shaping::ShaperParams shaper() const { return {a_com / k2, c}; }

    friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

/// Tuning guidance that does not make the controller invalid: slackness
/// above 2b, string-stability violation, headway far from 1/k2.
[[nodiscard]] std::vector<std::string> design_warnings(const ControllerParams& p);

enum class RangePolicy { PredecessorBased, FollowerBased };
enum class ControllerKind { Nonlinear, Linear };

struct Measurement {
    double h = 0.0;    ///< inter-vehicle distance [m]
    double v_P = 0.0;  ///< predecessor speed [m/s]
    double v_F = 0.0;  ///< follower speed [m/s]

    /// Throws DomainError unless h > 0, speeds >= 0 and all finite.
    void validate() const;
};

struct TrackingErrors {
    double v_hat = 0.0;  ///< v_P - v_F [m/s]
    double h_hat = 0.0;  ///< h - h_des [m]
};

struct Surface {
    double unclamped = 0.0;  ///< S_hat [m/s]
    double clamped = 0.0;    ///< S, limited to [-v_F, v_max - v_F] [m/s]

    [[nodiscard]] bool saturated() const { return unclamped != clamped; }
};

struct Feedback {
    double total = 0.0;       ///< a_fb [m/s^2]
    double underlying = 0.0;  ///< a_fb_bar [m/s^2]
};

struct ControlOutput {
    double a_des = 0.0;
    double a_cf = 0.0;
    double a_fb = 0.0;
    double a_fb_bar = 0.0;
    double S = 0.0;
    double S_hat = 0.0;
    double v_des = 0.0;
    double h_des = 0.0;
    double v_hat = 0.0;
    double h_hat = 0.0;
};

[[nodiscard]] double desired_distance(const ControllerParams& p, RangePolicy policy, double v_P, double v_F);
[[nodiscard]] TrackingErrors tracking_errors(const Measurement& m, double h_des);
[[nodiscard]] double collision_free_feedforward(const ControllerParams& p, const Measurement& m);
[[nodiscard]] Surface surface(const ControllerParams& p, const Measurement& m, double h_des);
[[nodiscard]] Feedback feedback(const ControllerParams& p, const Measurement& m, double h_des);
[[nodiscard]] double desired_speed(const ControllerParams& p, const Measurement& m, double h_des);

/// Full nonlinear law: a_des = a_cf + a_fb.
[[nodiscard]] ControlOutput control(const ControllerParams& p, RangePolicy policy, const Measurement& m);

/// Reference linear law (k1 + k2) v_hat + k1 k2 h_hat, unsaturated.
[[nodiscard]] double linear_control(const ControllerParams& p, RangePolicy policy, const Measurement& m);

/// Linear law with its interpretation terms (S = v_hat + k2 h_hat,
/// v_des = v_P + k2 h_hat, a_fb_bar = k2 v_hat, a_cf = 0).
[[nodiscard]] ControlOutput linear_control_output(const ControllerParams& p, RangePolicy policy,
                                                  const Measurement& m);

[[nodiscard]] ControlOutput evaluate(const ControllerParams& p, ControllerKind kind, RangePolicy policy,
                                     const Measurement& m);

/// Integral of the surface for the disturbance-rejecting extension
/// u = a_des + k_i e, de/dt = S.
struct IntegratorState {
    double e = 0.0;

    [[nodiscard]] IntegratorState advanced(double S, double dt) const;
    [[nodiscard]] double command(const ControllerParams& p, double a_des) const { return a_des + p.k_i * e; }
};

/// Validated parameter bundle bound to a controller structure.
class Controller {
public:
    explicit Controller(ControllerParams params, ControllerKind kind = ControllerKind::Nonlinear,
                        RangePolicy policy = RangePolicy::PredecessorBased);

    [[nodiscard]] ControlOutput operator()(const Measurement& m) const { return evaluate(params_, kind_, policy_, m); }

    [[nodiscard]] const ControllerParams& params() const { return params_; }
    [[nodiscard]] ControllerKind kind() const { return kind_; }
    [[nodiscard]] RangePolicy policy() const { return policy_; }

private:
    ControllerParams params_;
    ControllerKind kind_;
    RangePolicy policy_;
};

[[nodiscard]] std::string to_string(RangePolicy policy);
[[nodiscard]] std::string to_string(ControllerKind kind);
[[nodiscard]] RangePolicy parse_range_policy(const std::string& s);
[[nodiscard]] ControllerKind parse_controller_kind(const std::string& s);

}  // namespace carfollow::control
