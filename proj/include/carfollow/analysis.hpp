#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "carfollow/controller.hpp"

namespace carfollow::sim {
struct Scenario;
}

namespace carfollow::analysis {

/// Closed loop linearized about the uniform-flow equilibrium in the
/// (surface error, speed error) coordinates, input = lead acceleration.
struct LinearizedSystem {
    std::array<std::array<double, 2>, 2> A{};
    std::array<double, 2> B{};
    double k1 = 0.0;
    double k2 = 0.0;
    double t_h = 0.0;
};

[[nodiscard]] LinearizedSystem linearize(double k1, double k2, double t_h);

/// Roots of det(sI - A) = 0 from the characteristic quadratic, ordered by
/// decreasing real part.
[[nodiscard]] std::array<std::complex<double>, 2> eigenvalues(const LinearizedSystem& sys);

[[nodiscard]] bool plant_stable(double k1, double k2);

/// RHS - LHS of  k1 t_h (k2 t_h - 2) <= 2 (k2 t_h - 1).  Non-negative means
/// no sinusoidal lead perturbation is amplified.
[[nodiscard]] double string_stability_margin(double k1, double k2, double t_h);

/// Throws ParameterError when the gains are not plant stable.
[[nodiscard]] bool string_stable(double k1, double k2, double t_h);

/// |G(jw)|: lead-speed to follower-speed perturbation gain.
[[nodiscard]] double magnitude_M(double k1, double k2, double t_h, double omega);

/// |G1(jw)|: lead-speed perturbation to surface error.
[[nodiscard]] double magnitude_M1(double k1, double k2, double t_h, double omega);

/// Numerator minus denominator of M(w)^2; negative for all w > 0 exactly
/// when the loop is string stable.
[[nodiscard]] double string_polynomial(double k1, double k2, double t_h, double omega);

struct FrequencyResponse {
    std::vector<double> omega;
    std::vector<double> m1;
    std::vector<double> m;
};

/// 1000 log-spaced points on [1e-3, 1e3] rad/s.
[[nodiscard]] std::vector<double> default_frequency_grid();

[[nodiscard]] FrequencyResponse frequency_response(double k1, double k2, double t_h, std::span<const double> omega);

struct StabilityReport {
    std::array<std::complex<double>, 2> eigenvalues{};
    bool plant_stable = false;
    bool string_stable = false;
    double k2_star = 0.0;   ///< 1 / t_h, best surface tracking
    double m1_bound = 0.0;  ///< |1 - k2 t_h|, supremum of M1
};

[[nodiscard]] StabilityReport analyze(double k1, double k2, double t_h);

struct SweepSpec {
    std::vector<double> headways{1.0, 0.5, 0.4, 0.2};
    double k1_lo = 0.02;
    double k1_hi = 4.0;
    double k2_lo = 0.02;
    double k2_hi = 4.0;
    std::size_t grid = 200;  ///< points per gain axis, endpoints included
};

struct StabilityCell {
    double t_h = 0.0;
    double k2 = 0.0;
    double k1 = 0.0;
    bool plant_stable = false;
    bool string_stable = false;
};

/// Verdicts on the (k2, k1) grid for every headway, sorted by (t_h, k2, k1).
/// The result does not depend on the number of workers.
[[nodiscard]] std::vector<StabilityCell> sweep_stability(const SweepSpec& spec, unsigned workers = 1);

[[nodiscard]] std::size_t count_string_stable(std::span<const StabilityCell> cells, double t_h);

// Nonlinear change of coordinates (h, v_F) <-> (S, v_hat) for the
// predecessor-based range policy, valid where the surface clamp is inactive.

struct TransformedState {
    double S = 0.0;
    double v_hat = 0.0;
};

/// Throws DomainError when the surface clamp is active (not invertible there).
[[nodiscard]] TransformedState to_surface_coordinates(const control::ControllerParams& p, double h, double v_P,
                                                      double v_F);

struct PhysicalState {
    double h = 0.0;
    double v_F = 0.0;
};

[[nodiscard]] PhysicalState from_surface_coordinates(const control::ControllerParams& p, const TransformedState& x,
                                                     double v_P);

/// Closed-loop vector field of the ideal plant in (S, v_hat).
[[nodiscard]] TransformedState transformed_dynamics(const control::ControllerParams& p, const TransformedState& x,
                                                    double v_P, double v_P_dot);

struct TransformedTrace {
    std::vector<double> t;
    std::vector<double> S;
    std::vector<double> v_hat;
};

/// Integrates the transformed dynamics with the scenario's step. Requires an
/// ideal plant, nonlinear controller and predecessor-based policy without
/// integral action; throws DomainError if the trajectory reaches the clamp.
[[nodiscard]] TransformedTrace simulate_transformed(const sim::Scenario& scenario);

struct OracleOptions {
    double v0 = 15.0;
    double amplitude = 0.2;
    int settle_periods = 5;
    int measure_periods = 3;
    double max_dt = 0.01;
    double convergence_tol = 1e-3;  ///< relative change of the last-period amplitude
};

struct OracleResult {
    double f = 0.0;          ///< [Hz]
    double omega = 0.0;      ///< [rad/s]
    double ratio = 0.0;      ///< follower / lead amplitude at the excitation frequency
    double predicted = 0.0;  ///< magnitude_M at omega
};

/// Time-domain cross-check of magnitude_M: drives the nonlinear closed loop
/// (ideal plant) with a small sinusoidal lead speed and measures the
/// fundamental of the follower speed after the transient.
[[nodiscard]] OracleResult string_stability_oracle(const control::ControllerParams& p, double f_hz,
                                                   const OracleOptions& opts = {});

}  // namespace carfollow::analysis
