#pragma once

// Closed-form shaping primitives used by the car-following controller.
//
// wrapper(x) = (2/pi) atan(pi x / 2) is a smooth, odd saturation with unit
// slope at the origin and range (-1, 1).
//
// shaper(x) = wrapper(x/c) * sqrt(2 b x wrapper(x/c) + c^2) is odd, linear
// with unit slope near the origin and approaches sqrt(2 b x) for large x.
// It encodes the constant-deceleration approach of a human driver.

namespace carfollow::shaping {

struct ShaperParams {
    double b = 0.5;  ///< asymptote parameter, a_com / k2 in controller use
    double c = 1.0;  ///< slackness [m/s]
};

/// Throws ParameterError unless b > 0 and c > 0.
void validate(const ShaperParams& p);

[[nodiscard]] double wrapper(double x);
[[nodiscard]] double wrapper_derivative(double x);

[[nodiscard]] double shaper(double x, const ShaperParams& p);
[[nodiscard]] double shaper_derivative(double x, const ShaperParams& p);

/// Unique x with shaper(x) == y, found by bisection on a bracket seeded
/// from the square-root asymptote. Accurate to the last representable
/// value of the bracket.
[[nodiscard]] double shaper_inverse(double y, const ShaperParams& p);

}  // namespace carfollow::shaping
