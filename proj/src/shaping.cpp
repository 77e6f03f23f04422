#include "carfollow/shaping.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "carfollow/errors.hpp"

namespace carfollow::shaping {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void require_finite(double x, const char* what)
{
    if (!std::isfinite(x)) {
        throw DomainError(std::string(what) + ": argument must be finite");
    }
}

// Shaper on x >= 0 without argument checks.
double shaper_unchecked(double x, const ShaperParams& p)
{
    const double w = wrapper(x / p.c);
    return w * std::sqrt(2.0 * p.b * x * w + p.c * p.c);
}

}  // namespace

void validate(const ShaperParams& p)
{
    if (!(p.b > 0.0) || !std::isfinite(p.b)) {
        throw ParameterError("shaper: b must be positive and finite");
    }
    if (!(p.c > 0.0) || !std::isfinite(p.c)) {
        throw ParameterError("shaper: c must be positive and finite");
    }
}

double wrapper(double x)
{
    require_finite(x, "wrapper");
    return std::atan(kHalfPi * x) / kHalfPi;
}

double wrapper_derivative(double x)
{
    require_finite(x, "wrapper_derivative");
    const double s = kHalfPi * x;
    return 1.0 / (1.0 + s * s);
}

double shaper(double x, const ShaperParams& p)
{
    validate(p);
    require_finite(x, "shaper");
    return shaper_unchecked(x, p);
}

double shaper_derivative(double x, const ShaperParams& p)
{
    validate(p);
    require_finite(x, "shaper_derivative");
    const double w = wrapper(x / p.c);
    const double dw = wrapper_derivative(x / p.c) / p.c;
    const double root = std::sqrt(2.0 * p.b * x * w + p.c * p.c);
    // d/dx [w * root], root' = b (w + x w') / root
    return dw * root + w * p.b * (w + x * dw) / root;
}

double shaper_inverse(double y, const ShaperParams& p)
{
    validate(p);
    require_finite(y, "shaper_inverse");
    if (y == 0.0) {
        return 0.0;
    }
    const double target = std::fabs(y);

    double lo = 0.0;
    double hi = std::fmax(p.c, target * target / (2.0 * p.b) + p.c);
    while (shaper_unchecked(hi, p) < target) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) {
            throw DomainError("shaper_inverse: value out of representable range");
        }
    }
    for (;;) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (shaper_unchecked(mid, p) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double x = (target - shaper_unchecked(lo, p) <= shaper_unchecked(hi, p) - target) ? lo : hi;
    return std::copysign(x, y);
}

}  // namespace carfollow::shaping
