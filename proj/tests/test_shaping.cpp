#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "carfollow/errors.hpp"
#include "carfollow/shaping.hpp"

using namespace carfollow::shaping;
using carfollow::DomainError;
using carfollow::ParameterError;

namespace {

constexpr double kPi = std::numbers::pi;
const ShaperParams kDefault{0.5, 1.0};

// Independent evaluation straight from the closed form.
double q_ref(double x, double b, double c)
{
    const double G = (2.0 / kPi) * std::atan(kPi * (x / c) / 2.0);
    return G * std::sqrt(2.0 * b * x * G + c * c);
}

double central_diff(double (*f)(double), double x)
{
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Newton iteration seeded from the asymptote; independent of the library's bisection.
double q_inverse_newton(double y, double b, double c)
{
    double x = std::abs(y) < c ? y : std::copysign(y * y / (2.0 * b), y);
    for (int i = 0; i < 200; ++i) {
        const double h = 1e-7 * std::max(1.0, std::abs(x));
        const double d = (q_ref(x + h, b, c) - q_ref(x - h, b, c)) / (2.0 * h);
        const double step = (q_ref(x, b, c) - y) / d;
        x -= step;
        if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

}  // namespace

TEST(Wrapper, Examples)
{
    EXPECT_EQ(wrapper(0.0), 0.0);
    EXPECT_NEAR(wrapper(2.0 / kPi), 0.5, 1e-15);
    EXPECT_NEAR(wrapper(-2.0 / kPi), -0.5, 1e-15);
}

TEST(Wrapper, DerivativeExamples)
{
    EXPECT_EQ(wrapper_derivative(0.0), 1.0);
    EXPECT_NEAR(wrapper_derivative(2.0 / kPi), 0.5, 1e-15);
    EXPECT_LT(wrapper_derivative(1e6), 1e-10);
    EXPECT_GT(wrapper_derivative(1e6), 0.0);
}

TEST(Wrapper, RejectsNonFinite)
{
    EXPECT_THROW((void)wrapper(std::numeric_limits<double>::quiet_NaN()), DomainError);
    EXPECT_THROW((void)wrapper(std::numeric_limits<double>::infinity()), DomainError);
    EXPECT_THROW((void)wrapper_derivative(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(Wrapper, OddBoundedMonotoneProperty)
{
    std::mt19937_64 rng(0x5eed01);
    std::uniform_real_distribution<double> mag(-6.0, 6.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = std::copysign(std::pow(10.0, mag(rng)), unit(rng) - 0.5);
        const double y = wrapper(x);
        ASSERT_EQ(wrapper(-x), -y) << x;
        ASSERT_LE(std::abs(y), 1.0);
        const double x2 = x + std::abs(x) * 1e-3 + 1e-9;
        ASSERT_GT(wrapper(x2), y) << x;
    }
}

TEST(Wrapper, DerivativeDecreasingOnPositiveAxis)
{
    double prev = wrapper_derivative(0.0);
    for (double x = 0.01; x < 100.0; x *= 1.1) {
        const double d = wrapper_derivative(x);
        ASSERT_LT(d, prev) << x;
        prev = d;
    }
}

TEST(Wrapper, DerivativeMatchesFiniteDifference)
{
    std::mt19937_64 rng(0x5eed02);
    std::uniform_real_distribution<double> dist(-50.0, 50.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = dist(rng);
        const double fd = central_diff([](double v) { return wrapper(v); }, x);
        ASSERT_NEAR(wrapper_derivative(x), fd, 1e-5 * std::max(std::abs(fd), 1e-3)) << x;
    }
}

TEST(Shaper, Examples)
{
    EXPECT_EQ(shaper(0.0, kDefault), 0.0);
    EXPECT_NEAR(shaper(1000.0, kDefault), std::sqrt(1000.0), 0.01);
    const double x = 1e-6;
    EXPECT_NEAR(shaper(x, kDefault) / x, 1.0, 1e-3);
}

TEST(Shaper, MatchesClosedForm)
{
    for (double x : {-300.0, -7.0, -0.3, 0.0, 0.01, 1.0, 65.0, 2500.0}) {
        for (auto [b, c] : {std::pair{0.5, 1.0}, std::pair{0.25, 0.4}, std::pair{2.0, 3.0}}) {
            EXPECT_NEAR(shaper(x, {b, c}), q_ref(x, b, c), 1e-12 * std::max(1.0, std::abs(q_ref(x, b, c))));
        }
    }
}

TEST(Shaper, RejectsBadParameters)
{
    EXPECT_THROW((void)shaper(1.0, {0.0, 1.0}), ParameterError);
    EXPECT_THROW((void)shaper(1.0, {0.5, -1.0}), ParameterError);
    EXPECT_THROW((void)shaper_derivative(1.0, {-0.5, 1.0}), ParameterError);
    EXPECT_THROW((void)shaper_inverse(1.0, {0.5, 0.0}), ParameterError);
    EXPECT_THROW((void)shaper(std::numeric_limits<double>::infinity(), kDefault), DomainError);
}

TEST(Shaper, DerivativeExamples)
{
    EXPECT_NEAR(shaper_derivative(0.0, kDefault), 1.0, 1e-15);
    EXPECT_LT(shaper_derivative(1e8, kDefault), 1e-3);
    const double h = 1e-6;
    const double fd = (q_ref(1.0 + h, 0.5, 1.0) - q_ref(1.0 - h, 0.5, 1.0)) / (2.0 * h);
    EXPECT_NEAR(shaper_derivative(1.0, kDefault), fd, 1e-6);
}

TEST(Shaper, DerivativeMatchesFiniteDifferenceProperty)
{
    std::mt19937_64 rng(0x5eed03);
    std::uniform_real_distribution<double> xs(-200.0, 200.0);
    std::uniform_real_distribution<double> bs(0.05, 3.0);
    std::uniform_real_distribution<double> cs(0.1, 3.0);
    for (int i = 0; i < 3000; ++i) {
        const double x = xs(rng);
        const double b = bs(rng);
        const double c = cs(rng);
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        const double fd = (q_ref(x + h, b, c) - q_ref(x - h, b, c)) / (2.0 * h);
        ASSERT_NEAR(shaper_derivative(x, {b, c}), fd, 1e-5 * std::abs(fd)) << x << ' ' << b << ' ' << c;
    }
}

TEST(Shaper, OddAndIncreasingProperty)
{
    std::mt19937_64 rng(0x5eed04);
    std::uniform_real_distribution<double> xs(-1e4, 1e4);
    for (int i = 0; i < 10000; ++i) {
        const double x = xs(rng);
        ASSERT_EQ(shaper(-x, kDefault), -shaper(x, kDefault));
        ASSERT_GT(shaper(x + 1e-3, kDefault), shaper(x, kDefault));
        ASSERT_GT(shaper_derivative(x, kDefault), 0.0);
    }
}

TEST(Shaper, DerivativeDecreasingOnPositiveAxis)
{
    double prev = shaper_derivative(0.0, kDefault);
    for (double x = 0.01; x < 1e4; x *= 1.05) {
        const double d = shaper_derivative(x, kDefault);
        ASSERT_LT(d, prev) << x;
        prev = d;
    }
}

TEST(Shaper, ApproachesAsymptote)
{
    double prev = std::numeric_limits<double>::infinity();
    for (double x : {1e2, 1e3, 1e4, 1e5}) {
        const double gap = std::abs(shaper(x, kDefault) - std::sqrt(2.0 * kDefault.b * x));
        EXPECT_LT(gap, prev) << x;
        prev = gap;
    }
    EXPECT_LT(prev, 0.01);
}

TEST(ShaperInverse, Examples)
{
    EXPECT_EQ(shaper_inverse(0.0, kDefault), 0.0);
    EXPECT_NEAR(shaper_inverse(shaper(5.0, kDefault), kDefault), 5.0, 1e-8);
    EXPECT_NEAR(shaper_inverse(31.623, kDefault), 1000.0, 10.0);
    EXPECT_NEAR(shaper_inverse(31.623, kDefault), q_inverse_newton(31.623, 0.5, 1.0), 1e-6);
}

TEST(ShaperInverse, ResidualBound)
{
    for (double y : {-40.0, -3.0, -1e-4, 1e-9, 0.5, 8.0, 31.623, 120.0}) {
        const double x = shaper_inverse(y, kDefault);
        EXPECT_LT(std::abs(shaper(x, kDefault) - y), 1e-10 * std::max(1.0, std::abs(y))) << y;
    }
}

TEST(ShaperInverse, RoundTripProperty)
{
    std::mt19937_64 rng(0x5eed05);
    std::uniform_real_distribution<double> xs(-1e4, 1e4);
    std::uniform_real_distribution<double> bs(0.05, 3.0);
    std::uniform_real_distribution<double> cs(0.1, 3.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = xs(rng);
        ASSERT_NEAR(shaper_inverse(shaper(x, kDefault), kDefault), x, 1e-8 * std::max(1.0, std::abs(x))) << x;
        const ShaperParams p{bs(rng), cs(rng)};
        const double y = shaper(x, p);
        ASSERT_NEAR(shaper_inverse(y, p), q_inverse_newton(y, p.b, p.c), 1e-7 * std::max(1.0, std::abs(x)));
    }
}
