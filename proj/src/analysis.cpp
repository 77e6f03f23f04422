#include "carfollow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "carfollow/errors.hpp"
#include "carfollow/rk4.hpp"
#include "carfollow/shaping.hpp"
#include "carfollow/sim.hpp"

namespace carfollow::analysis {
namespace {

double characteristic_denominator(double k1, double k2, double omega)
{
    const double w2 = omega * omega;
    const double re = k1 * k2 - w2;
    const double im = (k1 + k2) * omega;
    return re * re + im * im;
}

std::vector<double> axis(double lo, double hi, std::size_t n)
{
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

}  // namespace

LinearizedSystem linearize(double k1, double k2, double t_h)
{
    if (!(k1 > 0.0) || !(k2 > 0.0) || !(t_h > 0.0)) {
        throw ParameterError("linearize: k1, k2 and t_h must be positive");
    }
    LinearizedSystem sys;
    sys.A = {{{-k1, 0.0}, {-k1, -k2}}};
    sys.B = {1.0 - k2 * t_h, 1.0};
    sys.k1 = k1;
    sys.k2 = k2;
    sys.t_h = t_h;
    return sys;
}

std::array<std::complex<double>, 2> eigenvalues(const LinearizedSystem& sys)
{
    const auto& A = sys.A;
    // lambda = m +- sqrt(d^2 + A01 A10) with m the mean and d the half
    // difference of the diagonal; exact for triangular A
    const double m = 0.5 * (A[0][0] + A[1][1]);
    const double d = 0.5 * (A[0][0] - A[1][1]);
    const double disc = d * d + A[0][1] * A[1][0];
    if (disc < 0.0) {
        const double im = std::sqrt(-disc);
        return {std::complex<double>{m, im}, std::complex<double>{m, -im}};
    }
    const double r = std::sqrt(disc);
    // larger-magnitude root first, the other from the product
    const double big = m + std::copysign(r, m);
    const double det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
    double r1 = big;
    double r2 = big != 0.0 ? det / big : m - std::copysign(r, m);
    if (r1 < r2) {
        std::swap(r1, r2);
    }
    return {std::complex<double>{r1}, std::complex<double>{r2}};
}

bool plant_stable(double k1, double k2)
{
    return k1 > 0.0 && k2 > 0.0;
}

double string_stability_margin(double k1, double k2, double t_h)
{
    const double lhs = k1 * t_h * (k2 * t_h - 2.0);
    const double rhs = 2.0 * (k2 * t_h - 1.0);
    return rhs - lhs;
}

bool string_stable(double k1, double k2, double t_h)
{
    if (!plant_stable(k1, k2)) {
        throw ParameterError("string_stable: gains are not plant stable");
    }
    if (!(t_h > 0.0)) {
        throw ParameterError("string_stable: t_h must be positive");
    }
    return string_stability_margin(k1, k2, t_h) >= 0.0;
}

double magnitude_M(double k1, double k2, double t_h, double omega)
{
    if (omega < 0.0) {
        throw DomainError("magnitude_M: omega must be non-negative");
    }
    const double lin = (k1 + k2 - k1 * k2 * t_h) * omega;
    const double num = lin * lin + k1 * k1 * k2 * k2;
    return std::sqrt(num / characteristic_denominator(k1, k2, omega));
}

double magnitude_M1(double k1, double k2, double t_h, double omega)
{
    if (omega < 0.0) {
        throw DomainError("magnitude_M1: omega must be non-negative");
    }
    const double a = 1.0 - k2 * t_h;
    const double num = a * a * omega * omega * (k2 * k2 + omega * omega);
    return std::sqrt(num / characteristic_denominator(k1, k2, omega));
}

double string_polynomial(double k1, double k2, double t_h, double omega)
{
    const double w2 = omega * omega;
    const double kk = k1 * k2;
    return -w2 * w2 + kk * (kk * t_h * t_h - 2.0 * (k1 + k2) * t_h + 2.0) * w2;
}

std::vector<double> default_frequency_grid()
{
    constexpr std::size_t n = 1000;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::pow(10.0, -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return w;
}

FrequencyResponse frequency_response(double k1, double k2, double t_h, std::span<const double> omega)
{
    FrequencyResponse fr;
    fr.omega.assign(omega.begin(), omega.end());
    fr.m1.reserve(omega.size());
    fr.m.reserve(omega.size());
    for (double w : omega) {
        fr.m1.push_back(magnitude_M1(k1, k2, t_h, w));
        fr.m.push_back(magnitude_M(k1, k2, t_h, w));
    }
    return fr;
}

StabilityReport analyze(double k1, double k2, double t_h)
{
    StabilityReport r;
    r.plant_stable = plant_stable(k1, k2);
    if (r.plant_stable) {
        r.eigenvalues = eigenvalues(linearize(k1, k2, t_h));
        r.string_stable = string_stable(k1, k2, t_h);
    } else {
        LinearizedSystem sys;
        sys.A = {{{-k1, 0.0}, {-k1, -k2}}};
        r.eigenvalues = eigenvalues(sys);
    }
    r.k2_star = 1.0 / t_h;
    r.m1_bound = std::fabs(1.0 - k2 * t_h);
    return r;
}

std::vector<StabilityCell> sweep_stability(const SweepSpec& spec, unsigned workers)
{
    if (spec.grid == 0 || spec.headways.empty()) {
        throw ParameterError("sweep: empty grid");
    }
    if (!(spec.k1_lo > 0.0) || !(spec.k2_lo > 0.0) || spec.k1_hi < spec.k1_lo || spec.k2_hi < spec.k2_lo) {
        throw ParameterError("sweep: gain ranges must be positive with lo <= hi");
    }
    std::vector<double> headways = spec.headways;
    for (double t_h : headways) {
        if (!(t_h > 0.0)) {
            throw ParameterError("sweep: headways must be positive");
        }
    }
    std::sort(headways.begin(), headways.end());
    const auto k1s = axis(spec.k1_lo, spec.k1_hi, spec.grid);
    const auto k2s = axis(spec.k2_lo, spec.k2_hi, spec.grid);

    const std::size_t per_headway = spec.grid * spec.grid;
    std::vector<StabilityCell> cells(headways.size() * per_headway);
    auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const std::size_t h = idx / per_headway;
            const std::size_t rem = idx % per_headway;
            StabilityCell c;
            c.t_h = headways[h];
            c.k2 = k2s[rem / spec.grid];
            c.k1 = k1s[rem % spec.grid];
            c.plant_stable = plant_stable(c.k1, c.k2);
            c.string_stable = c.plant_stable && string_stable(c.k1, c.k2, c.t_h);
            cells[idx] = c;
        }
    };

    workers = std::max(1u, workers);
    if (workers == 1) {
        fill(0, cells.size());
        return cells;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (cells.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(cells.size(), w * chunk);
        const std::size_t end = std::min(cells.size(), begin + chunk);
        pool.emplace_back(fill, begin, end);
    }
    for (auto& t : pool) {
        t.join();
    }
    return cells;
}

std::size_t count_string_stable(std::span<const StabilityCell> cells, double t_h)
{
    return static_cast<std::size_t>(std::count_if(
        cells.begin(), cells.end(), [t_h](const StabilityCell& c) { return c.t_h == t_h && c.string_stable; }));
}

TransformedState to_surface_coordinates(const control::ControllerParams& p, double h, double v_P, double v_F)
{
    const control::Measurement m{h, v_P, v_F};
    const double h_des = control::desired_distance(p, control::RangePolicy::PredecessorBased, v_P, v_F);
    const auto s = control::surface(p, m, h_des);
    if (s.saturated()) {
        throw DomainError("transform: surface clamp active, coordinates are not invertible");
    }
    return {s.unclamped, v_P - v_F};
}

PhysicalState from_surface_coordinates(const control::ControllerParams& p, const TransformedState& x, double v_P)
{
    const double scaled_gap = shaping::shaper_inverse(x.S - x.v_hat, p.shaper());
    return {p.h0 + p.t_h * v_P + scaled_gap / p.k2, v_P - x.v_hat};
}

TransformedState transformed_dynamics(const control::ControllerParams& p, const TransformedState& x, double v_P,
                                      double v_P_dot)
{
    const auto shp = p.shaper();
    const double scaled_gap = shaping::shaper_inverse(x.S - x.v_hat, shp);
    const double slope = shaping::shaper_derivative(scaled_gap, shp);
    const auto phys = from_surface_coordinates(p, x, v_P);
    if (x.S > p.v_max - phys.v_F || x.S < -phys.v_F) {
        throw DomainError("transformed dynamics: surface clamp reached");
    }
    const control::Measurement m{phys.h, v_P, phys.v_F};
    m.validate();
    const double a_cf = control::collision_free_feedforward(p, m);
    const double wrapped = p.a_sat * shaping::wrapper(p.k1 * x.S / p.a_sat);
    return {
        -a_cf - wrapped + (1.0 - p.k2 * p.t_h * slope) * v_P_dot,
        -a_cf - wrapped - slope * p.k2 * x.v_hat + v_P_dot,
    };
}

TransformedTrace simulate_transformed(const sim::Scenario& sc)
{
    sc.validate();
    if (sc.plant != plant::PlantKind::Ideal || sc.controller != control::ControllerKind::Nonlinear
        || sc.range_policy != control::RangePolicy::PredecessorBased || sc.integral_action) {
        throw ParameterError("simulate_transformed: needs ideal plant, nonlinear controller, predecessor policy");
    }
    const auto& p = sc.params;
    const auto x0 = to_surface_coordinates(p, sc.initial.h, sim::lead_speed(sc.lead, 0.0), sc.initial.v_F);
    std::array<double, 2> x{x0.S, x0.v_hat};
    auto rhs = [&](double t, const std::array<double, 2>& y) {
        const auto d = transformed_dynamics(p, {y[0], y[1]}, sim::lead_speed(sc.lead, t),
                                            sim::lead_acceleration(sc.lead, t));
        return std::array<double, 2>{d.S, d.v_hat};
    };

    TransformedTrace tr;
    const std::size_t n = sc.steps();
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * sc.dt;
        tr.t.push_back(t);
        tr.S.push_back(x[0]);
        tr.v_hat.push_back(x[1]);
        if (i == n) {
            break;
        }
        x = rk4_step(rhs, t, x, sc.dt);
    }
    return tr;
}

OracleResult string_stability_oracle(const control::ControllerParams& p, double f_hz, const OracleOptions& opts)
{
    if (!(f_hz > 0.0) || !std::isfinite(f_hz)) {
        throw ParameterError("oracle: frequency must be positive");
    }
    if (opts.settle_periods < 0 || opts.measure_periods < 2 || !(opts.amplitude > 0.0) || !(opts.max_dt > 0.0)) {
        throw ParameterError("oracle: invalid options");
    }
    const double period = 1.0 / f_hz;
    const auto samples = static_cast<std::size_t>(std::ceil(period / opts.max_dt));
    const double omega = 2.0 * std::numbers::pi * f_hz;

    sim::Scenario sc;
    sc.name = "string-stability-oracle";
    sc.params = p;
    sc.lead = sim::Sinusoid{opts.v0, opts.amplitude, f_hz};
    sc.initial = {p.h0 + p.t_h * opts.v0, opts.v0, {}, {}};
    sc.dt = period / static_cast<double>(samples);
    const int total_periods = opts.settle_periods + opts.measure_periods;
    sc.duration = period * total_periods;
    sc.validate();

    // Per-period Fourier coefficients of v_F at the excitation frequency.
    std::vector<std::array<double, 2>> coeffs;
    auto state = sim::initial_state(sc);
    std::size_t i = 0;
    for (int k = 0; k < total_periods; ++k) {
        double a = 0.0;
        double b = 0.0;
        for (std::size_t j = 0; j < samples; ++j, ++i) {
            const double t = static_cast<double>(i) * sc.dt;
            const double v = state.plant.v_F;
            a += v * std::sin(omega * t);
            b += v * std::cos(omega * t);
            state = sim::step(sc, state, t);
        }
        if (k >= opts.settle_periods) {
            coeffs.push_back({a, b});
        }
    }

    auto amplitude_of = [&](std::size_t first, std::size_t count) {
        double a = 0.0;
        double b = 0.0;
        for (std::size_t k = first; k < first + count; ++k) {
            a += coeffs[k][0];
            b += coeffs[k][1];
        }
        const double n = static_cast<double>(samples * count);
        return 2.0 / n * std::hypot(a, b);
    };
    const std::size_t m = coeffs.size();
    const double last = amplitude_of(m - 1, 1);
    const double previous = amplitude_of(m - 2, 1);
    if (!(std::fabs(last - previous) <= opts.convergence_tol * last)) {
        std::ostringstream os;
        os << "oracle at f=" << f_hz << " Hz did not reach a periodic steady state (last period amplitude " << last
           << ", previous " << previous << ")";
        throw OracleError(os.str());
    }
    return {f_hz, omega, amplitude_of(0, m) / opts.amplitude, magnitude_M(p.k1, p.k2, p.t_h, omega)};
}

}  // namespace carfollow::analysis
