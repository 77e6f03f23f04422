#include "carfollow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "carfollow/analysis.hpp"
#include "carfollow/config.hpp"
#include "carfollow/controller.hpp"
#include "carfollow/csv.hpp"
#include "carfollow/errors.hpp"
#include "carfollow/plant.hpp"
#include "carfollow/sim.hpp"
#include "carfollow/svg.hpp"

namespace carfollow::cli {
namespace {

namespace fs = std::filesystem;

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string short_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw OutputError("cannot write '" + path.string() + "'");
    }
    return f;
}

void write_text(const fs::path& path, const std::string& text)
{
    auto f = open_output(path);
    f << text;
}

std::pair<double, double> parse_range(const std::string& text, const std::string& flag)
{
    const auto colon = text.find(':');
    try {
        if (colon != std::string::npos) {
            std::size_t n1 = 0;
            std::size_t n2 = 0;
            const std::string a = text.substr(0, colon);
            const std::string b = text.substr(colon + 1);
            const double lo = std::stod(a, &n1);
            const double hi = std::stod(b, &n2);
            if (n1 == a.size() && n2 == b.size()) {
                if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
                    throw ParameterError(flag + " needs 0 < lo < hi, got '" + text + "'");
                }
                return {lo, hi};
            }
        }
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const ParameterError*>(&e) != nullptr) {
            throw;
        }
    }
    throw ParameterError(flag + " expects lo:hi, got '" + text + "'");
}

// Switches plant model, keeping the disturbance consistent with it.
sim::Scenario with_plant(sim::Scenario s, plant::PlantKind kind)
{
    using plant::DisturbanceKind;
    using plant::PlantKind;
    s.plant = kind;
    switch (kind) {
    case PlantKind::Ideal: s.disturbance = {}; break;
    case PlantKind::Disturbed:
        if (s.disturbance.kind != DisturbanceKind::ConstantDelta && s.disturbance.kind != DisturbanceKind::PhysicsDerived) {
            s.disturbance = {DisturbanceKind::ConstantDelta, 0.5};
        }
        break;
    case PlantKind::Lag:
        if (s.disturbance.kind != DisturbanceKind::ConstantDeltaHat && s.disturbance.kind != DisturbanceKind::PhysicsDerived) {
            s.disturbance = {DisturbanceKind::ConstantDeltaHat, 0.5};
        }
        break;
    case PlantKind::Physics:
        if (s.disturbance.kind != DisturbanceKind::PhysicsDerived) {
            s.disturbance = {};
        }
        break;
    }
    return s;
}

void print_warnings(const control::ControllerParams& p, std::ostream& err)
{
    try {
        for (const auto& w : control::design_warnings(p)) {
            err << "warning: " << w << '\n';
        }
    } catch (const std::exception&) {
        // invalid parameters are reported by validation
    }
}

double half_peak_to_peak(const sim::SimTrace& tr, double sim::TraceRow::*field, double t0, double t1)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& r : tr.rows) {
        if (r.t >= t0 - 1e-9 && r.t <= t1 + 1e-9) {
            lo = std::min(lo, r.*field);
            hi = std::max(hi, r.*field);
        }
    }
    return hi >= lo ? 0.5 * (hi - lo) : 0.0;
}

std::string summarize(const sim::Scenario& sc, const sim::SimTrace& tr)
{
    double min_h = std::numeric_limits<double>::infinity();
    double min_a = min_h;
    double min_cf = min_h;
    double max_a = -min_h;
    double max_S = 0.0;
    for (const auto& r : tr.rows) {
        min_h = std::min(min_h, r.h);
        min_a = std::min(min_a, r.a_des);
        max_a = std::max(max_a, r.a_des);
        min_cf = std::min(min_cf, r.a_cf);
        max_S = std::max(max_S, std::abs(r.S));
    }
    std::ostringstream o;
    o << tr.scenario << ": min h = " << short_num(min_h) << " m";
    if (!tr.rows.empty()) {
        const auto& last = tr.rows.back();
        o << ", final h = " << short_num(last.h) << " m, final v_F = " << short_num(last.v_F) << " m/s";
    }
    o << ", a_des in [" << short_num(min_a) << ", " << short_num(max_a) << "] m/s^2, min a_cf = " << short_num(min_cf)
      << " m/s^2, max |S| = " << short_num(max_S) << " m/s";
    if (const auto* w = std::get_if<sim::Sinusoid>(&sc.lead); w != nullptr && !tr.rows.empty()) {
        const double t1 = tr.rows.back().t;
        const double t0 = std::max(0.0, t1 - 2.0 / w->f);
        o << ", speed amplitude lead/follower = " << short_num(half_peak_to_peak(tr, &sim::TraceRow::v_P, t0, t1))
          << '/' << short_num(half_peak_to_peak(tr, &sim::TraceRow::v_F, t0, t1)) << " m/s";
    }
    if (sc.plant == plant::PlantKind::Lag && !tr.rows.empty()) {
        const double t1 = tr.rows.back().t;
        o << ", residual a_des amplitude = " << short_num(half_peak_to_peak(tr, &sim::TraceRow::a_des, t1 / 2, t1))
          << " m/s^2";
    }
    return o.str();
}

// Runs a scenario; on abort writes the partial trace (when a sink is given)
// flagged with a comment line and rethrows.
sim::SimTrace run_scenario(const sim::Scenario& sc, std::ostream* csv)
{
    try {
        auto trace = sim::run(sc);
        if (csv != nullptr) {
            io::write_trace_csv(*csv, trace);
        }
        return trace;
    } catch (const sim::SimulationError& e) {
        if (csv != nullptr) {
            io::write_trace_csv(*csv, e.partial_trace());
            *csv << "# aborted: " << e.what() << '\n';
        }
        throw;
    }
}

io::Config load_config_or_default(const std::string& path)
{
    return path.empty() ? io::Config{} : io::load_config(path);
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string scenario;
    std::string config;
    std::string out;
    std::string svg;
    std::string controller;
    std::string plant;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err)
{
    if (o.scenario.empty() && o.config.empty()) {
        err << "error: simulate needs --scenario or --config\n";
        return kExitUsage;
    }
    sim::Scenario sc;
    if (o.config.empty()) {
        sc = sim::find_scenario(o.scenario);
    } else {
        const auto cfg = io::load_config(o.config);
        sc = io::resolve_scenario(cfg, o.scenario.empty() ? std::nullopt : std::optional<std::string>(o.scenario));
    }
    if (!o.controller.empty()) {
        if (control::parse_controller_kind(o.controller) == control::ControllerKind::Linear) {
            sc = sim::as_linear_variant(std::move(sc));
        } else {
            sc.controller = control::ControllerKind::Nonlinear;
        }
    }
    if (!o.plant.empty()) {
        sc = with_plant(std::move(sc), plant::parse_plant_kind(o.plant));
    }
    sc.validate();
    print_warnings(sc.params, err);

    sim::SimTrace trace;
    if (o.out.empty()) {
        trace = run_scenario(sc, &out);
    } else {
        // buffered; the file is written only after the run
        std::ostringstream buf;
        try {
            trace = run_scenario(sc, &buf);
        } catch (const sim::SimulationError&) {
            write_text(o.out, buf.str());
            throw;
        }
        write_text(o.out, buf.str());
    }
    if (!o.svg.empty()) {
        write_text(o.svg, io::render_svg(io::trace_figure(sc.name, {&trace})));
    }
    err << summarize(sc, trace) << '\n';
    return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepOptions {
    std::vector<double> headways{1.0, 0.5, 0.4, 0.2};
    std::string k1_range = "0.02:4";
    std::string k2_range = "0.02:4";
    std::size_t grid = 200;
    std::string out;
    unsigned jobs = 0;
};

int cmd_sweep(const SweepOptions& o, std::ostream& out, std::ostream& err)
{
    analysis::SweepSpec spec;
    spec.headways = o.headways;
    std::tie(spec.k1_lo, spec.k1_hi) = parse_range(o.k1_range, "--k1-range");
    std::tie(spec.k2_lo, spec.k2_hi) = parse_range(o.k2_range, "--k2-range");
    spec.grid = o.grid;
    for (double t : spec.headways) {
        if (!(t > 0.0) || !std::isfinite(t)) {
            throw ParameterError("--t-h values must be positive");
        }
    }
    if (spec.grid < 2) {
        throw ParameterError("--grid must be at least 2");
    }
    const unsigned jobs = o.jobs > 0 ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    const auto cells = analysis::sweep_stability(spec, jobs);

    std::ostringstream buf;
    io::write_sweep_csv(buf, cells);
    if (o.out.empty()) {
        out << buf.str();
    } else {
        write_text(o.out, buf.str());
    }
    auto sorted = spec.headways;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (double t : sorted) {
        err << "t_h = " << short_num(t) << " s: " << analysis::count_string_stable(cells, t)
            << " string-stable cells of " << spec.grid * spec.grid << ", k2* = " << short_num(1.0 / t) << " 1/s\n";
    }
    return kExitOk;
}

// -------------------------------------------------------------------- freq

struct FreqOptions {
    std::optional<double> k1;
    std::optional<double> k2;
    std::optional<double> t_h;
    std::string config;
    bool oracle = false;
    std::vector<double> oracle_f{0.02, 0.05, 0.1, 0.2};
    std::string out;
};

int cmd_freq(const FreqOptions& o, std::ostream& out, std::ostream& err)
{
    auto p = load_config_or_default(o.config).params;
    if (o.k1) p.k1 = *o.k1;
    if (o.k2) p.k2 = *o.k2;
    if (o.t_h) p.t_h = *o.t_h;
    if (!(p.k1 > 0.0) || !(p.k2 > 0.0) || !(p.t_h > 0.0)) {
        throw ParameterError("--k1, --k2 and --t-h must be positive");
    }
    p.validate();

    const auto report = analysis::analyze(p.k1, p.k2, p.t_h);
    err << "plant stable: " << (report.plant_stable ? "yes" : "no")
        << ", string stable: " << (report.string_stable ? "yes" : "no") << ", sup M1 = " << short_num(report.m1_bound)
        << ", k2* = " << short_num(report.k2_star) << " 1/s\n";

    std::map<double, std::optional<double>> omegas;
    omegas[0.0] = std::nullopt;
    for (double w : analysis::default_frequency_grid()) {
        omegas[w] = std::nullopt;
    }

    std::optional<std::string> failure;
    if (o.oracle) {
        for (double f : o.oracle_f) {
            if (!(f > 0.0) || !std::isfinite(f)) {
                throw ParameterError("--oracle-f values must be positive");
            }
            try {
                const auto r = analysis::string_stability_oracle(p, f);
                omegas[r.omega] = r.ratio;
                err << "oracle f = " << short_num(f) << " Hz: ratio = " << io::format_number(r.ratio)
                    << ", M = " << io::format_number(r.predicted)
                    << ", difference = " << short_num(r.ratio - r.predicted) << '\n';
            } catch (const OracleError& e) {
                failure = "# oracle failed at f=" + io::format_number(f) + " Hz: " + e.what();
                break;
            }
        }
    }

    std::vector<io::FrequencyRow> rows;
    rows.reserve(omegas.size());
    for (const auto& [w, ratio] : omegas) {
        rows.push_back({w, analysis::magnitude_M1(p.k1, p.k2, p.t_h, w), analysis::magnitude_M(p.k1, p.k2, p.t_h, w),
                        ratio});
    }
    std::ostringstream buf;
    io::write_frequency_csv(buf, rows, o.oracle);
    if (failure) {
        buf << *failure << '\n';
    }
    if (o.out.empty()) {
        out << buf.str();
    } else {
        write_text(o.out, buf.str());
    }
    if (failure) {
        err << "error: " << failure->substr(2) << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

// --------------------------------------------------------------- reproduce

const std::vector<std::string>& figure_names()
{
    static const std::vector<std::string> names = {"fig3", "fig4", "fig5", "fig6",
                                                   "fig7", "fig8", "fig9", "fig10"};
    return names;
}

std::vector<std::string> figure_scenarios(const std::string& fig)
{
    if (fig == "fig4" || fig == "fig5" || fig == "fig6" || fig == "fig7") {
        return {fig, fig + "-linear"};
    }
    return {fig + "a", fig + "b"};
}

int reproduce_fig3(const fs::path& dir, std::ostream& out)
{
    const analysis::SweepSpec spec;
    const auto cells = analysis::sweep_stability(spec, std::max(1u, std::thread::hardware_concurrency()));
    for (double t : spec.headways) {
        std::vector<analysis::StabilityCell> part;
        std::copy_if(cells.begin(), cells.end(), std::back_inserter(part),
                     [t](const auto& c) { return c.t_h == t; });
        auto f = open_output(dir / ("fig3_th" + short_num(t) + ".csv"));
        io::write_sweep_csv(f, part);
        out << "fig3: t_h = " << short_num(t) << " s: " << analysis::count_string_stable(cells, t)
            << " string-stable cells, k2* = " << short_num(1.0 / t) << " 1/s\n";
    }
    write_text(dir / "fig3.svg", io::render_svg(io::stability_figure(cells)));
    return kExitOk;
}

int cmd_reproduce(const std::string& fig, const std::string& outdir, std::ostream& out)
{
    const fs::path dir(outdir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (fig == "fig3") {
        return reproduce_fig3(dir, out);
    }
    std::vector<sim::SimTrace> traces;
    for (const auto& name : figure_scenarios(fig)) {
        const auto sc = sim::find_scenario(name);
        auto f = open_output(dir / (name + ".csv"));
        traces.push_back(run_scenario(sc, &f));
        out << summarize(sc, traces.back()) << '\n';
    }
    std::vector<const sim::SimTrace*> ptrs;
    for (const auto& t : traces) {
        ptrs.push_back(&t);
    }
    write_text(dir / (fig + ".svg"), io::render_svg(io::trace_figure(fig, ptrs)));
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Nonlinear car-following controller: simulation and stability analysis", "carfollow"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "carfollow 1.0.0");

    const std::string config_env = "CARFOLLOW_CONFIG";

    SimulateOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Run a closed-loop scenario and write its trace");
    simulate->add_option("--scenario", sim_opts.scenario, "Built-in scenario (see `scenarios`)");
    simulate->add_option("--config", sim_opts.config, "Configuration file")->envname(config_env);
    simulate->add_option("--out", sim_opts.out, "Trace CSV (default: stdout)");
    simulate->add_option("--svg", sim_opts.svg, "Three-panel SVG plot");
    simulate->add_option("--controller", sim_opts.controller)->check(CLI::IsMember({"nonlinear", "linear"}));
    simulate->add_option("--plant", sim_opts.plant)->check(CLI::IsMember({"ideal", "disturbed", "lag", "physics"}));

    SweepOptions sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "String-stability verdicts over a (k2, k1) grid");
    sweep->add_option("--t-h", sweep_opts.headways, "Headways [s]")->delimiter(',')->capture_default_str();
    sweep->add_option("--k1-range", sweep_opts.k1_range, "lo:hi [1/s]")->capture_default_str();
    sweep->add_option("--k2-range", sweep_opts.k2_range, "lo:hi [1/s]")->capture_default_str();
    sweep->add_option("--grid", sweep_opts.grid, "Points per axis")->capture_default_str();
    sweep->add_option("--jobs", sweep_opts.jobs, "Worker threads (0: all cores)");
    sweep->add_option("--out", sweep_opts.out, "Sweep CSV (default: stdout)");

    FreqOptions freq_opts;
    auto* freq = app.add_subcommand("freq", "Frequency-response magnitudes of the linearized loop");
    freq->add_option("--k1", freq_opts.k1, "[1/s]");
    freq->add_option("--k2", freq_opts.k2, "[1/s]");
    freq->add_option("--t-h", freq_opts.t_h, "[s]");
    freq->add_option("--config", freq_opts.config, "Configuration file")->envname(config_env);
    freq->add_flag("--oracle", freq_opts.oracle, "Cross-check M with a time-domain simulation");
    freq->add_option("--oracle-f", freq_opts.oracle_f, "Oracle frequencies [Hz]")->delimiter(',')->capture_default_str();
    freq->add_option("--out", freq_opts.out, "Frequency CSV (default: stdout)");

    std::string figure;
    std::string outdir = ".";
    auto* reproduce = app.add_subcommand("reproduce", "Regenerate the data and plot of one figure");
    reproduce->add_option("--figure", figure)->required()->check(CLI::IsMember(figure_names()));
    reproduce->add_option("--outdir", outdir)->capture_default_str();

    auto* scenarios = app.add_subcommand("scenarios", "List built-in scenarios");

    std::string defaults_out;
    auto* defaults = app.add_subcommand("defaults", "Write the default configuration");
    defaults->add_option("--out", defaults_out, "Config file (default: stdout)");

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("carfollow");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) {
        argv.push_back(a.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_opts, out, err);
        if (sweep->parsed()) return cmd_sweep(sweep_opts, out, err);
        if (freq->parsed()) return cmd_freq(freq_opts, out, err);
        if (reproduce->parsed()) return cmd_reproduce(figure, outdir, out);
        if (scenarios->parsed()) {
            for (const auto& name : sim::builtin_scenario_names()) {
                out << name << '\n';
            }
            return kExitOk;
        }
        if (defaults->parsed()) {
            std::ostringstream buf;
            io::write_config(buf, io::Config{});
            if (defaults_out.empty()) {
                out << buf.str();
            } else {
                write_text(defaults_out, buf.str());
            }
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {  // ParameterError
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::out_of_range& e) {  // LookupError
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace carfollow::cli
