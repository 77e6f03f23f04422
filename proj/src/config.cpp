#include "carfollow/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "carfollow/errors.hpp"

namespace carfollow::io {
namespace {

enum class ValueKind { Number, Text, Flag, Table };

struct KeySpec {
    const char* key;
    const char* unit;  ///< "" for non-numeric values
    ValueKind kind;
    std::function<void(Config&, const std::string&, double)> apply;
};

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& out)
{
    if (text.empty()) {
        return false;
    }
    errno = 0;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return errno == 0 && end == text.c_str() + text.size() && std::isfinite(out);
}

#define NUM(field_key, unit, expr) \
    KeySpec { field_key, unit, ValueKind::Number, [](Config& c, const std::string&, double v) { expr = v; } }
#define TXT(field_key, expr) \
    KeySpec { field_key, "", ValueKind::Text, [](Config& c, const std::string& s, double) { expr; } }

const std::vector<KeySpec>& key_table()
{
    static const std::vector<KeySpec> table = {
        NUM("h0", "m", c.params.h0),
        NUM("t_h", "s", c.params.t_h),
        NUM("h_min", "m", c.params.h_min),
        NUM("eps", "m", c.params.eps),
        NUM("v_max", "m/s", c.params.v_max),
        NUM("c", "m/s", c.params.c),
        NUM("a_sat", "m/s^2", c.params.a_sat),
        NUM("a_min", "m/s^2", c.params.a_min),
        NUM("a_com", "m/s^2", c.params.a_com),
        NUM("k1", "1/s", c.params.k1),
        NUM("k2", "1/s", c.params.k2),
        NUM("k_i", "1/s", c.params.k_i),
        NUM("physics.m", "kg", c.physics.m),
        NUM("physics.J", "kg*m^2", c.physics.J),
        NUM("physics.R", "m", c.physics.R),
        NUM("physics.eta", "-", c.physics.eta),
        NUM("physics.mu", "-", c.physics.mu),
        NUM("physics.rho", "kg/m", c.physics.rho),
        NUM("physics.phi", "rad", c.physics.phi),
        NUM("physics.v_w", "m/s", c.physics.v_w),
        NUM("physics.g", "m/s^2", c.physics.g),
        NUM("physics.mu_nominal", "-", c.physics.mu_nominal),
        NUM("physics.rho_nominal", "kg/m", c.physics.rho_nominal),
        NUM("physics.tau", "s", c.physics.tau),
        TXT("scenario.base", c.scenario.base = s),
        TXT("scenario.name", c.scenario.name = s),
        NUM("scenario.h", "m", c.scenario.h),
        NUM("scenario.v_F", "m/s", c.scenario.v_F),
        NUM("scenario.a_F", "m/s^2", c.scenario.a_F),
        NUM("scenario.T", "N*m", c.scenario.T),
        TXT("scenario.lead.kind", c.scenario.lead_kind = s),
        NUM("scenario.lead.v0", "m/s", c.scenario.lead_v0),
        NUM("scenario.lead.decel", "m/s^2", c.scenario.lead_decel),
        NUM("scenario.lead.amp", "m/s", c.scenario.lead_amp),
        NUM("scenario.lead.f", "Hz", c.scenario.lead_f),
        KeySpec{"scenario.lead.table", "", ValueKind::Table, nullptr},
        TXT("scenario.plant", c.scenario.plant = plant::parse_plant_kind(s)),
        TXT("scenario.controller", c.scenario.controller = control::parse_controller_kind(s)),
        TXT("scenario.range_policy", c.scenario.range_policy = control::parse_range_policy(s)),
        TXT("scenario.disturbance.kind", c.scenario.disturbance_kind = plant::parse_disturbance_kind(s)),
        NUM("scenario.disturbance.value", "m/s^2", c.scenario.disturbance_value),
        KeySpec{"scenario.integral", "", ValueKind::Flag, nullptr},
        NUM("scenario.duration", "s", c.scenario.duration),
        NUM("scenario.dt", "s", c.scenario.dt),
    };
    return table;
}

#undef NUM
#undef TXT

// "t:v; t:v; ..."
std::vector<std::pair<double, double>> parse_table(const std::string& text, const std::string& where)
{
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (item.empty()) {
            continue;
        }
        const auto colon = item.find(':');
        double t = 0.0;
        double v = 0.0;
        if (colon == std::string::npos || !parse_double(trim(item.substr(0, colon)), t)
            || !parse_double(trim(item.substr(colon + 1)), v)) {
            throw ConfigError(where + ": lead table entries must be 't:v' separated by ';'");
        }
        out.emplace_back(t, v);
    }
    if (out.empty()) {
        throw ConfigError(where + ": empty lead table");
    }
    return out;
}

std::string number_text(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> config_keys()
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : key_table()) {
        out.emplace_back(k.key, k.unit);
    }
    return out;
}

Config parse_config(std::istream& in, const std::string& source)
{
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& table = key_table();
        const auto it = std::find_if(table.begin(), table.end(), [&](const KeySpec& k) { return key == k.key; });
        if (it == table.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
        if (value.empty()) {
            throw ConfigError(where + ": missing value for '" + key + "'");
        }

        try {
            switch (it->kind) {
            case ValueKind::Number: {
                std::string number = value;
                std::string unit;
                if (const auto sp = value.find_first_of(" \t"); sp != std::string::npos) {
                    number = value.substr(0, sp);
                    unit = trim(value.substr(sp));
                }
                double v = 0.0;
                if (!parse_double(number, v)) {
                    throw ConfigError(where + ": '" + key + "' expects a finite number, got '" + number + "'");
                }
                if (!unit.empty() && unit != it->unit) {
                    throw ConfigError(where + ": '" + key + "' is in " + it->unit + ", not " + unit);
                }
                it->apply(cfg, value, v);
                break;
            }
            case ValueKind::Text:
                it->apply(cfg, value, 0.0);
                break;
            case ValueKind::Flag:
                if (value == "true") {
                    cfg.scenario.integral = true;
                } else if (value == "false") {
                    cfg.scenario.integral = false;
                } else {
                    throw ConfigError(where + ": '" + key + "' expects true or false");
                }
                break;
            case ValueKind::Table:
                cfg.scenario.lead_table = parse_table(value, where);
                break;
            }
        } catch (const ParameterError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }

    try {
        cfg.params.validate();
        cfg.physics.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

Config load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    return parse_config(in, path.string());
}

void write_config(std::ostream& out, const Config& cfg)
{
    const auto& p = cfg.params;
    const auto& ph = cfg.physics;
    const std::vector<std::pair<std::string, double>> values = {
        {"h0", p.h0},
        {"t_h", p.t_h},
        {"h_min", p.h_min},
        {"eps", p.eps},
        {"v_max", p.v_max},
        {"c", p.c},
        {"a_sat", p.a_sat},
        {"a_min", p.a_min},
        {"a_com", p.a_com},
        {"k1", p.k1},
        {"k2", p.k2},
        {"k_i", p.k_i},
        {"physics.m", ph.m},
        {"physics.J", ph.J},
        {"physics.R", ph.R},
        {"physics.eta", ph.eta},
        {"physics.mu", ph.mu},
        {"physics.rho", ph.rho},
        {"physics.phi", ph.phi},
        {"physics.v_w", ph.v_w},
        {"physics.g", ph.g},
        {"physics.mu_nominal", ph.mu_nominal},
        {"physics.rho_nominal", ph.rho_nominal},
        {"physics.tau", ph.tau},
    };
    out << "# car-following controller configuration\n";
    for (const auto& [key, value] : values) {
        const auto& table = key_table();
        const auto it = std::find_if(table.begin(), table.end(), [&](const KeySpec& k) { return key == k.key; });
        out << key << " = " << number_text(value) << ' ' << it->unit << '\n';
    }
}

sim::Scenario resolve_scenario(const Config& cfg, const std::optional<std::string>& base_name)
{
    const auto& o = cfg.scenario;
    sim::Scenario s;
    if (base_name) {
        s = sim::find_scenario(*base_name);
    } else if (o.base) {
        s = sim::find_scenario(*o.base);
    }
    s.params = cfg.params;
    s.physics = cfg.physics;

    if (o.name) s.name = *o.name;
    if (o.h) s.initial.h = *o.h;
    if (o.v_F) s.initial.v_F = *o.v_F;
    if (o.a_F) s.initial.a_F = *o.a_F;
    if (o.T) s.initial.T = *o.T;
    if (o.duration) s.duration = *o.duration;
    if (o.dt) s.dt = *o.dt;
    if (o.plant) s.plant = *o.plant;
    if (o.integral) s.integral_action = *o.integral;
    if (o.disturbance_kind) s.disturbance.kind = *o.disturbance_kind;
    if (o.disturbance_value) s.disturbance.value = *o.disturbance_value;
    if (o.controller) {
        if (*o.controller == control::ControllerKind::Linear) {
            s = sim::as_linear_variant(std::move(s));
        } else {
            s.controller = control::ControllerKind::Nonlinear;
        }
    }
    if (o.range_policy) s.range_policy = *o.range_policy;

    if (o.lead_kind) {
        const auto& k = *o.lead_kind;
        if (k == "constant") {
            s.lead = sim::ConstantSpeed{o.lead_v0.value_or(20.0)};
        } else if (k == "decel") {
            s.lead = sim::DecelToStop{o.lead_v0.value_or(20.0), o.lead_decel.value_or(2.0)};
        } else if (k == "sinusoid") {
            s.lead = sim::Sinusoid{o.lead_v0.value_or(15.0), o.lead_amp.value_or(5.0), o.lead_f.value_or(0.05)};
        } else if (k == "table") {
            if (!o.lead_table) {
                throw ConfigError("scenario.lead.kind = table needs scenario.lead.table");
            }
            s.lead = sim::PiecewiseTable{*o.lead_table};
        } else {
            throw ConfigError("unknown scenario.lead.kind '" + k + "' (expected constant|decel|sinusoid|table)");
        }
    } else {
        bool applied = true;
        if (o.lead_v0) {
            if (auto* c = std::get_if<sim::ConstantSpeed>(&s.lead)) c->v0 = *o.lead_v0;
            else if (auto* d = std::get_if<sim::DecelToStop>(&s.lead)) d->v0 = *o.lead_v0;
            else if (auto* w = std::get_if<sim::Sinusoid>(&s.lead)) w->v0 = *o.lead_v0;
            else applied = false;
        }
        if (o.lead_decel) {
            if (auto* d = std::get_if<sim::DecelToStop>(&s.lead)) d->decel = *o.lead_decel;
            else applied = false;
        }
        if (o.lead_amp || o.lead_f) {
            if (auto* w = std::get_if<sim::Sinusoid>(&s.lead)) {
                if (o.lead_amp) w->amp = *o.lead_amp;
                if (o.lead_f) w->f = *o.lead_f;
            } else {
                applied = false;
            }
        }
        if (o.lead_table) {
            if (auto* t = std::get_if<sim::PiecewiseTable>(&s.lead)) t->samples = *o.lead_table;
            else applied = false;
        }
        if (!applied) {
            throw ConfigError("lead overrides do not match the base scenario's lead profile; set scenario.lead.kind");
        }
    }

    try {
        s.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return s;
}

}  // namespace carfollow::io
