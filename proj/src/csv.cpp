#include "carfollow/csv.hpp"

#include <cstdio>
#include <ostream>

namespace carfollow::io {

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_trace_csv(std::ostream& out, const sim::SimTrace& trace)
{
    out << kTraceHeader << '\n';
    for (const auto& r : trace.rows) {
        const double values[] = {r.t,     r.h,    r.h_des,    r.v_P,  r.v_F, r.v_des, r.S,
                                 r.a_des, r.a_fb, r.a_fb_bar, r.a_cf, r.u,   r.a_F};
        bool first = true;
        for (double v : values) {
            if (!first) {
                out << ',';
            }
            first = false;
            out << format_number(v);
        }
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, std::span<const analysis::StabilityCell> cells)
{
    out << "t_h,k2,k1,plant_stable,string_stable,k2_star\n";
    for (const auto& c : cells) {
        out << format_number(c.t_h) << ',' << format_number(c.k2) << ',' << format_number(c.k1) << ','
            << (c.plant_stable ? 1 : 0) << ',' << (c.string_stable ? 1 : 0) << ',' << format_number(1.0 / c.t_h)
            << '\n';
    }
}

void write_frequency_csv(std::ostream& out, std::span<const FrequencyRow> rows, bool with_oracle)
{
    out << "omega,M1_tilde,M";
    if (with_oracle) {
        out << ",oracle_ratio";
    }
    out << '\n';
    for (const auto& r : rows) {
        out << format_number(r.omega) << ',' << format_number(r.m1) << ',' << format_number(r.m);
        if (with_oracle) {
            out << ',';
            if (r.oracle_ratio) {
                out << format_number(*r.oracle_ratio);
            }
        }
        out << '\n';
    }
}

}  // namespace carfollow::io
