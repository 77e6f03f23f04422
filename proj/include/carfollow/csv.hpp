#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "carfollow/analysis.hpp"
#include "carfollow/sim.hpp"

namespace carfollow::io {

inline constexpr const char* kTraceHeader = "t,h,h_des,v_P,v_F,v_des,S,a_des,a_fb,a_fb_bar,a_cf,u,a_F";

/// Nine significant digits, C locale.
[[nodiscard]] std::string format_number(double v);

void write_trace_csv(std::ostream& out, const sim::SimTrace& trace);

/// Columns t_h,k2,k1,plant_stable,string_stable,k2_star.
void write_sweep_csv(std::ostream& out, std::span<const analysis::StabilityCell> cells);

struct FrequencyRow {
    double omega = 0.0;
    double m1 = 0.0;
    double m = 0.0;
    std::optional<double> oracle_ratio;
};

/// Columns omega,M1_tilde,M[,oracle_ratio].
void write_frequency_csv(std::ostream& out, std::span<const FrequencyRow> rows, bool with_oracle);

}  // namespace carfollow::io
