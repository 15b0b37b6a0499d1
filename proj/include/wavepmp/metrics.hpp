#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace wavepmp {

/// Line-delimited metrics stream. First line carries the schema version,
/// second the field names; rows are comma separated with 17-digit doubles.
/// Wall-clock time is deliberately not serialized so identical runs produce
/// identical files.
inline constexpr const char* kMetricsSchema = "wavepmp.metrics.v1";

inline std::string metrics_header() {
    return std::string("# schema: ") + kMetricsSchema +
           "\nstep,loss,r_x_max,r_lambda_max,r_theta_max,energy,input_margin,"
           "terminal_margin,reflection_sq\n";
}

inline std::string format_metrics_row(const MetricsRow& r) {
    char buf[400];
    std::snprintf(buf, sizeof(buf),
                  "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step,
                  r.loss, r.r_x_max, r.r_lambda_max, r.r_theta_max, r.energy,
                  r.input_margin, r.terminal_margin, r.reflection_sq);
    return buf;
}

inline void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open metrics file: " + path);
    out << metrics_header();
    for (const auto& r : rows) out << format_metrics_row(r);
}

}  // namespace wavepmp
