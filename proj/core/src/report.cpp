#include "flowar/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <tuple>

#include "flowar/errors.hpp"

namespace flowar {

namespace {

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string format_optional_int(long long v) {
    return v < 0 ? std::string() : std::to_string(v);
}

}  // namespace

void RunReport::sort_canonical() {
    std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::tie(a.experiment, a.mode, a.n, a.trial) <
               std::tie(b.experiment, b.mode, b.n, b.trial);
    });
}

std::string format_record(const RunRecord& r) {
    std::string line;
    line.reserve(128);
    line += r.experiment;
    line += ',';
    line += r.mode;
    line += ',';
    line += std::to_string(r.n);
    line += ',';
    line += std::to_string(r.c);
    line += ',';
    line += std::to_string(r.K);
    line += ',';
    line += std::to_string(r.a);
    line += ',';
    line += format_optional_int(r.g);
    line += ',';
    line += format_optional_int(r.k);
    line += ',';
    line += format_double(r.delta);
    line += ',';
    line += std::to_string(r.seed);
    line += ',';
    line += std::to_string(r.trial);
    line += ',';
    line += format_double(r.wall_time_ms);
    line += ',';
    line += format_optional_int(r.flop_count);
    line += ',';
    line += format_double(r.error_inf);
    line += ',';
    line += format_double(r.slope_fit);
    return line;
}

void emit_report(const RunReport& report, const std::string& path) {
    RunReport sorted = report;
    sorted.sort_canonical();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out << kReportHeader << '\n';
    for (const RunRecord& r : sorted.records) {
        out << format_record(r) << '\n';
    }
    out.flush();
    if (!out) throw IoError(path, "write failed");
}

}  // namespace flowar
