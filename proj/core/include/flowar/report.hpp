#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace flowar {

// One measurement row. Optional numeric fields use NaN / -1 sentinels and are
// written as empty CSV cells.
struct RunRecord {
    std::string experiment;  // bench | mode-error | perturb | infer
    std::string mode;        // exact | fast | a layer kind for perturb rows
    int n = 0;               // image side (h = w = n)
    int c = 0;
    int K = 0;
    int a = 0;
    int g = -1;
    long long k = -1;
    double delta = std::nan("");
    std::uint64_t seed = 0;
    int trial = 0;
    double wall_time_ms = std::nan("");
    long long flop_count = -1;
    double error_inf = std::nan("");
    double slope_fit = std::nan("");
};

struct RunReport {
    std::vector<RunRecord> records;

    // Deterministic emission order: (experiment, mode, n, trial), stable.
    void sort_canonical();
};

inline constexpr const char* kReportHeader =
    "experiment,mode,n,c,K,a,g,k,delta,seed,trial,wall_time_ms,flop_count,error_inf,slope_fit";

std::string format_record(const RunRecord& r);

// Writes header plus one line per record (canonical order, shortest
// round-trip number formatting), so equal reports produce identical bytes.
void emit_report(const RunReport& report, const std::string& path);

}  // namespace flowar
