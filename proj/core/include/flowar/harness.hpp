#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowar/pipeline.hpp"
#include "flowar/report.hpp"

namespace flowar {

struct HarnessConfig {
    std::vector<int> sizes{16, 32, 64};  // image sides; h = w = n
    int scales = 3;
    int base = 2;
    int trials = 5;
    std::uint64_t seed = 42;
    double delta = 1e-8;
    int degree_cap = 16;
    bool run_exact = true;
    bool run_fast = true;
    int channels = 0;          // 0 -> experiment-specific default
    double weight_bound = 0.1;
    Interpolant interpolant = Interpolant::linear;
    bool euler_update = false;
    int class_id = 0;

    double epsilon = 1e-3;     // perturbation magnitude
    double perturb_entry_bound = 2.0;  // R for the exact-constant amplification checks
    double error_budget = 1e-4;        // end-to-end mode-agreement budget

    std::string out;  // CSV path; empty -> no file
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct HarnessResult {
    RunReport report;
    std::vector<Check> checks;
    std::vector<std::string> notes;  // reported-only measurements

    bool ok() const {
        for (const Check& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Runs both pipelines over hc.sizes with a channel width held fixed across
// the sweep, records per-trial wall times and the (deterministic) multiply-add
// counts, and fits log-log slopes on the counts. Asserts the exact slope in
// [3.6, 4.2], the fast slope in [1.8, 2.6], and that fast wall time beats
// exact at the largest size. Wall-time slopes are reported as notes only.
HarnessResult bench_runtime(const HarnessConfig& hc);

// Runs exact vs fast on identical seeds per size, calibrating the Q/K bound
// from the exact run, and sweeps the polynomial degree g, g+1, g+2. Asserts
// the final-output gap is within hc.error_budget and does not grow with g.
HarnessResult measure_mode_error(const HarnessConfig& hc);

// Injects +-epsilon perturbations into each layer kind and measures the
// amplification ratio. Exact-constant bounds (mlp: c*R, ffn: 1 + c^2 R^2,
// upsample: the kernel constant, interpolant: 1) are asserted; attention and
// flow-matching ratios are checked against their generous polynomial budgets
// and reported; layer-norm amplification is reported only.
HarnessResult measure_perturbation_bounds(const HarnessConfig& hc);

// One generation run (exact or fast per hc); the record carries output stats.
HarnessResult run_single_infer(const HarnessConfig& hc);

}  // namespace flowar
