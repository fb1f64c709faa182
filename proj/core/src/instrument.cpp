#include "flowar/instrument.hpp"

#include <algorithm>

namespace flowar::instrument {

namespace {
struct Counters {
    std::uint64_t flops = 0;
    double max_qk_abs = 0.0;
};
thread_local Counters counters;
}  // namespace

void reset() { counters = Counters{}; }

void add_flops(std::uint64_t n) { counters.flops += n; }

std::uint64_t flops() { return counters.flops; }

void note_qk_abs(double v) { counters.max_qk_abs = std::max(counters.max_qk_abs, v); }

double max_qk_abs() { return counters.max_qk_abs; }

}  // namespace flowar::instrument
