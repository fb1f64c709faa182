#pragma once

#include <cstdint>

namespace flowar::instrument {

// Thread-local cost counters. Every core operation reports the number of
// scalar multiplies/divides it performs (a fused multiply-add counts as one;
// pure additions are free). The count is a pure function of operand shapes
// and the polynomial degree, so it is reproducible across runs while wall
// time is not. A pipeline run is confined to one thread, so thread-local
// storage keeps concurrent runs independent.

void reset();

void add_flops(std::uint64_t n);
std::uint64_t flops();

// Largest |entry| seen in any Q/K projection since the last reset; the
// harness uses it to calibrate approximation bounds.
void note_qk_abs(double v);
double max_qk_abs();

}  // namespace flowar::instrument
