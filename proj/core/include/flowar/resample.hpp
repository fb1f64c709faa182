#pragma once

#include <utility>
#include <vector>

#include "flowar/tensor.hpp"

namespace flowar {

// Keys cubic convolution kernel evaluated at fractional offsets. The default
// sharpness -0.5 is Catmull-Rom: interpolating (identity at integer offsets)
// and a partition of unity, i.e. sum_{s in {-1,0,1,2}} W(d - s) = 1 for every
// d in [0,1). Note the kernel has negative lobes, so its range is not [0,1].
class BicubicKernel {
public:
    explicit BicubicKernel(double sharpness = -0.5) : a_(sharpness) {}

    double operator()(double x) const;
    double sharpness() const { return a_; }

    // max over d of sum_s |W(d - s)|; for sharpness A <= 0 this is 1 - A/2
    // (attained at d = 0.5). Squared, it bounds the 2-d output magnification.
    double axis_amplification() const { return a_ <= 0.0 ? 1.0 - 0.5 * a_ : 1.0; }
    double amplification_2d() const { return axis_amplification() * axis_amplification(); }

private:
    double a_;
};

// (h, w, c) -> (r*h, r*w, c). Output pixel (i, j) interpolates the 4x4
// neighborhood of source pixel (floor(i/r), floor(j/r)) with per-axis weights
// W(d - s), d the fractional source offset; source indices are clamped to the
// edge, which preserves the partition of unity at borders.
Tensor3 bicubic_upsample(const Tensor3& x, int r, const BicubicKernel& kernel = BicubicKernel());

// (h, w, c) -> (h/r, w/r, c); each output pixel is the mean of its r x r
// block, i.e. the flattened input multiplied by the row-stochastic
// block-average operator. r must divide h and w.
Tensor3 linear_downsample(const Tensor3& x, int r);

// The explicit (h/r * w/r) x (h*w) block-average operator realized by
// linear_downsample. Dense; intended for small shapes and verification.
Matrix downsample_operator(int h, int w, int r);

// Coarse-to-fine factor ladder: r_i = a^(K-i) for i in [1, K], so r_K = 1 and
// scale i has spatial size (h/r_i, w/r_i).
struct ScaleSchedule {
    int K = 0;
    int a = 0;
    int h = 0;  // finest (full) spatial size
    int w = 0;
    std::vector<int> factors;                 // r_1 .. r_K
    std::vector<std::pair<int, int>> sizes;   // (h/r_i, w/r_i)

    // Validates a >= 2, K >= 1 and divisibility of h, w by a^(K-1).
    static ScaleSchedule create(int K, int a, int h, int w);

    int tokens_at(int i) const;    // (h/r_i) * (w/r_i), i is 1-based
    int context_tokens(int i) const;  // sum_{j<=i} tokens_at(j)
};

// Token pyramid: i-th map is linear_downsample(x, r_i); the last map is x.
std::vector<Tensor3> tokenize_multiscale(const Tensor3& x, const ScaleSchedule& schedule);

}  // namespace flowar
