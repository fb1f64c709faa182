#pragma once

#include "flowar/fast_attention.hpp"
#include "flowar/layers.hpp"
#include "flowar/tensor.hpp"

namespace flowar {

// One scale's interpolation state: noise endpoint, target endpoint, timestep,
// and the Bezier control point (defaults to the chord midpoint, which makes
// the quadratic path coincide with the linear one).
struct FlowState {
    Tensor3 noise;    // F^0
    Tensor3 target;   // Y-hat
    double t = 0.0;
    Tensor3 control;  // C

    static FlowState make(Tensor3 noise, Tensor3 target, double t);
    static FlowState with_control(Tensor3 noise, Tensor3 target, double t, Tensor3 control);
};

// t*target + (1-t)*noise.
Tensor3 interpolate_linear(const FlowState& s);

// d/dt of the linear path: target - noise, independent of t.
Tensor3 velocity_linear(const FlowState& s);

// (1-t)^2*noise + 2t(1-t)*control + t^2*target.
Tensor3 interpolate_bezier(const FlowState& s);

// -2(1-t)*noise + 2(1-2t)*control + 2t*target; equals target - noise for the
// midpoint control.
Tensor3 velocity_bezier(const FlowState& s);

// The six per-token, per-channel modulation tensors produced by splitting a
// 6c-channel map, in this order.
struct FlowMatchParams {
    Tensor3 alpha1, alpha2, beta1, beta2, gamma1, gamma2;

    static FlowMatchParams split(const Tensor3& packed);  // packed.c must be 6*c
};

struct FlowMatchWeights {
    MlpWeights param;      // c -> 6c, produces the modulation tensors
    AttentionWeights attn;
    MlpWeights proj;       // c -> c

    static FlowMatchWeights random(int c, double bound, SeededRng& rng);
};

struct AttnMode {
    bool fast = false;
    PolyApproxConfig poly{};  // used when fast
};

// Time-conditioned velocity block:
//   (a1, a2, b1, b2, g1, g2) = param_mlp(target + t)
//   f' = attn(g1 o layernorm(ft) + b1) o a1
//   out = proj_mlp(g2 o layernorm(f') + b2) o a2
// With mode.fast the attention call is aattc under mode.poly.
Tensor3 flow_matching_layer(const Tensor3& target, const Tensor3& ft, double t,
                            const FlowMatchWeights& w, const AttnMode& mode = {});

}  // namespace flowar
