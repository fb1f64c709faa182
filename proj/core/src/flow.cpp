#include "flowar/flow.hpp"

#include <string>
#include <utility>

#include "flowar/errors.hpp"
#include "flowar/instrument.hpp"

namespace flowar {

namespace {

void validate_state(const Tensor3& noise, const Tensor3& target, double t,
                    const Tensor3& control) {
    if (!noise.same_shape(target) || !noise.same_shape(control)) {
        throw DimensionError("flow state: endpoint/control shapes differ");
    }
    if (t < 0.0 || t > 1.0) {
        throw ParameterError("flow state: t = " + std::to_string(t) + " outside [0, 1]");
    }
}

Tensor3 midpoint(const Tensor3& a, const Tensor3& b) {
    Tensor3 out(a.h, a.w, a.c);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = 0.5 * (a.data[i] + b.data[i]);
    return out;
}

}  // namespace

FlowState FlowState::make(Tensor3 noise, Tensor3 target, double t) {
    Tensor3 control = midpoint(noise, target);
    validate_state(noise, target, t, control);
    return {std::move(noise), std::move(target), t, std::move(control)};
}

FlowState FlowState::with_control(Tensor3 noise, Tensor3 target, double t, Tensor3 control) {
    validate_state(noise, target, t, control);
    return {std::move(noise), std::move(target), t, std::move(control)};
}

Tensor3 interpolate_linear(const FlowState& s) {
    Tensor3 out(s.noise.h, s.noise.w, s.noise.c);
    const double t = s.t;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = t * s.target.data[i] + (1.0 - t) * s.noise.data[i];
    }
    instrument::add_flops(2 * out.size());
    return out;
}

Tensor3 velocity_linear(const FlowState& s) {
    Tensor3 out(s.noise.h, s.noise.w, s.noise.c);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = s.target.data[i] - s.noise.data[i];
    }
    return out;
}

Tensor3 interpolate_bezier(const FlowState& s) {
    Tensor3 out(s.noise.h, s.noise.w, s.noise.c);
    const double t = s.t;
    const double w0 = (1.0 - t) * (1.0 - t);
    const double w1 = 2.0 * t * (1.0 - t);
    const double w2 = t * t;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = w0 * s.noise.data[i] + w1 * s.control.data[i] + w2 * s.target.data[i];
    }
    instrument::add_flops(3 * out.size());
    return out;
}

Tensor3 velocity_bezier(const FlowState& s) {
    Tensor3 out(s.noise.h, s.noise.w, s.noise.c);
    const double t = s.t;
    const double w0 = -2.0 * (1.0 - t);
    const double w1 = 2.0 * (1.0 - 2.0 * t);
    const double w2 = 2.0 * t;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = w0 * s.noise.data[i] + w1 * s.control.data[i] + w2 * s.target.data[i];
    }
    instrument::add_flops(3 * out.size());
    return out;
}

FlowMatchParams FlowMatchParams::split(const Tensor3& packed) {
    if (packed.c % 6 != 0) {
        throw DimensionError("flow params: channel count " + std::to_string(packed.c) +
                             " is not a multiple of 6");
    }
    const int c = packed.c / 6;
    return {channel_slice(packed, 0, c),     channel_slice(packed, c, c),
            channel_slice(packed, 2 * c, c), channel_slice(packed, 3 * c, c),
            channel_slice(packed, 4 * c, c), channel_slice(packed, 5 * c, c)};
}

FlowMatchWeights FlowMatchWeights::random(int c, double bound, SeededRng& rng) {
    return {MlpWeights::random(c, 6 * c, bound, rng), AttentionWeights::random(c, bound, rng),
            MlpWeights::random(c, c, bound, rng)};
}

Tensor3 flow_matching_layer(const Tensor3& target, const Tensor3& ft, double t,
                            const FlowMatchWeights& w, const AttnMode& mode) {
    if (!target.same_shape(ft)) {
        throw DimensionError("flow_matching_layer: target/interpolant shapes differ");
    }
    if (t < 0.0 || t > 1.0) {
        throw ParameterError("flow_matching_layer: t = " + std::to_string(t) + " outside [0, 1]");
    }

    const FlowMatchParams p = FlowMatchParams::split(mlp(add_scalar(target, t), w.param));

    Tensor3 gated = add(hadamard(p.gamma1, layernorm(ft)), p.beta1);
    Tensor3 mixed = mode.fast ? aattc(gated, w.attn, mode.poly) : attention(gated, w.attn);
    Tensor3 intermediate = hadamard(mixed, p.alpha1);

    Tensor3 projected = mlp(add(hadamard(p.gamma2, layernorm(intermediate)), p.beta2), w.proj);
    return hadamard(projected, p.alpha2);
}

}  // namespace flowar
