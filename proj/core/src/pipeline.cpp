#include "flowar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "flowar/errors.hpp"
#include "flowar/instrument.hpp"

namespace flowar {

void ModelConfig::validate() const {
    if (channels < 1) throw ParameterError("config: channels must be >= 1");
    if (weight_bound <= 0.0) throw ParameterError("config: weight bound must be positive");
    if (!timesteps.empty() && static_cast<int>(timesteps.size()) != schedule.K) {
        throw ParameterError("config: expected " + std::to_string(schedule.K) + " timesteps, got " +
                             std::to_string(timesteps.size()));
    }
    for (double t : timesteps) {
        if (t < 0.0 || t > 1.0) {
            throw ParameterError("config: timestep " + std::to_string(t) + " outside [0, 1]");
        }
    }
    if (fast && qk_bound <= 0.0 && !degree_override) {
        throw ParameterError("config: fast mode needs a positive qk_bound (or a pinned degree)");
    }
    if (degree_cap < 0) throw ParameterError("config: degree cap must be >= 0");
}

double ModelConfig::timestep(int i) const {
    return timesteps.empty() ? 0.5 : timesteps[i - 1];
}

double ModelConfig::effective_delta() const {
    if (delta > 0.0) return delta;
    const double n_tokens = static_cast<double>(schedule.h) * schedule.w;
    return 1.0 / (n_tokens * n_tokens);
}

ModelWeights build_weights(const ModelConfig& cfg) {
    cfg.validate();
    SeededRng rng(derive_seed(cfg.seed, /*tag=*/0x57u));
    ModelWeights w;
    w.scales.reserve(cfg.schedule.K);
    const int c = cfg.channels;
    const double bound = cfg.weight_bound;
    for (int i = 0; i < cfg.schedule.K; ++i) {
        ScaleWeights sw{AttentionWeights::random(c, bound, rng),
                        FfnWeights::random(c, bound, rng),
                        FlowMatchWeights::random(c, bound, rng)};
        w.scales.push_back(std::move(sw));
    }
    return w;
}

Tensor3 make_z_init(const ModelConfig& cfg, int class_id) {
    if (class_id < 0) throw ParameterError("class id must be >= 0");
    SeededRng rng(derive_seed(cfg.seed, /*tag=*/0x5Au, static_cast<std::uint64_t>(class_id)));
    auto [h1, w1] = cfg.schedule.sizes.front();
    Tensor3 z(h1, w1, cfg.channels);
    for (double& x : z.data) {
        x = std::clamp(rng.gaussian(), -cfg.weight_bound, cfg.weight_bound);
    }
    return z;
}

Tensor3 noise_for_scale(const ModelConfig& cfg, int i) {
    SeededRng rng(derive_seed(cfg.seed, /*tag=*/0x4Eu, static_cast<std::uint64_t>(i)));
    auto [hi, wi] = cfg.schedule.sizes[i - 1];
    Tensor3 f0(hi, wi, cfg.channels);
    for (double& x : f0.data) x = rng.gaussian();
    return f0;
}

Matrix aggregate_context(const Tensor3& z_init, const std::vector<Tensor3>& prior_outputs,
                         const ScaleSchedule& schedule, int i) {
    if (i < 1 || i > schedule.K) throw ParameterError("context: scale index out of range");
    if (static_cast<int>(prior_outputs.size()) < i - 1) {
        throw DimensionError("context: need " + std::to_string(i - 1) + " prior outputs, have " +
                             std::to_string(prior_outputs.size()));
    }
    auto [h1, w1] = schedule.sizes.front();
    if (z_init.h != h1 || z_init.w != w1) {
        throw DimensionError("context: z_init shape does not match the coarsest scale");
    }

    Matrix ctx(schedule.context_tokens(i), z_init.c);
    std::size_t row = 0;
    auto append = [&](const Matrix& block) {
        std::copy(block.data.begin(), block.data.end(),
                  ctx.data.begin() + row * static_cast<std::size_t>(ctx.cols));
        row += block.rows;
    };

    append(flatten(z_init));
    for (int j = 1; j < i; ++j) {
        const Tensor3& prev = prior_outputs[j - 1];
        auto [hj, wj] = schedule.sizes[j - 1];
        if (prev.h != hj || prev.w != wj || prev.c != z_init.c) {
            throw DimensionError("context: output " + std::to_string(j) + " has wrong shape");
        }
        append(flatten(bicubic_upsample(prev, schedule.a)));
    }
    return ctx;
}

Tensor3 extract_scale_output(const Matrix& m, const ScaleSchedule& schedule, int i) {
    if (i < 1 || i > schedule.K) throw ParameterError("extract: scale index out of range");
    if (m.rows != schedule.context_tokens(i)) {
        throw DimensionError("extract: matrix has " + std::to_string(m.rows) +
                             " rows, expected " + std::to_string(schedule.context_tokens(i)));
    }
    auto [hi, wi] = schedule.sizes[i - 1];
    const int tail = hi * wi;
    Matrix block(tail, m.cols);
    std::copy(m.data.end() - static_cast<std::size_t>(tail) * m.cols, m.data.end(),
              block.data.begin());
    return unflatten(block, hi, wi);
}

InferResult flowar_infer(const ModelConfig& cfg, const ModelWeights& weights, int class_id) {
    cfg.validate();
    if (static_cast<int>(weights.scales.size()) != cfg.schedule.K) {
        throw DimensionError("infer: weights cover " + std::to_string(weights.scales.size()) +
                             " scales, config has " + std::to_string(cfg.schedule.K));
    }

    AttnMode mode;
    if (cfg.fast) {
        mode.fast = true;
        if (cfg.degree_override) {
            mode.poly.g = *cfg.degree_override;
            mode.poly.k = MonomialBasis::build(cfg.channels, mode.poly.g).k();
            mode.poly.delta = cfg.effective_delta();
            mode.poly.d = cfg.channels;
            mode.poly.R = cfg.qk_bound > 0.0 ? cfg.qk_bound
                                             : std::numeric_limits<double>::infinity();
        } else {
            mode.poly =
                choose_degree(cfg.qk_bound, cfg.channels, cfg.effective_delta(), cfg.degree_cap);
        }
    }

    const std::uint64_t flops_before = instrument::flops();

    const Tensor3 z_init = make_z_init(cfg, class_id);
    std::vector<Tensor3> emitted;
    emitted.reserve(cfg.schedule.K);

    for (int i = 1; i <= cfg.schedule.K; ++i) {
        try {
            const Matrix ctx = aggregate_context(z_init, emitted, cfg.schedule, i);
            const Tensor3 ctx_t = unflatten(ctx, ctx.rows, 1);

            const ScaleWeights& sw = weights.scales[i - 1];
            Tensor3 mixed = mode.fast ? aattc(ctx_t, sw.ar_attn, mode.poly)
                                      : attention(ctx_t, sw.ar_attn);
            const Tensor3 y_hat =
                extract_scale_output(flatten(ffn(mixed, sw.ar_ffn)), cfg.schedule, i);

            const double t_i = cfg.timestep(i);
            const FlowState state = FlowState::make(noise_for_scale(cfg, i), y_hat, t_i);
            const Tensor3 f_t = cfg.interpolant == Interpolant::bezier ? interpolate_bezier(state)
                                                                       : interpolate_linear(state);

            Tensor3 emission = flow_matching_layer(y_hat, f_t, t_i, sw.fm, mode);
            if (cfg.euler_update) {
                Tensor3 stepped(emission.h, emission.w, emission.c);
                for (std::size_t p = 0; p < stepped.data.size(); ++p) {
                    stepped.data[p] = f_t.data[p] + (1.0 - t_i) * emission.data[p];
                }
                instrument::add_flops(stepped.size());
                emission = std::move(stepped);
            }

            auto [hi, wi] = cfg.schedule.sizes[i - 1];
            if (emission.h != hi || emission.w != wi || emission.c != cfg.channels) {
                throw DimensionError("infer: scale " + std::to_string(i) +
                                     " emission has the wrong shape");
            }
            ensure_finite(emission, "scale emission");
            emitted.push_back(std::move(emission));
        } catch (const ExpOverflowError& e) {
            throw ExpOverflowError(e.score(), "scale " + std::to_string(i));
        }
    }

    InferResult res;
    res.output = emitted.back();
    res.per_scale = std::move(emitted);
    res.stats.flops = instrument::flops() - flops_before;
    res.stats.max_qk_abs = instrument::max_qk_abs();
    if (cfg.fast) {
        res.stats.degree = mode.poly.g;
        res.stats.feature_dim = mode.poly.k;
    }
    return res;
}

}  // namespace flowar
