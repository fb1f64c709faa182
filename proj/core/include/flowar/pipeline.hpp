#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flowar/flow.hpp"
#include "flowar/layers.hpp"
#include "flowar/resample.hpp"
#include "flowar/tensor.hpp"

namespace flowar {

enum class Interpolant { linear, bezier };

struct ModelConfig {
    ScaleSchedule schedule;
    int channels = 4;
    double weight_bound = 0.1;  // R for weight/init sampling
    std::uint64_t seed = 0;
    std::vector<double> timesteps;  // length K; empty -> 0.5 everywhere

    bool fast = false;
    double delta = 0.0;     // fast tolerance; 0 -> 1 / n_tokens^2
    double qk_bound = 0.0;  // admissible |Q/K entry| for fast mode; must be > 0 when fast
    int degree_cap = 16;
    std::optional<int> degree_override;  // pin g instead of deriving it from delta

    Interpolant interpolant = Interpolant::linear;
    bool euler_update = false;  // emit f^t + (1-t)*velocity instead of the raw block output

    void validate() const;
    double timestep(int i) const;  // 1-based scale index
    double effective_delta() const;
};

struct ScaleWeights {
    AttentionWeights ar_attn;
    FfnWeights ar_ffn;
    FlowMatchWeights fm;
};

struct ModelWeights {
    std::vector<ScaleWeights> scales;
};

// All layer weights for every scale, entries i.i.d. uniform in
// [-weight_bound, weight_bound]. Pure function of (seed, shapes): identical
// configs reproduce identical weights bit for bit.
ModelWeights build_weights(const ModelConfig& cfg);

// Class-conditional initial token map of shape (h/r_1, w/r_1, c): seeded
// Gaussians clamped into [-weight_bound, weight_bound], keyed by
// (seed, class_id).
Tensor3 make_z_init(const ModelConfig& cfg, int class_id);

// Standard-normal noise tensor for scale i, keyed by (seed, i) so scales are
// independent but reproducible.
Tensor3 noise_for_scale(const ModelConfig& cfg, int i);

// Token context for scale i (1-based): rows of z_init, then rows of each
// prior output upsampled by the base factor, in scale order. Row count is
// sum_{j<=i} (h/r_j)*(w/r_j).
Matrix aggregate_context(const Tensor3& z_init, const std::vector<Tensor3>& prior_outputs,
                         const ScaleSchedule& schedule, int i);

// The final (h/r_i)*(w/r_i) rows of the context-shaped matrix, reshaped to
// scale i's token map.
Tensor3 extract_scale_output(const Matrix& m, const ScaleSchedule& schedule, int i);

struct InferStats {
    std::uint64_t flops = 0;
    double max_qk_abs = 0.0;
    int degree = -1;          // fast mode only
    long long feature_dim = -1;
};

struct InferResult {
    Tensor3 output;                  // finest-scale emission, shape (h, w, c)
    std::vector<Tensor3> per_scale;  // emission at every scale
    InferStats stats;
};

// Scale-recursive generation: per scale, run the transformer block over the
// aggregated context, take the last scale's tokens, evaluate the
// flow-matching block once at that scale's timestep, and append the result
// (upsampled) to the context for the next scale. With cfg.fast all attention
// runs through the polynomial approximation.
InferResult flowar_infer(const ModelConfig& cfg, const ModelWeights& weights, int class_id);

}  // namespace flowar
