#pragma once

#include <vector>

#include "flowar/rng.hpp"
#include "flowar/tensor.hpp"

namespace flowar {

// Scores above this overflow exp() in double precision.
inline constexpr double kExpOverflowThreshold = 709.0;

struct AttentionWeights {
    Matrix wq, wk, wv;  // each c x c

    // entries clamped into [-bound, bound]
    static AttentionWeights bounded(Matrix wq, Matrix wk, Matrix wv, double bound);
    static AttentionWeights random(int c, double bound, SeededRng& rng);
};

struct MlpWeights {
    Matrix w;               // c x d
    std::vector<double> b;  // length d

    static MlpWeights bounded(Matrix w, std::vector<double> b, double bound);
    static MlpWeights random(int c, int d, double bound, SeededRng& rng);
};

struct FfnWeights {
    Matrix w1;               // c x c
    std::vector<double> b1;  // length c
    Matrix w2;               // c x c
    std::vector<double> b2;  // length c

    static FfnWeights bounded(Matrix w1, std::vector<double> b1, Matrix w2,
                              std::vector<double> b2, double bound);
    static FfnWeights random(int c, double bound, SeededRng& rng);
};

// Unmasked, unscaled pairwise-exponential attention over the h*w tokens:
// A_ij = exp(x_i Wq Wk^T x_j^T), output row i = (sum_j A_ij x_j Wv) / sum_j A_ij.
// There is no softmax temperature, no sqrt(c) scaling, and no positional
// term, so the map is equivariant under token permutations. Row sums are
// accumulated left to right, so results are bit-reproducible.
// Throws ExpOverflowError if any score exceeds kExpOverflowThreshold.
Tensor3 attention(const Tensor3& x, const AttentionWeights& w);

// The full normalized score matrix D^-1 A (n x n). Materializes the matrix,
// so intended for small inputs and verification; attention() itself streams.
Matrix attention_matrix(const Tensor3& x, const AttentionWeights& w);

// Per-token affine map: y_j = x_j W + b; (h, w, c) -> (h, w, d).
Tensor3 mlp(const Tensor3& x, const MlpWeights& w);

// Residual block y_j = x_j + relu(x_j W1 + b1) W2 + b2; shape-preserving.
Tensor3 ffn(const Tensor3& x, const FfnWeights& w);

// Per-token standardization (x - mean)/sqrt(var + eps) over channels.
// The eps term handles constant rows (bare variance would divide by zero);
// with c = 1 every row is constant and the output is all zeros.
Tensor3 layernorm(const Tensor3& x, double eps = 1e-12);

// ffn(attention(z)), the per-scale transformer block.
Tensor3 transformer_block(const Tensor3& z, const AttentionWeights& wa, const FfnWeights& wf);

// Weight-entry bound R giving Theta(sqrt(log n)) growth in the token count.
double default_weight_bound(int n_tokens);

}  // namespace flowar
