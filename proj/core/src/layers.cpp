#include "flowar/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowar/errors.hpp"
#include "flowar/instrument.hpp"

namespace flowar {

namespace {

void clamp_entries(Matrix& m, double bound) {
    for (double& x : m.data) x = std::clamp(x, -bound, bound);
}

void clamp_entries(std::vector<double>& v, double bound) {
    for (double& x : v) x = std::clamp(x, -bound, bound);
}

Matrix random_matrix(int rows, int cols, double bound, SeededRng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.data) x = rng.uniform(-bound, bound);
    return m;
}

std::vector<double> random_vector(int n, double bound, SeededRng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-bound, bound);
    return v;
}

void require_square_c(const Matrix& m, int c, const char* name) {
    if (m.rows != c || m.cols != c) {
        throw DimensionError(std::string(name) + " must be " + std::to_string(c) + "x" +
                             std::to_string(c) + ", got " + std::to_string(m.rows) + "x" +
                             std::to_string(m.cols));
    }
}

}  // namespace

AttentionWeights AttentionWeights::bounded(Matrix wq, Matrix wk, Matrix wv, double bound) {
    clamp_entries(wq, bound);
    clamp_entries(wk, bound);
    clamp_entries(wv, bound);
    return {std::move(wq), std::move(wk), std::move(wv)};
}

AttentionWeights AttentionWeights::random(int c, double bound, SeededRng& rng) {
    return {random_matrix(c, c, bound, rng), random_matrix(c, c, bound, rng),
            random_matrix(c, c, bound, rng)};
}

MlpWeights MlpWeights::bounded(Matrix w, std::vector<double> b, double bound) {
    clamp_entries(w, bound);
    clamp_entries(b, bound);
    return {std::move(w), std::move(b)};
}

MlpWeights MlpWeights::random(int c, int d, double bound, SeededRng& rng) {
    return {random_matrix(c, d, bound, rng), random_vector(d, bound, rng)};
}

FfnWeights FfnWeights::bounded(Matrix w1, std::vector<double> b1, Matrix w2,
                               std::vector<double> b2, double bound) {
    clamp_entries(w1, bound);
    clamp_entries(b1, bound);
    clamp_entries(w2, bound);
    clamp_entries(b2, bound);
    return {std::move(w1), std::move(b1), std::move(w2), std::move(b2)};
}

FfnWeights FfnWeights::random(int c, double bound, SeededRng& rng) {
    return {random_matrix(c, c, bound, rng), random_vector(c, bound, rng),
            random_matrix(c, c, bound, rng), random_vector(c, bound, rng)};
}

Tensor3 attention(const Tensor3& x, const AttentionWeights& w) {
    require_square_c(w.wq, x.c, "Wq");
    require_square_c(w.wk, x.c, "Wk");
    require_square_c(w.wv, x.c, "Wv");

    const Matrix xm = flatten(x);
    const Matrix q = matmul(xm, w.wq);
    const Matrix k = matmul(xm, w.wk);
    const Matrix v = matmul(xm, w.wv);
    instrument::note_qk_abs(std::max(max_abs(q), max_abs(k)));

    const int n = xm.rows;
    const int c = xm.cols;
    Matrix out(n, c);
    // One score row at a time; never holds the n x n matrix.
    std::vector<double> row(n);
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int l = 0; l < c; ++l) s += q.at(i, l) * k.at(j, l);
            if (s > kExpOverflowThreshold) {
                throw ExpOverflowError(s, "attention");
            }
            row[j] = std::exp(s);
            row_sum += row[j];
        }
        const double inv = 1.0 / row_sum;
        for (int j = 0; j < n; ++j) {
            const double a = row[j];
            for (int l = 0; l < c; ++l) out.at(i, l) += a * v.at(j, l);
        }
        for (int l = 0; l < c; ++l) out.at(i, l) *= inv;
    }
    instrument::add_flops(2ULL * n * n * c + static_cast<std::uint64_t>(n) * c + n);
    return unflatten(out, x.h, x.w);
}

Matrix attention_matrix(const Tensor3& x, const AttentionWeights& w) {
    const Matrix xm = flatten(x);
    const Matrix q = matmul(xm, w.wq);
    const Matrix k = matmul(xm, w.wk);
    const int n = xm.rows;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int l = 0; l < xm.cols; ++l) s += q.at(i, l) * k.at(j, l);
            if (s > kExpOverflowThreshold) throw ExpOverflowError(s, "attention_matrix");
            a.at(i, j) = std::exp(s);
            row_sum += a.at(i, j);
        }
        for (int j = 0; j < n; ++j) a.at(i, j) /= row_sum;
    }
    return a;
}

Tensor3 mlp(const Tensor3& x, const MlpWeights& w) {
    if (w.w.rows != x.c) {
        throw DimensionError("mlp: weight rows " + std::to_string(w.w.rows) + " != channels " +
                             std::to_string(x.c));
    }
    if (static_cast<int>(w.b.size()) != w.w.cols) {
        throw DimensionError("mlp: bias length " + std::to_string(w.b.size()) + " != out dim " +
                             std::to_string(w.w.cols));
    }
    Matrix y = matmul(flatten(x), w.w);
    for (int r = 0; r < y.rows; ++r) {
        for (int j = 0; j < y.cols; ++j) y.at(r, j) += w.b[j];
    }
    return unflatten(y, x.h, x.w);
}

Tensor3 ffn(const Tensor3& x, const FfnWeights& w) {
    require_square_c(w.w1, x.c, "W1");
    require_square_c(w.w2, x.c, "W2");
    if (static_cast<int>(w.b1.size()) != x.c || static_cast<int>(w.b2.size()) != x.c) {
        throw DimensionError("ffn: bias length mismatch");
    }

    const Matrix xm = flatten(x);
    Matrix hidden = matmul(xm, w.w1);
    for (int r = 0; r < hidden.rows; ++r) {
        for (int j = 0; j < hidden.cols; ++j) {
            hidden.at(r, j) = std::max(0.0, hidden.at(r, j) + w.b1[j]);
        }
    }
    Matrix y = matmul(hidden, w.w2);
    for (int r = 0; r < y.rows; ++r) {
        for (int j = 0; j < y.cols; ++j) y.at(r, j) += w.b2[j] + xm.at(r, j);
    }
    return unflatten(y, x.h, x.w);
}

Tensor3 layernorm(const Tensor3& x, double eps) {
    const int c = x.c;
    Tensor3 out(x.h, x.w, c);
    for (int i = 0; i < x.h; ++i) {
        for (int j = 0; j < x.w; ++j) {
            double mean = 0.0;
            for (int l = 0; l < c; ++l) mean += x.at(i, j, l);
            mean /= c;
            double var = 0.0;
            for (int l = 0; l < c; ++l) {
                const double d = x.at(i, j, l) - mean;
                var += d * d;
            }
            var /= c;
            const double inv = 1.0 / std::sqrt(var + eps);
            for (int l = 0; l < c; ++l) out.at(i, j, l) = (x.at(i, j, l) - mean) * inv;
        }
    }
    instrument::add_flops(static_cast<std::uint64_t>(x.h) * x.w * (2ULL * c + 5));
    return out;
}

Tensor3 transformer_block(const Tensor3& z, const AttentionWeights& wa, const FfnWeights& wf) {
    return ffn(attention(z, wa), wf);
}

double default_weight_bound(int n_tokens) {
    return std::sqrt(std::log2(static_cast<double>(std::max(2, n_tokens))));
}

}  // namespace flowar
