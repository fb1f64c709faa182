#include "flowar/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowar/errors.hpp"
#include "flowar/instrument.hpp"

namespace flowar {

double BicubicKernel::operator()(double x) const {
    const double ax = std::abs(x);
    if (ax <= 1.0) {
        return ((a_ + 2.0) * ax - (a_ + 3.0)) * ax * ax + 1.0;
    }
    if (ax < 2.0) {
        return (((ax - 5.0) * ax + 8.0) * ax - 4.0) * a_;
    }
    return 0.0;
}

namespace {

struct TapWeights {
    // weight and clamped source index for each of the 4 taps of one axis
    double w[4];
    int idx[4];
};

std::vector<TapWeights> axis_taps(int out_len, int src_len, int r, const BicubicKernel& kernel) {
    std::vector<TapWeights> taps(out_len);
    for (int i = 0; i < out_len; ++i) {
        const int base = i / r;
        const double d = static_cast<double>(i) / r - base;
        for (int s = -1; s <= 2; ++s) {
            taps[i].w[s + 1] = kernel(d - s);
            taps[i].idx[s + 1] = std::clamp(base + s, 0, src_len - 1);
        }
    }
    return taps;
}

}  // namespace

Tensor3 bicubic_upsample(const Tensor3& x, int r, const BicubicKernel& kernel) {
    if (r < 1) throw ParameterError("bicubic_upsample: r must be >= 1, got " + std::to_string(r));
    const int oh = r * x.h;
    const int ow = r * x.w;
    Tensor3 out(oh, ow, x.c);

    const auto rows = axis_taps(oh, x.h, r, kernel);
    const auto cols = axis_taps(ow, x.w, r, kernel);

    for (int i = 0; i < oh; ++i) {
        const TapWeights& ti = rows[i];
        for (int j = 0; j < ow; ++j) {
            const TapWeights& tj = cols[j];
            double wij[4][4];
            for (int s = 0; s < 4; ++s)
                for (int t = 0; t < 4; ++t) wij[s][t] = ti.w[s] * tj.w[t];
            for (int l = 0; l < x.c; ++l) {
                double acc = 0.0;
                for (int s = 0; s < 4; ++s) {
                    for (int t = 0; t < 4; ++t) {
                        acc += wij[s][t] * x.at(ti.idx[s], tj.idx[t], l);
                    }
                }
                out.at(i, j, l) = acc;
            }
        }
    }
    // 16 weight products per pixel plus 16 fused multiply-adds per channel,
    // and 4 kernel evaluations (3 multiplies each) per axis position
    instrument::add_flops(static_cast<std::uint64_t>(oh) * ow * (16 + 16ULL * x.c) +
                          12ULL * (oh + ow));
    return out;
}

Tensor3 linear_downsample(const Tensor3& x, int r) {
    if (r < 1) throw ParameterError("linear_downsample: r must be >= 1, got " + std::to_string(r));
    if (x.h % r != 0 || x.w % r != 0) {
        throw DimensionError("linear_downsample: r = " + std::to_string(r) +
                             " does not divide " + std::to_string(x.h) + "x" + std::to_string(x.w));
    }
    const int oh = x.h / r;
    const int ow = x.w / r;
    const double inv = 1.0 / (static_cast<double>(r) * r);
    Tensor3 out(oh, ow, x.c);
    for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
            for (int l = 0; l < x.c; ++l) {
                double acc = 0.0;
                for (int di = 0; di < r; ++di) {
                    for (int dj = 0; dj < r; ++dj) {
                        acc += x.at(i * r + di, j * r + dj, l);
                    }
                }
                out.at(i, j, l) = acc * inv;
            }
        }
    }
    instrument::add_flops(out.size());
    return out;
}

Matrix downsample_operator(int h, int w, int r) {
    if (r < 1 || h % r != 0 || w % r != 0) {
        throw DimensionError("downsample_operator: r = " + std::to_string(r) +
                             " does not divide " + std::to_string(h) + "x" + std::to_string(w));
    }
    const int oh = h / r;
    const int ow = w / r;
    Matrix phi(oh * ow, h * w);
    const double inv = 1.0 / (static_cast<double>(r) * r);
    for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
            const int row = i * ow + j;
            for (int di = 0; di < r; ++di) {
                for (int dj = 0; dj < r; ++dj) {
                    phi.at(row, (i * r + di) * w + (j * r + dj)) = inv;
                }
            }
        }
    }
    return phi;
}

ScaleSchedule ScaleSchedule::create(int K, int a, int h, int w) {
    if (K < 1) throw ParameterError("schedule: K must be >= 1, got " + std::to_string(K));
    if (a < 2) throw ParameterError("schedule: base factor must be >= 2, got " + std::to_string(a));
    if (h < 1 || w < 1) throw DimensionError("schedule: spatial dims must be positive");

    ScaleSchedule s;
    s.K = K;
    s.a = a;
    s.h = h;
    s.w = w;
    s.factors.resize(K);
    s.sizes.resize(K);
    int r = 1;
    for (int i = K; i >= 1; --i) {
        s.factors[i - 1] = r;
        if (i > 1) r *= a;
    }
    for (int i = 0; i < K; ++i) {
        const int ri = s.factors[i];
        if (h % ri != 0 || w % ri != 0) {
            throw DimensionError("schedule: factor " + std::to_string(ri) + " does not divide " +
                                 std::to_string(h) + "x" + std::to_string(w));
        }
        s.sizes[i] = {h / ri, w / ri};
    }
    return s;
}

int ScaleSchedule::tokens_at(int i) const {
    return sizes[i - 1].first * sizes[i - 1].second;
}

int ScaleSchedule::context_tokens(int i) const {
    int total = 0;
    for (int j = 1; j <= i; ++j) total += tokens_at(j);
    return total;
}

std::vector<Tensor3> tokenize_multiscale(const Tensor3& x, const ScaleSchedule& schedule) {
    if (x.h != schedule.h || x.w != schedule.w) {
        throw DimensionError("tokenize: input " + std::to_string(x.h) + "x" + std::to_string(x.w) +
                             " does not match schedule " + std::to_string(schedule.h) + "x" +
                             std::to_string(schedule.w));
    }
    std::vector<Tensor3> maps;
    maps.reserve(schedule.K);
    for (int i = 1; i <= schedule.K; ++i) {
        maps.push_back(linear_downsample(x, schedule.factors[i - 1]));
    }
    return maps;
}

}  // namespace flowar
