#include "flowar/fast_attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowar/errors.hpp"
#include "flowar/instrument.hpp"

namespace flowar {

double taylor_remainder_bound(double score_bound, int g) {
    // B^(g+1) e^B / (g+1)! evaluated in log space to dodge overflow for
    // large B, with the B = 0 case exact.
    if (score_bound <= 0.0) return 0.0;
    double log_term = (g + 1) * std::log(score_bound) + score_bound - std::lgamma(g + 2.0);
    return std::exp(log_term);
}

double taylor_exp(double x, int g) {
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1; j <= g; ++j) {
        term *= x / j;
        sum += term;
    }
    return sum;
}

PolyApproxConfig choose_degree(double R, int d, double delta, int degree_cap) {
    if (delta <= 0.0) throw ParameterError("choose_degree: delta must be positive");
    if (d < 1) throw ParameterError("choose_degree: d must be >= 1");
    if (R < 0.0) throw ParameterError("choose_degree: R must be non-negative");

    const double B = d * R * R;
    for (int g = 0; g <= degree_cap; ++g) {
        if (taylor_remainder_bound(B, g) <= delta) {
            PolyApproxConfig cfg;
            cfg.g = g;
            cfg.k = MonomialBasis::build(d, g).k();
            cfg.delta = delta;
            cfg.R = R;
            cfg.d = d;
            return cfg;
        }
    }
    throw DegreeInfeasibleError(B, degree_cap, delta);
}

namespace {

void emit_tuples(int var, int remaining, std::vector<int>& e, MonomialBasis& basis) {
    if (var == basis.d - 1) {
        e[var] = remaining;
        basis.exponents.push_back(e);
        return;
    }
    for (int take = remaining; take >= 0; --take) {
        e[var] = take;
        emit_tuples(var + 1, remaining - take, e, basis);
    }
}

}  // namespace

MonomialBasis MonomialBasis::build(int d, int g) {
    if (d < 1) throw ParameterError("monomial basis: d must be >= 1");
    if (g < 0) throw ParameterError("monomial basis: g must be >= 0");

    MonomialBasis basis;
    basis.d = d;
    basis.g = g;
    std::vector<int> e(d, 0);
    for (int degree = 0; degree <= g; ++degree) {
        emit_tuples(0, degree, e, basis);
    }

    basis.coefficients.reserve(basis.exponents.size());
    std::uint64_t products = 0;
    for (const auto& exps : basis.exponents) {
        double denom = 1.0;
        for (int ei : exps) {
            for (int f = 2; f <= ei; ++f) denom *= f;
            if (ei > 0) ++products;
        }
        basis.coefficients.push_back(1.0 / std::sqrt(denom));
    }
    // power table (d*g) plus one multiply per nonzero exponent
    basis.row_flops = static_cast<std::uint64_t>(d) * g + products;
    return basis;
}

std::vector<double> feature_map(std::span<const double> v, const MonomialBasis& basis) {
    if (static_cast<int>(v.size()) != basis.d) {
        throw DimensionError("feature_map: vector length " + std::to_string(v.size()) +
                             " != basis dimension " + std::to_string(basis.d));
    }
    // powers[i][e] = v_i^e
    std::vector<double> powers(static_cast<std::size_t>(basis.d) * (basis.g + 1), 1.0);
    for (int i = 0; i < basis.d; ++i) {
        for (int e = 1; e <= basis.g; ++e) {
            powers[i * (basis.g + 1) + e] = powers[i * (basis.g + 1) + e - 1] * v[i];
        }
    }
    std::vector<double> out(basis.exponents.size());
    for (std::size_t m = 0; m < basis.exponents.size(); ++m) {
        double val = basis.coefficients[m];
        const auto& exps = basis.exponents[m];
        for (int i = 0; i < basis.d; ++i) {
            if (exps[i] > 0) val *= powers[i * (basis.g + 1) + exps[i]];
        }
        out[m] = val;
    }
    instrument::add_flops(basis.row_flops);
    return out;
}

std::vector<double> feature_map(std::span<const double> v, int g) {
    return feature_map(v, MonomialBasis::build(static_cast<int>(v.size()), g));
}

LowRankFactors score_factors(const Matrix& q, const Matrix& k, const MonomialBasis& basis) {
    if (q.cols != basis.d || k.cols != basis.d) {
        throw DimensionError("score_factors: row width " + std::to_string(q.cols) +
                             " != basis dimension " + std::to_string(basis.d));
    }
    if (q.rows != k.rows) throw DimensionError("score_factors: row counts differ");
    const int n = q.rows;
    const int kd = static_cast<int>(basis.k());
    LowRankFactors f{Matrix(n, kd), Matrix(n, kd)};
    for (int i = 0; i < n; ++i) {
        const auto qf = feature_map(std::span<const double>(&q.data[i * q.cols], q.cols), basis);
        const auto kf = feature_map(std::span<const double>(&k.data[i * k.cols], k.cols), basis);
        std::copy(qf.begin(), qf.end(), f.u.data.begin() + static_cast<std::size_t>(i) * kd);
        std::copy(kf.begin(), kf.end(), f.v.data.begin() + static_cast<std::size_t>(i) * kd);
    }
    return f;
}

Tensor3 aattc(const Tensor3& x, const AttentionWeights& w, const PolyApproxConfig& cfg) {
    if (cfg.d != x.c) {
        throw DimensionError("aattc: config dimension " + std::to_string(cfg.d) +
                             " != channels " + std::to_string(x.c));
    }

    const Matrix xm = flatten(x);
    const Matrix q = matmul(xm, w.wq);
    const Matrix k = matmul(xm, w.wk);
    const Matrix v = matmul(xm, w.wv);

    const double qk_abs = std::max(max_abs(q), max_abs(k));
    instrument::note_qk_abs(qk_abs);
    if (qk_abs > cfg.R * (1.0 + 1e-12)) {
        throw BoundViolationError(qk_abs, cfg.R);
    }

    const MonomialBasis basis = MonomialBasis::build(cfg.d, cfg.g);
    const int n = xm.rows;
    const int c = xm.cols;
    const int kd = static_cast<int>(basis.k());

    const LowRankFactors f = score_factors(q, k, basis);

    // normalizers s = U (V^T 1)
    std::vector<double> col_sum(kd, 0.0);
    for (int j = 0; j < n; ++j) {
        for (int m = 0; m < kd; ++m) col_sum[m] += f.v.at(j, m);
    }
    std::vector<double> normalizer(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int m = 0; m < kd; ++m) s += f.u.at(i, m) * col_sum[m];
        if (s <= 0.0) throw ApproximationError(i, s);
        normalizer[i] = s;
    }
    instrument::add_flops(static_cast<std::uint64_t>(n) * kd + n);

    // out = diag(s)^-1 U (V^T (X Wv))
    Matrix mixed(kd, c);
    for (int j = 0; j < n; ++j) {
        for (int m = 0; m < kd; ++m) {
            const double fv = f.v.at(j, m);
            for (int l = 0; l < c; ++l) mixed.at(m, l) += fv * v.at(j, l);
        }
    }
    instrument::add_flops(static_cast<std::uint64_t>(n) * kd * c);

    Matrix out = matmul(f.u, mixed);
    for (int i = 0; i < n; ++i) {
        const double inv = 1.0 / normalizer[i];
        for (int l = 0; l < c; ++l) out.at(i, l) *= inv;
    }
    instrument::add_flops(static_cast<std::uint64_t>(n) * c);

    return unflatten(out, x.h, x.w);
}

std::uint64_t aattc_flop_count(int n_tokens, int c, const PolyApproxConfig& cfg) {
    const MonomialBasis basis = MonomialBasis::build(cfg.d, cfg.g);
    const std::uint64_t n = n_tokens;
    const std::uint64_t k = basis.k();
    return 3 * n * c * c         // Q, K, V projections
           + 2 * n * basis.row_flops  // feature rows of U and V
           + n * k + n           // normalizers, one divide per token
           + 2 * n * k * c       // V^T (X Wv), then U * mixed
           + n * c;              // final row scaling
}

}  // namespace flowar
