#include "flowar/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "flowar/errors.hpp"
#include "flowar/instrument.hpp"

namespace flowar {

namespace {
void require_positive_dims(int h, int w, int c) {
    if (h <= 0 || w <= 0 || c <= 0) {
        throw DimensionError("tensor dims must be positive, got " + std::to_string(h) + "x" +
                             std::to_string(w) + "x" + std::to_string(c));
    }
}
}  // namespace

Tensor3::Tensor3(int h_, int w_, int c_) : h(h_), w(w_), c(c_) {
    require_positive_dims(h_, w_, c_);
    data.assign(static_cast<std::size_t>(h) * w * c, 0.0);
}

Tensor3 Tensor3::constant(int h, int w, int c, double value) {
    Tensor3 t(h, w, c);
    t.data.assign(t.data.size(), value);
    return t;
}

Matrix::Matrix(int rows_, int cols_) : rows(rows_), cols(cols_) {
    if (rows <= 0 || cols <= 0) {
        throw DimensionError("matrix dims must be positive, got " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
    data.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix flatten(const Tensor3& x) {
    Matrix m(x.h * x.w, x.c);
    m.data = x.data;  // identical row-major layout
    return m;
}

Tensor3 unflatten(const Matrix& m, int h, int w) {
    if (m.rows != h * w) {
        throw DimensionError("unflatten: " + std::to_string(m.rows) + " rows != " +
                             std::to_string(h) + "*" + std::to_string(w));
    }
    Tensor3 t(h, w, m.cols);
    t.data = m.data;
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw DimensionError("matmul: inner dims " + std::to_string(a.cols) + " vs " +
                             std::to_string(b.rows));
    }
    Matrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            for (int j = 0; j < b.cols; ++j) {
                out.at(i, j) += aik * b.at(k, j);
            }
        }
    }
    instrument::add_flops(static_cast<std::uint64_t>(a.rows) * a.cols * b.cols);
    return out;
}

namespace {
double inf_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}
}  // namespace

double inf_norm_diff(const Tensor3& a, const Tensor3& b) {
    if (!a.same_shape(b)) throw DimensionError("inf_norm_diff: shape mismatch");
    return inf_diff(a.data, b.data);
}

double inf_norm_diff(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw DimensionError("inf_norm_diff: shape mismatch");
    return inf_diff(a.data, b.data);
}

Tensor3 hadamard(const Tensor3& a, const Tensor3& b) {
    Tensor3 out(a.h, a.w, a.c);
    if (a.same_shape(b)) {
        for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    } else if (b.h == 1 && b.w == 1 && b.c == a.c) {
        // per-channel vector broadcast over spatial dims
        for (int i = 0; i < a.h; ++i)
            for (int j = 0; j < a.w; ++j)
                for (int l = 0; l < a.c; ++l) out.at(i, j, l) = a.at(i, j, l) * b.at(0, 0, l);
    } else {
        throw DimensionError("hadamard: incompatible shapes");
    }
    instrument::add_flops(a.size());
    return out;
}

Tensor3 add(const Tensor3& a, const Tensor3& b) {
    if (!a.same_shape(b)) throw DimensionError("add: shape mismatch");
    Tensor3 out(a.h, a.w, a.c);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    return out;
}

Tensor3 add_scalar(const Tensor3& a, double v) {
    Tensor3 out = a;
    for (double& x : out.data) x += v;
    return out;
}

Tensor3 scale(const Tensor3& a, double v) {
    Tensor3 out = a;
    for (double& x : out.data) x *= v;
    instrument::add_flops(a.size());
    return out;
}

Tensor3 channel_slice(const Tensor3& t, int from, int count) {
    if (from < 0 || count <= 0 || from + count > t.c) {
        throw DimensionError("channel_slice: [" + std::to_string(from) + ", " +
                             std::to_string(from + count) + ") outside c=" + std::to_string(t.c));
    }
    Tensor3 out(t.h, t.w, count);
    for (int i = 0; i < t.h; ++i)
        for (int j = 0; j < t.w; ++j)
            for (int l = 0; l < count; ++l) out.at(i, j, l) = t.at(i, j, from + l);
    return out;
}

double max_abs(const Tensor3& t) {
    double m = 0.0;
    for (double x : t.data) m = std::max(m, std::abs(x));
    return m;
}

double max_abs(const Matrix& mat) {
    double m = 0.0;
    for (double x : mat.data) m = std::max(m, std::abs(x));
    return m;
}

void ensure_finite(const Tensor3& t, const char* where) {
    for (double x : t.data) {
        if (!std::isfinite(x)) {
            throw DimensionError(std::string("non-finite value in ") + where);
        }
    }
}

}  // namespace flowar
