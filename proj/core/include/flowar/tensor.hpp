#pragma once

#include <cstddef>
#include <vector>

namespace flowar {

// Dense h x w x c tensor, row-major: index (i, j, l) -> (i*w + j)*c + l.
// Value type, immutable by convention after construction; all operations
// below are pure functions returning fresh tensors.
struct Tensor3 {
    int h = 0;
    int w = 0;
    int c = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int h, int w, int c);  // zero-filled

    static Tensor3 constant(int h, int w, int c, double value);

    double& at(int i, int j, int l) { return data[(static_cast<std::size_t>(i) * w + j) * c + l]; }
    double at(int i, int j, int l) const {
        return data[(static_cast<std::size_t>(i) * w + j) * c + l];
    }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor3& o) const { return h == o.h && w == o.w && c == o.c; }
};

// Dense row-major matrix.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int rows, int cols);  // zero-filled

    static Matrix identity(int n);

    double& at(int r, int c_) { return data[static_cast<std::size_t>(r) * cols + c_]; }
    double at(int r, int c_) const { return data[static_cast<std::size_t>(r) * cols + c_]; }

    std::size_t size() const { return data.size(); }
};

// Collapse spatial dims: (h, w, c) -> (h*w, c); token i*w + j is pixel (i, j).
Matrix flatten(const Tensor3& x);

// Inverse of flatten; requires m.rows == h*w.
Tensor3 unflatten(const Matrix& m, int h, int w);

Matrix matmul(const Matrix& a, const Matrix& b);

// max |a - b| over all positions; shapes must match exactly.
double inf_norm_diff(const Tensor3& a, const Tensor3& b);
double inf_norm_diff(const Matrix& a, const Matrix& b);

// Elementwise product. b may alternatively be a 1 x 1 x c tensor, which is
// broadcast over the spatial dims of a.
Tensor3 hadamard(const Tensor3& a, const Tensor3& b);

Tensor3 add(const Tensor3& a, const Tensor3& b);
Tensor3 add_scalar(const Tensor3& a, double v);
Tensor3 scale(const Tensor3& a, double v);

// Channels [from, from+count) of t as a standalone tensor.
Tensor3 channel_slice(const Tensor3& t, int from, int count);

double max_abs(const Tensor3& t);
double max_abs(const Matrix& m);

// Throws DimensionError naming `where` if any entry is NaN/Inf.
void ensure_finite(const Tensor3& t, const char* where);

}  // namespace flowar
