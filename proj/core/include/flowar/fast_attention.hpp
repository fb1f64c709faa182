#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowar/layers.hpp"
#include "flowar/tensor.hpp"

namespace flowar {

// Degree/feature-dimension selection for the polynomial score approximation.
// g is the Taylor degree of exp, k = C(d+g, g) the number of monomials of
// total degree <= g in d variables, R the admissible |entry| bound on the
// projected Q/K rows, so every score magnitude is at most B = d*R^2.
struct PolyApproxConfig {
    int g = 0;
    long long k = 1;
    double delta = 0.0;
    double R = 0.0;
    int d = 1;
};

// Taylor truncation error bound for exp on [-B, B]: B^(g+1) e^B / (g+1)!.
double taylor_remainder_bound(double score_bound, int g);

// P_g(x) = sum_{j<=g} x^j / j!.
double taylor_exp(double x, int g);

// Smallest degree whose remainder bound meets delta; throws
// DegreeInfeasibleError if none exists up to degree_cap.
PolyApproxConfig choose_degree(double R, int d, double delta, int degree_cap = 16);

// Monomials of total degree <= g in d variables, graded by degree and, within
// a degree, ordered by decreasing exponent of the leading variables (so for
// d = 2, g = 2: 1, x1, x2, x1^2, x1*x2, x2^2). Each monomial x^e of degree j
// carries the coefficient 1/sqrt(prod_i e_i!), which makes the feature inner
// product telescope to the Taylor series:
//   phi(q) . phi(k) = sum_{j<=g} (q.k)^j / j! = P_g(q.k).
struct MonomialBasis {
    int d = 1;
    int g = 0;
    std::vector<std::vector<int>> exponents;
    std::vector<double> coefficients;
    std::uint64_t row_flops = 0;  // multiplies per feature_map row

    static MonomialBasis build(int d, int g);
    long long k() const { return static_cast<long long>(exponents.size()); }
};

// phi(v): the k monomial features of v under the basis.
std::vector<double> feature_map(std::span<const double> v, const MonomialBasis& basis);

// Convenience: feature_map under a freshly built basis for degree g.
std::vector<double> feature_map(std::span<const double> v, int g);

// Rank-k factors of the polynomial score matrix: row i of u is phi(q_i),
// row j of v is phi(k_j), so (u v^T)_ij = P_g(q_i . k_j) exactly.
struct LowRankFactors {
    Matrix u;  // n x k
    Matrix v;  // n x k
};

LowRankFactors score_factors(const Matrix& q, const Matrix& k, const MonomialBasis& basis);

// Approximate attention. Replaces exp scores with P_g, whose rank-k factors
// U = phi(rows of X Wq) and V = phi(rows of X Wk) allow evaluating
//   out = diag(U V^T 1)^-1 U (V^T (X Wv))
// right-to-left in O(n*k*c) multiply-adds without forming an n x n matrix.
// Preconditions: projected Q/K entries must stay within cfg.R
// (BoundViolationError otherwise). A non-positive row normalizer raises
// ApproximationError: the polynomial degree was too low for the instance.
Tensor3 aattc(const Tensor3& x, const AttentionWeights& w, const PolyApproxConfig& cfg);

// The documented multiply-add count of aattc for n tokens; what the
// instrument counter reports for one call.
std::uint64_t aattc_flop_count(int n_tokens, int c, const PolyApproxConfig& cfg);

}  // namespace flowar
