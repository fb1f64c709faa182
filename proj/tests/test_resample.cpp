#include <doctest.h>

#include <cmath>

#include "flowar/errors.hpp"
#include "flowar/resample.hpp"
#include "flowar/rng.hpp"
#include "support/oracles.hpp"

using namespace flowar;

TEST_CASE("kernel is a partition of unity at random offsets") {
    const BicubicKernel k;
    SeededRng rng(21);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.uniform01();
        double sum = 0.0;
        for (int s = -1; s <= 2; ++s) sum += k(d - s);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    // interpolating: exact hits at integer offsets
    CHECK(k(0.0) == doctest::Approx(1.0));
    CHECK(k(1.0) == doctest::Approx(0.0));
    CHECK(k(2.0) == doctest::Approx(0.0));
}

TEST_CASE("kernel amplification constant matches a grid scan") {
    const BicubicKernel k;
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double d = i / 10000.0;
        double sum = 0.0;
        for (int s = -1; s <= 2; ++s) sum += std::abs(k(d - s));
        worst = std::max(worst, sum);
    }
    CHECK(worst <= k.axis_amplification() + 1e-12);
    CHECK(k.axis_amplification() == doctest::Approx(1.25));
    CHECK(k.amplification_2d() == doctest::Approx(1.5625));
}

TEST_CASE("upsample with r = 1 is the identity") {
    SeededRng rng(22);
    const Tensor3 x = oracles::random_tensor(5, 4, 3, 2.0, rng);
    CHECK(inf_norm_diff(bicubic_upsample(x, 1), x) == 0.0);
}

TEST_CASE("upsample preserves constants") {
    for (int r : {1, 2, 3, 4}) {
        const Tensor3 x = Tensor3::constant(3, 5, 2, 7.0);
        const Tensor3 y = bicubic_upsample(x, r);
        CHECK(y.h == r * 3);
        CHECK(y.w == r * 5);
        CHECK(inf_norm_diff(y, Tensor3::constant(r * 3, r * 5, 2, 7.0)) <= 1e-12);
    }
}

TEST_CASE("upsample matches the 16-tap reference") {
    const BicubicKernel kernel;
    SeededRng rng(23);

    // bilinear ramp
    Tensor3 ramp(2, 2, 1);
    ramp.at(0, 0, 0) = 0.0;
    ramp.at(0, 1, 0) = 1.0;
    ramp.at(1, 0, 0) = 2.0;
    ramp.at(1, 1, 0) = 3.0;
    CHECK(inf_norm_diff(bicubic_upsample(ramp, 2),
                        oracles::bicubic_16tap(ramp, 2, kernel)) <= 1e-12);

    for (int trial = 0; trial < 10; ++trial) {
        const Tensor3 x = oracles::random_tensor(4, 6, 2, 3.0, rng);
        for (int r : {2, 3}) {
            CHECK(inf_norm_diff(bicubic_upsample(x, r),
                                oracles::bicubic_16tap(x, r, kernel)) <= 1e-12);
        }
    }
}

TEST_CASE("upsample range stays within the kernel magnification") {
    const BicubicKernel kernel;
    SeededRng rng(24);
    const double bound = 2.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 x = oracles::random_tensor(5, 5, 2, bound, rng);
        const Tensor3 y = bicubic_upsample(x, 2);
        CHECK(max_abs(y) <= kernel.amplification_2d() * bound + 1e-12);
    }
}

TEST_CASE("upsample rejects r < 1") {
    const Tensor3 x(2, 2, 1);
    CHECK_THROWS_AS(bicubic_upsample(x, 0), ParameterError);
}

TEST_CASE("downsample basics") {
    SeededRng rng(25);
    const Tensor3 x = oracles::random_tensor(4, 4, 2, 2.0, rng);
    CHECK(inf_norm_diff(linear_downsample(x, 1), x) == 0.0);

    Tensor3 block(2, 2, 1);
    block.at(0, 0, 0) = 1;
    block.at(0, 1, 0) = 2;
    block.at(1, 0, 0) = 3;
    block.at(1, 1, 0) = 4;
    const Tensor3 one = linear_downsample(block, 2);
    CHECK(one.h == 1);
    CHECK(one.w == 1);
    CHECK(one.at(0, 0, 0) == doctest::Approx(2.5));

    const Tensor3 c = Tensor3::constant(6, 6, 3, -1.25);
    CHECK(inf_norm_diff(linear_downsample(c, 3), Tensor3::constant(2, 2, 3, -1.25)) <= 1e-12);

    CHECK_THROWS_AS(linear_downsample(x, 3), DimensionError);
}

TEST_CASE("downsample equals the explicit block-average operator") {
    SeededRng rng(26);
    for (int r : {1, 2, 4}) {
        const Tensor3 x = oracles::random_tensor(4, 8, 3, 2.0, rng);
        const Matrix phi = downsample_operator(4, 8, r);
        const Matrix expected = matmul(phi, flatten(x));
        CHECK(inf_norm_diff(flatten(linear_downsample(x, r)), expected) <= 1e-12);
        // row-stochastic
        for (int row = 0; row < phi.rows; ++row) {
            double s = 0.0;
            for (int col = 0; col < phi.cols; ++col) s += phi.at(row, col);
            CHECK(s == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("scale schedule") {
    const ScaleSchedule s = ScaleSchedule::create(3, 2, 8, 8);
    CHECK(s.factors == std::vector<int>{4, 2, 1});
    CHECK(s.sizes[0] == std::pair<int, int>{2, 2});
    CHECK(s.sizes[1] == std::pair<int, int>{4, 4});
    CHECK(s.sizes[2] == std::pair<int, int>{8, 8});
    CHECK(s.tokens_at(1) == 4);
    CHECK(s.context_tokens(3) == 4 + 16 + 64);

    CHECK_THROWS_AS(ScaleSchedule::create(3, 2, 6, 6), DimensionError);
    CHECK_THROWS_AS(ScaleSchedule::create(0, 2, 8, 8), ParameterError);
    CHECK_THROWS_AS(ScaleSchedule::create(2, 1, 8, 8), ParameterError);
}

TEST_CASE("tokenizer produces the expected shape ladder") {
    SeededRng rng(27);
    const int c = 3;
    const Tensor3 x = oracles::random_tensor(8, 8, c, 2.0, rng);
    const ScaleSchedule s = ScaleSchedule::create(3, 2, 8, 8);
    const auto maps = tokenize_multiscale(x, s);

    REQUIRE(maps.size() == 3);
    CHECK(maps[0].h == 2);
    CHECK(maps[0].w == 2);
    CHECK(maps[1].h == 4);
    CHECK(maps[2].h == 8);

    // last scale is the input itself; every scale equals direct block means
    CHECK(inf_norm_diff(maps[2], x) == 0.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(inf_norm_diff(maps[i], oracles::block_mean(x, s.factors[i])) <= 1e-12);
    }
}

TEST_CASE("tokenizer with K = 1 returns the input") {
    SeededRng rng(28);
    const Tensor3 x = oracles::random_tensor(5, 7, 2, 1.0, rng);
    const auto maps = tokenize_multiscale(x, ScaleSchedule::create(1, 2, 5, 7));
    REQUIRE(maps.size() == 1);
    CHECK(inf_norm_diff(maps[0], x) == 0.0);
}

TEST_CASE("down-then-up round trip restores the shape only") {
    SeededRng rng(29);
    const Tensor3 x = oracles::random_tensor(6, 6, 2, 1.0, rng);
    const Tensor3 y = linear_downsample(bicubic_upsample(x, 2), 2);
    CHECK(y.h == x.h);
    CHECK(y.w == x.w);
    CHECK(y.c == x.c);
}
