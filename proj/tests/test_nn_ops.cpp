#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "palseg/nn/ops.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace palseg;
using namespace palseg::testsupport;

namespace {

template <typename T>
nn::Tensor<T> random_tensor(std::vector<std::int64_t> shape, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
    nn::Tensor<T> t(std::move(shape));
    std::uniform_real_distribution<double> dist(lo, hi);
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(dist(rng));
    return t;
}

} // namespace

TEST_CASE("conv2d matches the direct convolution oracle") {
    std::mt19937_64 rng(1);
    struct Case {
        int n, c, h, w, oc, kh, kw, stride, ph, pw;
    };
    for (const Case cs : {Case{2, 3, 9, 11, 4, 3, 3, 1, 1, 1},
                          Case{1, 4, 16, 16, 8, 7, 7, 2, 3, 3},
                          Case{2, 5, 8, 8, 5, 3, 1, 1, 1, 0},
                          Case{2, 5, 8, 8, 5, 1, 3, 1, 0, 1},
                          Case{1, 2, 10, 10, 3, 1, 1, 1, 0, 0},
                          Case{1, 3, 12, 12, 6, 3, 3, 2, 1, 1}}) {
        auto x = nn::make_var(random_tensor<double>({cs.n, cs.c, cs.h, cs.w}, rng));
        auto w = nn::make_var(random_tensor<double>({cs.oc, cs.c, cs.kh, cs.kw}, rng));
        auto b = nn::make_var(random_tensor<double>({cs.oc}, rng));
        auto y = nn::conv2d(x, w, b, cs.stride, cs.stride, cs.ph, cs.pw);
        std::vector<double> bias(b->value.data(), b->value.data() + cs.oc);
        const auto expected =
            conv2d_oracle(x->value, w->value, bias, cs.stride, cs.stride, cs.ph, cs.pw);
        REQUIRE(y->value.shape() == expected.shape());
        CHECK(max_abs_diff(y->value, expected) < 1e-10);
    }
}

TEST_CASE("conv2d rejects channel mismatch and collapsed outputs") {
    std::mt19937_64 rng(2);
    auto x = nn::make_var(random_tensor<float>({1, 3, 8, 8}, rng));
    auto w_bad = nn::make_var(random_tensor<float>({4, 5, 3, 3}, rng));
    CHECK_THROWS_AS(nn::conv2d(x, w_bad, nn::VarPtr<float>{}, 1, 1), Error);

    auto w_big = nn::make_var(random_tensor<float>({4, 3, 9, 9}, rng));
    CHECK_THROWS_AS(nn::conv2d(x, w_big, nn::VarPtr<float>{}, 1, 0), Error);
}

TEST_CASE("conv2d gradients match finite differences") {
    std::mt19937_64 rng(3);
    auto x = nn::make_var(random_tensor<double>({2, 3, 6, 7}, rng), true);
    auto w = nn::make_var(random_tensor<double>({4, 3, 3, 3}, rng), true);
    auto b = nn::make_var(random_tensor<double>({4}, rng), true);

    auto make_loss = [&]() {
        return nn::sum_all(nn::relu(nn::conv2d(x, w, b, 2, 2, 1, 1)));
    };
    const auto res = gradcheck({x, w, b}, make_loss, 60, 1e-6, rng);
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("separable_blend: identity kernels reproduce the input") {
    std::mt19937_64 rng(4);
    const int C = 3;
    auto x = nn::make_var(random_tensor<double>({1, C, 8, 8}, rng));
    nn::Tensor<double> w31({C, C, 3, 1});
    nn::Tensor<double> w13({C, C, 1, 3});
    for (int c = 0; c < C; ++c) {
        w31.at4(c, c, 1, 0) = 1.0; // center tap
        w13.at4(c, c, 0, 1) = 1.0;
    }
    auto y = nn::separable_blend(x, nn::make_var(w31), nn::make_var(w13));
    CHECK(max_abs_diff(y->value, x->value) < 1e-12);
}

TEST_CASE("separable_blend equals composed 3x3 convolution") {
    // Multichannel: the pair composes to K[o,i] = sum_m b[o,m] a[m,i] with
    // K[o,i] = a_col * b_row outer products; the oracle builds K directly.
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const int C = 1 + static_cast<int>(rng() % 3);
        auto x = nn::make_var(random_tensor<double>({1, C, 16, 16}, rng));
        auto w31 = nn::make_var(random_tensor<double>({C, C, 3, 1}, rng));
        auto w13 = nn::make_var(random_tensor<double>({C, C, 1, 3}, rng));

        auto y = nn::separable_blend(x, w31, w13);

        nn::Tensor<double> k({C, C, 3, 3});
        for (int o = 0; o < C; ++o) {
            for (int i = 0; i < C; ++i) {
                for (int m = 0; m < C; ++m) {
                    for (int r = 0; r < 3; ++r) {
                        for (int cc = 0; cc < 3; ++cc) {
                            k.at4(o, i, r, cc) +=
                                w13->value.at4(o, m, 0, cc) * w31->value.at4(m, i, r, 0);
                        }
                    }
                }
            }
        }
        const auto expected = conv2d_oracle(x->value, k, {}, 1, 1, 1, 1);
        CHECK(max_abs_diff(y->value, expected) < 1e-10);
    }
}

TEST_CASE("separable_blend: delta impulse has a 3x3 footprint") {
    nn::Tensor<double> xt({1, 1, 9, 9});
    xt.at4(0, 0, 4, 4) = 1.0;
    std::mt19937_64 rng(6);
    auto w31 = nn::make_var(random_tensor<double>({1, 1, 3, 1}, rng, 0.5, 1.0));
    auto w13 = nn::make_var(random_tensor<double>({1, 1, 1, 3}, rng, 0.5, 1.0));
    auto y = nn::separable_blend(nn::make_var(xt), w31, w13);
    for (int r = 0; r < 9; ++r) {
        for (int c = 0; c < 9; ++c) {
            const bool inside = std::abs(r - 4) <= 1 && std::abs(c - 4) <= 1;
            if (inside) {
                REQUIRE(y->value.at4(0, 0, r, c) != 0.0);
            } else {
                REQUIRE(y->value.at4(0, 0, r, c) == 0.0);
            }
        }
    }
}

TEST_CASE("avg_pool2d: constants, hand-computed means, size formula") {
    auto constant = nn::make_var(nn::Tensor<float>({1, 2, 10, 10}, 3.25f));
    auto pooled = nn::avg_pool2d(constant, 5, 2, 2, true);
    for (std::int64_t i = 0; i < pooled->value.numel(); ++i) {
        REQUIRE(pooled->value[i] == doctest::Approx(3.25f));
    }

    // 4x4 ramp, kernel 2 stride 2: frozen block means.
    nn::Tensor<double> ramp({1, 1, 4, 4});
    for (int i = 0; i < 16; ++i) ramp[i] = i;
    auto blocks = nn::avg_pool2d(nn::make_var(ramp), 2, 2, 0, true);
    CHECK(blocks->value.at4(0, 0, 0, 0) == doctest::Approx(2.5));
    CHECK(blocks->value.at4(0, 0, 0, 1) == doctest::Approx(4.5));
    CHECK(blocks->value.at4(0, 0, 1, 0) == doctest::Approx(10.5));
    CHECK(blocks->value.at4(0, 0, 1, 1) == doctest::Approx(12.5));

    std::mt19937_64 rng(7);
    auto x16 = nn::make_var(random_tensor<float>({1, 1, 16, 16}, rng));
    CHECK(nn::avg_pool2d(x16, 5, 2, 2, true)->value.shape() ==
          std::vector<std::int64_t>{1, 1, 8, 8});
}

TEST_CASE("avg_pool2d matches the windowed-mean oracle with exclude_pad") {
    std::mt19937_64 rng(8);
    for (const auto& [k, s, p] : std::vector<std::array<int, 3>>{
             {5, 2, 2}, {9, 4, 4}, {17, 8, 8}, {3, 1, 1}}) {
        auto x = nn::make_var(random_tensor<double>({2, 3, 20, 24}, rng));
        auto y = nn::avg_pool2d(x, k, s, p, true);
        const auto expected = avg_pool_oracle(x->value, k, s, p, true);
        REQUIRE(y->value.shape() == expected.shape());
        CHECK(max_abs_diff(y->value, expected) < 1e-12);
    }
}

TEST_CASE("avg_pool2d rejects collapsed outputs and bad strides") {
    std::mt19937_64 rng(9);
    auto tiny = nn::make_var(random_tensor<float>({1, 1, 2, 2}, rng));
    CHECK_THROWS_AS(nn::avg_pool2d(tiny, 5, 2, 0, true), Error);
    auto x = nn::make_var(random_tensor<float>({1, 1, 8, 8}, rng));
    CHECK_THROWS_AS(nn::avg_pool2d(x, 2, 3, 0, true), Error);
}

TEST_CASE("pooling gradients match finite differences") {
    std::mt19937_64 rng(10);
    auto x = nn::make_var(random_tensor<double>({1, 2, 10, 10}, rng), true);
    const auto avg_res = gradcheck(
        {x}, [&]() { return nn::sum_all(nn::relu(nn::avg_pool2d(x, 5, 2, 2, true))); }, 40,
        1e-6, rng);
    CHECK(avg_res.max_rel_err < 1e-5);

    const auto max_res = gradcheck(
        {x}, [&]() { return nn::sum_all(nn::max_pool2d(x, 3, 2, 1)); }, 40, 1e-7, rng);
    CHECK(max_res.max_rel_err < 1e-4);

    const auto gap_res = gradcheck(
        {x}, [&]() { return nn::sum_all(nn::global_avg_pool(x)); }, 20, 1e-6, rng);
    CHECK(gap_res.max_rel_err < 1e-6);
}

TEST_CASE("upsample_bilinear: x2 of a 2x2 ramp matches the hand-computed oracle") {
    // Half-pixel sampling: source coordinate (d + 0.5)/2 - 0.5, clamped.
    // For the ramp v(y, x) = 2y + x the per-axis source positions are
    // {0, 0.25, 0.75, 1}, giving the closed-form table below.
    nn::Tensor<double> x({1, 1, 2, 2});
    x.at4(0, 0, 0, 0) = 0.0;
    x.at4(0, 0, 0, 1) = 1.0;
    x.at4(0, 0, 1, 0) = 2.0;
    x.at4(0, 0, 1, 1) = 3.0;
    auto y = nn::upsample_bilinear(nn::make_var(x), 4, 4);
    const double src[4] = {0.0, 0.25, 0.75, 1.0};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            const double expected = 2.0 * src[r] + src[c];
            REQUIRE(y->value.at4(0, 0, r, c) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("upsample_bilinear: 1x1 input broadcasts") {
    nn::Tensor<float> x({2, 3, 1, 1});
    for (std::int64_t i = 0; i < 6; ++i) x[i] = static_cast<float>(i);
    auto y = nn::upsample_bilinear(nn::make_var(x), 5, 7);
    for (std::int64_t n = 0; n < 2; ++n) {
        for (std::int64_t c = 0; c < 3; ++c) {
            for (std::int64_t i = 0; i < 35; ++i) {
                REQUIRE(y->value[(n * 3 + c) * 35 + i] == doctest::Approx(n * 3 + c));
            }
        }
    }
}

TEST_CASE("upsample_bilinear gradients match finite differences") {
    std::mt19937_64 rng(11);
    auto x = nn::make_var(random_tensor<double>({1, 2, 4, 5}, rng), true);
    const auto res = gradcheck(
        {x}, [&]() { return nn::sum_all(nn::relu(nn::upsample_bilinear(x, 9, 11))); }, 40,
        1e-6, rng);
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("batch_norm: training mode normalizes per channel") {
    std::mt19937_64 rng(12);
    const int C = 4;
    auto x = nn::make_var(random_tensor<double>({3, C, 6, 6}, rng, -4.0, 4.0));
    auto gamma = nn::make_var(nn::Tensor<double>({C}, 1.0));
    auto beta = nn::make_var(nn::Tensor<double>({C}, 0.0));
    nn::Tensor<double> rm({C}, 0.0), rv({C}, 1.0);

    auto y = nn::batch_norm(x, gamma, beta, rm, rv, true, 0.1, 1e-5);
    const std::int64_t m = 3 * 6 * 6;
    for (int c = 0; c < C; ++c) {
        double sum = 0.0, sq = 0.0;
        for (int n = 0; n < 3; ++n) {
            for (int i = 0; i < 36; ++i) {
                const double v = y->value[(n * C + c) * 36 + i];
                sum += v;
                sq += v * v;
            }
        }
        const double mean = sum / m;
        const double var = sq / m - mean * mean;
        CHECK(std::abs(mean) < 1e-9);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
        // Running stats moved toward the batch statistics.
        CHECK(rm[c] != 0.0);
    }
}

TEST_CASE("batch_norm: eval mode uses running statistics and is affine") {
    const int C = 2;
    nn::Tensor<double> xt({1, C, 2, 2});
    for (std::int64_t i = 0; i < xt.numel(); ++i) xt[i] = static_cast<double>(i);
    auto gamma = nn::make_var(nn::Tensor<double>({C}, 2.0));
    auto beta = nn::make_var(nn::Tensor<double>({C}, 0.5));
    nn::Tensor<double> rm({C});
    nn::Tensor<double> rv({C});
    rm[0] = 1.0;
    rm[1] = 2.0;
    rv[0] = 4.0;
    rv[1] = 9.0;

    auto y = nn::batch_norm(nn::make_var(xt), gamma, beta, rm, rv, false, 0.1, 0.0);
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < 4; ++i) {
            const double xv = xt[c * 4 + i];
            const double expected = 2.0 * (xv - rm[c]) / std::sqrt(rv[c]) + 0.5;
            REQUIRE(y->value[c * 4 + i] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("batch_norm gradients match finite differences (train and eval)") {
    std::mt19937_64 rng(13);
    auto x = nn::make_var(random_tensor<double>({2, 3, 4, 4}, rng), true);
    auto gamma = nn::make_var(random_tensor<double>({3}, rng, 0.5, 1.5), true);
    auto beta = nn::make_var(random_tensor<double>({3}, rng, -0.5, 0.5), true);

    for (const bool training : {true, false}) {
        nn::Tensor<double> rm({3}, 0.1), rv({3}, 1.3);
        auto make_loss = [&]() {
            nn::Tensor<double> rm_copy = rm, rv_copy = rv;
            return nn::sum_all(
                nn::relu(nn::batch_norm(x, gamma, beta, rm_copy, rv_copy, training, 0.1,
                                        1e-5)));
        };
        const auto res = gradcheck({x, gamma, beta}, make_loss, 60, 1e-6, rng);
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("fan-out accumulates gradients") {
    nn::Tensor<double> xt({1, 1, 2, 2}, 1.5);
    auto x = nn::make_var(xt, true);
    auto y = nn::sum_all(nn::add(x, x));
    nn::backward(y);
    for (std::int64_t i = 0; i < 4; ++i) {
        REQUIRE(x->grad[i] == doctest::Approx(2.0));
    }
}

TEST_CASE("concat_channels splits gradients back") {
    std::mt19937_64 rng(14);
    auto a = nn::make_var(random_tensor<double>({1, 2, 3, 3}, rng), true);
    auto b = nn::make_var(random_tensor<double>({1, 3, 3, 3}, rng), true);
    auto y = nn::concat_channels<double>({a, b});
    CHECK(y->value.shape() == std::vector<std::int64_t>{1, 5, 3, 3});
    const auto res = gradcheck(
        {a, b}, [&]() { return nn::sum_all(nn::relu(nn::concat_channels<double>({a, b}))); },
        30, 1e-6, rng);
    CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("cross_entropy: frozen values") {
    // Huge margin on the true class -> loss ~ 0.
    nn::Tensor<double> zt({1, 3, 1, 2});
    zt.at4(0, 0, 0, 0) = 100.0;
    zt.at4(0, 1, 0, 1) = 100.0;
    nn::Tensor<std::int32_t> labels({1, 1, 2});
    labels[0] = 0;
    labels[1] = 1;
    auto loss = nn::cross_entropy(nn::make_var(zt), labels, 255);
    CHECK(loss.value->value[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(loss.scored_pixels == 2);

    // Uniform logits over K=3 -> ln 3 per pixel.
    nn::Tensor<double> uniform({2, 3, 4, 4}, 0.7);
    nn::Tensor<std::int32_t> lab2({2, 4, 4});
    for (std::int64_t i = 0; i < lab2.numel(); ++i) lab2[i] = static_cast<std::int32_t>(i % 3);
    auto loss2 = nn::cross_entropy(nn::make_var(uniform), lab2, 255);
    CHECK(loss2.value->value[0] == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("cross_entropy matches a scalar-loop oracle") {
    std::mt19937_64 rng(15);
    auto logits = nn::make_var(random_tensor<double>({2, 3, 5, 4}, rng, -2.0, 2.0));
    nn::Tensor<std::int32_t> labels({2, 5, 4});
    for (std::int64_t i = 0; i < labels.numel(); ++i) {
        const auto r = rng() % 4;
        labels[i] = r == 3 ? 255 : static_cast<std::int32_t>(r);
    }
    const auto loss = nn::cross_entropy(logits, labels, 255);

    double total = 0.0;
    std::int64_t count = 0;
    for (int n = 0; n < 2; ++n) {
        for (int h = 0; h < 5; ++h) {
            for (int w = 0; w < 4; ++w) {
                const std::int32_t lab = labels[(n * 5 + h) * 4 + w];
                if (lab == 255) continue;
                double denom = 0.0;
                for (int k = 0; k < 3; ++k) denom += std::exp(logits->value.at4(n, k, h, w));
                total += -std::log(std::exp(logits->value.at4(n, lab, h, w)) / denom);
                ++count;
            }
        }
    }
    CHECK(loss.scored_pixels == count);
    CHECK(loss.value->value[0] == doctest::Approx(total / count).epsilon(1e-10));
}

TEST_CASE("cross_entropy: ignored pixels contribute zero gradient") {
    std::mt19937_64 rng(16);
    auto logits = nn::make_var(random_tensor<double>({1, 3, 2, 2}, rng), true);
    nn::Tensor<std::int32_t> labels({1, 2, 2});
    labels[0] = 0;
    labels[1] = 255; // ignored
    labels[2] = 1;
    labels[3] = 2;

    auto loss = nn::cross_entropy(logits, labels, 255);
    nn::backward(loss.value);
    for (int k = 0; k < 3; ++k) {
        REQUIRE(logits->grad.at4(0, k, 0, 1) == 0.0);
    }

    // Finite-difference probe on the masked pixel's logit.
    const double base = nn::cross_entropy(logits, labels, 255).value->value[0];
    logits->value.at4(0, 1, 0, 1) += 10.0;
    const double shifted = nn::cross_entropy(logits, labels, 255).value->value[0];
    CHECK(base == doctest::Approx(shifted).epsilon(1e-15));
}

TEST_CASE("cross_entropy: all pixels ignored yields zero loss and a flag") {
    nn::Tensor<double> zt({1, 3, 2, 2}, 0.3);
    nn::Tensor<std::int32_t> labels({1, 2, 2}, 255);
    auto loss = nn::cross_entropy(nn::make_var(zt), labels, 255);
    CHECK(loss.value->value[0] == 0.0);
    CHECK(loss.scored_pixels == 0);
}

TEST_CASE("cross_entropy gradients match finite differences") {
    std::mt19937_64 rng(17);
    auto logits = nn::make_var(random_tensor<double>({1, 3, 3, 3}, rng), true);
    nn::Tensor<std::int32_t> labels({1, 3, 3});
    for (std::int64_t i = 0; i < 9; ++i) labels[i] = static_cast<std::int32_t>(i % 3);
    const auto res = gradcheck(
        {logits}, [&]() { return nn::cross_entropy(logits, labels, 255).value; }, 27, 1e-6,
        rng);
    CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("argmax ties resolve to the lowest class id") {
    nn::Tensor<float> logits({1, 3, 1, 1}, 1.0f);
    const auto m = nn::argmax_channels(logits);
    CHECK(m[0] == 0);
}

TEST_CASE("no-grad mode records nothing") {
    std::mt19937_64 rng(18);
    auto x = nn::make_var(random_tensor<float>({1, 1, 4, 4}, rng), true);
    nn::NoGradGuard guard;
    auto y = nn::relu(x);
    CHECK_FALSE(y->requires_grad);
    CHECK(y->parents.empty());
}
