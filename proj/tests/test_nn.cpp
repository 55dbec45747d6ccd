#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "pmac/bits.hpp"
#include "pmac/nn.hpp"
#include "pmac/oracle.hpp"
#include "reference_oracles.hpp"

using namespace pmac;

TEST_CASE("idx files round trip bit-exactly")
{
    IdxImages img;
    img.count = 3;
    img.rows = 4;
    img.cols = 5;
    SplitMix rng(0x1D8);
    for (int i = 0; i < 60; ++i) img.pixels.push_back(static_cast<uint8_t>(rng.next()));
    IdxLabels lab;
    lab.labels = {7, 0, 3};

    write_idx_images("idx_rt_images.tmp", img);
    write_idx_labels("idx_rt_labels.tmp", lab);
    IdxImages img2 = read_idx_images("idx_rt_images.tmp");
    IdxLabels lab2 = read_idx_labels("idx_rt_labels.tmp");
    CHECK(img2.count == img.count);
    CHECK(img2.rows == img.rows);
    CHECK(img2.cols == img.cols);
    CHECK(img2.pixels == img.pixels);
    CHECK(lab2.labels == lab.labels);
    std::remove("idx_rt_images.tmp");
    std::remove("idx_rt_labels.tmp");

    CHECK_THROWS(read_idx_images("does_not_exist.idx"));
}

TEST_CASE("model container round trips")
{
    Model m;
    LayerSpec conv;
    conv.kind = LayerKind::Conv2d;
    conv.precision = PositFormat::p8;
    conv.in_ch = 1;
    conv.out_ch = 2;
    conv.kh = conv.kw = 3;
    conv.stride = 1;
    conv.pad = 0;
    for (int i = 0; i < 18; ++i) conv.weights.push_back(0.125f * static_cast<float>(i - 9));
    conv.bias = {0.5f, -0.25f};
    m.layers.push_back(conv);
    LayerSpec relu_l;
    relu_l.kind = LayerKind::Relu;
    m.layers.push_back(relu_l);
    LayerSpec flat_l;
    flat_l.kind = LayerKind::Flatten;
    m.layers.push_back(flat_l);
    LayerSpec dense;
    dense.kind = LayerKind::Dense;
    dense.precision = PositFormat::p16;
    dense.in_features = 8;
    dense.out_features = 4;
    dense.weights.assign(32, 0.0625f);
    dense.bias.assign(4, -1.0f);
    m.layers.push_back(dense);

    save_model("model_rt.tmp", m);
    Model m2 = load_model("model_rt.tmp");
    std::remove("model_rt.tmp");

    REQUIRE(m2.layers.size() == m.layers.size());
    CHECK(m2.layers[0].kind == LayerKind::Conv2d);
    CHECK(m2.layers[0].precision == PositFormat::p8);
    CHECK(m2.layers[0].weights == m.layers[0].weights);
    CHECK(m2.layers[0].bias == m.layers[0].bias);
    CHECK(m2.layers[3].precision == PositFormat::p16);
    CHECK(m2.layers[3].weights == m.layers[3].weights);

    CHECK_THROWS(load_model("no_such_model.pmdl"));
}

TEST_CASE("quantize spec examples")
{
    RealTensor t{Shape{{3}}, {0.0, 1.0, 0.3}};
    PositTensor q = quantize(t, PositFormat::p8);
    CHECK(q.words[0] == 0x00);
    CHECK(q.words[1] == 0x40);
    CHECK(q.words[2] == refo::enumerate_nearest(Dyadic::from_double(0.3), PositFormat::p8));

    size_t bad = 0;
    RealTensor inf{Shape{{2}}, {1.0 / 0.0, 0.0 / 0.0}};
    PositTensor qi = quantize(inf, PositFormat::p8, &bad);
    CHECK(bad == 2);
    CHECK(qi.words[0] == 0x80);
    CHECK(qi.words[1] == 0x80);
}

TEST_CASE("quantize matches the enumeration oracle on random reals")
{
    SplitMix rng(0xDA7A);
    for (int i = 0; i < 5000; ++i) {
        double v = std::ldexp(static_cast<double>(static_cast<int64_t>(rng.next())),
                              -40 - static_cast<int>(rng.below(30)));
        RealTensor t{Shape{{1}}, {v}};
        for (PositFormat fmt : {PositFormat::p8, PositFormat::p16}) {
            REQUIRE(quantize(t, fmt).words[0] ==
                    refo::enumerate_nearest(Dyadic::from_double(v), fmt));
        }
    }
}

TEST_CASE("dense with identity weights reproduces the quantized input")
{
    LayerSpec dense;
    dense.kind = LayerKind::Dense;
    dense.precision = PositFormat::p8;
    dense.in_features = 4;
    dense.out_features = 4;
    dense.weights.assign(16, 0.0f);
    for (int i = 0; i < 4; ++i) dense.weights[static_cast<size_t>(i) * 4 + i] = 1.0f;
    dense.bias.assign(4, 0.0f);

    RealTensor x{Shape{{4}}, {0.5, -2.0, 3.5, 0.3}};
    PositTensor qx = quantize(x, PositFormat::p8);
    PositTensor y = run_layer_posit(dense, qx, DotRoute::Engine);
    CHECK(y.words == qx.words);
}

TEST_CASE("1x2 dense dot: 2.0 + 3.0 = 5.0")
{
    LayerSpec dense;
    dense.kind = LayerKind::Dense;
    dense.precision = PositFormat::p8;
    dense.in_features = 2;
    dense.out_features = 1;
    dense.weights = {1.0f, 1.0f};
    dense.bias = {0.0f};

    RealTensor x{Shape{{2}}, {2.0, 3.0}};
    PositTensor y = run_layer_posit(dense, quantize(x, PositFormat::p8), DotRoute::Engine);
    REQUIRE(y.words.size() == 1);
    CHECK(y.words[0] == 0x72);  // 5.0
    CHECK(to_real(PositWord{y.words[0], PositFormat::p8}).to_fraction_string() == "5");
}

TEST_CASE("relu zeroes every negative posit and keeps NaR")
{
    LayerSpec relu;
    relu.kind = LayerKind::Relu;
    PositTensor t{Shape{{256}}, {}, PositFormat::p8};
    for (uint32_t b = 0; b <= 0xFF; ++b) t.words.push_back(b);
    PositTensor y = run_layer_posit(relu, t, DotRoute::Engine);
    for (uint32_t b = 0; b <= 0xFF; ++b) {
        if (b == 0x80) {
            CHECK(y.words[b] == 0x80);
        } else if (b & 0x80) {
            CHECK(y.words[b] == 0x00);
        } else {
            CHECK(y.words[b] == b);
        }
    }
}

TEST_CASE("maxpool picks the per-window value maximum")
{
    PositTensor t{Shape{{1, 2, 2}}, {}, PositFormat::p8};
    // 2.0, -3.0, 0.5, 1.0 -> max 2.0
    t.words = {0x60, twos_complement(0x68, PositFormat::p8), 0x20, 0x40};
    LayerSpec pool;
    pool.kind = LayerKind::MaxPool2x2;
    PositTensor y = run_layer_posit(pool, t, DotRoute::Engine);
    REQUIRE(y.words.size() == 1);
    CHECK(y.words[0] == 0x60);
}

TEST_CASE("engine route and reference route are bit-identical")
{
    SplitMix rng(0x1A7E);
    for (PositFormat fmt : {PositFormat::p8, PositFormat::p16, PositFormat::p32}) {
        for (int trial = 0; trial < 12; ++trial) {
            LayerSpec dense;
            dense.kind = LayerKind::Dense;
            dense.precision = fmt;
            dense.in_features = 1 + static_cast<int>(rng.below(16));
            dense.out_features = 1 + static_cast<int>(rng.below(16));
            for (int i = 0; i < dense.in_features * dense.out_features; ++i)
                dense.weights.push_back(static_cast<float>(rng.range(-64, 64)) / 16.0f);
            for (int i = 0; i < dense.out_features; ++i)
                dense.bias.push_back(static_cast<float>(rng.range(-16, 16)) / 8.0f);

            RealTensor x{Shape{{dense.in_features}}, {}};
            for (int i = 0; i < dense.in_features; ++i)
                x.data.push_back(static_cast<double>(rng.range(-100, 100)) / 32.0);
            PositTensor qx = quantize(x, fmt);

            PositTensor via_engine = run_layer_posit(dense, qx, DotRoute::Engine);
            PositTensor via_ref = run_layer_posit(dense, qx, DotRoute::Reference);
            REQUIRE(via_engine.words == via_ref.words);
        }
    }

    // Same check through a convolution.
    LayerSpec conv;
    conv.kind = LayerKind::Conv2d;
    conv.precision = PositFormat::p16;
    conv.in_ch = 2;
    conv.out_ch = 3;
    conv.kh = conv.kw = 3;
    conv.stride = 1;
    conv.pad = 1;
    for (int i = 0; i < 54; ++i) conv.weights.push_back(static_cast<float>(rng.range(-32, 32)) / 16.0f);
    conv.bias = {0.5f, 0.0f, -1.5f};
    RealTensor x{Shape{{2, 6, 6}}, {}};
    for (int i = 0; i < 72; ++i) x.data.push_back(static_cast<double>(rng.range(-64, 64)) / 32.0);
    PositTensor qx = quantize(x, PositFormat::p16);
    CHECK(run_layer_posit(conv, qx, DotRoute::Engine).words ==
          run_layer_posit(conv, qx, DotRoute::Reference).words);
}

TEST_CASE("conv and dense real-path shapes")
{
    LayerSpec conv;
    conv.kind = LayerKind::Conv2d;
    conv.in_ch = 1;
    conv.out_ch = 2;
    conv.kh = conv.kw = 3;
    conv.stride = 1;
    conv.pad = 0;
    conv.weights.assign(18, 0.1f);
    conv.bias.assign(2, 0.0f);
    RealTensor x{Shape{{1, 6, 6}}, std::vector<double>(36, 1.0)};
    RealTensor y = run_layer_real(conv, x);
    CHECK(y.shape == Shape{{2, 4, 4}});
    CHECK(y.data[0] == doctest::Approx(0.9).epsilon(1e-6));

    LayerSpec bad = conv;
    bad.in_ch = 3;
    CHECK_THROWS_AS(run_layer_real(bad, x), std::invalid_argument);
}

TEST_CASE("evaluate: argmax ties, determinism, bad sample counts")
{
    // Tiny synthetic dataset: 8 samples, labels cycling 0,1,2,0,...
    IdxImages images;
    images.count = 8;
    images.rows = 4;
    images.cols = 4;
    SplitMix rng(0xE5A1);
    for (int i = 0; i < 8 * 16; ++i) images.pixels.push_back(static_cast<uint8_t>(rng.next()));
    IdxLabels labels;
    for (int i = 0; i < 8; ++i) labels.labels.push_back(static_cast<uint8_t>(i % 3));

    Model zero;
    LayerSpec flat_l;
    flat_l.kind = LayerKind::Flatten;
    zero.layers.push_back(flat_l);
    LayerSpec dense;
    dense.kind = LayerKind::Dense;
    dense.precision = PositFormat::p8;
    dense.in_features = 16;
    dense.out_features = 10;
    dense.weights.assign(160, 0.0f);
    dense.bias.assign(10, 0.0f);
    zero.layers.push_back(dense);

    EvalConfig cfg;
    cfg.parallel = false;
    CHECK_THROWS_AS(evaluate(zero, images, labels, 0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(evaluate(zero, images, labels, 9, cfg), std::invalid_argument);

    // All-zero weights: every logit is zero, ties break to class 0, so
    // accuracy equals class-0 prevalence.
    EvalResult r = evaluate(zero, images, labels, 8, cfg);
    CHECK(r.correct == 3);  // labels 0 at samples 0,3,6
    CHECK(r.per_class[0][1] == 3);
    CHECK(r.per_class[1][1] == 0);

    // Determinism incl. the float path and parallel mode.
    EvalConfig par = cfg;
    par.parallel = true;
    EvalResult r2 = evaluate(zero, images, labels, 8, par);
    CHECK(r2.correct == r.correct);
    EvalConfig flt = cfg;
    flt.use_float = true;
    EvalResult rf1 = evaluate(zero, images, labels, 8, flt);
    EvalResult rf2 = evaluate(zero, images, labels, 8, flt);
    CHECK(rf1.correct == rf2.correct);
    CHECK(rf1.correct == 3);
}

TEST_CASE("cross-format activation conversion is value-nearest")
{
    // A p16 activation tensor feeding a p8 layer requantizes by value.
    LayerSpec dense;
    dense.kind = LayerKind::Dense;
    dense.precision = PositFormat::p8;
    dense.in_features = 1;
    dense.out_features = 1;
    dense.weights = {1.0f};
    dense.bias = {0.0f};

    PositTensor x16{Shape{{1}}, {}, PositFormat::p16};
    x16.words.push_back(quantize(RealTensor{Shape{{1}}, {0.3}}, PositFormat::p16).words[0]);
    PositTensor y = run_layer_posit(dense, x16, DotRoute::Engine);
    Dyadic v16 = to_real(PositWord{x16.words[0], PositFormat::p16});
    CHECK(y.words[0] == refo::enumerate_nearest(v16, PositFormat::p8));
}
