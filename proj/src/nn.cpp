#include "pmac/nn.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "pmac/engine.hpp"
#include "pmac/oracle.hpp"

namespace pmac {

namespace {

Mode mode_for(PositFormat fmt)
{
    return fmt == PositFormat::p8 ? Mode::P8 : fmt == PositFormat::p16 ? Mode::P16 : Mode::P32;
}

void require(bool ok, const char* what)
{
    if (!ok) throw std::invalid_argument(what);
}

// Signed n-bit pattern order is exact posit value order; NaR handled first.
int32_t signed_pattern(uint32_t bits, PositFormat fmt)
{
    uint32_t sign = bits & fmt.nar_pattern();
    return static_cast<int32_t>(bits | (sign ? ~fmt.word_mask() : 0));
}

uint32_t convert_word(uint32_t bits, PositFormat from, PositFormat to)
{
    if (from == to) return bits;
    PositWord w{bits, from};
    if (w.is_nar()) return to.nar_pattern();
    if (w.is_zero()) return 0;
    return nearest_posit(to_real(w), to).bits;
}

PositTensor convert_tensor(const PositTensor& t, PositFormat to)
{
    if (t.fmt == to) return t;
    PositTensor out{t.shape, {}, to};
    out.words.reserve(t.words.size());
    for (uint32_t w : t.words) out.words.push_back(convert_word(w, t.fmt, to));
    return out;
}

}  // namespace

PositTensor quantize(const RealTensor& t, PositFormat fmt, size_t* non_finite)
{
    PositTensor out{t.shape, {}, fmt};
    out.words.reserve(t.data.size());
    size_t bad = 0;
    for (double v : t.data) {
        if (!std::isfinite(v)) {
            ++bad;
            out.words.push_back(fmt.nar_pattern());
        } else {
            out.words.push_back(nearest_posit(Dyadic::from_double(v), fmt).bits);
        }
    }
    if (non_finite) *non_finite = bad;
    return out;
}

RealTensor dequantize(const PositTensor& t)
{
    RealTensor out{t.shape, {}};
    out.data.reserve(t.words.size());
    for (uint32_t w : t.words) {
        PositWord p{w, t.fmt};
        require(!p.is_nar(), "dequantize: NaR element");
        out.data.push_back(to_real(p).to_double_approx());
    }
    return out;
}

// -------------------------------------------------------------- forward --

namespace {

// Computes `count` outputs; pairs_of(out_idx, emit) yields the (w, x)
// pattern pairs (bias first, against 1.0) for that output. Groups of
// lanes(mode) outputs share engine issues; the reference route accumulates
// the same pairs exactly.
template <typename PairSource>
std::vector<uint32_t> dot_batch(PositFormat fmt, DotRoute route, int count, PairSource&& pairs_of)
{
    const Mode mode = mode_for(fmt);
    const int nl = lanes(mode);
    std::vector<uint32_t> out(static_cast<size_t>(count));

    if (route == DotRoute::Reference) {
        for (int o = 0; o < count; ++o) {
            RefAccumulator acc(fmt);
            pairs_of(o, [&acc, fmt](uint32_t w, uint32_t x) {
                acc.add(PositWord{w, fmt}, PositWord{x, fmt});
            });
            out[static_cast<size_t>(o)] = acc.read().bits;
        }
        return out;
    }

    MacEngine engine(mode);
    std::vector<std::pair<uint32_t, uint32_t>> lane_pairs[4];
    for (int base = 0; base < count; base += nl) {
        int group = std::min(nl, count - base);
        size_t longest = 0;
        for (int j = 0; j < group; ++j) {
            lane_pairs[j].clear();
            pairs_of(base + j, [&lane_pairs, j](uint32_t w, uint32_t x) {
                lane_pairs[j].emplace_back(w, x);
            });
            longest = std::max(longest, lane_pairs[j].size());
        }
        engine.reset(mode);
        for (size_t i = 0; i < longest; ++i) {
            SimdWord a, b;
            LaneMask en = 0;
            for (int j = 0; j < group; ++j) {
                if (i >= lane_pairs[j].size()) continue;
                a = set_lane(a, j, mode, lane_pairs[j][i].first);
                b = set_lane(b, j, mode, lane_pairs[j][i].second);
                en |= LaneMask{1} << j;
            }
            engine.issue_quiet(a, b, en);
        }
        SimdWord r = engine.readout();
        for (int j = 0; j < group; ++j) out[static_cast<size_t>(base + j)] = get_lane(r, j, mode);
    }
    return out;
}

struct PreparedParams
{
    std::vector<uint32_t> weights;
    std::vector<uint32_t> bias;
};

PreparedParams prepare_params(const LayerSpec& layer, PositFormat fmt)
{
    PreparedParams p;
    p.weights.reserve(layer.weights.size());
    for (float w : layer.weights)
        p.weights.push_back(nearest_posit(Dyadic::from_double(w), fmt).bits);
    p.bias.reserve(layer.bias.size());
    for (float b : layer.bias)
        p.bias.push_back(nearest_posit(Dyadic::from_double(b), fmt).bits);
    return p;
}

PositTensor dense_posit(const LayerSpec& layer, const PreparedParams& params,
                        const PositTensor& x, DotRoute route)
{
    PositFormat fmt = layer.precision;
    require(x.shape.dims.size() == 1 && x.shape.dims[0] == layer.in_features,
            "dense: input shape mismatch");
    const uint32_t one = fmt.one_pattern();
    auto pairs_of = [&](int o, auto&& emit) {
        emit(params.bias[static_cast<size_t>(o)], one);
        const size_t row = static_cast<size_t>(o) * layer.in_features;
        for (int i = 0; i < layer.in_features; ++i)
            emit(params.weights[row + static_cast<size_t>(i)], x.words[static_cast<size_t>(i)]);
    };
    PositTensor out{Shape{{layer.out_features}}, {}, fmt};
    out.words = dot_batch(fmt, route, layer.out_features, pairs_of);
    return out;
}

PositTensor conv2d_posit(const LayerSpec& layer, const PreparedParams& params,
                         const PositTensor& x, DotRoute route)
{
    PositFormat fmt = layer.precision;
    require(x.shape.dims.size() == 3, "conv2d: expected {C,H,W} input");
    const int C = x.shape.dims[0], H = x.shape.dims[1], W = x.shape.dims[2];
    require(C == layer.in_ch, "conv2d: channel mismatch");
    const int OH = (H + 2 * layer.pad - layer.kh) / layer.stride + 1;
    const int OW = (W + 2 * layer.pad - layer.kw) / layer.stride + 1;
    require(OH > 0 && OW > 0, "conv2d: kernel larger than input");

    PositTensor out{Shape{{layer.out_ch, OH, OW}}, {}, fmt};
    out.words.resize(static_cast<size_t>(layer.out_ch) * OH * OW);
    const uint32_t one = fmt.one_pattern();

    // Lane-batch across output channels at a fixed spatial position.
    for (int oy = 0; oy < OH; ++oy) {
        for (int ox = 0; ox < OW; ++ox) {
            auto pairs_of = [&](int oc, auto&& emit) {
                emit(params.bias[static_cast<size_t>(oc)], one);
                for (int ic = 0; ic < C; ++ic) {
                    for (int ky = 0; ky < layer.kh; ++ky) {
                        int iy = oy * layer.stride + ky - layer.pad;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < layer.kw; ++kx) {
                            int ix = ox * layer.stride + kx - layer.pad;
                            if (ix < 0 || ix >= W) continue;
                            size_t wi = ((static_cast<size_t>(oc) * C + ic) * layer.kh + ky) *
                                            static_cast<size_t>(layer.kw) + kx;
                            size_t xi = (static_cast<size_t>(ic) * H + iy) * static_cast<size_t>(W) + ix;
                            emit(params.weights[wi], x.words[xi]);
                        }
                    }
                }
            };
            auto vals = dot_batch(fmt, route, layer.out_ch, pairs_of);
            for (int oc = 0; oc < layer.out_ch; ++oc)
                out.words[(static_cast<size_t>(oc) * OH + oy) * static_cast<size_t>(OW) + ox] =
                    vals[static_cast<size_t>(oc)];
        }
    }
    return out;
}

PositTensor relu_posit(const PositTensor& x)
{
    PositTensor out = x;
    for (auto& w : out.words) {
        if (w == x.fmt.nar_pattern()) continue;
        if (w & x.fmt.nar_pattern()) w = 0;  // negative
    }
    return out;
}

PositTensor maxpool_posit(const PositTensor& x)
{
    require(x.shape.dims.size() == 3, "maxpool: expected {C,H,W} input");
    const int C = x.shape.dims[0], H = x.shape.dims[1], W = x.shape.dims[2];
    require(H % 2 == 0 && W % 2 == 0, "maxpool: odd spatial size");
    PositTensor out{Shape{{C, H / 2, W / 2}}, {}, x.fmt};
    out.words.resize(static_cast<size_t>(C) * (H / 2) * (W / 2));
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < H / 2; ++y) {
            for (int xo = 0; xo < W / 2; ++xo) {
                uint32_t best = 0;
                bool nar = false, first = true;
                for (int dy = 0; dy < 2 && !nar; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        uint32_t w = x.words[(static_cast<size_t>(c) * H + 2 * y + dy) *
                                                 static_cast<size_t>(W) + 2 * xo + dx];
                        if (w == x.fmt.nar_pattern()) {
                            nar = true;
                            break;
                        }
                        if (first || signed_pattern(w, x.fmt) > signed_pattern(best, x.fmt)) {
                            best = w;
                            first = false;
                        }
                    }
                }
                out.words[(static_cast<size_t>(c) * (H / 2) + y) * static_cast<size_t>(W / 2) + xo] =
                    nar ? x.fmt.nar_pattern() : best;
            }
        }
    }
    return out;
}

RealTensor dense_real(const LayerSpec& layer, const RealTensor& x)
{
    require(x.shape.dims.size() == 1 && x.shape.dims[0] == layer.in_features,
            "dense: input shape mismatch");
    RealTensor out{Shape{{layer.out_features}}, std::vector<double>(static_cast<size_t>(layer.out_features))};
    for (int o = 0; o < layer.out_features; ++o) {
        double acc = layer.bias[static_cast<size_t>(o)];
        const size_t row = static_cast<size_t>(o) * layer.in_features;
        for (int i = 0; i < layer.in_features; ++i)
            acc += static_cast<double>(layer.weights[row + static_cast<size_t>(i)]) *
                   x.data[static_cast<size_t>(i)];
        out.data[static_cast<size_t>(o)] = acc;
    }
    return out;
}

RealTensor conv2d_real(const LayerSpec& layer, const RealTensor& x)
{
    require(x.shape.dims.size() == 3, "conv2d: expected {C,H,W} input");
    const int C = x.shape.dims[0], H = x.shape.dims[1], W = x.shape.dims[2];
    require(C == layer.in_ch, "conv2d: channel mismatch");
    const int OH = (H + 2 * layer.pad - layer.kh) / layer.stride + 1;
    const int OW = (W + 2 * layer.pad - layer.kw) / layer.stride + 1;
    require(OH > 0 && OW > 0, "conv2d: kernel larger than input");

    RealTensor out{Shape{{layer.out_ch, OH, OW}},
                   std::vector<double>(static_cast<size_t>(layer.out_ch) * OH * OW)};
    for (int oc = 0; oc < layer.out_ch; ++oc) {
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                double acc = layer.bias[static_cast<size_t>(oc)];
                for (int ic = 0; ic < C; ++ic) {
                    for (int ky = 0; ky < layer.kh; ++ky) {
                        int iy = oy * layer.stride + ky - layer.pad;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < layer.kw; ++kx) {
                            int ix = ox * layer.stride + kx - layer.pad;
                            if (ix < 0 || ix >= W) continue;
                            size_t wi = ((static_cast<size_t>(oc) * C + ic) * layer.kh + ky) *
                                            static_cast<size_t>(layer.kw) + kx;
                            size_t xi = (static_cast<size_t>(ic) * H + iy) * static_cast<size_t>(W) + ix;
                            acc += static_cast<double>(layer.weights[wi]) * x.data[xi];
                        }
                    }
                }
                out.data[(static_cast<size_t>(oc) * OH + oy) * static_cast<size_t>(OW) + ox] = acc;
            }
        }
    }
    return out;
}

RealTensor maxpool_real(const RealTensor& x)
{
    require(x.shape.dims.size() == 3, "maxpool: expected {C,H,W} input");
    const int C = x.shape.dims[0], H = x.shape.dims[1], W = x.shape.dims[2];
    require(H % 2 == 0 && W % 2 == 0, "maxpool: odd spatial size");
    RealTensor out{Shape{{C, H / 2, W / 2}},
                   std::vector<double>(static_cast<size_t>(C) * (H / 2) * (W / 2))};
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < H / 2; ++y)
            for (int xo = 0; xo < W / 2; ++xo) {
                double best = x.data[(static_cast<size_t>(c) * H + 2 * y) * static_cast<size_t>(W) + 2 * xo];
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx)
                        best = std::max(best, x.data[(static_cast<size_t>(c) * H + 2 * y + dy) *
                                                         static_cast<size_t>(W) + 2 * xo + dx]);
                out.data[(static_cast<size_t>(c) * (H / 2) + y) * static_cast<size_t>(W / 2) + xo] = best;
            }
    return out;
}

}  // namespace

RealTensor run_layer_real(const LayerSpec& layer, const RealTensor& x)
{
    switch (layer.kind) {
        case LayerKind::Dense: return dense_real(layer, x);
        case LayerKind::Conv2d: return conv2d_real(layer, x);
        case LayerKind::Relu: {
            RealTensor out = x;
            for (auto& v : out.data) v = std::max(v, 0.0);
            return out;
        }
        case LayerKind::MaxPool2x2: return maxpool_real(x);
        case LayerKind::Flatten: return RealTensor{Shape{{x.shape.numel()}}, x.data};
    }
    throw std::logic_error("unreachable layer kind");
}

PositTensor run_layer_posit(const LayerSpec& layer, const PositTensor& x, DotRoute route)
{
    switch (layer.kind) {
        case LayerKind::Dense: {
            PositTensor xs = convert_tensor(x, layer.precision);
            return dense_posit(layer, prepare_params(layer, layer.precision), xs, route);
        }
        case LayerKind::Conv2d: {
            PositTensor xs = convert_tensor(x, layer.precision);
            return conv2d_posit(layer, prepare_params(layer, layer.precision), xs, route);
        }
        case LayerKind::Relu: return relu_posit(x);
        case LayerKind::MaxPool2x2: return maxpool_posit(x);
        case LayerKind::Flatten: return PositTensor{Shape{{x.shape.numel()}}, x.words, x.fmt};
    }
    throw std::logic_error("unreachable layer kind");
}

RealTensor forward_real(const Model& model, const RealTensor& input)
{
    RealTensor t = input;
    for (const auto& layer : model.layers) t = run_layer_real(layer, t);
    return t;
}

PositTensor forward_posit(const Model& model, const RealTensor& input,
                          std::optional<PositFormat> precision_override, DotRoute route)
{
    Model effective = model;
    if (precision_override) {
        for (auto& l : effective.layers) l.precision = *precision_override;
    }
    PositFormat first = PositFormat::p32;
    for (const auto& l : effective.layers) {
        if (l.kind == LayerKind::Dense || l.kind == LayerKind::Conv2d) {
            first = l.precision;
            break;
        }
    }
    PositTensor t = quantize(input, first);
    for (const auto& layer : effective.layers) t = run_layer_posit(layer, t, route);
    return t;
}

RealTensor image_input(const IdxImages& images, int index)
{
    RealTensor t{Shape{{1, images.rows, images.cols}}, {}};
    const uint8_t* px = images.image(index);
    t.data.reserve(static_cast<size_t>(images.rows) * images.cols);
    for (int i = 0; i < images.rows * images.cols; ++i)
        t.data.push_back(static_cast<double>(px[i]) / 255.0);
    return t;
}

namespace {

int argmax_lowest_real(const std::vector<double>& v)
{
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
    return best;
}

int argmax_lowest_posit(const PositTensor& t)
{
    int best = 0;
    for (int i = 1; i < static_cast<int>(t.words.size()); ++i) {
        uint32_t wi = t.words[static_cast<size_t>(i)];
        uint32_t wb = t.words[static_cast<size_t>(best)];
        if (wi == t.fmt.nar_pattern()) continue;  // NaR never wins
        if (wb == t.fmt.nar_pattern() || signed_pattern(wi, t.fmt) > signed_pattern(wb, t.fmt))
            best = i;
    }
    return best;
}

}  // namespace

EvalResult evaluate(const Model& model, const IdxImages& images, const IdxLabels& labels,
                    int n, const EvalConfig& cfg)
{
    require(n > 0, "evaluate: sample count must be positive");
    require(n <= images.count && static_cast<size_t>(n) <= labels.labels.size(),
            "evaluate: sample count exceeds dataset");

    Model effective = model;
    if (cfg.precision_override) {
        for (auto& l : effective.layers) l.precision = *cfg.precision_override;
    }

    // Posit runs quantize weights once and reuse a 256-entry input table
    // (pixel bytes are the only input values).
    std::vector<PreparedParams> prepared(effective.layers.size());
    std::array<uint32_t, 256> input_lut{};
    PositFormat first_fmt = PositFormat::p32;
    if (!cfg.use_float) {
        bool found = false;
        for (size_t li = 0; li < effective.layers.size(); ++li) {
            const auto& l = effective.layers[li];
            if (l.kind == LayerKind::Dense || l.kind == LayerKind::Conv2d) {
                prepared[li] = prepare_params(l, l.precision);
                if (!found) {
                    first_fmt = l.precision;
                    found = true;
                }
            }
        }
        for (int v = 0; v < 256; ++v)
            input_lut[static_cast<size_t>(v)] =
                nearest_posit(Dyadic::from_double(v / 255.0), first_fmt).bits;
    }

    std::vector<uint8_t> predicted(static_cast<size_t>(n));

#pragma omp parallel for schedule(dynamic, 8) if (cfg.parallel)
    for (int s = 0; s < n; ++s) {
        if (cfg.use_float) {
            RealTensor t = image_input(images, s);
            for (const auto& layer : effective.layers) t = run_layer_real(layer, t);
            predicted[static_cast<size_t>(s)] = static_cast<uint8_t>(argmax_lowest_real(t.data));
        } else {
            PositTensor t{Shape{{1, images.rows, images.cols}}, {}, first_fmt};
            const uint8_t* px = images.image(s);
            t.words.reserve(static_cast<size_t>(images.rows) * images.cols);
            for (int i = 0; i < images.rows * images.cols; ++i)
                t.words.push_back(input_lut[px[i]]);
            for (size_t li = 0; li < effective.layers.size(); ++li) {
                const auto& layer = effective.layers[li];
                switch (layer.kind) {
                    case LayerKind::Dense:
                        t = dense_posit(layer, prepared[li], convert_tensor(t, layer.precision),
                                        cfg.route);
                        break;
                    case LayerKind::Conv2d:
                        t = conv2d_posit(layer, prepared[li], convert_tensor(t, layer.precision),
                                         cfg.route);
                        break;
                    default: t = run_layer_posit(layer, t, cfg.route); break;
                }
            }
            predicted[static_cast<size_t>(s)] = static_cast<uint8_t>(argmax_lowest_posit(t));
        }
    }

    EvalResult result;
    result.total = static_cast<uint64_t>(n);
    int classes = 0;
    for (int s = 0; s < n; ++s) classes = std::max(classes, static_cast<int>(labels.labels[static_cast<size_t>(s)]) + 1);
    classes = std::max(classes, 10);
    result.per_class.assign(static_cast<size_t>(classes), {0, 0});
    for (int s = 0; s < n; ++s) {
        uint8_t truth = labels.labels[static_cast<size_t>(s)];
        ++result.per_class[truth][0];
        if (predicted[static_cast<size_t>(s)] == truth) {
            ++result.correct;
            ++result.per_class[truth][1];
        }
    }
    return result;
}

}  // namespace pmac
