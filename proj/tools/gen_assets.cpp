// Generates the self-contained test assets: a deterministic synthetic
// digit-glyph dataset in IDX format and a small trained CNN in the model
// container, with the float64 baseline accuracy recorded alongside.
//
// Everything derives from one seed, so rebuilding the assets reproduces
// byte-identical files on any platform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmac/bits.hpp"
#include "pmac/idx.hpp"
#include "pmac/nn.hpp"

using namespace pmac;

namespace {

constexpr int kImage = 14;  // canvas side
constexpr int kGlyphW = 5, kGlyphH = 7;

const char* kGlyphs[10][kGlyphH] = {
    {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."},
    {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."},
    {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"},
    {".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."},
    {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."},
    {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."},
    {".###.", "#....", "####.", "#...#", "#...#", "#...#", ".###."},
    {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."},
    {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."},
    {".###.", "#...#", "#...#", ".####", "....#", "....#", ".###."},
};

void render_sample(int label, SplitMix& rng, uint8_t* out)
{
    std::memset(out, 0, kImage * kImage);
    int ox = 4 + static_cast<int>(rng.range(-2, 2));
    int oy = 3 + static_cast<int>(rng.range(-2, 2));
    int base = 150 + static_cast<int>(rng.below(90));

    for (int y = 0; y < kGlyphH; ++y) {
        for (int x = 0; x < kGlyphW; ++x) {
            if (kGlyphs[label][y][x] != '#') continue;
            int v = base + static_cast<int>(rng.range(-25, 25));
            if (rng.chance(1, 25)) v = v / 3;  // occasional weak pixel
            int py = oy + y, px = ox + x;
            out[py * kImage + px] = static_cast<uint8_t>(std::clamp(v, 0, 255));
        }
    }
    // Background speckle.
    for (int i = 0; i < kImage * kImage; ++i) {
        if (out[i] == 0) out[i] = static_cast<uint8_t>(rng.below(36));
    }
}

void make_dataset(uint64_t seed, int count, IdxImages& images, IdxLabels& labels)
{
    images.count = count;
    images.rows = images.cols = kImage;
    images.pixels.assign(static_cast<size_t>(count) * kImage * kImage, 0);
    labels.labels.resize(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        SplitMix rng(seed, static_cast<uint64_t>(i));
        int label = i % 10;  // balanced classes
        labels.labels[static_cast<size_t>(i)] = static_cast<uint8_t>(label);
        render_sample(label, rng, images.pixels.data() + static_cast<size_t>(i) * kImage * kImage);
    }
}

// ---------------------------------------------------------------- trainer --
// Fixed architecture, plain SGD with momentum in double precision:
//   conv 8@3x3 - relu - pool2 - conv 16@3x3 - relu - pool2 - flatten
//   - dense 32 - relu - dense 10 - softmax cross-entropy

struct Net
{
    // conv1: [8][1][3][3], conv2: [16][8][3][3], d1: [32][64], d2: [10][32]
    std::vector<double> c1w, c1b, c2w, c2b, d1w, d1b, d2w, d2b;

    static constexpr int C1 = 8, C2 = 16, D1 = 32, D2 = 10;
    static constexpr int S1 = kImage - 2;      // 12
    static constexpr int P1 = S1 / 2;          // 6
    static constexpr int S2 = P1 - 2;          // 4
    static constexpr int P2 = S2 / 2;          // 2
    static constexpr int FLAT = C2 * P2 * P2;  // 64

    void init(SplitMix& rng)
    {
        auto randn = [&rng]() {
            // Box-Muller on splitmix uniforms.
            double u1 = (static_cast<double>(rng.next() >> 11) + 0.5) / 9007199254740992.0;
            double u2 = (static_cast<double>(rng.next() >> 11) + 0.5) / 9007199254740992.0;
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        };
        auto fill = [&](std::vector<double>& v, size_t n, double scale) {
            v.resize(n);
            for (auto& x : v) x = randn() * scale;
        };
        fill(c1w, C1 * 9, std::sqrt(2.0 / 9.0));
        c1b.assign(C1, 0.0);
        fill(c2w, static_cast<size_t>(C2) * C1 * 9, std::sqrt(2.0 / (C1 * 9.0)));
        c2b.assign(C2, 0.0);
        fill(d1w, static_cast<size_t>(D1) * FLAT, std::sqrt(2.0 / FLAT));
        d1b.assign(D1, 0.0);
        fill(d2w, static_cast<size_t>(D2) * D1, std::sqrt(2.0 / D1));
        d2b.assign(D2, 0.0);
    }
};

struct Activations
{
    std::vector<double> in;  // kImage^2
    std::vector<double> a1, p1;
    std::vector<int> p1_idx;
    std::vector<double> a2, p2;
    std::vector<int> p2_idx;
    std::vector<double> h, logits, probs;
};

void forward(const Net& net, const double* img, Activations& A)
{
    A.in.assign(img, img + kImage * kImage);
    A.a1.assign(Net::C1 * Net::S1 * Net::S1, 0.0);
    for (int c = 0; c < Net::C1; ++c)
        for (int y = 0; y < Net::S1; ++y)
            for (int x = 0; x < Net::S1; ++x) {
                double s = net.c1b[c];
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx)
                        s += net.c1w[(c * 3 + ky) * 3 + kx] * img[(y + ky) * kImage + x + kx];
                A.a1[(c * Net::S1 + y) * Net::S1 + x] = std::max(s, 0.0);
            }

    A.p1.assign(Net::C1 * Net::P1 * Net::P1, 0.0);
    A.p1_idx.assign(A.p1.size(), 0);
    for (int c = 0; c < Net::C1; ++c)
        for (int y = 0; y < Net::P1; ++y)
            for (int x = 0; x < Net::P1; ++x) {
                int besti = ((c * Net::S1 + 2 * y) * Net::S1) + 2 * x;
                double best = A.a1[besti];
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        int i = (c * Net::S1 + 2 * y + dy) * Net::S1 + 2 * x + dx;
                        if (A.a1[i] > best) { best = A.a1[i]; besti = i; }
                    }
                A.p1[(c * Net::P1 + y) * Net::P1 + x] = best;
                A.p1_idx[(c * Net::P1 + y) * Net::P1 + x] = besti;
            }

    A.a2.assign(Net::C2 * Net::S2 * Net::S2, 0.0);
    for (int c = 0; c < Net::C2; ++c)
        for (int y = 0; y < Net::S2; ++y)
            for (int x = 0; x < Net::S2; ++x) {
                double s = net.c2b[c];
                for (int ic = 0; ic < Net::C1; ++ic)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx)
                            s += net.c2w[((c * Net::C1 + ic) * 3 + ky) * 3 + kx] *
                                 A.p1[(ic * Net::P1 + y + ky) * Net::P1 + x + kx];
                A.a2[(c * Net::S2 + y) * Net::S2 + x] = std::max(s, 0.0);
            }

    A.p2.assign(Net::FLAT, 0.0);
    A.p2_idx.assign(A.p2.size(), 0);
    for (int c = 0; c < Net::C2; ++c)
        for (int y = 0; y < Net::P2; ++y)
            for (int x = 0; x < Net::P2; ++x) {
                int besti = (c * Net::S2 + 2 * y) * Net::S2 + 2 * x;
                double best = A.a2[besti];
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        int i = (c * Net::S2 + 2 * y + dy) * Net::S2 + 2 * x + dx;
                        if (A.a2[i] > best) { best = A.a2[i]; besti = i; }
                    }
                A.p2[(c * Net::P2 + y) * Net::P2 + x] = best;
                A.p2_idx[(c * Net::P2 + y) * Net::P2 + x] = besti;
            }

    A.h.assign(Net::D1, 0.0);
    for (int o = 0; o < Net::D1; ++o) {
        double s = net.d1b[o];
        for (int i = 0; i < Net::FLAT; ++i) s += net.d1w[o * Net::FLAT + i] * A.p2[i];
        A.h[o] = std::max(s, 0.0);
    }
    A.logits.assign(Net::D2, 0.0);
    for (int o = 0; o < Net::D2; ++o) {
        double s = net.d2b[o];
        for (int i = 0; i < Net::D1; ++i) s += net.d2w[o * Net::D1 + i] * A.h[i];
        A.logits[o] = s;
    }
    double mx = *std::max_element(A.logits.begin(), A.logits.end());
    double z = 0;
    A.probs.assign(Net::D2, 0.0);
    for (int o = 0; o < Net::D2; ++o) z += (A.probs[o] = std::exp(A.logits[o] - mx));
    for (auto& p : A.probs) p /= z;
}

struct Grads
{
    std::vector<double> c1w, c1b, c2w, c2b, d1w, d1b, d2w, d2b;
    void zero_like(const Net& n)
    {
        c1w.assign(n.c1w.size(), 0.0);
        c1b.assign(n.c1b.size(), 0.0);
        c2w.assign(n.c2w.size(), 0.0);
        c2b.assign(n.c2b.size(), 0.0);
        d1w.assign(n.d1w.size(), 0.0);
        d1b.assign(n.d1b.size(), 0.0);
        d2w.assign(n.d2w.size(), 0.0);
        d2b.assign(n.d2b.size(), 0.0);
    }
};

void backward(const Net& net, const Activations& A, int label, Grads& g)
{
    std::vector<double> dlogits(Net::D2);
    for (int o = 0; o < Net::D2; ++o) dlogits[o] = A.probs[o] - (o == label ? 1.0 : 0.0);

    std::vector<double> dh(Net::D1, 0.0);
    for (int o = 0; o < Net::D2; ++o) {
        g.d2b[o] += dlogits[o];
        for (int i = 0; i < Net::D1; ++i) {
            g.d2w[o * Net::D1 + i] += dlogits[o] * A.h[i];
            dh[i] += dlogits[o] * net.d2w[o * Net::D1 + i];
        }
    }
    for (int i = 0; i < Net::D1; ++i)
        if (A.h[i] <= 0.0) dh[i] = 0.0;

    std::vector<double> dp2(Net::FLAT, 0.0);
    for (int o = 0; o < Net::D1; ++o) {
        g.d1b[o] += dh[o];
        for (int i = 0; i < Net::FLAT; ++i) {
            g.d1w[o * Net::FLAT + i] += dh[o] * A.p2[i];
            dp2[i] += dh[o] * net.d1w[o * Net::FLAT + i];
        }
    }

    std::vector<double> da2(Net::C2 * Net::S2 * Net::S2, 0.0);
    for (size_t i = 0; i < dp2.size(); ++i) da2[static_cast<size_t>(A.p2_idx[i])] = dp2[i];
    for (size_t i = 0; i < da2.size(); ++i)
        if (A.a2[i] <= 0.0) da2[i] = 0.0;

    std::vector<double> dp1(Net::C1 * Net::P1 * Net::P1, 0.0);
    for (int c = 0; c < Net::C2; ++c)
        for (int y = 0; y < Net::S2; ++y)
            for (int x = 0; x < Net::S2; ++x) {
                double d = da2[(c * Net::S2 + y) * Net::S2 + x];
                if (d == 0.0) continue;
                g.c2b[c] += d;
                for (int ic = 0; ic < Net::C1; ++ic)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            size_t wi = ((static_cast<size_t>(c) * Net::C1 + ic) * 3 + ky) * 3 + kx;
                            int pi = (ic * Net::P1 + y + ky) * Net::P1 + x + kx;
                            g.c2w[wi] += d * A.p1[static_cast<size_t>(pi)];
                            dp1[static_cast<size_t>(pi)] += d * net.c2w[wi];
                        }
            }

    std::vector<double> da1(Net::C1 * Net::S1 * Net::S1, 0.0);
    for (size_t i = 0; i < dp1.size(); ++i) da1[static_cast<size_t>(A.p1_idx[i])] = dp1[i];
    for (size_t i = 0; i < da1.size(); ++i)
        if (A.a1[i] <= 0.0) da1[i] = 0.0;

    for (int c = 0; c < Net::C1; ++c)
        for (int y = 0; y < Net::S1; ++y)
            for (int x = 0; x < Net::S1; ++x) {
                double d = da1[(c * Net::S1 + y) * Net::S1 + x];
                if (d == 0.0) continue;
                g.c1b[c] += d;
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx)
                        g.c1w[(c * 3 + ky) * 3 + kx] += d * A.in[(y + ky) * kImage + x + kx];
            }
}

void sgd_step(std::vector<double>& w, std::vector<double>& m, const std::vector<double>& g,
              double lr, double momentum, double decay, int batch)
{
    for (size_t i = 0; i < w.size(); ++i) {
        double grad = g[i] / batch + decay * w[i];
        m[i] = momentum * m[i] - lr * grad;
        w[i] += m[i];
    }
}

Model to_model(const Net& net)
{
    Model m;
    LayerSpec c1;
    c1.kind = LayerKind::Conv2d;
    c1.precision = PositFormat::p8;
    c1.in_ch = 1;
    c1.out_ch = Net::C1;
    c1.kh = c1.kw = 3;
    c1.stride = 1;
    c1.pad = 0;
    for (double w : net.c1w) c1.weights.push_back(static_cast<float>(w));
    for (double b : net.c1b) c1.bias.push_back(static_cast<float>(b));
    m.layers.push_back(c1);
    LayerSpec relu;
    relu.kind = LayerKind::Relu;
    m.layers.push_back(relu);
    LayerSpec pool;
    pool.kind = LayerKind::MaxPool2x2;
    m.layers.push_back(pool);

    LayerSpec c2;
    c2.kind = LayerKind::Conv2d;
    c2.precision = PositFormat::p8;
    c2.in_ch = Net::C1;
    c2.out_ch = Net::C2;
    c2.kh = c2.kw = 3;
    c2.stride = 1;
    c2.pad = 0;
    for (double w : net.c2w) c2.weights.push_back(static_cast<float>(w));
    for (double b : net.c2b) c2.bias.push_back(static_cast<float>(b));
    m.layers.push_back(c2);
    m.layers.push_back(relu);
    m.layers.push_back(pool);
    LayerSpec flat;
    flat.kind = LayerKind::Flatten;
    m.layers.push_back(flat);

    LayerSpec d1;
    d1.kind = LayerKind::Dense;
    d1.precision = PositFormat::p16;
    d1.in_features = Net::FLAT;
    d1.out_features = Net::D1;
    for (double w : net.d1w) d1.weights.push_back(static_cast<float>(w));
    for (double b : net.d1b) d1.bias.push_back(static_cast<float>(b));
    m.layers.push_back(d1);
    m.layers.push_back(relu);

    LayerSpec d2;
    d2.kind = LayerKind::Dense;
    d2.precision = PositFormat::p32;
    d2.in_features = Net::D1;
    d2.out_features = Net::D2;
    for (double w : net.d2w) d2.weights.push_back(static_cast<float>(w));
    for (double b : net.d2b) d2.bias.push_back(static_cast<float>(b));
    m.layers.push_back(d2);
    return m;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"generate the desk-scale dataset and trained model assets"};
    std::string out_dir = "assets";
    uint64_t seed = 20240811;
    int train_count = 4000, test_count = 2000, epochs = 14;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--train", train_count, "training samples");
    app.add_option("--test", test_count, "test samples");
    app.add_option("--epochs", epochs, "training epochs");
    CLI11_PARSE(app, argc, argv);

    std::filesystem::create_directories(out_dir);

    IdxImages train_images, test_images;
    IdxLabels train_labels, test_labels;
    make_dataset(seed * 2 + 1, train_count, train_images, train_labels);
    make_dataset(seed * 2 + 2, test_count, test_images, test_labels);
    write_idx_images(out_dir + "/train-images.idx3-ubyte", train_images);
    write_idx_labels(out_dir + "/train-labels.idx1-ubyte", train_labels);
    write_idx_images(out_dir + "/test-images.idx3-ubyte", test_images);
    write_idx_labels(out_dir + "/test-labels.idx1-ubyte", test_labels);
    std::cout << "dataset: " << train_count << " train / " << test_count << " test, " << kImage
              << "x" << kImage << "\n";

    Net net;
    SplitMix init_rng(seed ^ 0xA11CE);
    net.init(init_rng);
    Net vel;  // momentum buffers, same shapes
    vel = net;
    for (auto* v : {&vel.c1w, &vel.c1b, &vel.c2w, &vel.c2b, &vel.d1w, &vel.d1b, &vel.d2w, &vel.d2b})
        std::fill(v->begin(), v->end(), 0.0);

    std::vector<int> order(static_cast<size_t>(train_count));
    for (int i = 0; i < train_count; ++i) order[static_cast<size_t>(i)] = i;

    const int batch = 32;
    const double momentum = 0.9, decay = 1e-4;
    SplitMix shuffle_rng(seed ^ 0x54AFF1E);
    Activations A;
    Grads g;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        double lr = 0.05 * (epoch < epochs / 2 ? 1.0 : (epoch < 3 * epochs / 4 ? 0.3 : 0.1));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double loss = 0;
        int correct = 0;
        for (int start = 0; start + batch <= train_count; start += batch) {
            g.zero_like(net);
            for (int bi = 0; bi < batch; ++bi) {
                int s = order[static_cast<size_t>(start + bi)];
                std::vector<double> img(kImage * kImage);
                const uint8_t* px = train_images.image(s);
                for (int p = 0; p < kImage * kImage; ++p) img[static_cast<size_t>(p)] = px[p] / 255.0;
                forward(net, img.data(), A);
                int label = train_labels.labels[static_cast<size_t>(s)];
                loss -= std::log(std::max(A.probs[static_cast<size_t>(label)], 1e-12));
                int pred = static_cast<int>(std::max_element(A.probs.begin(), A.probs.end()) -
                                            A.probs.begin());
                if (pred == label) ++correct;
                backward(net, A, label, g);
            }
            sgd_step(net.c1w, vel.c1w, g.c1w, lr, momentum, decay, batch);
            sgd_step(net.c1b, vel.c1b, g.c1b, lr, momentum, 0.0, batch);
            sgd_step(net.c2w, vel.c2w, g.c2w, lr, momentum, decay, batch);
            sgd_step(net.c2b, vel.c2b, g.c2b, lr, momentum, 0.0, batch);
            sgd_step(net.d1w, vel.d1w, g.d1w, lr, momentum, decay, batch);
            sgd_step(net.d1b, vel.d1b, g.d1b, lr, momentum, 0.0, batch);
            sgd_step(net.d2w, vel.d2w, g.d2w, lr, momentum, decay, batch);
            sgd_step(net.d2b, vel.d2b, g.d2b, lr, momentum, 0.0, batch);
        }
        std::cout << "epoch " << epoch << ": loss " << loss / train_count << ", train acc "
                  << 100.0 * correct / (train_count / batch * batch) << "%\n";
    }

    Model model = to_model(net);
    save_model(out_dir + "/model.pmdl", model);

    // Record the baseline through the shipped float path on the saved f32
    // weights, so `infer` reproduces this number exactly.
    Model reloaded = load_model(out_dir + "/model.pmdl");
    EvalConfig fcfg;
    fcfg.use_float = true;
    EvalResult base = evaluate(reloaded, test_images, test_labels, test_count, fcfg);
    double pct = 100.0 * base.accuracy();
    std::cout << "float64 baseline on saved weights: " << base.correct << "/" << base.total
              << " (" << pct << "%)\n";

    std::ofstream meta(out_dir + "/model.meta");
    meta << "baseline_float64_accuracy_percent=" << pct << "\n";
    meta << "baseline_float64_correct=" << base.correct << "\n";
    meta << "test_samples=" << test_count << "\n";
    meta << "seed=" << seed << "\n";
    return 0;
}
