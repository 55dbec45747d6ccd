#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmac/idx.hpp"
#include "pmac/posit.hpp"

namespace pmac {

struct Shape
{
    std::vector<int> dims;
    int numel() const
    {
        int n = 1;
        for (int d : dims) n *= d;
        return n;
    }
    bool operator==(const Shape&) const = default;
};

struct RealTensor
{
    Shape shape;
    std::vector<double> data;
};

// Quantized tensor: raw n-bit patterns plus the shared format tag.
struct PositTensor
{
    Shape shape;
    std::vector<uint32_t> words;
    PositFormat fmt = PositFormat::p32;
};

enum class LayerKind : uint8_t
{
    Dense = 0,
    Conv2d = 1,
    Relu = 2,
    MaxPool2x2 = 3,
    Flatten = 4,
};

struct LayerSpec
{
    LayerKind kind = LayerKind::Relu;
    PositFormat precision = PositFormat::p32;  // compute layers only
    // dense
    int in_features = 0;
    int out_features = 0;
    // conv2d (valid or zero padding, square stride)
    int in_ch = 0, out_ch = 0, kh = 0, kw = 0, stride = 1, pad = 0;
    // dense: [out][in] row-major; conv: [out_ch][in_ch][kh][kw]
    std::vector<float> weights;
    std::vector<float> bias;
};

struct Model
{
    std::vector<LayerSpec> layers;
};

// Self-describing little-endian container: "PMDL" magic, version, layer
// list (kind, precision tag, dims), then raw float32 payloads in layer
// order. Byte layout documented in the README.
Model load_model(const std::string& path);
void save_model(const std::string& path, const Model& model);

// Nearest-posit quantization (ties to even, via the oracle's search).
// Non-finite inputs become NaR; their count is reported through
// `non_finite` when given.
PositTensor quantize(const RealTensor& t, PositFormat fmt, size_t* non_finite = nullptr);
RealTensor dequantize(const PositTensor& t);  // exact values; NaR rejected

// Whether dot products run through the SIMD MAC engine or the
// exact-arithmetic reference; layer outputs must match bit-for-bit.
enum class DotRoute
{
    Engine,
    Reference,
};

// One layer forward. Posit-path compute layers convert inputs to the
// layer's precision, run one quire accumulation per output element
// (batching independent outputs across SIMD lanes), and emit activations
// already rounded to the layer's format.
RealTensor run_layer_real(const LayerSpec& layer, const RealTensor& x);
PositTensor run_layer_posit(const LayerSpec& layer, const PositTensor& x, DotRoute route);

RealTensor forward_real(const Model& model, const RealTensor& input);
PositTensor forward_posit(const Model& model, const RealTensor& input,
                          std::optional<PositFormat> precision_override, DotRoute route);

struct EvalConfig
{
    bool use_float = false;  // float64 baseline path instead of posits
    std::optional<PositFormat> precision_override;
    DotRoute route = DotRoute::Engine;
    bool parallel = true;
};

struct EvalResult
{
    uint64_t total = 0;
    uint64_t correct = 0;
    std::vector<std::array<uint64_t, 2>> per_class;  // [class] = {seen, correct}
    double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

// Top-1 accuracy over the first n samples; argmax ties break toward the
// lowest class index, so results are deterministic. n must be in
// [1, dataset size]. Samples run in parallel on their own engines; the
// reduction is order-independent.
EvalResult evaluate(const Model& model, const IdxImages& images, const IdxLabels& labels,
                    int n, const EvalConfig& cfg);

// Pixels scaled to [0, 1], shape {1, rows, cols}.
RealTensor image_input(const IdxImages& images, int index);

}  // namespace pmac
