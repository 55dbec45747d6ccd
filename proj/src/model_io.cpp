#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pmac/nn.hpp"

namespace pmac {

namespace {

constexpr char kMagic[4] = {'P', 'M', 'D', 'L'};
constexpr uint32_t kVersion = 1;

uint32_t read_u32le(std::istream& in, const std::string& path)
{
    uint8_t b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error(path + ": truncated model header");
    return uint32_t{b[0]} | (uint32_t{b[1]} << 8) | (uint32_t{b[2]} << 16) | (uint32_t{b[3]} << 24);
}

void write_u32le(std::ostream& out, uint32_t v)
{
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

void read_f32_block(std::istream& in, std::vector<float>& dst, size_t count, const std::string& path)
{
    dst.resize(count);
    for (size_t i = 0; i < count; ++i) {
        uint32_t u = read_u32le(in, path);
        std::memcpy(&dst[i], &u, 4);
    }
}

void write_f32_block(std::ostream& out, const std::vector<float>& src)
{
    for (float f : src) {
        uint32_t u;
        std::memcpy(&u, &f, 4);
        write_u32le(out, u);
    }
}

uint8_t precision_tag(PositFormat fmt)
{
    return fmt == PositFormat::p8 ? 0 : fmt == PositFormat::p16 ? 1 : 2;
}

PositFormat tag_precision(uint8_t tag, const std::string& path)
{
    switch (tag) {
        case 0: return PositFormat::p8;
        case 1: return PositFormat::p16;
        case 2:
        case 0xFF: return PositFormat::p32;
    }
    throw std::runtime_error(path + ": bad precision tag");
}

bool has_params(LayerKind k) { return k == LayerKind::Dense || k == LayerKind::Conv2d; }

}  // namespace

Model load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);

    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error(path + ": not a model container");
    if (read_u32le(in, path) != kVersion)
        throw std::runtime_error(path + ": unsupported container version");

    Model model;
    uint32_t layer_count = read_u32le(in, path);
    model.layers.resize(layer_count);
    for (auto& l : model.layers) {
        uint8_t head[4];
        if (!in.read(reinterpret_cast<char*>(head), 4))
            throw std::runtime_error(path + ": truncated layer header");
        if (head[0] > static_cast<uint8_t>(LayerKind::Flatten))
            throw std::runtime_error(path + ": bad layer kind");
        l.kind = static_cast<LayerKind>(head[0]);
        l.precision = tag_precision(head[1], path);
        switch (l.kind) {
            case LayerKind::Dense:
                l.in_features = static_cast<int>(read_u32le(in, path));
                l.out_features = static_cast<int>(read_u32le(in, path));
                break;
            case LayerKind::Conv2d:
                l.in_ch = static_cast<int>(read_u32le(in, path));
                l.out_ch = static_cast<int>(read_u32le(in, path));
                l.kh = static_cast<int>(read_u32le(in, path));
                l.kw = static_cast<int>(read_u32le(in, path));
                l.stride = static_cast<int>(read_u32le(in, path));
                l.pad = static_cast<int>(read_u32le(in, path));
                break;
            default: break;
        }
    }
    for (auto& l : model.layers) {
        if (!has_params(l.kind)) continue;
        if (l.kind == LayerKind::Dense) {
            read_f32_block(in, l.weights, static_cast<size_t>(l.out_features) * l.in_features, path);
            read_f32_block(in, l.bias, static_cast<size_t>(l.out_features), path);
        } else {
            read_f32_block(in, l.weights,
                           static_cast<size_t>(l.out_ch) * l.in_ch * l.kh * l.kw, path);
            read_f32_block(in, l.bias, static_cast<size_t>(l.out_ch), path);
        }
    }
    return model;
}

void save_model(const std::string& path, const Model& model)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);

    out.write(kMagic, 4);
    write_u32le(out, kVersion);
    write_u32le(out, static_cast<uint32_t>(model.layers.size()));
    for (const auto& l : model.layers) {
        uint8_t head[4] = {static_cast<uint8_t>(l.kind),
                           has_params(l.kind) ? precision_tag(l.precision) : uint8_t{0xFF}, 0, 0};
        out.write(reinterpret_cast<char*>(head), 4);
        if (l.kind == LayerKind::Dense) {
            write_u32le(out, static_cast<uint32_t>(l.in_features));
            write_u32le(out, static_cast<uint32_t>(l.out_features));
        } else if (l.kind == LayerKind::Conv2d) {
            write_u32le(out, static_cast<uint32_t>(l.in_ch));
            write_u32le(out, static_cast<uint32_t>(l.out_ch));
            write_u32le(out, static_cast<uint32_t>(l.kh));
            write_u32le(out, static_cast<uint32_t>(l.kw));
            write_u32le(out, static_cast<uint32_t>(l.stride));
            write_u32le(out, static_cast<uint32_t>(l.pad));
        }
    }
    for (const auto& l : model.layers) {
        if (!has_params(l.kind)) continue;
        write_f32_block(out, l.weights);
        write_f32_block(out, l.bias);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace pmac
