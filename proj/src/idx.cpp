#include "pmac/idx.hpp"

#include <fstream>
#include <stdexcept>

namespace pmac {

namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

uint32_t read_be32(std::istream& in, const std::string& path)
{
    uint8_t b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error(path + ": truncated IDX header");
    return (uint32_t{b[0]} << 24) | (uint32_t{b[1]} << 16) | (uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, uint32_t v)
{
    uint8_t b[4] = {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
                    static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

}  // namespace

IdxImages read_idx_images(const std::string& path)
{
    auto in = open_in(path);
    if (read_be32(in, path) != kImagesMagic)
        throw std::runtime_error(path + ": not an IDX image file");
    IdxImages img;
    img.count = static_cast<int>(read_be32(in, path));
    img.rows = static_cast<int>(read_be32(in, path));
    img.cols = static_cast<int>(read_be32(in, path));
    size_t total = static_cast<size_t>(img.count) * img.rows * img.cols;
    img.pixels.resize(total);
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(total)))
        throw std::runtime_error(path + ": truncated IDX payload");
    return img;
}

IdxLabels read_idx_labels(const std::string& path)
{
    auto in = open_in(path);
    if (read_be32(in, path) != kLabelsMagic)
        throw std::runtime_error(path + ": not an IDX label file");
    IdxLabels lab;
    uint32_t count = read_be32(in, path);
    lab.labels.resize(count);
    if (!in.read(reinterpret_cast<char*>(lab.labels.data()), count))
        throw std::runtime_error(path + ": truncated IDX payload");
    return lab;
}

void write_idx_images(const std::string& path, const IdxImages& images)
{
    auto out = open_out(path);
    write_be32(out, kImagesMagic);
    write_be32(out, static_cast<uint32_t>(images.count));
    write_be32(out, static_cast<uint32_t>(images.rows));
    write_be32(out, static_cast<uint32_t>(images.cols));
    out.write(reinterpret_cast<const char*>(images.pixels.data()),
              static_cast<std::streamsize>(images.pixels.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_idx_labels(const std::string& path, const IdxLabels& labels)
{
    auto out = open_out(path);
    write_be32(out, kLabelsMagic);
    write_be32(out, static_cast<uint32_t>(labels.labels.size()));
    out.write(reinterpret_cast<const char*>(labels.labels.data()),
              static_cast<std::streamsize>(labels.labels.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace pmac
