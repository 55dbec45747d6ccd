#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pmac {

// IDX dataset files, read and written bit-exactly: big-endian magic
// 0x00000803 (unsigned-byte images, 3 dims) / 0x00000801 (labels, 1 dim),
// big-endian dimension words, then raw bytes.
struct IdxImages
{
    int count = 0;
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> pixels;  // count * rows * cols, row-major

    const uint8_t* image(int i) const { return pixels.data() + static_cast<size_t>(i) * rows * cols; }
};

struct IdxLabels
{
    std::vector<uint8_t> labels;
};

IdxImages read_idx_images(const std::string& path);   // throws on I/O or format errors
IdxLabels read_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const IdxImages& images);
void write_idx_labels(const std::string& path, const IdxLabels& labels);

}  // namespace pmac
