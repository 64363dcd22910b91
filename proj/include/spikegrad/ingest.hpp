#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikegrad/linalg.hpp"

namespace spikegrad {

struct DatasetMatrix {
    Matrix X;
    std::string path;
    std::string format;  // "idx" or "csv"
    bool scaled_by_256 = false;
    bool centered = false;
};

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Images become n x (rows * cols) with values / 256; label files become n x 1
// with raw values. max_items > 0 keeps only the first items.
DatasetMatrix load_idx(const std::string& path, Index max_items = 0);
DatasetMatrix load_matrix_csv(const std::string& path, bool has_header, Index max_rows = 0);

// Unsigned-byte IDX writer; dims are {n} for labels or {n, rows, cols} for images.
void write_idx(const std::string& path, const std::vector<std::uint8_t>& bytes, const std::vector<std::uint32_t>& dims);
std::vector<std::uint8_t> read_idx_bytes(const std::string& path, std::vector<std::uint32_t>* dims = nullptr);

}  // namespace spikegrad
