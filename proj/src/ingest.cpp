#include "spikegrad/ingest.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "spikegrad/errors.hpp"

namespace spikegrad {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
    return (static_cast<std::uint32_t>(b[at]) << 24) | (static_cast<std::uint32_t>(b[at + 1]) << 16) |
           (static_cast<std::uint32_t>(b[at + 2]) << 8) | static_cast<std::uint32_t>(b[at + 3]);
}

struct IdxHeader {
    std::uint32_t magic = 0;
    std::vector<std::uint32_t> dims;
    std::size_t payload_offset = 0;
    std::size_t payload_size = 0;
};

IdxHeader parse_idx_header(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    if (bytes.size() < 4) throw TruncatedFile("'" + path + "' is too short for an IDX header");
    IdxHeader h;
    h.magic = read_be32(bytes, 0);
    if (h.magic != kIdxImageMagic && h.magic != kIdxLabelMagic)
        throw BadMagic("'" + path + "' has unsupported IDX magic");
    const std::size_t rank = h.magic & 0xFF;
    if (bytes.size() < 4 + 4 * rank) throw TruncatedFile("'" + path + "' ends inside the IDX header");
    std::size_t total = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        h.dims.push_back(read_be32(bytes, 4 + 4 * i));
        total *= h.dims.back();
    }
    h.payload_offset = 4 + 4 * rank;
    h.payload_size = total;
    if (bytes.size() < h.payload_offset + total)
        throw TruncatedFile("'" + path + "' holds fewer items than its header declares");
    return h;
}

}  // namespace

std::vector<std::uint8_t> read_idx_bytes(const std::string& path, std::vector<std::uint32_t>* dims) {
    const auto bytes = read_file(path);
    const IdxHeader h = parse_idx_header(bytes, path);
    if (dims) *dims = h.dims;
    return std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_offset),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_offset + h.payload_size));
}

DatasetMatrix load_idx(const std::string& path, Index max_items) {
    const auto bytes = read_file(path);
    const IdxHeader h = parse_idx_header(bytes, path);
    DatasetMatrix out;
    out.path = path;
    out.format = "idx";
    Index n = static_cast<Index>(h.dims[0]);
    if (max_items > 0) n = std::min(n, max_items);
    const bool images = h.magic == kIdxImageMagic;
    const Index width = images ? static_cast<Index>(h.dims[1]) * static_cast<Index>(h.dims[2]) : 1;
    if (n < 1 || width < 1) throw TruncatedFile("'" + path + "' contains no items");
    out.X.resize(n, width);
    const std::uint8_t* p = bytes.data() + h.payload_offset;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < width; ++j) out.X(i, j) = static_cast<double>(p[i * width + j]);
    if (images) {
        out.X /= 256.0;
        out.scaled_by_256 = true;
    }
    return out;
}

void write_idx(const std::string& path, const std::vector<std::uint8_t>& bytes, const std::vector<std::uint32_t>& dims) {
    if (dims.size() != 1 && dims.size() != 3) throw InvalidArgument("write_idx: dims must have rank 1 or 3");
    std::size_t total = 1;
    for (auto d : dims) total *= d;
    if (total != bytes.size()) throw ShapeMismatch("write_idx: byte count differs from dims");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    const auto put = [&](std::uint32_t v) {
        const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                           static_cast<char>(v)};
        out.write(b, 4);
    };
    put(dims.size() == 3 ? kIdxImageMagic : kIdxLabelMagic);
    for (auto d : dims) put(d);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

DatasetMatrix load_matrix_csv(const std::string& path, bool has_header, Index max_rows) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool skipped_header = !has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<double> row;
        std::string_view rest(line);
        for (;;) {
            const std::size_t comma = rest.find(',');
            const std::string_view cell = trim(rest.substr(0, comma));
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size())
                throw ParseFailure("'" + path + "' line " + std::to_string(line_no) + ": cannot parse '" +
                                   std::string(cell) + "'");
            row.push_back(v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw RaggedRows("'" + path + "' line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                             " fields, expected " + std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
        if (max_rows > 0 && static_cast<Index>(rows.size()) >= max_rows) break;
    }
    if (rows.empty()) throw ParseFailure("'" + path + "' has no data rows");
    DatasetMatrix out;
    out.path = path;
    out.format = "csv";
    out.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) out.X(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    if (!out.X.allFinite()) throw ParseFailure("'" + path + "' contains non-finite values");
    return out;
}

}  // namespace spikegrad
