// src/raster/pgm.cpp
// Binary PGM (P5) reading and writing. Only maxval 255 is accepted.
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "ariadne/raster.hpp"

namespace ariadne {
namespace {

struct PgmHeader {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::size_t payload_offset = 0;
};

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void expect_magic() {
        if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '5')
            throw ParseError("PGM: missing P5 magic", 0);
        pos_ = 2;
    }

    int read_int(const char* field) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) throw ParseError(std::string("PGM: ") + field + " too large", start);
            ++pos_;
        }
        if (pos_ == start) throw ParseError(std::string("PGM: expected integer for ") + field, start);
        return static_cast<int>(value);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t end_of_header() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw ParseError("PGM: expected single whitespace after maxval", pos_);
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

PgmHeader parse_header(std::span<const std::uint8_t> bytes) {
    HeaderReader reader(bytes);
    reader.expect_magic();
    PgmHeader h;
    h.width = reader.read_int("width");
    h.height = reader.read_int("height");
    h.maxval = reader.read_int("maxval");
    h.payload_offset = reader.end_of_header();
    if (h.width <= 0 || h.height <= 0) throw ParseError("PGM: non-positive dimensions", 2);
    if (h.maxval != 255) throw ParseError("PGM: only maxval 255 is supported", 2);
    const std::size_t expected = static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
    if (bytes.size() - h.payload_offset < expected)
        throw ParseError("PGM: truncated payload, expected " + std::to_string(expected) + " bytes",
                         bytes.size());
    if (bytes.size() - h.payload_offset > expected)
        throw ParseError("PGM: trailing bytes after payload", h.payload_offset + expected);
    return h;
}

std::vector<std::uint8_t> encode(int width, int height, auto&& byte_at) {
    const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (std::size_t i = 0; i < static_cast<std::size_t>(width) * static_cast<std::size_t>(height); ++i)
        out.push_back(byte_at(i));
    return out;
}

}  // namespace

BinaryMask decode_mask_pgm(std::span<const std::uint8_t> bytes) {
    const PgmHeader h = parse_header(bytes);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height));
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const std::uint8_t v = bytes[h.payload_offset + i];
        if (v != 0 && v != 255)
            throw ParseError("PGM mask: value " + std::to_string(v) + " is neither 0 nor 255",
                             h.payload_offset + i);
        bits[i] = v == 255 ? 1 : 0;
    }
    return BinaryMask(h.width, h.height, std::move(bits));
}

std::vector<std::uint8_t> encode_mask_pgm(const BinaryMask& mask) {
    return encode(mask.width(), mask.height(),
                  [&](std::size_t i) -> std::uint8_t { return mask[i] ? 255 : 0; });
}

GrayImage decode_image_pgm(std::span<const std::uint8_t> bytes) {
    const PgmHeader h = parse_header(bytes);
    std::vector<double> values(static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height));
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = bytes[h.payload_offset + i] / 255.0;
    return GrayImage(h.width, h.height, std::move(values));
}

std::vector<std::uint8_t> encode_image_pgm(const GrayImage& image) {
    return encode(image.width(), image.height(), [&](std::size_t i) -> std::uint8_t {
        return static_cast<std::uint8_t>(std::lround(std::clamp(image[i], 0.0, 1.0) * 255.0));
    });
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

BinaryMask load_mask(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_mask_pgm(bytes);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.detail(), e.offset());
    }
}

void store_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    write_file_bytes(path, encode_mask_pgm(mask));
}

GrayImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_image_pgm(bytes);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.detail(), e.offset());
    }
}

void store_image(const GrayImage& image, const std::filesystem::path& path) {
    write_file_bytes(path, encode_image_pgm(image));
}

}  // namespace ariadne
