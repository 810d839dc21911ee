#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tsrate/error.hpp"
#include "tsrate/image.hpp"

namespace tsrate {
namespace png {

inline void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t read_u32_be(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::vector<std::uint8_t>& data) {
    put_u32_be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = ::crc32(0, out.data() + crc_start, static_cast<uInt>(4 + data.size()));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

// Encodes an 8-bit RGB image. Scanlines use filter type 0 and a fixed zlib
// compression level so identical pixels always produce identical bytes.
inline std::vector<std::uint8_t> encode_rgb8(const SpectroImage& image) {
    static const std::uint8_t kSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<std::uint8_t> out(kSig, kSig + 8);

    std::vector<std::uint8_t> ihdr;
    put_u32_be(ihdr, kImageSize);
    put_u32_be(ihdr, kImageSize);
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // truecolor RGB
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter method
    ihdr.push_back(0);   // no interlace
    append_chunk(out, "IHDR", ihdr);

    std::vector<std::uint8_t> raw;
    raw.reserve(kImageSize * (1 + 3 * kImageSize));
    for (int row = 0; row < kImageSize; ++row) {
        raw.push_back(0);  // filter: none
        for (int col = 0; col < kImageSize; ++col) {
            const Rgb& px = image.at(row, col);
            raw.push_back(px.r);
            raw.push_back(px.g);
            raw.push_back(px.b);
        }
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(),
                  static_cast<uLong>(raw.size()), 6) != Z_OK)
        fail_internal("png: zlib compression failed");
    compressed.resize(bound);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", {});
    return out;
}

inline void write_rgb8(const SpectroImage& image, const std::string& path) {
    const auto bytes = encode_rgb8(image);
    std::ofstream f(path, std::ios::binary);
    if (!f) fail_io("cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) fail_io("short write to " + path);
}

inline std::uint8_t paeth(std::uint8_t a, std::uint8_t b, std::uint8_t c) {
    const int p = int(a) + int(b) - int(c);
    const int pa = std::abs(p - int(a));
    const int pb = std::abs(p - int(b));
    const int pc = std::abs(p - int(c));
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

// Decodes 128x128 8-bit RGB images written by encode_rgb8; the unfilter step
// handles all five standard filter types.
inline SpectroImage decode_rgb8(const std::vector<std::uint8_t>& bytes) {
    static const std::uint8_t kSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSig, 8) != 0)
        fail_validation("png: bad signature");
    std::vector<std::uint8_t> idat;
    std::size_t pos = 8;
    bool saw_ihdr = false;
    while (pos + 12 <= bytes.size()) {
        const std::uint32_t len = read_u32_be(&bytes[pos]);
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const std::uint8_t* data = &bytes[pos + 8];
        if (pos + 12 + len > bytes.size()) fail_validation("png: truncated chunk");
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13 || read_u32_be(data) != kImageSize ||
                read_u32_be(data + 4) != kImageSize || data[8] != 8 || data[9] != 2)
                fail_validation("png: expected 128x128 8-bit RGB");
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || idat.empty()) fail_validation("png: missing IHDR or IDAT");

    const std::size_t stride = 3 * kImageSize;
    std::vector<std::uint8_t> raw(kImageSize * (1 + stride));
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(),
                   static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        fail_validation("png: corrupt image data");

    SpectroImage image;
    std::vector<std::uint8_t> prev(stride, 0);
    std::vector<std::uint8_t> line(stride, 0);
    for (int row = 0; row < kImageSize; ++row) {
        const std::uint8_t filter = raw[row * (1 + stride)];
        const std::uint8_t* src = &raw[row * (1 + stride) + 1];
        for (std::size_t i = 0; i < stride; ++i) {
            const std::uint8_t a = i >= 3 ? line[i - 3] : 0;
            const std::uint8_t b = prev[i];
            const std::uint8_t c = i >= 3 ? prev[i - 3] : 0;
            std::uint8_t v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v = static_cast<std::uint8_t>(v + a); break;
                case 2: v = static_cast<std::uint8_t>(v + b); break;
                case 3: v = static_cast<std::uint8_t>(v + (a + b) / 2); break;
                case 4: v = static_cast<std::uint8_t>(v + paeth(a, b, c)); break;
                default: fail_validation("png: unknown filter type");
            }
            line[i] = v;
        }
        for (int col = 0; col < kImageSize; ++col)
            image.at(row, col) = Rgb{line[3 * col], line[3 * col + 1], line[3 * col + 2]};
        std::swap(prev, line);
    }
    return image;
}

inline SpectroImage read_rgb8(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail_io("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return decode_rgb8(bytes);
}

}  // namespace png
}  // namespace tsrate
