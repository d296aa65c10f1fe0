#include "vlnforge/png_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "vlnforge/core.hpp"

namespace vlnforge {

namespace {

void put_u32be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

uint32_t get_u32be(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void put_chunk(std::vector<uint8_t>& out, const char type[4], const uint8_t* data, size_t len) {
    put_u32be(out, uint32_t(len));
    const size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    if (len > 0) out.insert(out.end(), data, data + len);
    const uint32_t crc =
        uint32_t(crc32(0, out.data() + start, uInt(out.size() - start)));
    put_u32be(out, crc);
}

constexpr uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

std::vector<uint8_t> encode_gray_png(const GrayImage& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != size_t(img.width) * size_t(img.height))
        throw InvalidArgument("encode_gray_png: bad image dimensions");

    // filtered scanlines: one 0x00 filter byte per row
    std::vector<uint8_t> raw;
    raw.reserve(size_t(img.height) * (size_t(img.width) + 1));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        const uint8_t* row = img.pixels.data() + size_t(y) * img.width;
        raw.insert(raw.end(), row, row + img.width);
    }
    uLongf comp_len = compressBound(uLong(raw.size()));
    std::vector<uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), uLong(raw.size()), 9) != Z_OK)
        throw Error("encode_gray_png: deflate failed");
    comp.resize(comp_len);

    std::vector<uint8_t> out(kSignature, kSignature + 8);
    uint8_t ihdr[13];
    ihdr[0] = uint8_t(uint32_t(img.width) >> 24);
    ihdr[1] = uint8_t(uint32_t(img.width) >> 16);
    ihdr[2] = uint8_t(uint32_t(img.width) >> 8);
    ihdr[3] = uint8_t(img.width);
    ihdr[4] = uint8_t(uint32_t(img.height) >> 24);
    ihdr[5] = uint8_t(uint32_t(img.height) >> 16);
    ihdr[6] = uint8_t(uint32_t(img.height) >> 8);
    ihdr[7] = uint8_t(img.height);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 0;   // grayscale
    ihdr[10] = 0;  // deflate
    ihdr[11] = 0;  // adaptive filtering
    ihdr[12] = 0;  // no interlace
    put_chunk(out, "IHDR", ihdr, sizeof(ihdr));
    put_chunk(out, "IDAT", comp.data(), comp.size());
    put_chunk(out, "IEND", nullptr, 0);
    return out;
}

GrayImage decode_gray_png(const uint8_t* data, size_t len) {
    if (len < 8 || std::memcmp(data, kSignature, 8) != 0)
        throw Error("decode_gray_png: not a PNG file");
    size_t pos = 8;
    int width = 0, height = 0;
    bool have_ihdr = false, have_iend = false;
    std::vector<uint8_t> idat;
    while (pos + 12 <= len && !have_iend) {
        const uint32_t clen = get_u32be(data + pos);
        if (pos + 12 + clen > len) throw Error("decode_gray_png: truncated chunk");
        const char* type = reinterpret_cast<const char*>(data + pos + 4);
        const uint8_t* body = data + pos + 8;
        const uint32_t stored_crc = get_u32be(data + pos + 8 + clen);
        const uint32_t crc = uint32_t(crc32(0, data + pos + 4, uInt(clen + 4)));
        if (crc != stored_crc) throw Error("decode_gray_png: chunk CRC mismatch");
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (clen != 13) throw Error("decode_gray_png: bad IHDR");
            width = int(get_u32be(body));
            height = int(get_u32be(body + 4));
            if (body[8] != 8 || body[9] != 0 || body[12] != 0)
                throw Error("decode_gray_png: unsupported PNG variant (need gray8)");
            have_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), body, body + clen);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            have_iend = true;
        }
        pos += 12 + clen;
    }
    if (!have_ihdr || !have_iend) throw Error("decode_gray_png: missing IHDR/IEND");
    if (width <= 0 || height <= 0) throw Error("decode_gray_png: bad dimensions");

    std::vector<uint8_t> raw(size_t(height) * (size_t(width) + 1));
    uLongf raw_len = uLongf(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(), uLong(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw Error("decode_gray_png: inflate failed");

    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(size_t(width) * height);
    for (int y = 0; y < height; ++y) {
        const uint8_t filter = raw[size_t(y) * (width + 1)];
        const uint8_t* src = raw.data() + size_t(y) * (width + 1) + 1;
        uint8_t* dst = img.pixels.data() + size_t(y) * width;
        const uint8_t* prev = y > 0 ? img.pixels.data() + size_t(y - 1) * width : nullptr;
        for (int x = 0; x < width; ++x) {
            const int a = x > 0 ? dst[x - 1] : 0;
            const int b = prev ? prev[x] : 0;
            const int c = (x > 0 && prev) ? prev[x - 1] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw Error("decode_gray_png: unknown filter type");
            }
            dst[x] = uint8_t(v & 0xff);
        }
    }
    return img;
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& img) {
    const auto bytes = encode_gray_png(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

GrayImage read_gray_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return decode_gray_png(bytes.data(), bytes.size());
}

}  // namespace vlnforge
