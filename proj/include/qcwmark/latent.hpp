#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "qcwmark/errors.hpp"

namespace qcw {

/// Shape of the latent grid: channels x qubit-rows x time-columns.
struct LatentShape {
    int channels = 4;
    int rows = 8;
    int cols = 48;

    int size() const { return channels * rows * cols; }
    friend bool operator==(const LatentShape&, const LatentShape&) = default;
};

/// Real-valued tensor of shape (channels, rows, cols). Flat storage order:
/// index = col * (rows * channels) + row * channels + ch, channel fastest.
class LatentTensor {
public:
    LatentTensor() : shape_{} { data_.assign(std::size_t(shape_.size()), 0.0); }
    explicit LatentTensor(LatentShape shape) : shape_(shape) {
        if (shape.channels < 1 || shape.rows < 1 || shape.cols < 1)
            throw ShapeMismatch("latent dimensions must be positive");
        data_.assign(std::size_t(shape.size()), 0.0);
    }

    const LatentShape& shape() const { return shape_; }
    int size() const { return int(data_.size()); }

    static int flat_index(const LatentShape& s, int ch, int row, int col) {
        return col * (s.rows * s.channels) + row * s.channels + ch;
    }

    int flat_index(int ch, int row, int col) const { return flat_index(shape_, ch, row, col); }

    double at(int ch, int row, int col) const { return data_[flat_index(ch, row, col)]; }
    double& at(int ch, int row, int col) { return data_[flat_index(ch, row, col)]; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const LatentTensor& a, const LatentTensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    LatentShape shape_;
    std::vector<double> data_;
};

inline void unflatten_index(const LatentShape& s, int flat, int& ch, int& row, int& col) {
    ch = flat % s.channels;
    row = (flat / s.channels) % s.rows;
    col = flat / (s.channels * s.rows);
}

// ---------------------------------------------------------------------------
// Latent tensor container: magic "QTAG", version u32=1, rank u32=3, dims as
// 3 x u32, then size() IEEE-754 binary32 values; everything little-endian,
// values in flat order.

namespace detail {

inline void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char(uint8_t(v >> (8 * i))));
}

inline uint32_t get_u32(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

} // namespace detail

inline std::string serialize_latent(const LatentTensor& z) {
    if (!z.all_finite()) throw NonFiniteValue("latent contains non-finite values");
    std::string out;
    out.reserve(24 + 4 * std::size_t(z.size()));
    out += "QTAG";
    detail::put_u32(out, 1);
    detail::put_u32(out, 3);
    detail::put_u32(out, uint32_t(z.shape().channels));
    detail::put_u32(out, uint32_t(z.shape().rows));
    detail::put_u32(out, uint32_t(z.shape().cols));
    for (int i = 0; i < z.size(); ++i) {
        float f = float(z[i]);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        detail::put_u32(out, bits);
    }
    return out;
}

inline LatentTensor deserialize_latent(const std::string& bytes) {
    if (bytes.size() < 24 || bytes.compare(0, 4, "QTAG") != 0)
        throw IoError("not a QTAG latent file");
    const uint8_t* p = reinterpret_cast<const uint8_t*>(bytes.data());
    uint32_t version = detail::get_u32(p + 4);
    uint32_t rank = detail::get_u32(p + 8);
    if (version != 1) throw IoError("unsupported QTAG version");
    if (rank != 3) throw IoError("unsupported QTAG rank");
    LatentShape shape{int(detail::get_u32(p + 12)), int(detail::get_u32(p + 16)),
                      int(detail::get_u32(p + 20))};
    if (shape.channels < 1 || shape.rows < 1 || shape.cols < 1)
        throw IoError("bad QTAG dimensions");
    std::size_t n = std::size_t(shape.size());
    if (bytes.size() != 24 + 4 * n) throw IoError("QTAG payload size mismatch");
    LatentTensor z(shape);
    for (std::size_t i = 0; i < n; ++i) {
        uint32_t bits = detail::get_u32(p + 24 + 4 * i);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f)) throw IoError("QTAG payload contains non-finite value");
        z[i] = double(f);
    }
    return z;
}

inline void save_latent(const LatentTensor& z, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    std::string bytes = serialize_latent(z);
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

inline LatentTensor load_latent(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize_latent(bytes);
}

} // namespace qcw
