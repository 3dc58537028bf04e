#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcwmark/errors.hpp"

namespace qcw {

/// Ordered sequence of bits with explicit length. Values are 0 or 1.
class BitSequence {
public:
    BitSequence() = default;
    explicit BitSequence(std::size_t n, uint8_t fill = 0) : bits_(n, fill) {}
    explicit BitSequence(std::vector<uint8_t> bits) : bits_(std::move(bits)) {}

    static BitSequence from_string(const std::string& s) {
        std::vector<uint8_t> b;
        b.reserve(s.size());
        for (char c : s) {
            if (c == '0') b.push_back(0);
            else if (c == '1') b.push_back(1);
            else throw SyntaxError("bit string must contain only 0/1");
        }
        return BitSequence(std::move(b));
    }

    std::string to_string() const {
        std::string s;
        s.reserve(bits_.size());
        for (uint8_t b : bits_) s.push_back(b ? '1' : '0');
        return s;
    }

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    uint8_t operator[](std::size_t i) const { return bits_[i]; }
    uint8_t& operator[](std::size_t i) { return bits_[i]; }
    void push_back(uint8_t b) { bits_.push_back(b & 1); }

    const std::vector<uint8_t>& data() const { return bits_; }

    friend bool operator==(const BitSequence& a, const BitSequence& b) {
        return a.bits_ == b.bits_;
    }

    auto begin() const { return bits_.begin(); }
    auto end() const { return bits_.end(); }

private:
    std::vector<uint8_t> bits_;
};

inline BitSequence operator^(const BitSequence& a, const BitSequence& b) {
    if (a.size() != b.size()) throw LengthMismatch("xor of unequal-length bit sequences");
    BitSequence out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

} // namespace qcw
