#pragma once

#include <array>
#include <vector>

#include "qcwmark/circuit.hpp"
#include "qcwmark/errors.hpp"
#include "qcwmark/latent.hpp"

namespace qcw {

// Sign-pattern codebook: token t maps to a vector in {-a, +a}^channels with
// channel c positive iff bit c of t is set (bit 0 = channel 0, a = 1.0).
// Quantizing a cell back to the nearest codeword is exactly the per-channel
// sign function, so codeword bits survive the circuit round trip.

constexpr double kCodebookAmplitude = 1.0;

/// Sign of channel `ch` for token `t`: +1 or -1.
inline double codeword_sign(int token, int ch) {
    return (token >> ch) & 1 ? 1.0 : -1.0;
}

/// Nearest-codeword token for one cell; sign(0) maps to +1.
template <typename It>
inline int quantize_cell(It first, int channels) {
    int token = 0;
    for (int ch = 0; ch < channels; ++ch)
        if (*(first + ch) >= 0.0) token |= 1 << ch;
    return token;
}

struct EncodeResult {
    LatentTensor latent;
    bool truncated = false; // columns beyond shape.cols were dropped
};

/// Encoder E: circuit grid -> latent. Cell (., q, t) carries the codeword of
/// the token at (q, t); columns past the circuit length are Ident codewords.
/// Circuits wider than the grid are truncated, not rejected: attacks may
/// legitimately grow a circuit past the grid width.
inline EncodeResult encode_circuit(const Circuit& c, const LatentShape& shape) {
    if (c.num_qubits() != shape.rows)
        throw ShapeMismatch("circuit qubit count does not match latent rows");
    if (shape.channels < 4)
        throw ShapeMismatch("codebook needs at least 4 channels for 16 tokens");
    EncodeResult res{LatentTensor(shape), c.column_count() > shape.cols};
    for (int t = 0; t < shape.cols; ++t) {
        for (int q = 0; q < shape.rows; ++q) {
            int token = t < c.column_count() ? token_id(c.at(q, t)) : 0;
            for (int ch = 0; ch < shape.channels; ++ch)
                res.latent.at(ch, q, t) = kCodebookAmplitude * codeword_sign(token, ch);
        }
    }
    return res;
}

/// Decoder D: latent -> circuit. Per-cell nearest-codeword quantization,
/// then column-wise repair (incomplete partner groups become Ident), then
/// trailing idle columns are trimmed. The result always satisfies the
/// circuit invariants.
inline Circuit decode_latent(const LatentTensor& z) {
    const LatentShape& s = z.shape();
    Circuit c(s.rows);
    for (int t = 0; t < s.cols; ++t) {
        c.append_column();
        for (int q = 0; q < s.rows; ++q) {
            int token = 0;
            for (int ch = 0; ch < s.channels && ch < 4; ++ch)
                if (z.at(ch, q, t) >= 0.0) token |= 1 << ch;
            c.set(q, t, gate_from_token(token));
        }
    }
    // repair: a partner group survives only if it is exactly complete
    for (int t = 0; t < c.column_count(); ++t) {
        std::array<std::vector<int>, 7> slots; // CxC..SwapB by token - 9
        for (int q = 0; q < c.num_qubits(); ++q) {
            int id = token_id(c.at(q, t));
            if (id >= 9) slots[id - 9].push_back(q);
        }
        auto wipe = [&](std::initializer_list<int> ids) {
            for (int id : ids)
                for (int q : slots[id - 9]) c.set(q, t, GateKind::Ident);
        };
        if (slots[0].size() != 1 || slots[1].size() != 1) wipe({9, 10});
        if (slots[2].size() != 1 || slots[3].size() != 1 || slots[4].size() != 1) wipe({11, 12, 13});
        if (slots[5].size() != 1 || slots[6].size() != 1) wipe({14, 15});
    }
    return trim_trailing_idle(c);
}

} // namespace qcw
