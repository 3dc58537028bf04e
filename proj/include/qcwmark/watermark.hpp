#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <nlohmann/json.hpp>

#include "qcwmark/bitseq.hpp"
#include "qcwmark/chacha.hpp"
#include "qcwmark/errors.hpp"
#include "qcwmark/latent.hpp"
#include "qcwmark/rng.hpp"

namespace qcw {

/// Everything needed to embed and verify one watermark: the message, the
/// stream-cipher key material, and the seed of the Gaussian draw stream.
struct WatermarkKey {
    BitSequence message;              // k bits
    std::array<uint8_t, 32> cipher_key{};
    std::array<uint8_t, 12> nonce{};
    uint64_t gauss_seed = 0;
};

/// Verification contract: accept when similarity >= tau.
struct DetectionPolicy {
    int k = 24;          // message bits
    int v = 64;          // repetition factor, n / k
    int n = 1536;        // codeword length
    double tau = 0.7916; // similarity threshold
    double alpha0 = 1e-3; // target false-positive rate

    bool accepts(double sim) const { return sim >= tau; }
    /// Smallest correct-bit count that clears tau.
    int tau_bits() const { return int(std::ceil(tau * k - 1e-12)); }
};

inline DetectionPolicy make_policy(int k, int n, double tau = 0.7916, double alpha0 = 1e-3) {
    if (k < 1 || n < 1 || n % k != 0)
        throw IndivisibleCapacity("message length must divide codeword length");
    DetectionPolicy p{k, n / k, n, tau, alpha0};
    double taubits = tau * k;
    if (!(taubits > k / 2.0 && taubits <= double(k)))
        throw ConfigError("tau * k must lie in (k/2, k]");
    return p;
}

/// Fitted Gaussian parameters of the correct-bit-count distributions (H0 =
/// unwatermarked, H1 = watermarked) and the derived decision threshold.
struct CalibrationResult {
    double mu0 = 0.0;
    double sigma0 = 0.0;
    double mu1 = 0.0;
    double sigma1 = 0.0;
    double th = 0.0;
};

// ---------------------------------------------------------------------------
// keystream

/// First `length` bits of the ChaCha20 stream under (cipher_key, nonce),
/// block counter starting at 1, bytes expanded most-significant-bit first.
inline BitSequence keystream(const WatermarkKey& key, std::size_t length) {
    if (length < 1) throw LengthMismatch("keystream length must be >= 1");
    Chacha20Stream stream(key.cipher_key, key.nonce, 1);
    BitSequence out(length);
    std::size_t i = 0;
    while (i < length) {
        uint8_t byte = stream.next_byte();
        for (int b = 7; b >= 0 && i < length; --b) out[i++] = (byte >> b) & 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// repetition ECC with keystream whitening

/// Repetition stage: bit j of m occupies positions [j*v, (j+1)*v).
inline BitSequence repeat_expand(const BitSequence& m, int v) {
    const std::size_t total = m.size() * std::size_t(v);
    BitSequence out(total);
    for (std::size_t j = 0; j < m.size(); ++j)
        for (int r = 0; r < v; ++r) out[j * v + r] = m[j];
    return out;
}

/// Majority stage: per v-bit block; a tie (v even, exactly v/2 ones) is 0.
inline BitSequence majority_collapse(const BitSequence& s, int k) {
    if (k < 1 || s.size() % std::size_t(k) != 0)
        throw IndivisibleCapacity("message length must divide sequence length");
    int v = int(s.size()) / k;
    BitSequence out(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        int ones = 0;
        for (int r = 0; r < v; ++r) ones += s[std::size_t(j) * v + r];
        out[std::size_t(j)] = 2 * ones > v ? 1 : 0;
    }
    return out;
}

/// S_en = repeat(m) XOR keystream.
inline BitSequence ecc_encode(const BitSequence& m, const WatermarkKey& key, int n) {
    if (m.empty() || n < 1 || n % int(m.size()) != 0)
        throw IndivisibleCapacity("message length must divide codeword length");
    int v = n / int(m.size());
    return repeat_expand(m, v) ^ keystream(key, std::size_t(n));
}

/// De-whiten then majority-vote each repetition block.
inline BitSequence ecc_decode(const BitSequence& s, const WatermarkKey& key, int k) {
    if (k < 1 || s.size() % std::size_t(k) != 0)
        throw IndivisibleCapacity("message length must divide codeword length");
    return majority_collapse(s ^ keystream(key, s.size()), k);
}

// ---------------------------------------------------------------------------
// symmetric sampling mechanism

/// Draws standard-normal values from the stream seeded by gauss_seed and
/// conditionally flips signs so that position i lands in the half-line of
/// bit i: P0 = (-inf, 0), P1 = [0, inf). The flip preserves the Gaussian
/// marginal exactly.
inline LatentTensor ssm_sample(const BitSequence& s_en, const WatermarkKey& key,
                               const LatentShape& shape) {
    if (int(s_en.size()) != shape.size())
        throw LengthMismatch("codeword length must equal latent size");
    ChaChaRng rng(key.gauss_seed);
    LatentTensor z(shape);
    for (int i = 0; i < shape.size(); ++i) {
        double g = rng.normal();
        if (g == 0.0) g = 1e-6; // keep the partition strict so inversion stays exact
        double mag = std::fabs(g);
        z[std::size_t(i)] = s_en[std::size_t(i)] ? mag : -mag;
    }
    return z;
}

/// Inverse of the SSM partition test: bit i is 0 iff z_i < 0.
inline BitSequence reverse_sample(const LatentTensor& z) {
    BitSequence out(std::size_t(z.size()));
    for (int i = 0; i < z.size(); ++i) out[std::size_t(i)] = z[std::size_t(i)] < 0.0 ? 0 : 1;
    return out;
}

// ---------------------------------------------------------------------------
// similarity and thresholds

inline int matching_bits(const BitSequence& a, const BitSequence& b) {
    if (a.size() != b.size()) throw LengthMismatch("similarity needs equal lengths");
    int m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m += a[i] == b[i];
    return m;
}

/// Fraction of positions with identical bits.
inline double similarity(const BitSequence& a, const BitSequence& b) {
    if (a.empty()) throw LengthMismatch("similarity of empty sequences");
    return double(matching_bits(a, b)) / double(a.size());
}

/// Exact binomial-tail false-positive rate under the Bernoulli(1/2) model:
/// FPR(tau) = 2^-k * sum_{i=tau+1}^{k} C(k, i). Strict upper tail, exactly
/// as the closed form reads.
inline double fpr_binomial(int tau_bits, int k) {
    if (k < 1 || k > 62) throw ConfigError("fpr_binomial supports 1 <= k <= 62");
    if (tau_bits < 0 || tau_bits > k) throw ConfigError("tau_bits must lie in [0, k]");
    // Pascal row for exact integer coefficients
    std::vector<unsigned long long> row(std::size_t(k) + 1, 0);
    row[0] = 1;
    for (int i = 1; i <= k; ++i)
        for (int j = i; j >= 1; --j) row[std::size_t(j)] += row[std::size_t(j) - 1];
    unsigned long long sum = 0;
    for (int i = tau_bits + 1; i <= k; ++i) sum += row[std::size_t(i)];
    return double(sum) * std::ldexp(1.0, -k);
}

/// The same tail through the regularized incomplete beta function
/// I_{1/2}(tau+1, k-tau); agrees with fpr_binomial to better than 1e-12.
inline double fpr_incomplete_beta(int tau_bits, int k) {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (tau_bits < 0 || tau_bits > k) throw ConfigError("tau_bits must lie in [0, k]");
    if (tau_bits == k) return 0.0;
    return boost::math::ibeta(double(tau_bits) + 1.0, double(k - tau_bits), 0.5);
}

/// Smallest integer threshold whose binomial-tail FPR is <= alpha0.
inline int min_tau_bits_for_fpr(int k, double alpha0) {
    for (int b = 0; b <= k; ++b)
        if (fpr_binomial(b, k) <= alpha0) return b;
    return k;
}

/// Neyman-Pearson threshold for a given false-alarm probability:
/// th = mu0 + sigma0 * Phi^-1(1 - alpha0).
inline CalibrationResult np_calibrate(double mu0, double sigma0, double alpha0,
                                      double mu1 = std::numeric_limits<double>::quiet_NaN(),
                                      double sigma1 = std::numeric_limits<double>::quiet_NaN()) {
    if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw InvalidAlpha("alpha0 must lie in (0, 1)");
    if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
    boost::math::normal_distribution<double> normal;
    double th = mu0 + sigma0 * boost::math::quantile(normal, 1.0 - alpha0);
    return CalibrationResult{mu0, sigma0, mu1, sigma1, th};
}

// ---------------------------------------------------------------------------
// key material and key files

/// Deterministic key generation from a seed (message length k bits).
inline WatermarkKey random_watermark_key(uint64_t seed, int k) {
    if (k < 1) throw ConfigError("message length must be >= 1");
    ChaChaRng rng(seed);
    WatermarkKey key;
    key.message = BitSequence(std::size_t(k));
    for (int i = 0; i < k; ++i) key.message[std::size_t(i)] = uint8_t(rng.next_u64() & 1);
    for (auto& b : key.cipher_key) b = uint8_t(rng.next_u64());
    for (auto& b : key.nonce) b = uint8_t(rng.next_u64());
    key.gauss_seed = rng.next_u64();
    return key;
}

namespace detail {

inline std::string to_hex(const uint8_t* p, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        s.push_back(digits[p[i] >> 4]);
        s.push_back(digits[p[i] & 0xf]);
    }
    return s;
}

inline void from_hex(const std::string& s, uint8_t* out, std::size_t n) {
    if (s.size() != 2 * n) throw IoError("hex field has wrong length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw IoError("invalid hex digit");
    };
    for (std::size_t i = 0; i < n; ++i)
        out[i] = uint8_t(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
}

} // namespace detail

inline nlohmann::json key_to_json(const WatermarkKey& key) {
    return nlohmann::json{
        {"cipher_key", detail::to_hex(key.cipher_key.data(), key.cipher_key.size())},
        {"nonce", detail::to_hex(key.nonce.data(), key.nonce.size())},
        {"gauss_seed", key.gauss_seed},
        {"message", key.message.to_string()},
    };
}

inline WatermarkKey key_from_json(const nlohmann::json& j) {
    WatermarkKey key;
    try {
        detail::from_hex(j.at("cipher_key").get<std::string>(), key.cipher_key.data(),
                         key.cipher_key.size());
        detail::from_hex(j.at("nonce").get<std::string>(), key.nonce.data(), key.nonce.size());
        if (j.at("gauss_seed").is_string())
            key.gauss_seed = std::stoull(j.at("gauss_seed").get<std::string>());
        else
            key.gauss_seed = j.at("gauss_seed").get<uint64_t>();
        key.message = BitSequence::from_string(j.at("message").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad key file: ") + e.what());
    }
    if (key.message.empty()) throw IoError("key message must be non-empty");
    return key;
}

inline void save_key(const WatermarkKey& key, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << key_to_json(key).dump(2) << "\n";
}

inline WatermarkKey load_key(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad key file: ") + e.what());
    }
    return key_from_json(j);
}

} // namespace qcw
