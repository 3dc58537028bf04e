#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "qcwmark/errors.hpp"
#include "qcwmark/latent.hpp"
#include "qcwmark/rng.hpp"

namespace qcw {

/// Cumulative noise schedule for T-step DDIM over the usual linear-beta base:
/// beta ramps 1e-4 -> 2e-2 across 1000 base steps; alpha_bar[0] is the base
/// schedule's first value and alpha_bar[t] for t in 1..T subsamples the base
/// cumulative products at uniform stride.
struct DiffusionSchedule {
    int steps = 50;
    std::vector<double> alpha_bar; // T + 1 values, strictly decreasing

    explicit DiffusionSchedule(int T = 50) : steps(T) {
        constexpr int kBaseSteps = 1000;
        constexpr double kBetaStart = 1e-4;
        constexpr double kBetaEnd = 2e-2;
        if (T < 1 || T >= kBaseSteps)
            throw ConfigError("step count must lie in [1, 999]");
        std::vector<double> base(kBaseSteps);
        double acc = 1.0;
        for (int j = 0; j < kBaseSteps; ++j) {
            double beta = kBetaStart + (kBetaEnd - kBetaStart) * double(j) / double(kBaseSteps - 1);
            acc *= 1.0 - beta;
            base[std::size_t(j)] = acc;
        }
        alpha_bar.resize(std::size_t(T) + 1);
        alpha_bar[0] = base[0];
        for (int t = 1; t <= T; ++t)
            alpha_bar[std::size_t(t)] = base[std::size_t(t) * kBaseSteps / std::size_t(T) - 1];
        for (int t = 0; t < T; ++t)
            if (!(alpha_bar[std::size_t(t)] > alpha_bar[std::size_t(t) + 1]))
                throw ConfigError("alpha_bar must be strictly decreasing");
    }
};

/// Noise-prediction interface standing in for the pretrained generator.
/// Implementations must be deterministic, shape-preserving, and safe to
/// share across threads. The guidance scale is accepted for interface
/// compatibility; the reference backends ignore it.
class DenoiserBackend {
public:
    virtual ~DenoiserBackend() = default;
    virtual LatentTensor predict_noise(const LatentTensor& z, int step, double guidance) const = 0;
    virtual std::string name() const = 0;
};

/// Predicts zero noise everywhere: DDIM reduces to an exactly invertible
/// element-wise scaling.
class ZeroNoiseBackend final : public DenoiserBackend {
public:
    LatentTensor predict_noise(const LatentTensor& z, int, double) const override {
        return LatentTensor(z.shape());
    }
    std::string name() const override { return "zero"; }
};

/// Predicts gamma * R * flatten(z) for a fixed seeded random rotation R of
/// dimension n. The rotation mixes every coordinate, so DDIM inversion picks
/// up a realistic, non-degenerate approximation error.
class LinearOrthogonalBackend final : public DenoiserBackend {
public:
    explicit LinearOrthogonalBackend(int dim, uint64_t seed, double gamma = 0.1)
        : seed_(seed), gamma_(gamma) {
        if (dim < 1) throw ConfigError("backend dimension must be positive");
        ChaChaRng rng(derive_seed(seed, 0x726f74ull)); // independent of trial seeds
        Eigen::MatrixXd a(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        rotation_ = qr.householderQ();
        Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int j = 0; j < dim; ++j)
            if (r(j, j) < 0) rotation_.col(j) = -rotation_.col(j);
        // make it a proper rotation
        if (dim >= 1 && rotation_.determinant() < 0) rotation_.col(0) = -rotation_.col(0);
    }

    LatentTensor predict_noise(const LatentTensor& z, int, double) const override {
        if (z.size() != rotation_.rows())
            throw ShapeMismatch("latent size does not match backend dimension");
        Eigen::Map<const Eigen::VectorXd> v(z.values().data(), z.size());
        Eigen::VectorXd out = gamma_ * (rotation_ * v);
        LatentTensor res(z.shape());
        Eigen::Map<Eigen::VectorXd>(res.values().data(), res.size()) = out;
        return res;
    }

    std::string name() const override { return "linear:" + std::to_string(seed_); }
    const Eigen::MatrixXd& rotation() const { return rotation_; }
    double gamma() const { return gamma_; }

private:
    uint64_t seed_;
    double gamma_;
    Eigen::MatrixXd rotation_;
};

/// Backend selection by name: "zero" or "linear:<seed>".
inline std::shared_ptr<DenoiserBackend> make_backend(const std::string& spec, int dim) {
    if (spec == "zero") return std::make_shared<ZeroNoiseBackend>();
    if (spec.rfind("linear:", 0) == 0) {
        uint64_t seed = 0;
        try {
            seed = std::stoull(spec.substr(7));
        } catch (const std::exception&) {
            throw ConfigError("bad backend spec: " + spec);
        }
        return std::make_shared<LinearOrthogonalBackend>(dim, seed);
    }
    throw ConfigError("unknown backend: " + spec + " (expected \"zero\" or \"linear:<seed>\")");
}

namespace detail {

inline void check_finite(const LatentTensor& z, const char* what) {
    if (!z.all_finite()) throw NonFiniteValue(std::string(what) + " produced non-finite values");
}

} // namespace detail

/// Deterministic DDIM sampling, t = T..1:
///   x0_hat  = (z_t - sqrt(1 - ab_t) * eps) / sqrt(ab_t)
///   z_{t-1} = sqrt(ab_{t-1}) * x0_hat + sqrt(1 - ab_{t-1}) * eps
inline LatentTensor ddim_sample(const LatentTensor& z_T, const DenoiserBackend& backend,
                                const DiffusionSchedule& schedule, double guidance) {
    LatentTensor z = z_T;
    for (int t = schedule.steps; t >= 1; --t) {
        double ab_t = schedule.alpha_bar[std::size_t(t)];
        double ab_prev = schedule.alpha_bar[std::size_t(t) - 1];
        LatentTensor eps = backend.predict_noise(z, t, guidance);
        if (eps.shape() != z.shape()) throw ShapeMismatch("backend changed latent shape");
        double c_z = std::sqrt(ab_prev / ab_t);
        double c_e = std::sqrt(1.0 - ab_prev) - c_z * std::sqrt(1.0 - ab_t);
        for (int i = 0; i < z.size(); ++i)
            z[std::size_t(i)] = c_z * z[std::size_t(i)] + c_e * eps[std::size_t(i)];
    }
    detail::check_finite(z, "ddim_sample");
    return z;
}

/// Deterministic DDIM inversion, t = 0..T-1, with the noise prediction taken
/// at the current (lower) step -- the standard inversion approximation.
inline LatentTensor ddim_invert(const LatentTensor& z_0, const DenoiserBackend& backend,
                                const DiffusionSchedule& schedule, double guidance) {
    LatentTensor z = z_0;
    for (int t = 0; t < schedule.steps; ++t) {
        double ab_t = schedule.alpha_bar[std::size_t(t)];
        double ab_next = schedule.alpha_bar[std::size_t(t) + 1];
        LatentTensor eps = backend.predict_noise(z, t, guidance);
        if (eps.shape() != z.shape()) throw ShapeMismatch("backend changed latent shape");
        double c_z = std::sqrt(ab_next / ab_t);
        double c_e = std::sqrt(1.0 - ab_next) - c_z * std::sqrt(1.0 - ab_t);
        for (int i = 0; i < z.size(); ++i)
            z[std::size_t(i)] = c_z * z[std::size_t(i)] + c_e * eps[std::size_t(i)];
    }
    detail::check_finite(z, "ddim_invert");
    return z;
}

} // namespace qcw
