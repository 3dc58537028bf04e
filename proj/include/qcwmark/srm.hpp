#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcwmark/codec.hpp"
#include "qcwmark/diffusion.hpp"
#include "qcwmark/errors.hpp"
#include "qcwmark/watermark.hpp"

namespace qcw {

/// Synchronization-search configuration. insert_only is the paper-faithful
/// mode (zero-column insertion undoes left shifts); bidirectional adds
/// column-deletion candidates that undo right shifts from insertions.
struct SrmConfig {
    enum class Directions { InsertOnly, Bidirectional };

    int w_max = 3;
    Directions directions = Directions::InsertOnly;
    bool early_stop = true;

    /// Enumerated candidate count before deduplication, including the
    /// unmodified original.
    int raw_candidate_count(int f_w) const {
        int per_dir = (f_w + 1) * w_max;
        return 1 + per_dir * (directions == Directions::Bidirectional ? 2 : 1);
    }
};

/// Identifies one synchronization candidate.
struct SrmCandidateRef {
    enum class Kind { Standard, InsertZeros, DeleteColumns };

    Kind kind = Kind::Standard;
    int position = -1;
    int width = 0;

    std::string label() const {
        switch (kind) {
            case Kind::Standard: return "standard";
            case Kind::InsertZeros:
                return "insert@" + std::to_string(position) + " w=" + std::to_string(width);
            case Kind::DeleteColumns:
                return "delete@" + std::to_string(position) + " w=" + std::to_string(width);
        }
        return "?";
    }
};

/// Candidate identities in deterministic enumeration order: the unmodified
/// original, then (direction, width ascending, position ascending). The
/// position == f_w entries are structural no-ops (the pad is truncated away
/// again, or nothing is deleted) and are deduplicated out.
inline std::vector<SrmCandidateRef> srm_candidate_refs(const SrmConfig& cfg, int f_w) {
    if (cfg.w_max < 1) throw ConfigError("w_max must be >= 1");
    std::vector<SrmCandidateRef> refs;
    refs.push_back({SrmCandidateRef::Kind::Standard, -1, 0});
    auto add_direction = [&](SrmCandidateRef::Kind kind) {
        for (int w = 1; w <= cfg.w_max; ++w)
            for (int i = 0; i < f_w; ++i) refs.push_back({kind, i, w});
    };
    add_direction(SrmCandidateRef::Kind::InsertZeros);
    if (cfg.directions == SrmConfig::Directions::Bidirectional)
        add_direction(SrmCandidateRef::Kind::DeleteColumns);
    return refs;
}

/// Materializes one candidate latent, keeping shape (f_c, f_h, f_w):
/// insertion places `width` all-zero columns at `position` and truncates on
/// the right; deletion removes `width` columns at `position` and pads the
/// right with zero columns.
inline LatentTensor build_srm_candidate(const LatentTensor& z0, const SrmCandidateRef& ref) {
    if (ref.kind == SrmCandidateRef::Kind::Standard) return z0;
    const LatentShape& s = z0.shape();
    LatentTensor out(s);
    auto copy_col = [&](int dst, int src) {
        for (int q = 0; q < s.rows; ++q)
            for (int ch = 0; ch < s.channels; ++ch) out.at(ch, q, dst) = z0.at(ch, q, src);
    };
    if (ref.kind == SrmCandidateRef::Kind::InsertZeros) {
        for (int j = 0; j < s.cols; ++j) {
            if (j < ref.position) copy_col(j, j);
            else if (j >= ref.position + ref.width) copy_col(j, j - ref.width);
            // zero columns stay zero-initialized
        }
    } else {
        int deleted = std::min(ref.width, s.cols - ref.position);
        for (int j = 0; j < s.cols; ++j) {
            if (j < ref.position) copy_col(j, j);
            else if (j + deleted < s.cols) copy_col(j, j + deleted);
        }
    }
    return out;
}

/// Full candidate set (spec operation); detection walks the refs lazily.
inline std::vector<std::pair<SrmCandidateRef, LatentTensor>> srm_candidates(const LatentTensor& z0,
                                                                            const SrmConfig& cfg) {
    std::vector<std::pair<SrmCandidateRef, LatentTensor>> out;
    for (const auto& ref : srm_candidate_refs(cfg, z0.shape().cols))
        out.emplace_back(ref, build_srm_candidate(z0, ref));
    return out;
}

/// Outcome of one detection run.
struct DetectionReport {
    bool detected = false;
    double best_similarity = 0.0;
    SrmCandidateRef best_candidate;
    BitSequence extracted_message;
    int candidates_tried = 0;
};

inline nlohmann::json report_to_json(const DetectionReport& r) {
    return nlohmann::json{{"detected", r.detected},
                          {"best_similarity", r.best_similarity},
                          {"best_candidate", r.best_candidate.label()},
                          {"extracted_message", r.extracted_message.to_string()},
                          {"candidates_tried", r.candidates_tried}};
}

/// Watermark detection per the extraction algorithm: encode the circuit,
/// run standard extraction (inversion, reverse sampling, ECC decode,
/// similarity), and if that does not clear tau, walk the synchronization
/// candidates, accepting the first (early_stop) or best candidate at or
/// above tau. Deterministic given its inputs; ties resolve to the earliest
/// candidate in enumeration order.
inline DetectionReport detect_watermark(const Circuit& q, const WatermarkKey& key,
                                        const DetectionPolicy& policy,
                                        const DenoiserBackend& backend,
                                        const DiffusionSchedule& schedule, const SrmConfig& cfg,
                                        const LatentShape& shape, double guidance = 7.5) {
    if (policy.n != shape.size())
        throw ConfigError("policy codeword length does not equal latent size");
    if (policy.k < 1 || policy.n % policy.k != 0 || policy.v * policy.k != policy.n)
        throw ConfigError("policy k/v/n are inconsistent");
    if (int(key.message.size()) != policy.k)
        throw ConfigError("key message length does not match policy");
    if (q.num_qubits() != shape.rows)
        throw ConfigError("circuit qubit count does not match latent rows");

    LatentTensor z0 = encode_circuit(q, shape).latent;

    DetectionReport report;
    report.best_similarity = -1.0;
    for (const auto& ref : srm_candidate_refs(cfg, shape.cols)) {
        LatentTensor candidate = build_srm_candidate(z0, ref);
        LatentTensor zT = ddim_invert(candidate, backend, schedule, guidance);
        BitSequence message = ecc_decode(reverse_sample(zT), key, policy.k);
        double sim = similarity(key.message, message);
        ++report.candidates_tried;
        if (sim > report.best_similarity) {
            report.best_similarity = sim;
            report.best_candidate = ref;
            report.extracted_message = message;
        }
        if (policy.accepts(sim) && cfg.early_stop) break;
    }
    report.detected = policy.accepts(report.best_similarity);
    return report;
}

} // namespace qcw
