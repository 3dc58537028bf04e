#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcwmark/attacks.hpp"
#include "qcwmark/codec.hpp"
#include "qcwmark/diffusion.hpp"
#include "qcwmark/srm.hpp"
#include "qcwmark/watermark.hpp"

namespace qcw {

// ---------------------------------------------------------------------------
// deterministic parallel map: slot i is written only by iteration i, so the
// aggregate never depends on completion order

template <typename F>
void parallel_for(int n, F&& f, int max_threads = 0) {
    int hw = int(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    int workers = std::min(n, max_threads > 0 ? std::min(max_threads, hw) : hw);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// configuration

struct ExperimentConfig {
    int trials = 1000;
    std::string backend_spec = "zero";
    int steps = 50;
    double guidance = 7.5;
    int capacity = 24; // message bits k
    LatentShape shape{4, 8, 48};
    std::vector<AttackSpec> attacks; // grid cells; kind "none" = clean run
    double tau = 0.7916;
    double alpha0 = 1e-3;
    SrmConfig srm;
    uint64_t master_seed = 1;
    std::string output_path = "results.csv";

    DetectionPolicy policy() const { return make_policy(capacity, shape.size(), tau, alpha0); }

    void validate() const {
        if (trials < 1) throw ConfigError("trials must be >= 1");
        if (capacity < 1 || shape.size() % capacity != 0)
            throw IndivisibleCapacity("capacity must divide the latent size");
        policy(); // checks tau range
    }
};

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json attacks = nlohmann::json::array();
    for (const auto& a : c.attacks) attacks.push_back(attack_to_json(a));
    return nlohmann::json{
        {"trials", c.trials},
        {"backend", c.backend_spec},
        {"steps", c.steps},
        {"guidance", c.guidance},
        {"capacity", c.capacity},
        {"shape", {c.shape.channels, c.shape.rows, c.shape.cols}},
        {"attacks", attacks},
        {"tau", c.tau},
        {"alpha0", c.alpha0},
        {"srm",
         {{"w_max", c.srm.w_max},
          {"directions",
           c.srm.directions == SrmConfig::Directions::Bidirectional ? "bidirectional"
                                                                    : "insert_only"},
          {"early_stop", c.srm.early_stop}}},
        {"master_seed", c.master_seed},
        {"output", c.output_path},
    };
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        c.trials = j.value("trials", c.trials);
        c.backend_spec = j.value("backend", c.backend_spec);
        c.steps = j.value("steps", c.steps);
        c.guidance = j.value("guidance", c.guidance);
        c.capacity = j.value("capacity", c.capacity);
        if (j.contains("shape")) {
            auto s = j.at("shape");
            c.shape = LatentShape{s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>()};
        }
        if (j.contains("attacks"))
            for (const auto& a : j.at("attacks")) c.attacks.push_back(attack_from_json(a));
        c.tau = j.value("tau", c.tau);
        c.alpha0 = j.value("alpha0", c.alpha0);
        if (j.contains("srm")) {
            auto s = j.at("srm");
            c.srm.w_max = s.value("w_max", c.srm.w_max);
            std::string dir = s.value("directions", "insert_only");
            if (dir == "insert_only") c.srm.directions = SrmConfig::Directions::InsertOnly;
            else if (dir == "bidirectional") c.srm.directions = SrmConfig::Directions::Bidirectional;
            else throw ConfigError("unknown srm direction: " + dir);
            c.srm.early_stop = s.value("early_stop", c.srm.early_stop);
        }
        c.master_seed = j.value("master_seed", c.master_seed);
        c.output_path = j.value("output", c.output_path);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad config file: ") + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// results

struct ResultRow {
    std::string experiment;
    std::string backend;
    std::string attack;
    int attack_count = 0;
    double mean_gate_count = 0.0;
    int capacity = 0;
    int trials = 0;
    int detections = 0;
    double tpr = 0.0;
    double mean_bit_accuracy = 0.0;
    double mean_candidates = 0.0;
    double wall_time_ms = 0.0; // logged, but kept out of the CSV so reruns are byte-identical
};

namespace detail {

inline std::string fmt(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

} // namespace detail

/// CSV with a comment header noting that numbers come from a reference
/// backend, not a trained generator. Byte-identical across reruns with the
/// same config and master seed.
inline std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::string out =
        "# qcwmark bench results; reference diffusion backends, not a trained generator\n"
        "experiment,backend,attack,attack_count,mean_gate_count,capacity,trials,detections,tpr,"
        "mean_bit_accuracy,mean_candidates\n";
    for (const auto& r : rows) {
        out += r.experiment + "," + r.backend + "," + r.attack + "," +
               std::to_string(r.attack_count) + "," + detail::fmt(r.mean_gate_count, "%.3f") + "," +
               std::to_string(r.capacity) + "," + std::to_string(r.trials) + "," +
               std::to_string(r.detections) + "," + detail::fmt(r.tpr, "%.6f") + "," +
               detail::fmt(r.mean_bit_accuracy, "%.6f") + "," +
               detail::fmt(r.mean_candidates, "%.3f") + "\n";
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(text.data(), std::streamsize(text.size()));
    if (!f) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// pipeline pieces

/// Watermark embedding: ECC-encode the key message, draw the symmetric
/// starting latent, run the sampler, decode the circuit.
struct EmbedOutput {
    LatentTensor z_T;
    LatentTensor z_0;
    Circuit circuit;
};

inline EmbedOutput embed_circuit(const WatermarkKey& key, const DenoiserBackend& backend,
                                 const DiffusionSchedule& schedule, const LatentShape& shape,
                                 double guidance) {
    BitSequence s_en = ecc_encode(key.message, key, shape.size());
    EmbedOutput out{ssm_sample(s_en, key, shape), LatentTensor{}, Circuit(shape.rows)};
    out.z_0 = ddim_sample(out.z_T, backend, schedule, guidance);
    out.circuit = decode_latent(out.z_0);
    return out;
}

/// Unwatermarked control: plain Gaussian starting latent, same generator.
inline Circuit random_circuit_from_latent(uint64_t seed, const DenoiserBackend& backend,
                                          const DiffusionSchedule& schedule,
                                          const LatentShape& shape, double guidance) {
    ChaChaRng rng(seed);
    LatentTensor zT(shape);
    for (int i = 0; i < shape.size(); ++i) zT[std::size_t(i)] = rng.normal();
    return decode_latent(ddim_sample(zT, backend, schedule, guidance));
}

/// Standard extraction (no synchronization search): encode, invert, reverse
/// sample, ECC decode; returns the count of correctly recovered message bits.
inline int standard_extract_bits(const Circuit& q, const WatermarkKey& key,
                                 const DetectionPolicy& policy, const DenoiserBackend& backend,
                                 const DiffusionSchedule& schedule, const LatentShape& shape,
                                 double guidance) {
    LatentTensor z0 = encode_circuit(q, shape).latent;
    LatentTensor zT = ddim_invert(z0, backend, schedule, guidance);
    BitSequence message = ecc_decode(reverse_sample(zT), key, policy.k);
    return matching_bits(key.message, message);
}

// ---------------------------------------------------------------------------
// benchmark suites

namespace detail {

struct TrialStats {
    int detected = 0;
    double sim_sum = 0.0;
    double candidates_sum = 0.0;
    double gates_sum = 0.0;
};

inline uint64_t key_seed(uint64_t master) { return derive_seed(master, 0xfeed0001ull); }

} // namespace detail

/// Robustness grid: one row per attack cell. Per trial, a fresh symmetric
/// latent is drawn (same message and cipher key), the circuit is generated,
/// attacked, and detection runs with the configured synchronization search.
inline std::vector<ResultRow> run_robustness_bench(const ExperimentConfig& cfg,
                                                   std::ostream* log = nullptr) {
    cfg.validate();
    if (cfg.attacks.empty()) throw ConfigError("robustness bench needs at least one attack cell");
    auto backend = make_backend(cfg.backend_spec, cfg.shape.size());
    DiffusionSchedule schedule(cfg.steps);
    DetectionPolicy policy = cfg.policy();
    WatermarkKey key = random_watermark_key(detail::key_seed(cfg.master_seed), cfg.capacity);

    std::vector<ResultRow> rows;
    for (std::size_t cell = 0; cell < cfg.attacks.size(); ++cell) {
        const AttackSpec& attack = cfg.attacks[cell];
        uint64_t cell_seed = derive_seed(cfg.master_seed, 0x1000 + cell);
        auto start = std::chrono::steady_clock::now();

        std::vector<int> detected(static_cast<std::size_t>(cfg.trials));
        std::vector<double> sims(static_cast<std::size_t>(cfg.trials));
        std::vector<double> cands(static_cast<std::size_t>(cfg.trials));
        std::vector<double> gates(static_cast<std::size_t>(cfg.trials));
        parallel_for(cfg.trials, [&](int trial) {
            uint64_t trial_seed = derive_seed(cell_seed, uint64_t(trial));
            WatermarkKey k = key;
            k.gauss_seed = derive_seed(trial_seed, 0);
            EmbedOutput emb = embed_circuit(k, *backend, schedule, cfg.shape, cfg.guidance);
            AttackSpec a = attack;
            a.seed = derive_seed(trial_seed, 1);
            Circuit attacked = apply_attack(emb.circuit, a);
            DetectionReport rep = detect_watermark(attacked, k, policy, *backend, schedule,
                                                   cfg.srm, cfg.shape, cfg.guidance);
            detected[std::size_t(trial)] = rep.detected ? 1 : 0;
            sims[std::size_t(trial)] = rep.best_similarity;
            cands[std::size_t(trial)] = double(rep.candidates_tried);
            gates[std::size_t(trial)] = double(gate_count(emb.circuit));
        });

        detail::TrialStats st;
        for (int t = 0; t < cfg.trials; ++t) {
            st.detected += detected[std::size_t(t)];
            st.sim_sum += sims[std::size_t(t)];
            st.candidates_sum += cands[std::size_t(t)];
            st.gates_sum += gates[std::size_t(t)];
        }
        auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        ResultRow row{"robustness",
                      cfg.backend_spec,
                      attack_kind_name(attack.kind),
                      attack.count,
                      st.gates_sum / cfg.trials,
                      cfg.capacity,
                      cfg.trials,
                      st.detected,
                      double(st.detected) / cfg.trials,
                      st.sim_sum / cfg.trials,
                      st.candidates_sum / cfg.trials,
                      elapsed};
        if (log)
            *log << "[bench] " << row.experiment << " " << row.attack << " x" << row.attack_count
                 << ": tpr=" << row.tpr << " (" << row.wall_time_ms << " ms)\n";
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Calibration: bit-accuracy histograms of watermarked and unwatermarked
/// populations under standard extraction, Gaussian fits, and the
/// Neyman-Pearson threshold for the target false-alarm rate.
struct CalibrationOutput {
    CalibrationResult result;
    std::vector<int> hist_watermarked;   // counts per correct-bit value 0..k
    std::vector<int> hist_unwatermarked;
    std::string csv;
};

inline CalibrationOutput run_calibration(int samples_w, int samples_u, double alpha0,
                                         const ExperimentConfig& cfg, std::ostream* log = nullptr) {
    if (samples_w < 100 || samples_u < 100)
        throw ConfigError("calibration needs at least 100 samples per population");
    auto backend = make_backend(cfg.backend_spec, cfg.shape.size());
    DiffusionSchedule schedule(cfg.steps);
    DetectionPolicy policy = cfg.policy();
    WatermarkKey key = random_watermark_key(detail::key_seed(cfg.master_seed), cfg.capacity);

    std::vector<int> bits_w(static_cast<std::size_t>(samples_w));
    std::vector<int> bits_u(static_cast<std::size_t>(samples_u));
    uint64_t seed_w = derive_seed(cfg.master_seed, 0xca11b001ull);
    uint64_t seed_u = derive_seed(cfg.master_seed, 0xca11b002ull);
    parallel_for(samples_w, [&](int i) {
        WatermarkKey k = key;
        k.gauss_seed = derive_seed(seed_w, uint64_t(i));
        EmbedOutput emb = embed_circuit(k, *backend, schedule, cfg.shape, cfg.guidance);
        bits_w[std::size_t(i)] = standard_extract_bits(emb.circuit, k, policy, *backend, schedule,
                                                       cfg.shape, cfg.guidance);
    });
    parallel_for(samples_u, [&](int i) {
        Circuit c = random_circuit_from_latent(derive_seed(seed_u, uint64_t(i)), *backend, schedule,
                                               cfg.shape, cfg.guidance);
        bits_u[std::size_t(i)] =
            standard_extract_bits(c, key, policy, *backend, schedule, cfg.shape, cfg.guidance);
    });

    auto moments = [](const std::vector<int>& xs) {
        double mean = 0.0;
        for (int x : xs) mean += x;
        mean /= double(xs.size());
        double var = 0.0;
        for (int x : xs) var += (x - mean) * (x - mean);
        var /= double(xs.size() - 1);
        return std::pair<double, double>(mean, std::sqrt(var));
    };
    auto [mu0, sigma0] = moments(bits_u);
    auto [mu1, sigma1] = moments(bits_w);

    CalibrationOutput out;
    out.result = np_calibrate(mu0, sigma0, alpha0, mu1, sigma1);
    out.hist_watermarked.assign(std::size_t(policy.k) + 1, 0);
    out.hist_unwatermarked.assign(std::size_t(policy.k) + 1, 0);
    for (int b : bits_w) ++out.hist_watermarked[std::size_t(b)];
    for (int b : bits_u) ++out.hist_unwatermarked[std::size_t(b)];

    out.csv = "# qcwmark calibration histograms; reference diffusion backends\n"
              "correct_bits,count_watermarked,count_unwatermarked\n";
    for (int b = 0; b <= policy.k; ++b)
        out.csv += std::to_string(b) + "," + std::to_string(out.hist_watermarked[std::size_t(b)]) +
                   "," + std::to_string(out.hist_unwatermarked[std::size_t(b)]) + "\n";
    if (log)
        *log << "[calibrate] mu0=" << mu0 << " sigma0=" << sigma0 << " mu1=" << mu1
             << " sigma1=" << sigma1 << " th=" << out.result.th << "\n";
    return out;
}

/// Capacity sweep: for each message length, the similarity threshold is
/// recomputed from the exact binomial tail to keep FPR <= alpha0, then clean
/// and replacement cells run at that policy.
inline std::vector<ResultRow> run_capacity_sweep(const ExperimentConfig& base,
                                                 const std::vector<int>& capacities,
                                                 std::ostream* log = nullptr) {
    std::vector<ResultRow> rows;
    for (int k : capacities) {
        if (k < 1 || base.shape.size() % k != 0)
            throw IndivisibleCapacity("capacity " + std::to_string(k) +
                                      " does not divide the latent size");
        int tau_bits = min_tau_bits_for_fpr(k, base.alpha0);
        ExperimentConfig cfg = base;
        cfg.capacity = k;
        cfg.tau = double(tau_bits) / double(k);
        cfg.attacks = {AttackSpec{AttackKind::None, 0, 0, AppendMode::Strict},
                       AttackSpec{AttackKind::Replace, 2, 0, AppendMode::Strict}};
        auto sub = run_robustness_bench(cfg, log);
        for (auto& r : sub) {
            r.experiment = "capacity";
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

/// Generation/inversion step sweep with the configured backend.
inline std::vector<ResultRow> run_steps_sweep(const ExperimentConfig& base,
                                              const std::vector<int>& step_grid,
                                              std::ostream* log = nullptr) {
    std::vector<ResultRow> rows;
    for (int T : step_grid) {
        ExperimentConfig cfg = base;
        cfg.steps = T;
        cfg.attacks = {AttackSpec{AttackKind::None, 0, 0, AppendMode::Strict}};
        auto sub = run_robustness_bench(cfg, log);
        for (auto& r : sub) {
            r.experiment = "steps/T=" + std::to_string(T);
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

/// Synchronization-search ablation: contiguous runs of 1..3 columns are
/// deleted from watermarked circuits at positions in the first quarter of
/// the grid (where the shift desynchronizes essentially every block), then
/// extraction runs with and without the search.
inline std::vector<ResultRow> run_srm_ablation(const ExperimentConfig& cfg,
                                               std::ostream* log = nullptr) {
    cfg.validate();
    auto backend = make_backend(cfg.backend_spec, cfg.shape.size());
    DiffusionSchedule schedule(cfg.steps);
    DetectionPolicy policy = cfg.policy();
    WatermarkKey key = random_watermark_key(detail::key_seed(cfg.master_seed), cfg.capacity);
    int max_start = std::max(1, cfg.shape.cols / 4);

    std::vector<ResultRow> rows;
    for (int run_len = 1; run_len <= 3; ++run_len) {
        uint64_t cell_seed = derive_seed(cfg.master_seed, 0xab1a0000ull + uint64_t(run_len));
        auto start = std::chrono::steady_clock::now();
        std::vector<int> det_no(static_cast<std::size_t>(cfg.trials)), det_srm(static_cast<std::size_t>(cfg.trials));
        std::vector<double> sims(static_cast<std::size_t>(cfg.trials)), cands(static_cast<std::size_t>(cfg.trials)),
            gates(static_cast<std::size_t>(cfg.trials));
        parallel_for(cfg.trials, [&](int trial) {
            uint64_t trial_seed = derive_seed(cell_seed, uint64_t(trial));
            WatermarkKey k = key;
            k.gauss_seed = derive_seed(trial_seed, 0);
            EmbedOutput emb = embed_circuit(k, *backend, schedule, cfg.shape, cfg.guidance);
            ChaChaRng rng(derive_seed(trial_seed, 1));
            int pos = int(rng.uniform_below(uint64_t(max_start)));
            std::vector<int> cols;
            for (int d = 0; d < run_len && pos + d < emb.circuit.column_count(); ++d)
                cols.push_back(pos + d);
            Circuit attacked = delete_columns(emb.circuit, cols);

            int bits = standard_extract_bits(attacked, k, policy, *backend, schedule, cfg.shape,
                                             cfg.guidance);
            det_no[std::size_t(trial)] = policy.accepts(double(bits) / policy.k) ? 1 : 0;

            DetectionReport rep = detect_watermark(attacked, k, policy, *backend, schedule,
                                                   cfg.srm, cfg.shape, cfg.guidance);
            det_srm[std::size_t(trial)] = rep.detected ? 1 : 0;
            sims[std::size_t(trial)] = rep.best_similarity;
            cands[std::size_t(trial)] = double(rep.candidates_tried);
            gates[std::size_t(trial)] = double(gate_count(emb.circuit));
        });
        double elapsed = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        detail::TrialStats no_srm, with_srm;
        for (int t = 0; t < cfg.trials; ++t) {
            no_srm.detected += det_no[std::size_t(t)];
            with_srm.detected += det_srm[std::size_t(t)];
            with_srm.sim_sum += sims[std::size_t(t)];
            with_srm.candidates_sum += cands[std::size_t(t)];
            with_srm.gates_sum += gates[std::size_t(t)];
        }
        rows.push_back({"ablation_no_srm", cfg.backend_spec, "delete_columns", run_len,
                        with_srm.gates_sum / cfg.trials, cfg.capacity, cfg.trials, no_srm.detected,
                        double(no_srm.detected) / cfg.trials, 0.0, 1.0, elapsed / 2});
        rows.push_back({"ablation_with_srm", cfg.backend_spec, "delete_columns", run_len,
                        with_srm.gates_sum / cfg.trials, cfg.capacity, cfg.trials,
                        with_srm.detected, double(with_srm.detected) / cfg.trials,
                        with_srm.sim_sum / cfg.trials, with_srm.candidates_sum / cfg.trials,
                        elapsed / 2});
        if (log)
            *log << "[ablation] run_len=" << run_len
                 << " tpr_no_srm=" << double(no_srm.detected) / cfg.trials
                 << " tpr_with_srm=" << double(with_srm.detected) / cfg.trials << "\n";
    }
    return rows;
}

/// Family-wise false-accept measurement over unwatermarked circuits with the
/// full synchronization search, against the union bound
/// candidates * fpr_binomial(tau_bits, k).
struct FamilyFprResult {
    int circuits = 0;
    int false_accepts = 0;
    double rate = 0.0;
    double union_bound = 0.0;
    double mean_candidates = 0.0;
};

inline FamilyFprResult run_family_fpr(const ExperimentConfig& cfg, int num_circuits,
                                      std::ostream* log = nullptr) {
    cfg.validate();
    if (num_circuits < 1) throw ConfigError("need at least one circuit");
    auto backend = make_backend(cfg.backend_spec, cfg.shape.size());
    DiffusionSchedule schedule(cfg.steps);
    DetectionPolicy policy = cfg.policy();
    WatermarkKey key = random_watermark_key(detail::key_seed(cfg.master_seed), cfg.capacity);
    uint64_t seed0 = derive_seed(cfg.master_seed, 0xf9f90001ull);

    std::vector<int> accepted(static_cast<std::size_t>(num_circuits));
    std::vector<double> cands(static_cast<std::size_t>(num_circuits));
    parallel_for(num_circuits, [&](int i) {
        Circuit c = random_circuit_from_latent(derive_seed(seed0, uint64_t(i)), *backend, schedule,
                                               cfg.shape, cfg.guidance);
        DetectionReport rep =
            detect_watermark(c, key, policy, *backend, schedule, cfg.srm, cfg.shape, cfg.guidance);
        accepted[std::size_t(i)] = rep.detected ? 1 : 0;
        cands[std::size_t(i)] = double(rep.candidates_tried);
    });

    FamilyFprResult out;
    out.circuits = num_circuits;
    for (int i = 0; i < num_circuits; ++i) {
        out.false_accepts += accepted[std::size_t(i)];
        out.mean_candidates += cands[std::size_t(i)];
    }
    out.mean_candidates /= num_circuits;
    out.rate = double(out.false_accepts) / num_circuits;
    out.union_bound = cfg.srm.raw_candidate_count(cfg.shape.cols) *
                      fpr_binomial(policy.tau_bits(), policy.k);
    if (log)
        *log << "[family-fpr] rate=" << out.rate << " bound=" << out.union_bound << " ("
             << out.false_accepts << "/" << out.circuits << ")\n";
    return out;
}

} // namespace qcw
