// Acceptance suite: runs every advertised guarantee end to end and prints
// one PASS/FAIL line per criterion. Exit code is the number of failures.
//
// An optional list of criterion numbers restricts the run, e.g.
//   ./acceptance 1 4 7

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "qcwmark/qcwmark.hpp"

using namespace qcw;

namespace {

const LatentShape kShape{4, 8, 48};

struct Runner {
    std::set<int> selected;
    int failures = 0;

    bool wants(int id) const { return selected.empty() || selected.count(id) > 0; }

    void report(int id, bool ok, const std::string& name, const std::string& detail) {
        std::printf("[%s] criterion %2d: %s  --  %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* spec, ...) {
    char buf[512];
    va_list args;
    va_start(args, spec);
    std::vsnprintf(buf, sizeof(buf), spec, args);
    va_end(args);
    return buf;
}

// --------------------------------------------------------------------------
// 1. SSM Gaussianity at one million samples

void criterion1(Runner& r) {
    auto start = std::chrono::steady_clock::now();
    const int reps = 1000000 / kShape.size() + 1; // 652 tensors > 1e6 values
    ChaChaRng bits(20250101);
    WatermarkKey key = random_watermark_key(8675309, 24);
    std::vector<double> samples;
    samples.reserve(std::size_t(reps) * std::size_t(kShape.size()));
    for (int rep = 0; rep < reps; ++rep) {
        BitSequence s(std::size_t(kShape.size()));
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = uint8_t(bits.next_u64() & 1);
        key.gauss_seed = bits.next_u64();
        LatentTensor z = ssm_sample(s, key, kShape);
        for (int i = 0; i < z.size(); ++i) samples.push_back(z[std::size_t(i)]);
    }
    samples.resize(1000000);
    double n = 1e6;
    double mean = 0;
    for (double v : samples) mean += v;
    mean /= n;
    double var = 0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= n;
    std::sort(samples.begin(), samples.end());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double cdf = 0.5 * std::erfc(-samples[i] / std::numbers::sqrt2);
        d = std::max(d, std::fabs(cdf - double(i + 1) / n));
        d = std::max(d, std::fabs(cdf - double(i) / n));
    }
    double secs = elapsed_s(start);
    bool ok = d < 1.63e-3 && std::fabs(mean) < 0.004 && var > 0.99 && var < 1.01 && secs < 30.0;
    r.report(1, ok, "symmetric sampling stays standard normal",
             fmt("KS D=%.5f (<0.00163), |mean|=%.5f (<0.004), var=%.5f, %.1fs (<30s)", d,
                 std::fabs(mean), var, secs));
}

// --------------------------------------------------------------------------
// 2. reverse_sample is the exact inverse of ssm_sample

void criterion2(Runner& r) {
    ChaChaRng rng(424242);
    int errors = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        WatermarkKey key = random_watermark_key(rng.next_u64(), 24);
        BitSequence s(std::size_t(kShape.size()));
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = uint8_t(rng.next_u64() & 1);
        if (!(reverse_sample(ssm_sample(s, key, kShape)) == s)) ++errors;
    }
    r.report(2, errors == 0, "reverse sampling inverts symmetric sampling",
             fmt("%d errors over 1000 random 1536-bit codewords", errors));
}

// --------------------------------------------------------------------------
// 3. end-to-end exactness with the zero-noise backend

void criterion3(Runner& r) {
    auto start = std::chrono::steady_clock::now();
    ZeroNoiseBackend backend;
    DiffusionSchedule schedule(50);
    WatermarkKey base = random_watermark_key(777001, 24);
    const int trials = 1000;
    std::vector<int> exact(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int t) {
        WatermarkKey key = base;
        key.gauss_seed = derive_seed(99, uint64_t(t));
        EmbedOutput emb = embed_circuit(key, backend, schedule, kShape, 7.5);
        LatentTensor z0 = encode_circuit(emb.circuit, kShape).latent;
        LatentTensor zT = ddim_invert(z0, backend, schedule, 7.5);
        BitSequence message = ecc_decode(reverse_sample(zT), key, 24);
        exact[std::size_t(t)] = similarity(key.message, message) == 1.0 ? 1 : 0;
    });
    int good = 0;
    for (int v : exact) good += v;
    double secs = elapsed_s(start);
    bool ok = good == trials && secs < 120.0;
    r.report(3, ok, "zero-noise pipeline recovers the message exactly",
             fmt("similarity 1.0 in %d/1000 trials, %.1fs (<120s)", good, secs));
}

// --------------------------------------------------------------------------
// 4. inversion quality with the linear-orthogonal backend

void criterion4(Runner& r) {
    LinearOrthogonalBackend backend(kShape.size(), 515151);
    WatermarkKey base = random_watermark_key(31337, 24);

    auto run_T = [&](int T, int trials, double& mean_agree, double& recovered) {
        DiffusionSchedule schedule(T);
        std::vector<double> agree(static_cast<std::size_t>(trials));
        std::vector<int> recov(static_cast<std::size_t>(trials));
        parallel_for(trials, [&](int t) {
            WatermarkKey key = base;
            key.gauss_seed = derive_seed(0xabcd, uint64_t(T) << 32 | uint64_t(t));
            BitSequence s_en = ecc_encode(key.message, key, kShape.size());
            LatentTensor zT = ssm_sample(s_en, key, kShape);
            LatentTensor z0 = ddim_sample(zT, backend, schedule, 7.5);
            LatentTensor back = ddim_invert(z0, backend, schedule, 7.5);
            BitSequence bits = reverse_sample(back);
            agree[std::size_t(t)] = similarity(bits, s_en);
            BitSequence message = ecc_decode(bits, key, 24);
            recov[std::size_t(t)] = similarity(key.message, message) >= 0.7916 ? 1 : 0;
        });
        mean_agree = 0;
        int rec = 0;
        for (int t = 0; t < trials; ++t) {
            mean_agree += agree[std::size_t(t)];
            rec += recov[std::size_t(t)];
        }
        mean_agree /= trials;
        recovered = double(rec) / trials;
    };

    double agree50 = 0, rec50 = 0, agree10 = 0, agree100 = 0, unused = 0;
    run_T(50, 1000, agree50, rec50);
    run_T(10, 100, agree10, unused);
    run_T(100, 100, agree100, unused);

    bool ok = agree50 >= 0.99 && rec50 >= 0.99 && agree100 >= agree10;
    r.report(4, ok, "linear-orthogonal inversion quality",
             fmt("T=50 mean sign agreement=%.4f (>=0.99), recovery=%.3f (>=0.99), "
                 "T=100 agreement %.4f >= T=10 agreement %.4f: %s",
                 agree50, rec50, agree100, agree10, agree100 >= agree10 ? "yes" : "no"));
}

// --------------------------------------------------------------------------
// 5. exact binomial tail and its Monte-Carlo shadow

void criterion5(Runner& r) {
    bool exact = fpr_binomial(19, 24) == 12951.0 / 16777216.0 &&
                 fpr_binomial(18, 24) == 55455.0 / 16777216.0;

    // independent multiplicative-formula oracle plus beta-form agreement
    bool oracle_ok = true;
    for (int tau = 0; tau <= 24 && oracle_ok; ++tau) {
        unsigned long long sum = 0;
        for (int i = tau + 1; i <= 24; ++i) {
            unsigned long long c = 1;
            for (int j = 1; j <= i; ++j) c = c * uint64_t(24 - j + 1) / uint64_t(j);
            sum += c;
        }
        double want = double(sum) / 16777216.0;
        oracle_ok = std::fabs(fpr_binomial(tau, 24) - want) < 1e-15 &&
                    std::fabs(fpr_incomplete_beta(tau, 24) - want) < 1e-12;
    }

    ChaChaRng rng(5150);
    const int trials = 100000;
    BitSequence message(24);
    for (int i = 0; i < 24; ++i) message[std::size_t(i)] = uint8_t(rng.next_u64() & 1);
    int accepts = 0;
    for (int t = 0; t < trials; ++t) {
        int match = 0;
        for (int i = 0; i < 24; ++i) match += message[std::size_t(i)] == (rng.next_u64() & 1);
        accepts += match > 19;
    }
    double p = fpr_binomial(19, 24);
    double sigma = std::sqrt(p * (1 - p) * trials);
    bool mc_ok = std::fabs(accepts - p * trials) <= 3 * sigma;

    r.report(5, exact && oracle_ok && mc_ok, "binomial-tail false-positive oracle",
             fmt("fpr(19,24)=12951/2^24 %s, beta form agrees to 1e-12 %s, MC %d/%d vs %.1f "
                 "(3sigma=%.1f)",
                 exact ? "yes" : "NO", oracle_ok ? "yes" : "NO", accepts, trials, p * trials,
                 3 * sigma));
}

// --------------------------------------------------------------------------
// 6. Neyman-Pearson threshold

void criterion6(Runner& r) {
    double th = np_calibrate(9.00, 2.43, 1e-3).th;
    bool ok = std::fabs(th - 16.51) <= 0.05;
    r.report(6, ok, "Neyman-Pearson calibration", fmt("th=%.4f (16.51 +/- 0.05)", th));
}

// --------------------------------------------------------------------------
// 7. synchronization-search ablation

void criterion7(Runner& r) {
    ExperimentConfig cfg;
    cfg.trials = 1000;
    cfg.backend_spec = "zero";
    cfg.master_seed = 70707;
    auto rows = run_srm_ablation(cfg);
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        double without = rows[i].tpr, with_srm = rows[i + 1].tpr;
        ok = ok && without <= 0.05 && with_srm >= 0.99 && (with_srm - without) >= 0.40;
        detail += fmt("run=%d: %.3f -> %.3f  ", rows[i].attack_count, without, with_srm);
    }
    r.report(7, ok, "synchronization search closes the deletion gap", detail);
}

// --------------------------------------------------------------------------
// 8. attack robustness grid and family-wise false accepts

void criterion8(Runner& r) {
    ExperimentConfig cfg;
    cfg.trials = 1000;
    cfg.backend_spec = "zero";
    cfg.master_seed = 80808;
    for (int n = 1; n <= 5; ++n)
        cfg.attacks.push_back({AttackKind::Replace, n, 0, AppendMode::Strict});
    for (int n = 1; n <= 5; ++n)
        cfg.attacks.push_back({AttackKind::Append, n, 0, AppendMode::Strict});
    for (int n = 1; n <= 3; ++n)
        cfg.attacks.push_back({AttackKind::Delete, n, 0, AppendMode::Strict});
    auto rows = run_robustness_bench(cfg);

    // insertion cells run with the bidirectional search, wide enough for two
    // spliced pairs
    ExperimentConfig icfg = cfg;
    icfg.attacks.clear();
    for (int n = 1; n <= 2; ++n)
        icfg.attacks.push_back({AttackKind::Insert, n, 0, AppendMode::Strict});
    icfg.srm.directions = SrmConfig::Directions::Bidirectional;
    icfg.srm.w_max = 4;
    auto irows = run_robustness_bench(icfg);
    rows.insert(rows.end(), irows.begin(), irows.end());

    bool tpr_ok = true;
    double worst = 1.0;
    std::string worst_cell = "-";
    for (const auto& row : rows) {
        if (row.tpr < worst) {
            worst = row.tpr;
            worst_cell = row.attack + " x" + std::to_string(row.attack_count);
        }
        tpr_ok = tpr_ok && row.tpr >= 0.99;
    }

    ExperimentConfig fcfg;
    fcfg.backend_spec = "zero";
    fcfg.master_seed = 80809;
    FamilyFprResult fam = run_family_fpr(fcfg, 10000);
    bool fam_ok = fam.rate <= fam.union_bound;

    r.report(8, tpr_ok && fam_ok, "attack robustness with bounded false accepts",
             fmt("worst TPR %.3f at %s (>=0.99 over 15 cells); family FPR %.4f <= %.4f "
                 "(%d/%d accepts)",
                 worst, worst_cell.c_str(), fam.rate, fam.union_bound, fam.false_accepts,
                 fam.circuits));
}

// --------------------------------------------------------------------------
// 9. equivalence suite

void criterion9(Runner& r) {
    ChaChaRng rng(909090);
    bool replace_ok = true, insert_ok = true, append_ok = true;
    std::set<GateKind> replaced_kinds;
    std::set<int> insert_sizes;

    auto random_circuit = [&](int nq, int cols, int fill) {
        Circuit c(nq);
        static const GateKind singles[] = {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z,
                                           GateKind::S, GateKind::Sdg, GateKind::T, GateKind::Tdg};
        for (int t = 0; t < cols; ++t) {
            c.append_column();
            for (int q = 0; q < nq; ++q)
                if (int(rng.uniform_below(100)) < fill) c.set(q, t, singles[rng.uniform_below(8)]);
        }
        return c;
    };

    for (int it = 0; it < 150; ++it) {
        int nq = 4 + int(rng.uniform_below(5));
        Circuit c = random_circuit(nq, 10, 30);
        AttackSpec spec{AttackKind::Replace, 1 + int(rng.uniform_below(3)), rng.next_u64(),
                        AppendMode::Strict};
        Circuit attacked;
        try {
            // record which rule fired by scanning eligible tokens
            for (const auto& inst : gate_instances(c))
                if (inst.is_single()) {
                    GateKind g = inst.cells.front().second;
                    if (g == GateKind::X || g == GateKind::Y || g == GateKind::Z)
                        replaced_kinds.insert(g);
                }
            attacked = apply_replacement(c, spec);
        } catch (const InsufficientTargets&) {
            continue;
        }
        replace_ok = replace_ok &&
                     equivalent_up_to_phase(simulate_unitary(c), simulate_unitary(attacked), 1e-10);

        AttackSpec ins{AttackKind::Insert, 1 + int(rng.uniform_below(2)), rng.next_u64(),
                       AppendMode::Strict};
        Circuit inserted = apply_insertion(c, ins);
        insert_ok = insert_ok &&
                    equivalent_up_to_phase(simulate_unitary(c), simulate_unitary(inserted), 1e-10);
        for (const auto& inst : gate_instances(inserted)) insert_sizes.insert(int(inst.cells.size()));

        AttackSpec app{AttackKind::Append, 1 + int(rng.uniform_below(5)), rng.next_u64(),
                       AppendMode::Strict};
        Circuit appended = apply_append(c, app);
        auto pa = outcome_distribution(c);
        auto pb = outcome_distribution(appended);
        for (std::size_t i = 0; i < pa.size(); ++i)
            append_ok = append_ok && std::fabs(pa[i] - pb[i]) <= 1e-10;
    }
    bool coverage = replaced_kinds.size() == 3 && insert_sizes.count(2) > 0;
    bool ok = replace_ok && insert_ok && append_ok && coverage;
    r.report(9, ok, "attack equivalence at 1e-10",
             fmt("replacement %s, insertion %s, strict appends %s, rule coverage %zu/3",
                 replace_ok ? "ok" : "BAD", insert_ok ? "ok" : "BAD", append_ok ? "ok" : "BAD",
                 replaced_kinds.size()));
}

// --------------------------------------------------------------------------
// 10. codec identity, ECC under damage, RFC keystream vector

void criterion10(Runner& r) {
    ChaChaRng rng(101010);
    bool codec_ok = true;
    for (int it = 0; it < 1000 && codec_ok; ++it) {
        // random valid grid with occasional partner groups
        Circuit c(8);
        int cols = 1 + int(rng.uniform_below(48));
        static const GateKind singles[] = {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z,
                                           GateKind::S, GateKind::Sdg, GateKind::T, GateKind::Tdg};
        for (int t = 0; t < cols; ++t) {
            c.append_column();
            for (int q = 0; q < 8; ++q)
                if (rng.uniform_below(100) < 40) c.set(q, t, singles[rng.uniform_below(8)]);
            if (rng.uniform_below(100) < 25) {
                int a = int(rng.uniform_below(8));
                int b = int(rng.uniform_below(7));
                if (b >= a) ++b;
                c.set(a, t, GateKind::CxC);
                c.set(b, t, GateKind::CxT);
            }
        }
        codec_ok = decode_latent(encode_circuit(c, kShape).latent) == trim_trailing_idle(c);
    }

    bool ecc_ok = true;
    for (int k : {12, 16, 24, 32, 48}) {
        int v = 1536 / k;
        for (int it = 0; it < 10 && ecc_ok; ++it) {
            WatermarkKey key = random_watermark_key(rng.next_u64(), k);
            BitSequence s = ecc_encode(key.message, key, 1536);
            ecc_ok = ecc_decode(s, key, k) == key.message;
            BitSequence damaged = s;
            for (int j = 0; j < k; ++j) {
                // adversarial: flip a maximal non-decoding-breaking prefix of each block
                for (int f = 0; f < (v - 1) / 2; ++f) damaged[std::size_t(j) * v + f] ^= 1;
            }
            ecc_ok = ecc_ok && ecc_decode(damaged, key, k) == key.message;
        }
    }

    WatermarkKey rfc;
    for (int i = 0; i < 32; ++i) rfc.cipher_key[std::size_t(i)] = uint8_t(i);
    rfc.nonce = {0, 0, 0, 0, 0, 0, 0, 0x4a, 0, 0, 0, 0};
    bool rfc_ok = keystream(rfc, 8).to_string() == "00100010";

    r.report(10, codec_ok && ecc_ok && rfc_ok, "codec identity, ECC margins, RFC keystream",
             fmt("codec %s, ecc %s, rfc vector %s", codec_ok ? "ok" : "BAD",
                 ecc_ok ? "ok" : "BAD", rfc_ok ? "ok" : "BAD"));
}

// --------------------------------------------------------------------------
// 11. byte-identical reruns

void criterion11(Runner& r) {
    ExperimentConfig cfg;
    cfg.trials = 100;
    cfg.backend_spec = "zero";
    cfg.master_seed = 111111;
    cfg.attacks = {{AttackKind::None, 0, 0, AppendMode::Strict},
                   {AttackKind::Replace, 2, 0, AppendMode::Strict},
                   {AttackKind::Delete, 1, 0, AppendMode::Strict}};
    std::string a = rows_to_csv(run_robustness_bench(cfg));
    std::string b = rows_to_csv(run_robustness_bench(cfg));
    bool ok = a == b && !a.empty();
    r.report(11, ok, "bench reruns are byte-identical",
             fmt("%zu-byte CSV, identical: %s", a.size(), a == b ? "yes" : "NO"));
}

} // namespace

int main(int argc, char** argv) {
    Runner runner;
    for (int i = 1; i < argc; ++i) runner.selected.insert(std::atoi(argv[i]));

    using Fn = void (*)(Runner&);
    const Fn criteria[] = {criterion1, criterion2, criterion3, criterion4,  criterion5, criterion6,
                           criterion7, criterion8, criterion9, criterion10, criterion11};
    for (int id = 1; id <= 11; ++id)
        if (runner.wants(id)) criteria[id - 1](runner);

    if (runner.failures == 0) std::printf("all selected criteria passed\n");
    else std::printf("%d criterion(s) failed\n", runner.failures);
    return runner.failures;
}
