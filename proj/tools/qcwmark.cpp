// Command-line frontend: key generation, watermark embedding, structural
// attacks, verification, calibration, and benchmark suites.
//
// Exit codes: 0 success / watermark detected, 1 watermark not detected,
// 2 usage error, 3 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcwmark/circuit_io.hpp"
#include "qcwmark/qcwmark.hpp"

namespace {

qcw::LatentShape parse_shape(const std::string& s) {
    int c = 0, h = 0, w = 0;
    if (std::sscanf(s.c_str(), "%dx%dx%d", &c, &h, &w) != 3)
        throw qcw::ConfigError("shape must look like 4x8x48");
    return qcw::LatentShape{c, h, w};
}

qcw::SrmConfig::Directions parse_directions(const std::string& s) {
    if (s == "insert_only") return qcw::SrmConfig::Directions::InsertOnly;
    if (s == "bidirectional") return qcw::SrmConfig::Directions::Bidirectional;
    throw qcw::ConfigError("directions must be insert_only or bidirectional");
}

struct CommonOpts {
    std::string backend = "zero";
    int steps = 50;
    double guidance = 7.5;
    std::string shape = "4x8x48";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--backend", o.backend, "denoiser backend: zero | linear:<seed>");
    cmd->add_option("--steps", o.steps, "diffusion steps T")->check(CLI::Range(1, 999));
    cmd->add_option("--guidance", o.guidance, "guidance scale (reference backends ignore it)");
    cmd->add_option("--shape", o.shape, "latent shape CxHxW");
}

std::vector<qcw::AttackSpec> default_attack_grid() {
    using qcw::AttackKind;
    using qcw::AttackSpec;
    std::vector<AttackSpec> grid;
    grid.push_back({AttackKind::None, 0, 0, qcw::AppendMode::Strict});
    for (int n = 1; n <= 5; ++n) grid.push_back({AttackKind::Replace, n, 0, qcw::AppendMode::Strict});
    for (int n = 1; n <= 5; ++n) grid.push_back({AttackKind::Append, n, 0, qcw::AppendMode::Strict});
    for (int n = 1; n <= 2; ++n) grid.push_back({AttackKind::Insert, n, 0, qcw::AppendMode::Strict});
    for (int n = 1; n <= 3; ++n) grid.push_back({AttackKind::Delete, n, 0, qcw::AppendMode::Strict});
    return grid;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    if (out.empty()) throw qcw::ConfigError("empty list");
    return out;
}

// -- plot helpers ------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return int(i);
        return -1;
    }
};

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw qcw::IoError("cannot open: " + path);
    CsvTable t;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (t.header.empty()) t.header = std::move(fields);
        else t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw qcw::IoError("empty csv: " + path);
    return t;
}

std::string render_plot(const CsvTable& t) {
    if (t.col("correct_bits") >= 0) {
        std::vector<double> xs;
        std::vector<double> w, u;
        for (const auto& r : t.rows) {
            xs.push_back(std::stod(r[std::size_t(t.col("correct_bits"))]));
            w.push_back(std::stod(r[std::size_t(t.col("count_watermarked"))]));
            u.push_back(std::stod(r[std::size_t(t.col("count_unwatermarked"))]));
        }
        return qcw::svg_histogram(xs, {w, u}, {"watermarked", "unwatermarked"},
                                  "Bit-accuracy distributions", "correct bits", "count");
    }
    int xc = t.col("attack_count"), yc = t.col("tpr"), ac = t.col("attack"), ec = t.col("experiment");
    if (xc < 0 || yc < 0) throw qcw::ConfigError("unrecognized csv layout");
    std::map<std::string, qcw::PlotSeries> series;
    for (const auto& r : t.rows) {
        std::string label = (ec >= 0 ? r[std::size_t(ec)] + "/" : "") +
                            (ac >= 0 ? r[std::size_t(ac)] : "tpr");
        auto& s = series[label];
        s.label = label;
        s.x.push_back(std::stod(r[std::size_t(xc)]));
        s.y.push_back(std::stod(r[std::size_t(yc)]));
    }
    std::vector<qcw::PlotSeries> list;
    for (auto& [k, v] : series) list.push_back(std::move(v));
    return qcw::svg_line_chart(list, "Detection rate", "attack count", "TPR");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"watermarking pipeline for quantum-circuit generative models"};
    app.require_subcommand(1);

    // ---- keygen ----
    auto* keygen = app.add_subcommand("keygen", "generate a watermark key file");
    std::string kg_out;
    int kg_bits = 24;
    std::optional<uint64_t> kg_seed;
    keygen->add_option("--out", kg_out, "key file path")->required();
    keygen->add_option("--bits", kg_bits, "message length k")->check(CLI::PositiveNumber);
    keygen->add_option("--seed", kg_seed, "deterministic key derivation seed");

    // ---- embed ----
    auto* embed = app.add_subcommand("embed", "embed the key and generate a circuit");
    CommonOpts em;
    std::string em_key, em_circuit, em_latent, em_qasm;
    uint64_t em_gauss = 0;
    bool em_fresh = false;
    embed->add_option("--key", em_key, "key file")->required();
    embed->add_option("--out-circuit", em_circuit, "output circuit file (.json or .qasm)")->required();
    embed->add_option("--out-latent", em_latent, "output latent file (QTAG container)");
    embed->add_option("--out-qasm", em_qasm, "also write a QASM rendering");
    embed->add_option("--gauss-seed", em_gauss, "override the key's Gaussian draw seed");
    embed->add_flag("--fresh-latent", em_fresh, "draw a fresh Gaussian seed from the OS");
    add_common(embed, em);

    // ---- attack ----
    auto* attack = app.add_subcommand("attack", "apply a structural attack to a circuit");
    std::string at_in, at_out, at_kind = "replace", at_mode = "strict";
    int at_count = 1;
    uint64_t at_seed = 0;
    attack->add_option("--in", at_in, "input circuit file")->required();
    attack->add_option("--out", at_out, "output circuit file")->required();
    attack->add_option("--kind", at_kind, "replace | append | insert | delete | none");
    attack->add_option("--count", at_count, "gates / pairs / instances to touch");
    attack->add_option("--seed", at_seed, "attack randomness seed");
    attack->add_option("--mode", at_mode, "append mode: strict | aggressive");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "extract and verify the watermark");
    CommonOpts vf;
    std::string vf_key, vf_in, vf_report;
    double vf_tau = 0.7916, vf_alpha0 = 1e-3;
    int vf_wmax = 3;
    std::string vf_dirs = "insert_only";
    bool vf_no_early = false;
    verify->add_option("--key", vf_key, "key file")->required();
    verify->add_option("--in", vf_in, "circuit file")->required();
    verify->add_option("--tau", vf_tau, "similarity threshold");
    verify->add_option("--alpha0", vf_alpha0, "target FPR");
    verify->add_option("--srm-wmax", vf_wmax, "max zero-pad width");
    verify->add_option("--srm-directions", vf_dirs, "insert_only | bidirectional");
    verify->add_flag("--no-early-stop", vf_no_early, "score every candidate");
    verify->add_option("--report", vf_report, "write the report JSON here too");
    add_common(verify, vf);

    // ---- calibrate ----
    auto* calibrate = app.add_subcommand("calibrate", "fit detection thresholds");
    CommonOpts cal;
    int cal_w = 2000, cal_u = 2000, cal_capacity = 24;
    double cal_alpha0 = 1e-3;
    std::optional<double> cal_mu0, cal_sigma0;
    std::string cal_out = "calibration.csv";
    uint64_t cal_seed = 1;
    calibrate->add_option("--samples-w", cal_w, "watermarked samples");
    calibrate->add_option("--samples-u", cal_u, "unwatermarked samples");
    calibrate->add_option("--alpha0", cal_alpha0, "target false-alarm probability");
    calibrate->add_option("--capacity", cal_capacity, "message bits k");
    calibrate->add_option("--mu0", cal_mu0, "fit bypass: H0 mean (needs --sigma0)");
    calibrate->add_option("--sigma0", cal_sigma0, "fit bypass: H0 stddev");
    calibrate->add_option("--out", cal_out, "histogram csv path");
    calibrate->add_option("--master-seed", cal_seed, "seed");
    add_common(calibrate, cal);

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "run benchmark suites");
    CommonOpts bn;
    std::string bn_suite = "robustness", bn_config, bn_out, bn_caps = "12,16,24,32,48",
                bn_steps_grid = "10,25,50,100", bn_dirs;
    int bn_trials = 0, bn_circuits = 10000, bn_wmax = 0, bn_capacity = 0;
    std::optional<uint64_t> bn_seed;
    bench->add_option("--suite", bn_suite, "robustness | capacity | steps | ablation | family-fpr");
    bench->add_option("--config", bn_config, "experiment config JSON");
    bench->add_option("--trials", bn_trials, "trials per cell (override)");
    bench->add_option("--out", bn_out, "output csv path (override)");
    bench->add_option("--master-seed", bn_seed, "master seed (override)");
    bench->add_option("--capacities", bn_caps, "capacity sweep list");
    bench->add_option("--steps-grid", bn_steps_grid, "steps sweep list");
    bench->add_option("--circuits", bn_circuits, "family-fpr circuit count");
    bench->add_option("--srm-wmax", bn_wmax, "max zero-pad width (override)");
    bench->add_option("--srm-directions", bn_dirs, "insert_only | bidirectional (override)");
    bench->add_option("--capacity", bn_capacity, "message bits k (override)");
    add_common(bench, bn);

    // ---- plot ----
    auto* plot = app.add_subcommand("plot", "render a bench/calibration csv to SVG");
    std::string pl_in, pl_out;
    plot->add_option("--in", pl_in, "csv produced by bench or calibrate")->required();
    plot->add_option("--out", pl_out, "svg output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*keygen) {
            uint64_t seed = kg_seed ? *kg_seed : std::random_device{}();
            qcw::WatermarkKey key = qcw::random_watermark_key(seed, kg_bits);
            if (!kg_seed) {
                // stretch the non-deterministic seed over all key material
                std::random_device rd;
                for (auto& b : key.cipher_key) b = uint8_t(rd());
                for (auto& b : key.nonce) b = uint8_t(rd());
                key.gauss_seed = (uint64_t(rd()) << 32) | rd();
            }
            qcw::save_key(key, kg_out);
            std::cout << "wrote " << kg_out << " (k=" << kg_bits << ")\n";
            return 0;
        }

        if (*embed) {
            qcw::WatermarkKey key = qcw::load_key(em_key);
            if (em_fresh) {
                std::random_device rd;
                key.gauss_seed = (uint64_t(rd()) << 32) | rd();
            }
            if (embed->count("--gauss-seed")) key.gauss_seed = em_gauss;
            qcw::LatentShape shape = parse_shape(em.shape);
            auto backend = qcw::make_backend(em.backend, shape.size());
            qcw::DiffusionSchedule schedule(em.steps);
            qcw::EmbedOutput out = qcw::embed_circuit(key, *backend, schedule, shape, em.guidance);
            qcw::save_circuit(out.circuit, em_circuit);
            if (!em_latent.empty()) qcw::save_latent(out.z_0, em_latent);
            if (!em_qasm.empty()) qcw::write_text_file(em_qasm, qcw::emit_qasm(out.circuit));
            std::cout << "wrote " << em_circuit << " (" << qcw::gate_count(out.circuit)
                      << " gates, " << out.circuit.column_count() << " columns, gauss_seed="
                      << key.gauss_seed << ")\n";
            return 0;
        }

        if (*attack) {
            qcw::Circuit c = qcw::load_circuit(at_in);
            qcw::AttackSpec spec;
            spec.kind = qcw::attack_kind_from_name(at_kind);
            spec.count = at_count;
            spec.seed = at_seed;
            spec.mode = at_mode == "aggressive" ? qcw::AppendMode::Aggressive
                                                : qcw::AppendMode::Strict;
            qcw::Circuit attacked = qcw::apply_attack(c, spec);
            qcw::save_circuit(attacked, at_out);
            std::cout << "wrote " << at_out << " (" << qcw::gate_count(attacked) << " gates, "
                      << attacked.column_count() << " columns)\n";
            return 0;
        }

        if (*verify) {
            qcw::WatermarkKey key = qcw::load_key(vf_key);
            qcw::Circuit c = qcw::load_circuit(vf_in);
            qcw::LatentShape shape = parse_shape(vf.shape);
            auto backend = qcw::make_backend(vf.backend, shape.size());
            qcw::DiffusionSchedule schedule(vf.steps);
            qcw::DetectionPolicy policy =
                qcw::make_policy(int(key.message.size()), shape.size(), vf_tau, vf_alpha0);
            qcw::SrmConfig srm{vf_wmax, parse_directions(vf_dirs), !vf_no_early};
            qcw::DetectionReport rep = qcw::detect_watermark(c, key, policy, *backend, schedule,
                                                             srm, shape, vf.guidance);
            std::string text = qcw::report_to_json(rep).dump(2) + "\n";
            std::cout << text;
            if (!vf_report.empty()) qcw::write_text_file(vf_report, text);
            return rep.detected ? 0 : 1;
        }

        if (*calibrate) {
            if (cal_mu0 || cal_sigma0) {
                if (!(cal_mu0 && cal_sigma0))
                    throw qcw::ConfigError("fit bypass needs both --mu0 and --sigma0");
                qcw::CalibrationResult r = qcw::np_calibrate(*cal_mu0, *cal_sigma0, cal_alpha0);
                std::cout << nlohmann::json{{"mu0", r.mu0},
                                            {"sigma0", r.sigma0},
                                            {"alpha0", cal_alpha0},
                                            {"th", r.th}}
                                 .dump(2)
                          << "\n";
                return 0;
            }
            qcw::ExperimentConfig cfg;
            cfg.backend_spec = cal.backend;
            cfg.steps = cal.steps;
            cfg.guidance = cal.guidance;
            cfg.shape = parse_shape(cal.shape);
            cfg.capacity = cal_capacity;
            cfg.master_seed = cal_seed;
            qcw::CalibrationOutput out =
                qcw::run_calibration(cal_w, cal_u, cal_alpha0, cfg, &std::cerr);
            qcw::write_text_file(cal_out, out.csv);
            std::cout << nlohmann::json{{"mu0", out.result.mu0},
                                        {"sigma0", out.result.sigma0},
                                        {"mu1", out.result.mu1},
                                        {"sigma1", out.result.sigma1},
                                        {"th", out.result.th},
                                        {"histograms", cal_out}}
                             .dump(2)
                      << "\n";
            return 0;
        }

        if (*bench) {
            qcw::ExperimentConfig cfg;
            if (!bn_config.empty()) cfg = qcw::load_config(bn_config);
            if (bench->count("--backend")) cfg.backend_spec = bn.backend;
            if (bench->count("--steps")) cfg.steps = bn.steps;
            if (bench->count("--guidance")) cfg.guidance = bn.guidance;
            if (bench->count("--shape")) cfg.shape = parse_shape(bn.shape);
            if (bn_trials > 0) cfg.trials = bn_trials;
            else if (bn_config.empty()) cfg.trials = 1000;
            if (bn_seed) cfg.master_seed = *bn_seed;
            if (!bn_out.empty()) cfg.output_path = bn_out;
            if (bn_wmax > 0) cfg.srm.w_max = bn_wmax;
            if (!bn_dirs.empty()) cfg.srm.directions = parse_directions(bn_dirs);
            if (bn_capacity > 0) cfg.capacity = bn_capacity;

            std::vector<qcw::ResultRow> rows;
            if (bn_suite == "robustness") {
                if (cfg.attacks.empty()) cfg.attacks = default_attack_grid();
                rows = qcw::run_robustness_bench(cfg, &std::cerr);
            } else if (bn_suite == "capacity") {
                rows = qcw::run_capacity_sweep(cfg, parse_int_list(bn_caps), &std::cerr);
            } else if (bn_suite == "steps") {
                rows = qcw::run_steps_sweep(cfg, parse_int_list(bn_steps_grid), &std::cerr);
            } else if (bn_suite == "ablation") {
                rows = qcw::run_srm_ablation(cfg, &std::cerr);
            } else if (bn_suite == "family-fpr") {
                qcw::FamilyFprResult r = qcw::run_family_fpr(cfg, bn_circuits, &std::cerr);
                std::cout << nlohmann::json{{"circuits", r.circuits},
                                            {"false_accepts", r.false_accepts},
                                            {"rate", r.rate},
                                            {"union_bound", r.union_bound},
                                            {"mean_candidates", r.mean_candidates}}
                                 .dump(2)
                          << "\n";
                return 0;
            } else {
                throw qcw::ConfigError("unknown suite: " + bn_suite);
            }
            std::string csv = qcw::rows_to_csv(rows);
            qcw::write_text_file(cfg.output_path, csv);
            std::cout << "wrote " << cfg.output_path << " (" << rows.size() << " rows)\n";
            return 0;
        }

        if (*plot) {
            qcw::write_text_file(pl_out, render_plot(read_csv(pl_in)));
            std::cout << "wrote " << pl_out << "\n";
            return 0;
        }
    } catch (const qcw::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
