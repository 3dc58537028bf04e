#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcwmark/circuit.hpp"
#include "qcwmark/errors.hpp"
#include "qcwmark/rng.hpp"

namespace qcw {

enum class AttackKind { None, Replace, Append, Insert, Delete };
enum class AppendMode { Strict, Aggressive };

inline std::string attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::None: return "none";
        case AttackKind::Replace: return "replace";
        case AttackKind::Append: return "append";
        case AttackKind::Insert: return "insert";
        case AttackKind::Delete: return "delete";
    }
    throw ConfigError("unknown attack kind");
}

inline AttackKind attack_kind_from_name(const std::string& s) {
    if (s == "none") return AttackKind::None;
    if (s == "replace") return AttackKind::Replace;
    if (s == "append") return AttackKind::Append;
    if (s == "insert") return AttackKind::Insert;
    if (s == "delete") return AttackKind::Delete;
    throw ConfigError("unknown attack kind: " + s);
}

/// One structural attack: what to do, how many times, and the seed that makes
/// it reproducible. `mode` applies to appending only.
struct AttackSpec {
    AttackKind kind = AttackKind::None;
    int count = 0;     // gates, gates, pairs, or gate instances
    uint64_t seed = 0;
    AppendMode mode = AppendMode::Strict;
};

inline nlohmann::json attack_to_json(const AttackSpec& a) {
    return nlohmann::json{{"kind", attack_kind_name(a.kind)},
                          {"count", a.count},
                          {"seed", a.seed},
                          {"mode", a.mode == AppendMode::Strict ? "strict" : "aggressive"}};
}

inline AttackSpec attack_from_json(const nlohmann::json& j) {
    AttackSpec a;
    a.kind = attack_kind_from_name(j.at("kind").get<std::string>());
    a.count = j.value("count", 0);
    a.seed = j.value("seed", uint64_t(0));
    std::string mode = j.value("mode", "strict");
    if (mode == "strict") a.mode = AppendMode::Strict;
    else if (mode == "aggressive") a.mode = AppendMode::Aggressive;
    else throw ConfigError("unknown append mode: " + mode);
    return a;
}

namespace detail {

// Replacement sequences in circuit order (leftmost gate acts first).
// All three identities hold exactly: HZH = X, HXH = Z, S X Sdg = Y.
inline const std::array<GateKind, 3>* replacement_sequence(GateKind g) {
    static constexpr std::array<GateKind, 3> x_seq{GateKind::H, GateKind::Z, GateKind::H};
    static constexpr std::array<GateKind, 3> z_seq{GateKind::H, GateKind::X, GateKind::H};
    static constexpr std::array<GateKind, 3> y_seq{GateKind::Sdg, GateKind::X, GateKind::S};
    switch (g) {
        case GateKind::X: return &x_seq;
        case GateKind::Z: return &z_seq;
        case GateKind::Y: return &y_seq;
        default: return nullptr;
    }
}

// A placement window is three consecutive columns on one line covering the
// replaced gate, with the other two cells idle (or past the end, where fresh
// columns can be appended). Keeping the sequence contiguous on its line is
// what makes the substitution exactly equivalent.
inline bool window_ok(const Circuit& c, int q, int gate_col, int start) {
    if (start < 0) return false;
    for (int w = 0; w < 3; ++w) {
        int t = start + w;
        if (t == gate_col) continue;
        if (t < c.column_count() && c.at(q, t) != GateKind::Ident) return false;
    }
    return true;
}

struct ReplaceTarget {
    int qubit;
    int column;
    int window_start;
};

inline std::vector<ReplaceTarget> replace_targets(const Circuit& c) {
    std::vector<ReplaceTarget> out;
    for (int t = 0; t < c.column_count(); ++t) {
        for (int q = 0; q < c.num_qubits(); ++q) {
            if (!replacement_sequence(c.at(q, t))) continue;
            for (int start : {t, t - 1, t - 2}) {
                if (window_ok(c, q, t, start)) {
                    out.push_back({q, t, start});
                    break;
                }
            }
        }
    }
    return out;
}

inline bool cells_placeable(const Circuit& c, int col,
                            const std::vector<std::pair<int, GateKind>>& cells) {
    if (col >= c.column_count()) return false;
    const Column& column = c.columns()[std::size_t(col)];
    for (auto& [q, g] : cells)
        if (column[std::size_t(q)] != GateKind::Ident) return false;
    GateGroupKind::Kind grp = group_of(cells.front().second);
    if (grp != GateGroupKind::None && column_has_group(column, grp)) return false;
    return true;
}

} // namespace detail

/// Replaces uniformly chosen X/Y/Z gates by exactly equivalent three-gate
/// sequences. Each sequence stays contiguous on its line, re-using idle
/// neighbor cells and appending fresh columns past the end when needed, so
/// the circuit unitary is preserved up to global phase.
inline Circuit apply_replacement(const Circuit& c, const AttackSpec& spec) {
    validate_circuit(c);
    Circuit out = c;
    ChaChaRng rng(spec.seed);
    for (int applied = 0; applied < spec.count; ++applied) {
        auto targets = detail::replace_targets(out);
        if (targets.empty())
            throw InsufficientTargets("no replaceable gate with room for its sequence");
        const auto& tgt = targets[rng.uniform_below(targets.size())];
        const auto* seq = detail::replacement_sequence(out.at(tgt.qubit, tgt.column));
        while (out.column_count() < tgt.window_start + 3) out.append_column();
        for (int w = 0; w < 3; ++w) out.set(tgt.qubit, tgt.window_start + w, (*seq)[std::size_t(w)]);
    }
    return out;
}

/// Appends gates to the ends of uniformly chosen qubit lines. Strict mode
/// draws from the diagonal gates {Z, S, Sdg, T, Tdg}, which leaves the
/// computational-basis outcome distribution from |0...0> unchanged;
/// aggressive mode draws from all single-qubit gates. The circuit may grow
/// past the latent width; the encoder truncates downstream.
inline Circuit apply_append(const Circuit& c, const AttackSpec& spec) {
    validate_circuit(c);
    static constexpr std::array<GateKind, 5> diagonal{GateKind::Z, GateKind::S, GateKind::Sdg,
                                                      GateKind::T, GateKind::Tdg};
    static constexpr std::array<GateKind, 8> all_single{GateKind::H, GateKind::X, GateKind::Y,
                                                        GateKind::Z, GateKind::S, GateKind::Sdg,
                                                        GateKind::T, GateKind::Tdg};
    Circuit out = c;
    ChaChaRng rng(spec.seed);
    for (int applied = 0; applied < spec.count; ++applied) {
        int q = int(rng.uniform_below(uint64_t(out.num_qubits())));
        GateKind g = spec.mode == AppendMode::Strict
                         ? diagonal[rng.uniform_below(diagonal.size())]
                         : all_single[rng.uniform_below(all_single.size())];
        int last = -1;
        for (int t = out.column_count() - 1; t >= 0; --t)
            if (out.at(q, t) != GateKind::Ident) {
                last = t;
                break;
            }
        if (last + 1 >= out.column_count()) out.append_column();
        out.set(q, last + 1, g);
    }
    return out;
}

/// Inserts self-cancelling gate pairs {HH, XX, YY, ZZ, CXCX} at one uniformly
/// chosen position. The two gates of a pair occupy adjacent columns on the
/// same operands, packing into idle cells when possible and splicing fresh
/// columns when occupied, so the pair always cancels exactly.
inline Circuit apply_insertion(const Circuit& c, const AttackSpec& spec) {
    validate_circuit(c);
    Circuit out = c;
    ChaChaRng rng(spec.seed);
    int base = int(rng.uniform_below(uint64_t(out.column_count()) + 1));
    for (int applied = 0; applied < spec.count; ++applied) {
        static constexpr std::array<GateKind, 4> singles{GateKind::H, GateKind::X, GateKind::Y,
                                                         GateKind::Z};
        uint64_t pick = rng.uniform_below(5);
        std::vector<std::pair<int, GateKind>> cells;
        if (pick < 4) {
            int q = int(rng.uniform_below(uint64_t(out.num_qubits())));
            cells = {{q, singles[pick]}};
        } else {
            if (out.num_qubits() < 2) {
                int q = int(rng.uniform_below(uint64_t(out.num_qubits())));
                cells = {{q, GateKind::H}};
            } else {
                int qc = int(rng.uniform_below(uint64_t(out.num_qubits())));
                int qt = int(rng.uniform_below(uint64_t(out.num_qubits()) - 1));
                if (qt >= qc) ++qt;
                cells = {{qc, GateKind::CxC}, {qt, GateKind::CxT}};
            }
        }
        for (int offset = 0; offset < 2; ++offset) {
            int col = base + offset;
            if (!detail::cells_placeable(out, col, cells)) out.insert_idle_column(std::min(col, out.column_count()));
            for (auto& [q, g] : cells) out.set(q, col, g);
        }
    }
    return out;
}

/// Sets uniformly chosen gate instances to Ident (a partner group is one
/// instance and is removed whole), then compacts away emptied columns.
/// Functional equivalence is not preserved and not checked.
inline Circuit apply_deletion(const Circuit& c, const AttackSpec& spec) {
    validate_circuit(c);
    auto instances = gate_instances(c);
    if (int(instances.size()) < spec.count)
        throw InsufficientTargets("circuit has " + std::to_string(instances.size()) +
                                  " gate instances, need " + std::to_string(spec.count));
    ChaChaRng rng(spec.seed);
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < spec.count; ++i) {
        std::size_t j = std::size_t(i) + rng.uniform_below(order.size() - std::size_t(i));
        std::swap(order[std::size_t(i)], order[j]);
    }
    Circuit out = c;
    for (int i = 0; i < spec.count; ++i)
        for (auto& [q, g] : instances[order[std::size_t(i)]].cells)
            out.set(q, instances[order[std::size_t(i)]].column, GateKind::Ident);
    return compact_columns(out);
}

/// Removes whole columns (ascending positions, distinct); the suffix shifts
/// left. This is the desynchronizing edit the synchronization search undoes.
inline Circuit delete_columns(const Circuit& c, std::vector<int> positions) {
    std::sort(positions.begin(), positions.end());
    Circuit out = c;
    for (auto it = positions.rbegin(); it != positions.rend(); ++it) {
        if (*it < 0 || *it >= out.column_count()) throw ConfigError("column index out of range");
        out.erase_column(*it);
    }
    return out;
}

inline Circuit apply_attack(const Circuit& c, const AttackSpec& spec) {
    switch (spec.kind) {
        case AttackKind::None: return c;
        case AttackKind::Replace: return apply_replacement(c, spec);
        case AttackKind::Append: return apply_append(c, spec);
        case AttackKind::Insert: return apply_insertion(c, spec);
        case AttackKind::Delete: return apply_deletion(c, spec);
    }
    throw ConfigError("unknown attack kind");
}

} // namespace qcw
