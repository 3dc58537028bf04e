#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qcwmark/errors.hpp"

namespace qcw {

/// Gate token vocabulary. Token ids are the enum values: a fixed bijection
/// onto [0, 15] with Ident = 0. Multi-qubit gates are represented by partner
/// tokens that must appear as a complete group within one column.
enum class GateKind : uint8_t {
    Ident = 0,
    H = 1,
    X = 2,
    Y = 3,
    Z = 4,
    S = 5,
    Sdg = 6,
    T = 7,
    Tdg = 8,
    CxC = 9,
    CxT = 10,
    CcxC1 = 11,
    CcxC2 = 12,
    CcxT = 13,
    SwapA = 14,
    SwapB = 15,
};

constexpr int kGateTokenCount = 16;

inline int token_id(GateKind g) { return int(g); }

inline GateKind gate_from_token(int id) {
    if (id < 0 || id >= kGateTokenCount) throw UnsupportedGate("token id out of range");
    return GateKind(id);
}

inline bool is_partner_token(GateKind g) { return token_id(g) >= token_id(GateKind::CxC); }

inline bool is_single_gate(GateKind g) {
    return g != GateKind::Ident && !is_partner_token(g);
}

inline std::string_view gate_name(GateKind g) {
    switch (g) {
        case GateKind::Ident: return "id";
        case GateKind::H: return "h";
        case GateKind::X: return "x";
        case GateKind::Y: return "y";
        case GateKind::Z: return "z";
        case GateKind::S: return "s";
        case GateKind::Sdg: return "sdg";
        case GateKind::T: return "t";
        case GateKind::Tdg: return "tdg";
        case GateKind::CxC: return "cx_c";
        case GateKind::CxT: return "cx_t";
        case GateKind::CcxC1: return "ccx_c1";
        case GateKind::CcxC2: return "ccx_c2";
        case GateKind::CcxT: return "ccx_t";
        case GateKind::SwapA: return "swap_a";
        case GateKind::SwapB: return "swap_b";
    }
    throw UnsupportedGate("unknown gate kind");
}

inline GateKind gate_from_name(std::string_view name) {
    for (int i = 0; i < kGateTokenCount; ++i)
        if (gate_name(GateKind(i)) == name) return GateKind(i);
    throw UnsupportedGate("unknown gate name: " + std::string(name));
}

using Column = std::vector<GateKind>;

inline bool column_is_idle(const Column& col) {
    return std::all_of(col.begin(), col.end(), [](GateKind g) { return g == GateKind::Ident; });
}

/// Grid of gate tokens over (qubit, time-column). Column 0 acts first.
class Circuit {
public:
    Circuit() : num_qubits_(1) {}
    explicit Circuit(int num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < 1) throw SyntaxError("circuit needs at least one qubit");
    }

    int num_qubits() const { return num_qubits_; }
    int column_count() const { return int(columns_.size()); }

    GateKind at(int qubit, int column) const { return columns_[column][qubit]; }
    void set(int qubit, int column, GateKind g) { columns_[column][qubit] = g; }

    const std::vector<Column>& columns() const { return columns_; }

    void append_column() { columns_.emplace_back(num_qubits_, GateKind::Ident); }
    void insert_idle_column(int at) {
        columns_.insert(columns_.begin() + at, Column(num_qubits_, GateKind::Ident));
    }
    void erase_column(int at) { columns_.erase(columns_.begin() + at); }
    void push_column(Column col) {
        if (int(col.size()) != num_qubits_) throw ShapeMismatch("column height != qubit count");
        columns_.push_back(std::move(col));
    }

    friend bool operator==(const Circuit& a, const Circuit& b) {
        return a.num_qubits_ == b.num_qubits_ && a.columns_ == b.columns_;
    }

private:
    int num_qubits_;
    std::vector<Column> columns_;
};

namespace detail {

// Partner-group completeness for one column. A column hosts at most one
// group per multi-qubit gate kind, which keeps the token grid unambiguous.
inline bool column_partner_groups_ok(const Column& col) {
    int cxc = 0, cxt = 0, c1 = 0, c2 = 0, ct = 0, sa = 0, sb = 0;
    for (GateKind g : col) {
        switch (g) {
            case GateKind::CxC: ++cxc; break;
            case GateKind::CxT: ++cxt; break;
            case GateKind::CcxC1: ++c1; break;
            case GateKind::CcxC2: ++c2; break;
            case GateKind::CcxT: ++ct; break;
            case GateKind::SwapA: ++sa; break;
            case GateKind::SwapB: ++sb; break;
            default: break;
        }
    }
    bool cx_ok = (cxc == 0 && cxt == 0) || (cxc == 1 && cxt == 1);
    bool ccx_ok = (c1 == 0 && c2 == 0 && ct == 0) || (c1 == 1 && c2 == 1 && ct == 1);
    bool swap_ok = (sa == 0 && sb == 0) || (sa == 1 && sb == 1);
    return cx_ok && ccx_ok && swap_ok;
}

} // namespace detail

inline bool circuit_valid(const Circuit& c) {
    if (c.num_qubits() < 1) return false;
    for (const Column& col : c.columns())
        if (!detail::column_partner_groups_ok(col)) return false;
    return true;
}

inline void validate_circuit(const Circuit& c) {
    if (!circuit_valid(c)) throw ShapeMismatch("circuit violates partner-token completeness");
}

/// One gate instance: a single-qubit token or a complete partner group.
struct GateInstance {
    int column = 0;
    std::vector<std::pair<int, GateKind>> cells; // (qubit, token)
    bool is_single() const { return cells.size() == 1; }
};

/// Enumerates gate instances in deterministic order: column ascending, then
/// first-member qubit ascending. Partner groups count as one instance.
inline std::vector<GateInstance> gate_instances(const Circuit& c) {
    std::vector<GateInstance> out;
    for (int t = 0; t < c.column_count(); ++t) {
        std::vector<std::pair<int, GateKind>> cx, ccx, swp;
        bool cx_done = false, ccx_done = false, swap_done = false;
        for (int q = 0; q < c.num_qubits(); ++q) {
            GateKind g = c.at(q, t);
            if (g == GateKind::Ident) continue;
            if (is_single_gate(g)) {
                out.push_back({t, {{q, g}}});
                continue;
            }
            auto flush = [&](std::vector<std::pair<int, GateKind>>& grp, std::size_t full, bool& done) {
                grp.push_back({q, g});
                if (grp.size() == full && !done) {
                    out.push_back({t, grp});
                    done = true;
                }
            };
            if (g == GateKind::CxC || g == GateKind::CxT) flush(cx, 2, cx_done);
            else if (g == GateKind::SwapA || g == GateKind::SwapB) flush(swp, 2, swap_done);
            else flush(ccx, 3, ccx_done);
        }
    }
    // re-establish column-major, first-qubit order after group completion
    std::stable_sort(out.begin(), out.end(), [](const GateInstance& a, const GateInstance& b) {
        if (a.column != b.column) return a.column < b.column;
        return a.cells.front().first < b.cells.front().first;
    });
    return out;
}

inline int gate_count(const Circuit& c) { return int(gate_instances(c).size()); }

/// Removes every all-Ident column; relative order of the rest is preserved.
inline Circuit compact_columns(const Circuit& c) {
    Circuit out(c.num_qubits());
    for (const Column& col : c.columns())
        if (!column_is_idle(col)) out.push_column(col);
    return out;
}

/// Removes trailing all-Ident columns only; interior idle columns stay.
inline Circuit trim_trailing_idle(const Circuit& c) {
    int last = c.column_count();
    while (last > 0 && column_is_idle(c.columns()[last - 1])) --last;
    Circuit out(c.num_qubits());
    for (int t = 0; t < last; ++t) out.push_column(c.columns()[t]);
    return out;
}

// ---------------------------------------------------------------------------
// QASM-subset parser / emitter.
//
// Grammar: `qreg q[N];` followed by statements `h|x|y|z|s|sdg|t|tdg q[i];`,
// `cx q[i],q[j];`, `ccx q[i],q[j],q[k];`, `swap q[i],q[j];`. Statements are
// `;`-terminated, whitespace-insensitive within a statement, `//` comments
// run to end of line.

namespace detail {

struct QasmScanner {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '/' && pos + 1 < text.size() && text[pos + 1] == '/') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    bool done() {
        skip_ws();
        return pos >= text.size();
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) throw SyntaxError("expected identifier at offset " + std::to_string(pos));
        return std::string(text.substr(start, pos - start));
    }

    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c)
            throw SyntaxError(std::string("expected '") + c + "' at offset " + std::to_string(pos));
        ++pos;
    }

    bool accept(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    long number() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) throw SyntaxError("expected number at offset " + std::to_string(pos));
        return std::stol(std::string(text.substr(start, pos - start)));
    }

    // q[i]
    long operand() {
        std::string reg = ident();
        if (reg != "q") throw SyntaxError("unknown register '" + reg + "'");
        expect('[');
        long idx = number();
        expect(']');
        return idx;
    }
};

struct GateGroupKind {
    // group-slot categories used to keep one multi-qubit group per column
    enum Kind { None, Cx, Ccx, Swap } kind = None;
};

inline GateGroupKind::Kind group_of(GateKind g) {
    switch (g) {
        case GateKind::CxC:
        case GateKind::CxT: return GateGroupKind::Cx;
        case GateKind::CcxC1:
        case GateKind::CcxC2:
        case GateKind::CcxT: return GateGroupKind::Ccx;
        case GateKind::SwapA:
        case GateKind::SwapB: return GateGroupKind::Swap;
        default: return GateGroupKind::None;
    }
}

inline bool column_has_group(const Column& col, GateGroupKind::Kind k) {
    for (GateKind g : col)
        if (group_of(g) == k && k != GateGroupKind::None) return true;
    return false;
}

} // namespace detail

/// Places a gate (tokens over distinct qubits) into the earliest column where
/// every operand cell is Ident and no group of the same kind is present.
/// Appends a fresh column when nothing fits.
inline void place_gate(Circuit& c, const std::vector<std::pair<int, GateKind>>& cells) {
    detail::GateGroupKind::Kind grp = detail::group_of(cells.front().second);
    for (int t = 0; t < c.column_count(); ++t) {
        const Column& col = c.columns()[t];
        bool free_cells = std::all_of(cells.begin(), cells.end(), [&](auto& cell) {
            return col[cell.first] == GateKind::Ident;
        });
        if (!free_cells) continue;
        if (grp != detail::GateGroupKind::None && detail::column_has_group(col, grp)) continue;
        for (auto& [q, g] : cells) c.set(q, t, g);
        return;
    }
    c.append_column();
    for (auto& [q, g] : cells) c.set(q, c.column_count() - 1, g);
}

inline Circuit parse_qasm(std::string_view text, int max_columns = 4096) {
    detail::QasmScanner sc{text};

    // header
    if (sc.done()) throw SyntaxError("empty program");
    std::string head = sc.ident();
    if (head != "qreg") throw SyntaxError("program must start with qreg");
    std::string reg = sc.ident();
    if (reg != "q") throw SyntaxError("register must be named q");
    sc.expect('[');
    long n = sc.number();
    sc.expect(']');
    sc.expect(';');
    if (n < 1) throw SyntaxError("qreg size must be at least 1");

    Circuit c{int(n)};
    auto check_qubit = [&](long q) {
        if (q < 0 || q >= n)
            throw QubitOutOfRange("qubit index " + std::to_string(q) + " out of range");
        return int(q);
    };

    while (!sc.done()) {
        std::string name = sc.ident();
        if (name == "qreg") throw SyntaxError("duplicate qreg declaration");

        std::vector<long> ops;
        ops.push_back(sc.operand());
        while (sc.accept(',')) ops.push_back(sc.operand());
        sc.expect(';');

        for (std::size_t i = 0; i < ops.size(); ++i)
            for (std::size_t j = i + 1; j < ops.size(); ++j)
                if (ops[i] == ops[j])
                    throw DuplicateOperand(name + " operands must be distinct");

        std::vector<std::pair<int, GateKind>> cells;
        if (name == "cx") {
            if (ops.size() != 2) throw SyntaxError("cx takes two operands");
            cells = {{check_qubit(ops[0]), GateKind::CxC}, {check_qubit(ops[1]), GateKind::CxT}};
        } else if (name == "ccx") {
            if (ops.size() != 3) throw SyntaxError("ccx takes three operands");
            cells = {{check_qubit(ops[0]), GateKind::CcxC1},
                     {check_qubit(ops[1]), GateKind::CcxC2},
                     {check_qubit(ops[2]), GateKind::CcxT}};
        } else if (name == "swap") {
            if (ops.size() != 2) throw SyntaxError("swap takes two operands");
            cells = {{check_qubit(ops[0]), GateKind::SwapA}, {check_qubit(ops[1]), GateKind::SwapB}};
        } else {
            GateKind g;
            if (name == "h") g = GateKind::H;
            else if (name == "x") g = GateKind::X;
            else if (name == "y") g = GateKind::Y;
            else if (name == "z") g = GateKind::Z;
            else if (name == "s") g = GateKind::S;
            else if (name == "sdg") g = GateKind::Sdg;
            else if (name == "t") g = GateKind::T;
            else if (name == "tdg") g = GateKind::Tdg;
            else throw UnsupportedGate("unsupported gate '" + name + "'");
            if (ops.size() != 1) throw SyntaxError(name + " takes one operand");
            cells = {{check_qubit(ops[0]), g}};
        }
        place_gate(c, cells);
        if (c.column_count() > max_columns)
            throw SyntaxError("circuit exceeds maximum column count");
    }
    return c;
}

/// Canonical text form. Gates are emitted column-major; partner groups appear
/// once, at their first member. parse(emit(c)) == c holds for greedily packed
/// circuits (in particular for every parser output); grids with interior
/// holes re-pack on parse.
inline std::string emit_qasm(const Circuit& c) {
    validate_circuit(c);
    std::string out = "qreg q[" + std::to_string(c.num_qubits()) + "];\n";
    for (const GateInstance& inst : gate_instances(c)) {
        if (inst.is_single()) {
            auto [q, g] = inst.cells.front();
            out += std::string(gate_name(g)) + " q[" + std::to_string(q) + "];\n";
            continue;
        }
        int qa = -1, qb = -1, qc = -1;
        GateKind lead = inst.cells.front().second;
        if (detail::group_of(lead) == detail::GateGroupKind::Cx) {
            for (auto& [q, g] : inst.cells) (g == GateKind::CxC ? qa : qb) = q;
            out += "cx q[" + std::to_string(qa) + "],q[" + std::to_string(qb) + "];\n";
        } else if (detail::group_of(lead) == detail::GateGroupKind::Swap) {
            for (auto& [q, g] : inst.cells) (g == GateKind::SwapA ? qa : qb) = q;
            out += "swap q[" + std::to_string(qa) + "],q[" + std::to_string(qb) + "];\n";
        } else {
            for (auto& [q, g] : inst.cells) {
                if (g == GateKind::CcxC1) qa = q;
                else if (g == GateKind::CcxC2) qb = q;
                else qc = q;
            }
            out += "ccx q[" + std::to_string(qa) + "],q[" + std::to_string(qb) + "],q[" +
                   std::to_string(qc) + "];\n";
        }
    }
    return out;
}

} // namespace qcw
