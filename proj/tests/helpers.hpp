#pragma once

// Shared test utilities: random circuit/program generators independent of
// the library's parsing and decoding paths.

#include <string>
#include <vector>

#include "qcwmark/circuit.hpp"
#include "qcwmark/rng.hpp"

namespace qcwtest {

/// Random syntactically valid program text for parser round-trip checks.
inline std::string random_program(qcw::ChaChaRng& rng, int num_qubits, int num_statements) {
    static const char* singles[] = {"h", "x", "y", "z", "s", "sdg", "t", "tdg"};
    std::string out = "qreg q[" + std::to_string(num_qubits) + "];\n";
    for (int i = 0; i < num_statements; ++i) {
        uint64_t pick = rng.uniform_below(num_qubits >= 3 ? 11 : (num_qubits >= 2 ? 10 : 8));
        if (pick < 8) {
            int q = int(rng.uniform_below(uint64_t(num_qubits)));
            out += std::string(singles[pick]) + " q[" + std::to_string(q) + "];\n";
        } else if (pick < 10) {
            int a = int(rng.uniform_below(uint64_t(num_qubits)));
            int b = int(rng.uniform_below(uint64_t(num_qubits) - 1));
            if (b >= a) ++b;
            out += std::string(pick == 8 ? "cx" : "swap") + " q[" + std::to_string(a) + "],q[" +
                   std::to_string(b) + "];\n";
        } else {
            int a = int(rng.uniform_below(uint64_t(num_qubits)));
            int b = int(rng.uniform_below(uint64_t(num_qubits) - 1));
            if (b >= a) ++b;
            int c = a;
            while (c == a || c == b) c = int(rng.uniform_below(uint64_t(num_qubits)));
            out += "ccx q[" + std::to_string(a) + "],q[" + std::to_string(b) + "],q[" +
                   std::to_string(c) + "];\n";
        }
    }
    return out;
}

/// Random valid circuit built directly as a grid (not via the parser):
/// per column, a few single-qubit gates and occasionally one partner group.
inline qcw::Circuit random_grid_circuit(qcw::ChaChaRng& rng, int num_qubits, int num_columns,
                                        int fill_percent = 40) {
    using qcw::GateKind;
    qcw::Circuit c(num_qubits);
    static const GateKind singles[] = {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z,
                                       GateKind::S, GateKind::Sdg, GateKind::T, GateKind::Tdg};
    for (int t = 0; t < num_columns; ++t) {
        c.append_column();
        for (int q = 0; q < num_qubits; ++q)
            if (int(rng.uniform_below(100)) < fill_percent)
                c.set(q, t, singles[rng.uniform_below(8)]);
        if (num_qubits >= 2 && rng.uniform_below(100) < 30) {
            int a = int(rng.uniform_below(uint64_t(num_qubits)));
            int b = int(rng.uniform_below(uint64_t(num_qubits) - 1));
            if (b >= a) ++b;
            bool swap = rng.uniform_below(2) == 0;
            c.set(a, t, swap ? GateKind::SwapA : GateKind::CxC);
            c.set(b, t, swap ? GateKind::SwapB : GateKind::CxT);
        }
    }
    return c;
}

} // namespace qcwtest
