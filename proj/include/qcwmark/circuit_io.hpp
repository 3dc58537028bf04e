#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qcwmark/circuit.hpp"
#include "qcwmark/errors.hpp"

namespace qcw {

// Grid-faithful circuit container. The QASM text form re-packs gates on
// parse (its grammar has no idle slots), which loses the exact column
// layout that watermark verification depends on, so pipeline files store
// the token grid itself; QASM import/export stays available for interchange.

inline nlohmann::json circuit_to_json(const Circuit& c) {
    validate_circuit(c);
    nlohmann::json cols = nlohmann::json::array();
    for (const Column& col : c.columns()) {
        nlohmann::json jcol = nlohmann::json::array();
        for (GateKind g : col) jcol.push_back(std::string(gate_name(g)));
        cols.push_back(std::move(jcol));
    }
    return nlohmann::json{{"num_qubits", c.num_qubits()}, {"columns", cols}};
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
    try {
        Circuit c(j.at("num_qubits").get<int>());
        for (const auto& jcol : j.at("columns")) {
            Column col;
            for (const auto& name : jcol) col.push_back(gate_from_name(name.get<std::string>()));
            c.push_column(std::move(col));
        }
        validate_circuit(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad circuit file: ") + e.what());
    }
}

inline bool has_qasm_extension(const std::string& path) {
    return path.size() >= 5 && path.compare(path.size() - 5, 5, ".qasm") == 0;
}

inline void save_circuit(const Circuit& c, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    if (has_qasm_extension(path)) f << emit_qasm(c);
    else f << circuit_to_json(c).dump(1) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

inline Circuit load_circuit(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (has_qasm_extension(path)) return parse_qasm(text);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad circuit file: ") + e.what());
    }
    return circuit_from_json(j);
}

} // namespace qcw
