#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "helpers.hpp"
#include "qcwmark/circuit.hpp"
#include "qcwmark/simulator.hpp"

using namespace qcw;

TEST_CASE("token ids form the documented bijection") {
    REQUIRE(token_id(GateKind::Ident) == 0);
    REQUIRE(token_id(GateKind::H) == 1);
    REQUIRE(token_id(GateKind::SwapB) == 15);
    for (int i = 0; i < kGateTokenCount; ++i) {
        CHECK(token_id(gate_from_token(i)) == i);
        CHECK(gate_from_name(std::string(gate_name(GateKind(i)))) == GateKind(i));
    }
    CHECK_THROWS_AS(gate_from_token(16), UnsupportedGate);
}

TEST_CASE("parse places gates greedily") {
    Circuit c = parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];");
    REQUIRE(c.num_qubits() == 2);
    REQUIRE(c.column_count() == 2);
    CHECK(c.at(0, 0) == GateKind::H);
    CHECK(c.at(1, 0) == GateKind::Ident);
    CHECK(c.at(0, 1) == GateKind::CxC);
    CHECK(c.at(1, 1) == GateKind::CxT);
}

TEST_CASE("parse of a bare qreg gives zero columns") {
    Circuit c = parse_qasm("qreg q[3];");
    CHECK(c.num_qubits() == 3);
    CHECK(c.column_count() == 0);
}

TEST_CASE("parse backfills idle slots") {
    // x q[1] fits into the hole left in column 0
    Circuit c = parse_qasm("qreg q[2];\nh q[0];\ncx q[0],q[1];\nx q[1];");
    REQUIRE(c.column_count() == 2);
    CHECK(c.at(1, 0) == GateKind::X);
}

TEST_CASE("parse keeps one multi-qubit group per column") {
    Circuit c = parse_qasm("qreg q[4]; cx q[0],q[1]; cx q[2],q[3];");
    REQUIRE(c.column_count() == 2);
    CHECK(c.at(2, 1) == GateKind::CxC);
    CHECK(c.at(3, 1) == GateKind::CxT);
    CHECK(circuit_valid(c));
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_qasm("qreg q[2]; cx q[0],q[0];"), DuplicateOperand);
    CHECK_THROWS_AS(parse_qasm("qreg q[2]; h q[5];"), QubitOutOfRange);
    CHECK_THROWS_AS(parse_qasm("qreg q[2]; rx q[0];"), UnsupportedGate);
    CHECK_THROWS_AS(parse_qasm("qreg q[2]; h q[0]"), SyntaxError);   // missing ;
    CHECK_THROWS_AS(parse_qasm("h q[0];"), SyntaxError);             // no qreg
    CHECK_THROWS_AS(parse_qasm("qreg q[0];"), SyntaxError);
    CHECK_THROWS_AS(parse_qasm(""), SyntaxError);
}

TEST_CASE("comments and whitespace are ignored inside statements") {
    Circuit c = parse_qasm("// header\nqreg q[2]; // decl\n h   q[ 1 ] ;\ncx q[0] , q[1];");
    REQUIRE(c.column_count() == 2);
    CHECK(c.at(1, 0) == GateKind::H);
}

TEST_CASE("emit of an idle circuit has no gate lines") {
    Circuit c(8);
    c.append_column();
    c.append_column();
    CHECK(emit_qasm(c) == "qreg q[8];\n");
}

TEST_CASE("emit of a single gate") {
    Circuit c(2);
    c.append_column();
    c.set(0, 0, GateKind::H);
    CHECK(emit_qasm(c) == "qreg q[2];\nh q[0];\n");
}

TEST_CASE("emit/parse round trip is stable on random programs") {
    ChaChaRng rng(2024);
    for (int it = 0; it < 1000; ++it) {
        int nq = 2 + int(rng.uniform_below(6));
        std::string prog = qcwtest::random_program(rng, nq, 1 + int(rng.uniform_below(24)));
        Circuit c1 = parse_qasm(prog);
        std::string text = emit_qasm(c1);
        Circuit c2 = parse_qasm(text);
        REQUIRE(c2 == c1);                 // parse . emit = identity on parser outputs
        REQUIRE(emit_qasm(c2) == text);    // emit . parse stable
    }
}

TEST_CASE("simulate_unitary basics") {
    Circuit empty(1);
    CHECK(simulate_unitary(empty).isApprox(UnitaryMatrix::Identity(2, 2)));

    Circuit h = parse_qasm("qreg q[1]; h q[0];");
    UnitaryMatrix hu = simulate_unitary(h);
    double s = 1.0 / std::numbers::sqrt2;
    UnitaryMatrix expect(2, 2);
    expect << s, s, s, -s;
    CHECK((hu - expect).cwiseAbs().maxCoeff() < 1e-12);

    Circuit hzh = parse_qasm("qreg q[1]; h q[0]; z q[0]; h q[0];");
    UnitaryMatrix x(2, 2);
    x << 0, 1, 1, 0;
    CHECK((simulate_unitary(hzh) - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("column 0 acts first") {
    // X then H equals H*X as a matrix product
    Circuit c = parse_qasm("qreg q[1]; x q[0]; h q[0];");
    UnitaryMatrix u = simulate_unitary(c);
    double s = 1.0 / std::numbers::sqrt2;
    UnitaryMatrix hx(2, 2);
    hx << s, s, -s, s; // H * X
    CHECK((u - hx).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("random circuits simulate to unitary matrices") {
    ChaChaRng rng(7);
    for (int it = 0; it < 30; ++it) {
        int nq = 2 + int(rng.uniform_below(4));
        Circuit c = qcwtest::random_grid_circuit(rng, nq, 8);
        UnitaryMatrix u = simulate_unitary(c);
        UnitaryMatrix uu = u * u.adjoint();
        CHECK((uu - UnitaryMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("too many qubits is rejected") {
    Circuit c(11);
    CHECK_THROWS_AS(simulate_unitary(c), TooManyQubits);
}

TEST_CASE("equivalent_up_to_phase") {
    Circuit hzh = parse_qasm("qreg q[1]; h q[0]; z q[0]; h q[0];");
    Circuit xq = parse_qasm("qreg q[1]; x q[0];");
    Circuit zq = parse_qasm("qreg q[1]; z q[0];");
    UnitaryMatrix a = simulate_unitary(xq);
    UnitaryMatrix b = simulate_unitary(hzh);
    CHECK(equivalent_up_to_phase(a, b, 1e-10));
    CHECK_FALSE(equivalent_up_to_phase(a, simulate_unitary(zq), 1e-10));

    UnitaryMatrix rotated = std::polar(1.0, std::numbers::pi / 4) * a;
    CHECK(equivalent_up_to_phase(a, rotated, 1e-10));

    UnitaryMatrix small(1, 1);
    CHECK_THROWS_AS(equivalent_up_to_phase(a, small, 1e-10), DimensionMismatch);
}

TEST_CASE("ccx and swap simulate correctly") {
    Circuit c = parse_qasm("qreg q[3]; x q[0]; x q[1]; ccx q[0],q[1],q[2];");
    StateVector v = simulate_statevector(c);
    // |111> is basis index 7
    CHECK(std::norm(v(7)) == Catch::Approx(1.0).margin(1e-12));

    Circuit sw = parse_qasm("qreg q[2]; x q[0]; swap q[0],q[1];");
    StateVector vs = simulate_statevector(sw);
    CHECK(std::norm(vs(2)) == Catch::Approx(1.0).margin(1e-12)); // |10> : qubit1 set
}

TEST_CASE("compact_columns drops idle columns and is idempotent") {
    Circuit c(2);
    c.append_column();
    c.set(0, 0, GateKind::H);
    c.append_column(); // idle
    c.append_column();
    c.set(1, 2, GateKind::X);
    Circuit compacted = compact_columns(c);
    REQUIRE(compacted.column_count() == 2);
    CHECK(compacted.at(0, 0) == GateKind::H);
    CHECK(compacted.at(1, 1) == GateKind::X);
    CHECK(compact_columns(compacted) == compacted);

    Circuit idle(3);
    idle.append_column();
    CHECK(compact_columns(idle).column_count() == 0);
}

TEST_CASE("gate_instances counts partner groups once") {
    Circuit c = parse_qasm("qreg q[3]; h q[0]; cx q[1],q[2]; ccx q[0],q[1],q[2]; swap q[0],q[1];");
    auto inst = gate_instances(c);
    REQUIRE(inst.size() == 4);
    CHECK(gate_count(c) == 4);
    // deterministic order: column-major, then first-member qubit
    CHECK(inst[0].cells.front().second == GateKind::H);
    CHECK(inst[1].cells.size() == 2);
    CHECK(inst[2].cells.size() == 3);
    CHECK(inst[3].cells.size() == 2);
}
