#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qcwmark/circuit.hpp"
#include "qcwmark/errors.hpp"

namespace qcw {

using UnitaryMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

constexpr int kMaxSimQubits = 10;

namespace detail {

using cplx = std::complex<double>;

inline Eigen::Matrix2cd single_gate_matrix(GateKind g) {
    const double s = 1.0 / std::numbers::sqrt2;
    const cplx i(0.0, 1.0);
    Eigen::Matrix2cd m;
    switch (g) {
        case GateKind::H: m << s, s, s, -s; break;
        case GateKind::X: m << 0, 1, 1, 0; break;
        case GateKind::Y: m << 0, -i, i, 0; break;
        case GateKind::Z: m << 1, 0, 0, -1; break;
        case GateKind::S: m << 1, 0, 0, i; break;
        case GateKind::Sdg: m << 1, 0, 0, -i; break;
        case GateKind::T: m << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4); break;
        case GateKind::Tdg: m << 1, 0, 0, std::polar(1.0, -std::numbers::pi / 4); break;
        default: throw UnsupportedGate("not a single-qubit gate");
    }
    return m;
}

// Left-multiplies by a single-qubit gate: row pairs (i, i | 1<<k) mix.
template <typename Mat>
void apply_single(Mat& m, int qubit, const Eigen::Matrix2cd& g) {
    const Eigen::Index dim = m.rows();
    const Eigen::Index bit = Eigen::Index(1) << qubit;
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & bit) continue;
        auto r0 = m.row(i).eval();
        auto r1 = m.row(i | bit).eval();
        m.row(i) = g(0, 0) * r0 + g(0, 1) * r1;
        m.row(i | bit) = g(1, 0) * r0 + g(1, 1) * r1;
    }
}

template <typename Mat>
void apply_cx(Mat& m, int control, int target) {
    const Eigen::Index dim = m.rows();
    const Eigen::Index cb = Eigen::Index(1) << control;
    const Eigen::Index tb = Eigen::Index(1) << target;
    for (Eigen::Index i = 0; i < dim; ++i)
        if ((i & cb) && !(i & tb)) m.row(i).swap(m.row(i | tb));
}

template <typename Mat>
void apply_ccx(Mat& m, int c1, int c2, int target) {
    const Eigen::Index dim = m.rows();
    const Eigen::Index b1 = Eigen::Index(1) << c1;
    const Eigen::Index b2 = Eigen::Index(1) << c2;
    const Eigen::Index tb = Eigen::Index(1) << target;
    for (Eigen::Index i = 0; i < dim; ++i)
        if ((i & b1) && (i & b2) && !(i & tb)) m.row(i).swap(m.row(i | tb));
}

template <typename Mat>
void apply_swap(Mat& m, int a, int b) {
    const Eigen::Index dim = m.rows();
    const Eigen::Index ba = Eigen::Index(1) << a;
    const Eigen::Index bb = Eigen::Index(1) << b;
    for (Eigen::Index i = 0; i < dim; ++i)
        if ((i & ba) && !(i & bb)) m.row(i).swap(m.row((i & ~ba) | bb));
}

template <typename Mat>
void apply_column(Mat& m, const Circuit& c, int t) {
    int cxc = -1, cxt = -1, c1 = -1, c2 = -1, ct = -1, sa = -1, sb = -1;
    for (int q = 0; q < c.num_qubits(); ++q) {
        GateKind g = c.at(q, t);
        switch (g) {
            case GateKind::Ident: break;
            case GateKind::CxC: cxc = q; break;
            case GateKind::CxT: cxt = q; break;
            case GateKind::CcxC1: c1 = q; break;
            case GateKind::CcxC2: c2 = q; break;
            case GateKind::CcxT: ct = q; break;
            case GateKind::SwapA: sa = q; break;
            case GateKind::SwapB: sb = q; break;
            default: apply_single(m, q, single_gate_matrix(g)); break;
        }
    }
    if (cxc >= 0) apply_cx(m, cxc, cxt);
    if (c1 >= 0) apply_ccx(m, c1, c2, ct);
    if (sa >= 0) apply_swap(m, sa, sb);
}

} // namespace detail

/// Full circuit unitary: the product of column unitaries, column 0 acting
/// first. Qubit 0 is the least significant bit of the basis index.
inline UnitaryMatrix simulate_unitary(const Circuit& c) {
    if (c.num_qubits() > kMaxSimQubits)
        throw TooManyQubits("dense simulation limited to " + std::to_string(kMaxSimQubits) + " qubits");
    validate_circuit(c);
    const Eigen::Index dim = Eigen::Index(1) << c.num_qubits();
    UnitaryMatrix u = UnitaryMatrix::Identity(dim, dim);
    for (int t = 0; t < c.column_count(); ++t) detail::apply_column(u, c, t);
    return u;
}

/// Final state when starting from |0...0>.
inline StateVector simulate_statevector(const Circuit& c) {
    if (c.num_qubits() > kMaxSimQubits)
        throw TooManyQubits("dense simulation limited to " + std::to_string(kMaxSimQubits) + " qubits");
    validate_circuit(c);
    const Eigen::Index dim = Eigen::Index(1) << c.num_qubits();
    StateVector v = StateVector::Zero(dim);
    v(0) = 1.0;
    for (int t = 0; t < c.column_count(); ++t) detail::apply_column(v, c, t);
    return v;
}

/// Computational-basis outcome probabilities from |0...0>.
inline std::vector<double> outcome_distribution(const Circuit& c) {
    StateVector v = simulate_statevector(c);
    std::vector<double> p(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) p[i] = std::norm(v(i));
    return p;
}

/// True iff u1 == e^{i phi} * u2 within tol in the max norm. The phase is
/// taken from the first entry pair whose magnitude exceeds tol.
inline bool equivalent_up_to_phase(const UnitaryMatrix& u1, const UnitaryMatrix& u2, double tol) {
    if (u1.rows() != u2.rows() || u1.cols() != u2.cols())
        throw DimensionMismatch("unitary dimensions differ");
    std::complex<double> phase(1.0, 0.0);
    bool found = false;
    for (Eigen::Index i = 0; i < u1.rows() && !found; ++i) {
        for (Eigen::Index j = 0; j < u1.cols() && !found; ++j) {
            bool big1 = std::abs(u1(i, j)) > tol;
            bool big2 = std::abs(u2(i, j)) > tol;
            if (big1 != big2) return false;
            if (big1 && big2) {
                std::complex<double> r = u1(i, j) / u2(i, j);
                phase = r / std::abs(r);
                found = true;
            }
        }
    }
    return (u1 - phase * u2).cwiseAbs().maxCoeff() <= tol;
}

} // namespace qcw
