// Test-only brute-force oracles, kept independent of the library's
// implementation paths: unitaries are assembled by explicit Kronecker
// lifting and dense matrix-vector products against basis vectors, not by
// the in-place bit-pair kernels the library uses.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "resetguard/circuit.hpp"

namespace oracles {

using Complex = std::complex<double>;
using Matrix = std::vector<std::vector<Complex>>;  // [row][col]

inline Matrix zeros(std::size_t dim) {
    return Matrix(dim, std::vector<Complex>(dim, Complex{}));
}

inline Matrix eye(std::size_t dim) {
    Matrix m = zeros(dim);
    for (std::size_t i = 0; i < dim; ++i) m[i][i] = 1.0;
    return m;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    const std::size_t dim = a.size();
    Matrix out = zeros(dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t k = 0; k < dim; ++k)
            for (std::size_t c = 0; c < dim; ++c)
                out[r][c] += a[r][k] * b[k][c];
    return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    const std::size_t da = a.size(), db = b.size();
    Matrix out = zeros(da * db);
    for (std::size_t ra = 0; ra < da; ++ra)
        for (std::size_t ca = 0; ca < da; ++ca)
            for (std::size_t rb = 0; rb < db; ++rb)
                for (std::size_t cb = 0; cb < db; ++cb)
                    out[ra * db + rb][ca * db + cb] = a[ra][ca] * b[rb][cb];
    return out;
}

inline Matrix gate2(resetguard::GateKind kind, double angle = 0.0) {
    using resetguard::GateKind;
    const double rt2 = std::numbers::sqrt2;
    switch (kind) {
        case GateKind::I: return {{1, 0}, {0, 1}};
        case GateKind::X: return {{0, 1}, {1, 0}};
        case GateKind::SX:
            return {{Complex(0.5, 0.5), Complex(0.5, -0.5)},
                    {Complex(0.5, -0.5), Complex(0.5, 0.5)}};
        case GateKind::H:
            return {{1.0 / rt2, 1.0 / rt2}, {1.0 / rt2, -1.0 / rt2}};
        case GateKind::RZ:
            return {{std::polar(1.0, -angle / 2.0), 0},
                    {0, std::polar(1.0, angle / 2.0)}};
        case GateKind::RX: {
            const Complex off(0.0, -std::sin(angle / 2.0));
            const double c = std::cos(angle / 2.0);
            return {{c, off}, {off, c}};
        }
        default: throw std::logic_error("gate2: not a 1-qubit gate");
    }
}

/// Lift a single-qubit matrix to qubit q of an n-qubit register. With the
/// index convention "bit q of the basis index is qubit q", the leftmost
/// Kronecker factor holds the most significant bits.
inline Matrix lift_single(const Matrix& g, std::size_t q, std::size_t n) {
    Matrix m = {{1.0}};
    for (std::size_t k = n; k-- > 0;) m = kron(m, k == q ? g : eye(2));
    return m;
}

/// CX by the projector decomposition |0><0|_c (x) I + |1><1|_c (x) X_t.
inline Matrix lift_cx(std::size_t control, std::size_t target,
                      std::size_t n) {
    const Matrix p0 = {{1, 0}, {0, 0}};
    const Matrix p1 = {{0, 0}, {0, 1}};
    const Matrix a = lift_single(p0, control, n);
    const Matrix b = matmul(lift_single(p1, control, n),
                            lift_single(gate2(resetguard::GateKind::X),
                                        target, n));
    Matrix out = a;
    for (std::size_t r = 0; r < out.size(); ++r)
        for (std::size_t c = 0; c < out.size(); ++c) out[r][c] += b[r][c];
    return out;
}

inline std::vector<Complex> matvec(const Matrix& m,
                                   const std::vector<Complex>& v) {
    std::vector<Complex> out(m.size(), Complex{});
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m.size(); ++c) out[r] += m[r][c] * v[c];
    return out;
}

/// Circuit operator assembled column-by-column: each basis vector is pushed
/// through every gate's lifted matrix in program order.
inline Matrix circuit_unitary_oracle(const resetguard::Circuit& circ) {
    using resetguard::GateKind;
    const std::size_t n = circ.num_qubits();
    const std::size_t dim = std::size_t{1} << n;
    Matrix out = zeros(dim);
    for (std::size_t b = 0; b < dim; ++b) {
        std::vector<Complex> v(dim, Complex{});
        v[b] = 1.0;
        for (const auto& instr : circ) {
            if (instr.kind == GateKind::Barrier) continue;
            if (instr.kind == GateKind::CX)
                v = matvec(lift_cx(instr.qubits[0], instr.qubits[1], n), v);
            else
                v = matvec(lift_single(gate2(instr.kind, instr.angle),
                                       instr.qubits[0], n),
                           v);
        }
        for (std::size_t r = 0; r < dim; ++r) out[r][b] = v[r];
    }
    return out;
}

/// Probability of reading the all-ones bitstring when the circuit runs on
/// |0...0> (measurements in the circuit are ignored).
inline double all_ones_probability(const resetguard::Circuit& circ) {
    resetguard::Circuit gates(circ.num_qubits());
    for (const auto& instr : circ)
        if (resetguard::is_unitary_gate(instr.kind) &&
            instr.kind != resetguard::GateKind::Barrier)
            gates.add(instr);
    const Matrix u = circuit_unitary_oracle(gates);
    const std::size_t dim = u.size();
    return std::norm(u[dim - 1][0]);
}

/// Random unitary-gate circuit over the supported set (no measurements).
inline resetguard::Circuit random_unitary_circuit(std::size_t n_qubits,
                                                  std::size_t n_gates,
                                                  std::mt19937_64& rng) {
    using resetguard::Instruction;
    resetguard::Circuit c(n_qubits);
    std::uniform_real_distribution<double> angle(0.0,
                                                 2.0 * std::numbers::pi);
    std::uniform_int_distribution<std::uint32_t> qubit(
        0, static_cast<std::uint32_t>(n_qubits - 1));
    std::uniform_int_distribution<int> kind(0, n_qubits >= 2 ? 5 : 4);
    for (std::size_t i = 0; i < n_gates; ++i) {
        const std::uint32_t q = qubit(rng);
        switch (kind(rng)) {
            case 0: c.add(Instruction::x(q)); break;
            case 1: c.add(Instruction::sx(q)); break;
            case 2: c.add(Instruction::h(q)); break;
            case 3: c.add(Instruction::rz(angle(rng), q)); break;
            case 4: c.add(Instruction::rx(angle(rng), q)); break;
            default: {
                std::uint32_t t = qubit(rng);
                while (t == q) t = qubit(rng);
                c.add(Instruction::cx(q, t));
                break;
            }
        }
    }
    return c;
}

// --- statistics helpers -----------------------------------------------

/// Two-sided p-value of a two-proportion z-test on counts of ones.
inline double two_proportion_p_value(std::size_t ones_a, std::size_t n_a,
                                     std::size_t ones_b, std::size_t n_b) {
    const double pa = static_cast<double>(ones_a) / static_cast<double>(n_a);
    const double pb = static_cast<double>(ones_b) / static_cast<double>(n_b);
    const double pool = static_cast<double>(ones_a + ones_b) /
                        static_cast<double>(n_a + n_b);
    const double se = std::sqrt(pool * (1.0 - pool) *
                                (1.0 / static_cast<double>(n_a) +
                                 1.0 / static_cast<double>(n_b)));
    if (se == 0.0) return 1.0;
    const double z = std::abs(pa - pb) / se;
    return std::erfc(z / std::numbers::sqrt2);
}

/// Holm-Bonferroni: true when no hypothesis is rejected at family level
/// alpha. Holm stops at the first surviving p-value, so nothing is
/// rejected iff the smallest p-value clears the strictest threshold.
inline bool holm_all_pass(const std::vector<double>& p_values, double alpha) {
    if (p_values.empty()) return true;
    const double p_min = *std::min_element(p_values.begin(), p_values.end());
    return p_min >= alpha / static_cast<double>(p_values.size());
}

/// Chi-square homogeneity statistic for a 2 x k table of (ones, zeros)
/// counts per group.
inline double chi_square_homogeneity(const std::vector<std::size_t>& ones,
                                     const std::vector<std::size_t>& totals) {
    double grand_ones = 0.0, grand_total = 0.0;
    for (std::size_t i = 0; i < ones.size(); ++i) {
        grand_ones += static_cast<double>(ones[i]);
        grand_total += static_cast<double>(totals[i]);
    }
    const double p = grand_ones / grand_total;
    double stat = 0.0;
    for (std::size_t i = 0; i < ones.size(); ++i) {
        const double n = static_cast<double>(totals[i]);
        const double e1 = n * p;
        const double e0 = n * (1.0 - p);
        const double o1 = static_cast<double>(ones[i]);
        const double o0 = n - o1;
        if (e1 > 0) stat += (o1 - e1) * (o1 - e1) / e1;
        if (e0 > 0) stat += (o0 - e0) * (o0 - e0) / e0;
    }
    return stat;
}

/// Upper 5% critical values of the chi-square distribution.
inline double chi_square_crit_5pct(std::size_t df) {
    static const double table[] = {0.0,    3.841,  5.991,  7.815,  9.488,
                                   11.070, 12.592, 14.067, 15.507, 16.919,
                                   18.307};
    return table[df];
}

}  // namespace oracles
