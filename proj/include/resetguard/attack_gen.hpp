#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "resetguard/circuit.hpp"

namespace resetguard {

/// Victim segment: per qubit RX(theta), RZ(phi), then a measurement to the
/// matching classical bit.
inline Circuit gen_victim(const std::vector<double>& thetas,
                          const std::vector<double>& phis) {
    if (thetas.size() != phis.size() || thetas.empty())
        throw std::invalid_argument(
            "gen_victim: theta and phi lists must be equal-length and "
            "non-empty");
    const auto n = static_cast<std::uint32_t>(thetas.size());
    Circuit c(n, n, "victim");
    for (std::uint32_t q = 0; q < n; ++q) {
        c.add(Instruction::rx(thetas[q], q));
        c.add(Instruction::rz(phis[q], q));
        c.add(Instruction::measure(q, q));
    }
    return c;
}

/// Inter-shot reset sequence: k rounds of one Reset per qubit.
inline Circuit gen_resets(std::size_t n_qubits, std::size_t k) {
    Circuit c(n_qubits, 0, "resets");
    for (std::size_t round = 0; round < k; ++round)
        for (std::uint32_t q = 0; q < n_qubits; ++q)
            c.add(Instruction::reset(q));
    return c;
}

/// Masking circuit of n_x X gates followed by a measurement; even counts
/// form an identity circuit.
inline Circuit gen_x_chain(std::size_t n_x) {
    Circuit c(1, 1, "xchain");
    for (std::size_t i = 0; i < n_x; ++i) c.add(Instruction::x(0));
    c.add(Instruction::measure(0, 0));
    return c;
}

/// Masking circuit of d copies of RX(theta/d) followed by d copies of
/// RZ(phi/d), then a measurement; the total rotation sums to (theta, phi)
/// at any depth.
inline Circuit gen_rx_rz(double theta, double phi, std::size_t d) {
    if (d < 1) throw std::invalid_argument("gen_rx_rz: depth must be >= 1");
    Circuit c(1, 1, "rxrz");
    const double dd = static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) c.add(Instruction::rx(theta / dd, 0));
    for (std::size_t i = 0; i < d; ++i) c.add(Instruction::rz(phi / dd, 0));
    c.add(Instruction::measure(0, 0));
    return c;
}

/// Masking circuit of n_cx CX gates with the victim qubit q0 as control;
/// only the control qubit is measured.
inline Circuit gen_cx_chain(std::size_t n_cx) {
    Circuit c(2, 1, "cxchain");
    for (std::size_t i = 0; i < n_cx; ++i) c.add(Instruction::cx(0, 1));
    c.add(Instruction::measure(0, 0));
    return c;
}

namespace attack_detail {

// CZ over our gate set: conjugate the CX target by Hadamards.
inline void add_cz(Circuit& c, std::uint32_t a, std::uint32_t b) {
    c.add(Instruction::h(b));
    c.add(Instruction::cx(a, b));
    c.add(Instruction::h(b));
}

// Standard Toffoli decomposition into CX, H and RZ(+-pi/4); exact up to a
// global phase because RZ(pi/4) is the T gate times a phase.
inline void add_ccx(Circuit& c, std::uint32_t a, std::uint32_t b,
                    std::uint32_t t) {
    const double q = std::numbers::pi / 4.0;
    c.add(Instruction::h(t));
    c.add(Instruction::cx(b, t));
    c.add(Instruction::rz(-q, t));
    c.add(Instruction::cx(a, t));
    c.add(Instruction::rz(q, t));
    c.add(Instruction::cx(b, t));
    c.add(Instruction::rz(-q, t));
    c.add(Instruction::cx(a, t));
    c.add(Instruction::rz(q, b));
    c.add(Instruction::rz(q, t));
    c.add(Instruction::cx(a, b));
    c.add(Instruction::h(t));
    c.add(Instruction::rz(q, a));
    c.add(Instruction::rz(-q, b));
    c.add(Instruction::cx(a, b));
}

inline void add_ccz(Circuit& c, std::uint32_t a, std::uint32_t b,
                    std::uint32_t t) {
    c.add(Instruction::h(t));
    add_ccx(c, a, b, t);
    c.add(Instruction::h(t));
}

}  // namespace attack_detail

/// 2-qubit Grover search for the answer bitstring 11: uniform
/// superposition, one Grover operator, measurements. A single iteration is
/// exact for 2 qubits.
inline Circuit gen_grover2() {
    Circuit c(2, 2, "grover2");
    c.add(Instruction::h(0));
    c.add(Instruction::h(1));
    // Grover operator: oracle CZ, then the diffusion H.X.CZ.X.H block.
    attack_detail::add_cz(c, 0, 1);
    c.add(Instruction::h(0));
    c.add(Instruction::h(1));
    c.add(Instruction::x(0));
    c.add(Instruction::x(1));
    attack_detail::add_cz(c, 0, 1);
    c.add(Instruction::x(0));
    c.add(Instruction::x(1));
    c.add(Instruction::h(0));
    c.add(Instruction::h(1));
    c.add(Instruction::measure(0, 0));
    c.add(Instruction::measure(1, 1));
    return c;
}

/// 3-qubit Grover search for 111 with two Grover iterations, as drawn with
/// two Q blocks. The doubly-controlled phase oracle uses the standard
/// Toffoli decomposition.
inline Circuit gen_grover3() {
    Circuit c(3, 3, "grover3");
    for (std::uint32_t q = 0; q < 3; ++q) c.add(Instruction::h(q));
    for (int iter = 0; iter < 2; ++iter) {
        attack_detail::add_ccz(c, 0, 1, 2);
        for (std::uint32_t q = 0; q < 3; ++q) c.add(Instruction::h(q));
        for (std::uint32_t q = 0; q < 3; ++q) c.add(Instruction::x(q));
        attack_detail::add_ccz(c, 0, 1, 2);
        for (std::uint32_t q = 0; q < 3; ++q) c.add(Instruction::x(q));
        for (std::uint32_t q = 0; q < 3; ++q) c.add(Instruction::h(q));
    }
    for (std::uint32_t q = 0; q < 3; ++q) c.add(Instruction::measure(q, q));
    return c;
}

/// Quantum random number generator: one Hadamard per qubit, then
/// measurements; depth-1 masking.
inline Circuit gen_qrng(std::size_t n) {
    if (n < 1) throw std::invalid_argument("gen_qrng: need at least 1 qubit");
    Circuit c(n, n, "qrng");
    for (std::uint32_t q = 0; q < n; ++q) c.add(Instruction::h(q));
    for (std::uint32_t q = 0; q < n; ++q) c.add(Instruction::measure(q, q));
    return c;
}

/// Random identity circuit: `depth` random gates, their exact inverses in
/// reverse order, then measurements on every qubit. The full operator is
/// the identity up to a global phase (the SX inverse is RX(-pi/2), which
/// differs from SX-dagger by a phase only).
inline Circuit gen_random_identity(std::size_t n_qubits, std::size_t depth,
                                   std::uint64_t seed) {
    Circuit c(n_qubits, n_qubits, "random_identity");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<std::uint32_t> pick_qubit(
        0, static_cast<std::uint32_t>(n_qubits - 1));
    std::uniform_int_distribution<int> pick_kind(0, n_qubits >= 2 ? 5 : 4);

    std::vector<Instruction> forward;
    for (std::size_t i = 0; i < depth; ++i) {
        const std::uint32_t q = pick_qubit(rng);
        switch (pick_kind(rng)) {
            case 0: forward.push_back(Instruction::x(q)); break;
            case 1: forward.push_back(Instruction::sx(q)); break;
            case 2: forward.push_back(Instruction::h(q)); break;
            case 3: forward.push_back(Instruction::rz(angle(rng), q)); break;
            case 4: forward.push_back(Instruction::rx(angle(rng), q)); break;
            default: {
                std::uint32_t t = pick_qubit(rng);
                while (t == q) t = pick_qubit(rng);
                forward.push_back(Instruction::cx(q, t));
                break;
            }
        }
    }
    for (const auto& instr : forward) c.add(instr);
    for (auto it = forward.rbegin(); it != forward.rend(); ++it) {
        switch (it->kind) {
            case GateKind::SX:
                c.add(Instruction::rx(-std::numbers::pi / 2.0,
                                      it->qubits[0]));
                break;
            case GateKind::RZ:
                c.add(Instruction::rz(-it->angle, it->qubits[0]));
                break;
            case GateKind::RX:
                c.add(Instruction::rx(-it->angle, it->qubits[0]));
                break;
            default: c.add(*it); break;  // X, H, CX are involutions
        }
    }
    for (std::uint32_t q = 0; q < n_qubits; ++q)
        c.add(Instruction::measure(q, q));
    return c;
}

}  // namespace resetguard
