#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <numbers>
#include <random>

#include "resetguard/circuit.hpp"
#include "resetguard/unitary.hpp"
#include "oracles.hpp"

using namespace resetguard;
using std::numbers::pi;

namespace {

Unitary mul2(const Unitary& a, const Unitary& b) { return a.multiply(b); }

double max_diff_vs_oracle(const Unitary& u, const oracles::Matrix& m) {
    double worst = 0.0;
    for (std::size_t r = 0; r < u.dim(); ++r)
        for (std::size_t c = 0; c < u.dim(); ++c)
            worst = std::max(worst, std::abs(u(r, c) - m[r][c]));
    return worst;
}

}  // namespace

TEST_CASE("gate matrices") {
    SECTION("RX(0) is the identity") {
        CHECK(is_identity(gate_matrix(GateKind::RX, 0.0), 1e-12, false));
    }
    SECTION("X equals RX(pi) up to the phase e^{i pi/2}") {
        const Unitary rx = gate_matrix(GateKind::RX, pi);
        const Unitary x = gate_matrix(GateKind::X);
        const Complex phase = std::polar(1.0, pi / 2.0);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c)
                CHECK(std::abs(x(r, c) - phase * rx(r, c)) < 1e-12);
    }
    SECTION("SX * SX = X exactly") {
        const Unitary sq =
            mul2(gate_matrix(GateKind::SX), gate_matrix(GateKind::SX));
        CHECK(sq.max_abs_diff(gate_matrix(GateKind::X)) < 1e-15);
    }
    SECTION("CX with control as first operand") {
        const Unitary cx = gate_matrix(GateKind::CX);
        CHECK(cx(0, 0) == Complex(1.0));
        CHECK(cx(1, 1) == Complex(1.0));
        CHECK(cx(2, 3) == Complex(1.0));
        CHECK(cx(3, 2) == Complex(1.0));
    }
    SECTION("non-unitary kinds are rejected") {
        CHECK_THROWS_AS(gate_matrix(GateKind::Measure), UnitaryError);
    }
}

TEST_CASE("circuit_unitary basics") {
    SECTION("empty 2-qubit circuit is the 4x4 identity") {
        const Unitary u = circuit_unitary(Circuit(2));
        CHECK(u.dim() == 4);
        CHECK(is_identity(u, 1e-12, false));
    }
    SECTION("X X cancels") {
        Circuit c(1);
        c.add(Instruction::x(0));
        c.add(Instruction::x(0));
        CHECK(is_identity(circuit_unitary(c), 1e-12, false));
    }
    SECTION("measure inside is an error") {
        Circuit c(1, 1);
        c.add(Instruction::measure(0, 0));
        try {
            circuit_unitary(c);
            FAIL("expected UnitaryError");
        } catch (const UnitaryError& e) {
            CHECK(e.kind() == UnitaryErrorKind::NonUnitaryInstruction);
        }
    }
    SECTION("qubit cap") {
        try {
            circuit_unitary(Circuit(13));
            FAIL("expected UnitaryError");
        } catch (const UnitaryError& e) {
            CHECK(e.kind() == UnitaryErrorKind::QubitCapExceeded);
        }
        CHECK_NOTHROW(circuit_unitary(Circuit(4), 4));
        CHECK_THROWS_AS(circuit_unitary(Circuit(5), 4), UnitaryError);
    }
}

TEST_CASE("random circuits match the basis-vector oracle") {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<std::size_t> qubits(1, 3);
    std::uniform_int_distribution<std::size_t> gates(0, 20);
    for (int trial = 0; trial < 60; ++trial) {
        const Circuit c =
            oracles::random_unitary_circuit(qubits(rng), gates(rng), rng);
        const Unitary u = circuit_unitary(c);
        const oracles::Matrix m = oracles::circuit_unitary_oracle(c);
        CHECK(max_diff_vs_oracle(u, m) <= 1e-9);
    }
}

TEST_CASE("is_identity") {
    CHECK(is_identity(Unitary::identity(4), 1e-12, false));
    SECTION("inverse RZ pair") {
        Circuit c(1);
        c.add(Instruction::rz(pi / 2.0, 0));
        c.add(Instruction::rz(-pi / 2.0, 0));
        CHECK(is_identity(circuit_unitary(c), 1e-12, true));
    }
    SECTION("H is not the identity") {
        CHECK_FALSE(is_identity(gate_matrix(GateKind::H), 1e-6, true));
    }
    SECTION("invariant under a global unit-modulus factor") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
        for (int trial = 0; trial < 50; ++trial) {
            const Circuit c = oracles::random_unitary_circuit(2, 10, rng);
            Unitary u = circuit_unitary(c);
            const bool before = is_identity(u, 1e-9, true);
            const Complex scale = std::polar(1.0, angle(rng));
            Unitary scaled = u;
            for (std::size_t r = 0; r < u.dim(); ++r)
                for (std::size_t col = 0; col < u.dim(); ++col)
                    scaled(r, col) = scale * u(r, col);
            CHECK(is_identity(scaled, 1e-9, true) == before);
        }
    }
    SECTION("strict mode sees the phase") {
        Unitary u = Unitary::identity(2);
        u(0, 0) = u(1, 1) = std::polar(1.0, 0.3);
        CHECK(is_identity(u, 1e-9, true));
        CHECK_FALSE(is_identity(u, 1e-9, false));
    }
}

TEST_CASE("effective_rx recovery") {
    SECTION("identity gives theta = 0") {
        const auto theta = effective_rx(Unitary::identity(2), 1e-9);
        REQUIRE(theta.has_value());
        CHECK(*theta == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("X gives theta = pi") {
        const auto theta = effective_rx(gate_matrix(GateKind::X), 1e-9);
        REQUIRE(theta.has_value());
        CHECK(*theta == Catch::Approx(pi));
    }
    SECTION("SX gives theta = pi/2") {
        const auto theta = effective_rx(gate_matrix(GateKind::SX), 1e-9);
        REQUIRE(theta.has_value());
        CHECK(*theta == Catch::Approx(pi / 2.0));
    }
    SECTION("RZ(pi/2) is not an RX for any phase: 1e-3 grid oracle") {
        const Unitary rz = gate_matrix(GateKind::RZ, pi / 2.0);
        CHECK_FALSE(effective_rx(rz, 1e-6).has_value());
        double best = 1e9;
        const double step = 1e-3;
        for (double alpha = 0.0; alpha < 2.0 * pi; alpha += step) {
            const Complex phase = std::polar(1.0, alpha);
            for (double theta = 0.0; theta < 2.0 * pi; theta += step) {
                const double c = std::cos(theta / 2.0);
                const double s = std::sin(theta / 2.0);
                const Complex diag = phase * c;
                const Complex off = phase * Complex(0.0, -s);
                const double diff = std::max(
                    {std::abs(rz(0, 0) - diag), std::abs(rz(1, 1) - diag),
                     std::abs(rz(0, 1) - off), std::abs(rz(1, 0) - off)});
                best = std::min(best, diff);
            }
        }
        CHECK(best > 2e-3);
    }
    SECTION("round-trips through circuit_unitary for random angles") {
        std::mt19937_64 rng(55);
        std::uniform_real_distribution<double> angle(-4.0 * pi, 4.0 * pi);
        for (int trial = 0; trial < 100; ++trial) {
            const double theta = angle(rng);
            Circuit c(1);
            c.add(Instruction::rx(theta, 0));
            const auto got = effective_rx(circuit_unitary(c), 1e-9);
            REQUIRE(got.has_value());
            CHECK(angles_equivalent(*got, theta, 1e-9));
            CHECK(*got >= 0.0);
            CHECK(*got < 2.0 * pi);
        }
    }
    SECTION("dimension is checked") {
        CHECK_THROWS_AS(effective_rx(Unitary::identity(4), 1e-9),
                        UnitaryError);
    }
}

TEST_CASE("RX decomposes into RZ SX RZ SX RZ up to global phase") {
    for (int i = 0; i < 8; ++i) {
        const double theta = 2.0 * pi * static_cast<double>(i) / 8.0;
        Circuit c(1);
        c.add(Instruction::rz(pi / 2.0, 0));
        c.add(Instruction::sx(0));
        c.add(Instruction::rz(theta + pi, 0));
        c.add(Instruction::sx(0));
        c.add(Instruction::rz(pi / 2.0, 0));
        const Unitary u = circuit_unitary(c);
        // compare through the oracle: u * RX(theta)^dagger must be a phase
        const Unitary residual =
            u.multiply(gate_matrix(GateKind::RX, theta).adjoint());
        CHECK(is_identity(residual, 1e-9, true));
        const auto recovered = effective_rx(u, 1e-9);
        REQUIRE(recovered.has_value());
        CHECK(angles_equivalent(*recovered, theta, 1e-9));
    }
}

TEST_CASE("single_qubit_product multiplies in program order") {
    std::vector<Instruction> gates = {Instruction::h(0), Instruction::x(0),
                                      Instruction::h(0)};
    // H X H = Z
    const Unitary u = single_qubit_product(gates);
    CHECK(std::abs(u(0, 0) - Complex(1.0)) < 1e-12);
    CHECK(std::abs(u(1, 1) - Complex(-1.0)) < 1e-12);
    CHECK(std::abs(u(0, 1)) < 1e-12);
    CHECK_THROWS_AS(
        single_qubit_product(std::vector<Instruction>{Instruction::cx(0, 1)}),
        UnitaryError);
}
