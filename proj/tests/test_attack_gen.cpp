#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "resetguard/attack_gen.hpp"
#include "resetguard/qasm.hpp"
#include "resetguard/unitary.hpp"
#include "oracles.hpp"

using namespace resetguard;
using std::numbers::pi;

TEST_CASE("gen_victim") {
    SECTION("trivial angles") {
        const Circuit c = gen_victim({0.0}, {0.0});
        REQUIRE(c.size() == 3);
        CHECK(c.instructions()[0].kind == GateKind::RX);
        CHECK(c.instructions()[1].kind == GateKind::RZ);
        CHECK(c.instructions()[2].kind == GateKind::Measure);
    }
    SECTION("single-qubit attack-model prefix") {
        const Circuit c = gen_victim({3.0 * pi / 4.0}, {pi / 2.0});
        CHECK(c.instructions()[0].angle == Catch::Approx(3.0 * pi / 4.0));
        CHECK(c.instructions()[1].angle == Catch::Approx(pi / 2.0));
    }
    SECTION("two-qubit victim") {
        const Circuit c = gen_victim({2.0 * pi / 7.0, 4.0 * pi / 7.0},
                                     {0.0, 0.0});
        CHECK(c.num_qubits() == 2);
        CHECK(c.num_clbits() == 2);
        REQUIRE(c.size() == 6);
        CHECK(c.instructions()[0].angle == Catch::Approx(2.0 * pi / 7.0));
        CHECK(c.instructions()[3].angle == Catch::Approx(4.0 * pi / 7.0));
    }
    SECTION("length mismatch") {
        CHECK_THROWS_AS(gen_victim({0.0}, {0.0, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("gen_resets") {
    CHECK(gen_resets(1, 0).size() == 0);
    CHECK(gen_resets(1, 6).size() == 6);
    CHECK(gen_resets(2, 2).size() == 4);
    for (const auto& instr : gen_resets(2, 2))
        CHECK(instr.kind == GateKind::Reset);
}

TEST_CASE("gen_x_chain") {
    SECTION("two X gates then measure") {
        const Circuit c = gen_x_chain(2);
        REQUIRE(c.size() == 3);
        CHECK(c.instructions()[0].kind == GateKind::X);
        CHECK(c.instructions()[1].kind == GateKind::X);
        CHECK(c.instructions()[2].kind == GateKind::Measure);
    }
    SECTION("zero X gates is the bare-measure attack") {
        const Circuit c = gen_x_chain(0);
        REQUIRE(c.size() == 1);
        CHECK(c.instructions()[0].kind == GateKind::Measure);
    }
    SECTION("32 X gates") { CHECK(gen_x_chain(32).size() == 33); }
    SECTION("even chains are identity circuits") {
        for (std::size_t m = 1; m <= 16; ++m) {
            Circuit gates(1);
            for (std::size_t i = 0; i < 2 * m; ++i)
                gates.add(Instruction::x(0));
            CHECK(is_identity(circuit_unitary(gates), 1e-9, true));
        }
    }
}

TEST_CASE("gen_rx_rz") {
    SECTION("depth 1") {
        const Circuit c = gen_rx_rz(pi / 4.0, 3.0 * pi / 2.0, 1);
        REQUIRE(c.size() == 3);
        CHECK(c.instructions()[0].angle == Catch::Approx(pi / 4.0));
        CHECK(c.instructions()[1].angle == Catch::Approx(3.0 * pi / 2.0));
    }
    SECTION("depth 2 splits the rotations") {
        const Circuit c = gen_rx_rz(pi, pi / 2.0, 2);
        REQUIRE(c.size() == 5);
        CHECK(c.instructions()[0].kind == GateKind::RX);
        CHECK(c.instructions()[0].angle == Catch::Approx(pi / 2.0));
        CHECK(c.instructions()[1].angle == Catch::Approx(pi / 2.0));
        CHECK(c.instructions()[2].kind == GateKind::RZ);
        CHECK(c.instructions()[2].angle == Catch::Approx(pi / 4.0));
        CHECK(c.instructions()[3].angle == Catch::Approx(pi / 4.0));
    }
    SECTION("total unitary is depth-invariant up to global phase") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
        for (int trial = 0; trial < 10; ++trial) {
            const double theta = angle(rng);
            const double phi = angle(rng);
            Circuit ref(1);
            ref.add(Instruction::rx(theta, 0));
            ref.add(Instruction::rz(phi, 0));
            const Unitary u1 = circuit_unitary(ref);
            for (std::size_t d = 1; d <= 8; ++d) {
                Circuit gates(1);
                for (const auto& instr : gen_rx_rz(theta, phi, d))
                    if (instr.kind != GateKind::Measure) gates.add(instr);
                const Unitary ud = circuit_unitary(gates);
                CHECK(is_identity(ud.multiply(u1.adjoint()), 1e-9, true));
            }
        }
    }
    SECTION("depth must be positive") {
        CHECK_THROWS_AS(gen_rx_rz(0, 0, 0), std::invalid_argument);
    }
}

TEST_CASE("gen_cx_chain") {
    SECTION("two CX, measurement on the control only") {
        const Circuit c = gen_cx_chain(2);
        CHECK(c.num_qubits() == 2);
        REQUIRE(c.size() == 3);
        CHECK(c.instructions()[0].kind == GateKind::CX);
        CHECK(c.instructions()[0].qubits[0] == 0);
        CHECK(c.instructions()[0].qubits[1] == 1);
        CHECK(c.instructions()[2].kind == GateKind::Measure);
        CHECK(c.instructions()[2].qubits[0] == 0);
    }
    SECTION("zero CX is a bare measure on q0") {
        CHECK(gen_cx_chain(0).size() == 1);
    }
    SECTION("six CX") { CHECK(gen_cx_chain(6).size() == 7); }
}

TEST_CASE("Grover circuits reach their marked states") {
    SECTION("2-qubit Grover finds 11 with probability 1") {
        const double p = oracles::all_ones_probability(gen_grover2());
        CHECK(p == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("3-qubit Grover with two iterations") {
        const double p = oracles::all_ones_probability(gen_grover3());
        // closed form sin^2(5 asin(1/sqrt(8))) = 121/128
        CHECK(p == Catch::Approx(0.9453125).margin(1e-9));
    }
}

TEST_CASE("gen_qrng") {
    const Circuit c = gen_qrng(4);
    CHECK(c.num_qubits() == 4);
    REQUIRE(c.size() == 8);
    for (int i = 0; i < 4; ++i) CHECK(c.instructions()[i].kind == GateKind::H);
    for (int i = 4; i < 8; ++i)
        CHECK(c.instructions()[i].kind == GateKind::Measure);
    CHECK_THROWS_AS(gen_qrng(0), std::invalid_argument);
}

TEST_CASE("gen_random_identity builds exact-inverse circuits") {
    for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
        const Circuit c = gen_random_identity(7, 10, seed);
        CHECK(c.num_qubits() == 7);
        Circuit gates(7);
        for (const auto& instr : c)
            if (instr.kind != GateKind::Measure) gates.add(instr);
        CHECK(gates.size() == 20);
        CHECK(is_identity(circuit_unitary(gates), 1e-9, true));
    }
    CHECK_FALSE(circuits_equal(gen_random_identity(3, 10, 1),
                               gen_random_identity(3, 10, 2)));
}

TEST_CASE("every generator round-trips through QASM") {
    const Circuit circuits[] = {
        gen_victim({0.3, 1.2}, {0.1, 2.2}),
        gen_resets(3, 2),
        gen_x_chain(4),
        gen_rx_rz(pi, pi / 2.0, 3),
        gen_cx_chain(3),
        gen_grover2(),
        gen_grover3(),
        gen_qrng(4),
        gen_random_identity(5, 12, 31),
    };
    for (const auto& c : circuits) {
        const Circuit back = parse_qasm(emit_qasm(c), c.name());
        CHECK(circuits_equal(c, back, 1e-12));
    }
}
