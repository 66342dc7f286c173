#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace resetguard {

/// Gate and non-gate operations representable in the IR.
///
/// I, X, SX, RZ and CX are the native basis set of current superconducting
/// backends; H and RX are admitted as pre-transpilation gates. Measure,
/// Reset and Barrier are the non-unitary / structural operations.
enum class GateKind {
    I,
    X,
    SX,
    H,
    RZ,
    RX,
    CX,
    Measure,
    Reset,
    Barrier,
};

inline const char* gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::I: return "id";
        case GateKind::X: return "x";
        case GateKind::SX: return "sx";
        case GateKind::H: return "h";
        case GateKind::RZ: return "rz";
        case GateKind::RX: return "rx";
        case GateKind::CX: return "cx";
        case GateKind::Measure: return "measure";
        case GateKind::Reset: return "reset";
        case GateKind::Barrier: return "barrier";
    }
    return "?";
}

/// True for kinds that have a unitary matrix (everything except
/// Measure/Reset/Barrier).
inline bool is_unitary_gate(GateKind kind) {
    return kind != GateKind::Measure && kind != GateKind::Reset &&
           kind != GateKind::Barrier;
}

inline bool has_angle(GateKind kind) {
    return kind == GateKind::RZ || kind == GateKind::RX;
}

/// Number of qubit operands a kind requires (Barrier is variadic and
/// reports 0 here).
inline std::size_t gate_arity(GateKind kind) {
    if (kind == GateKind::CX) return 2;
    if (kind == GateKind::Barrier) return 0;
    return 1;
}

/// Angles are stored unreduced; equivalence reduces the difference
/// modulo 2*pi.
inline bool angles_equivalent(double a, double b, double tol = 1e-9) {
    const double two_pi = 2.0 * std::numbers::pi;
    double d = std::fmod(a - b, two_pi);
    if (d < 0) d += two_pi;
    return d <= tol || (two_pi - d) <= tol;
}

/// One operation on named qubit/clbit indices. Use the static factories;
/// Circuit::add validates indices against the owning circuit.
struct Instruction {
    GateKind kind = GateKind::I;
    double angle = 0.0;  // meaningful for RZ/RX only
    std::vector<std::uint32_t> qubits;
    std::vector<std::uint32_t> clbits;

    static Instruction single(GateKind kind, std::uint32_t q) {
        return {kind, 0.0, {q}, {}};
    }
    static Instruction i(std::uint32_t q) { return single(GateKind::I, q); }
    static Instruction x(std::uint32_t q) { return single(GateKind::X, q); }
    static Instruction sx(std::uint32_t q) { return single(GateKind::SX, q); }
    static Instruction h(std::uint32_t q) { return single(GateKind::H, q); }
    static Instruction rz(double angle, std::uint32_t q) {
        return {GateKind::RZ, angle, {q}, {}};
    }
    static Instruction rx(double angle, std::uint32_t q) {
        return {GateKind::RX, angle, {q}, {}};
    }
    static Instruction cx(std::uint32_t control, std::uint32_t target) {
        return {GateKind::CX, 0.0, {control, target}, {}};
    }
    static Instruction measure(std::uint32_t q, std::uint32_t c) {
        return {GateKind::Measure, 0.0, {q}, {c}};
    }
    static Instruction reset(std::uint32_t q) {
        return {GateKind::Reset, 0.0, {q}, {}};
    }
    static Instruction barrier(std::vector<std::uint32_t> qs) {
        return {GateKind::Barrier, 0.0, std::move(qs), {}};
    }

    bool touches(std::uint32_t q) const {
        return std::find(qubits.begin(), qubits.end(), q) != qubits.end();
    }
};

inline bool instructions_equal(const Instruction& a, const Instruction& b,
                               double angle_tol = 0.0) {
    if (a.kind != b.kind || a.qubits != b.qubits || a.clbits != b.clbits)
        return false;
    if (!has_angle(a.kind)) return true;
    return std::abs(a.angle - b.angle) <= angle_tol;
}

/// Ordered instruction list over a flat qubit/clbit index space. Program
/// order is the list order; per-qubit time order follows from the list
/// order restricted to that qubit. Immutable once built (add during
/// construction, then share freely).
class Circuit {
public:
    explicit Circuit(std::size_t num_qubits, std::size_t num_clbits = 0,
                     std::string name = "")
        : num_qubits_(num_qubits),
          num_clbits_(num_clbits),
          name_(std::move(name)) {
        if (num_qubits_ == 0)
            throw std::invalid_argument("circuit needs at least 1 qubit");
    }

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t num_clbits() const { return num_clbits_; }
    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    const std::vector<Instruction>& instructions() const {
        return instructions_;
    }
    std::size_t size() const { return instructions_.size(); }
    bool empty() const { return instructions_.empty(); }

    auto begin() const { return instructions_.begin(); }
    auto end() const { return instructions_.end(); }

    void add(Instruction instr) {
        validate(instr);
        instructions_.push_back(std::move(instr));
    }

    Circuit& operator<<(Instruction instr) {
        add(std::move(instr));
        return *this;
    }

private:
    void validate(const Instruction& instr) const {
        if (has_angle(instr.kind) && !std::isfinite(instr.angle))
            throw std::invalid_argument("gate angle must be finite");
        const std::size_t arity = gate_arity(instr.kind);
        if (instr.kind != GateKind::Barrier && instr.qubits.size() != arity)
            throw std::invalid_argument(
                std::string(gate_name(instr.kind)) + " expects " +
                std::to_string(arity) + " qubit operand(s)");
        for (std::size_t i = 0; i < instr.qubits.size(); ++i) {
            if (instr.qubits[i] >= num_qubits_)
                throw std::out_of_range(
                    "qubit index " + std::to_string(instr.qubits[i]) +
                    " out of range [0, " + std::to_string(num_qubits_) + ")");
            for (std::size_t j = i + 1; j < instr.qubits.size(); ++j)
                if (instr.qubits[i] == instr.qubits[j])
                    throw std::invalid_argument(
                        "duplicate qubit operand in instruction");
        }
        const std::size_t want_clbits =
            instr.kind == GateKind::Measure ? 1 : 0;
        if (instr.clbits.size() != want_clbits)
            throw std::invalid_argument(
                std::string(gate_name(instr.kind)) +
                (want_clbits ? " expects exactly 1 classical operand"
                             : " takes no classical operand"));
        for (auto c : instr.clbits)
            if (c >= num_clbits_)
                throw std::out_of_range(
                    "clbit index " + std::to_string(c) + " out of range [0, " +
                    std::to_string(num_clbits_) + ")");
    }

    std::size_t num_qubits_;
    std::size_t num_clbits_;
    std::string name_;
    std::vector<Instruction> instructions_;
};

inline bool circuits_equal(const Circuit& a, const Circuit& b,
                           double angle_tol = 0.0) {
    if (a.num_qubits() != b.num_qubits() || a.num_clbits() != b.num_clbits() ||
        a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!instructions_equal(a.instructions()[i], b.instructions()[i],
                                angle_tol))
            return false;
    return true;
}

/// Concatenates the instructions of `a` and `b`. Qubit counts must match;
/// classical registers merge by index (result size is the max of the two).
inline Circuit compose(const Circuit& a, const Circuit& b) {
    if (a.num_qubits() != b.num_qubits())
        throw std::invalid_argument(
            "compose: qubit count mismatch (" +
            std::to_string(a.num_qubits()) + " vs " +
            std::to_string(b.num_qubits()) + ")");
    Circuit out(a.num_qubits(), std::max(a.num_clbits(), b.num_clbits()),
                a.name());
    for (const auto& instr : a) out.add(instr);
    for (const auto& instr : b) out.add(instr);
    return out;
}

/// Shifts every classical-bit index by `offset` and widens the classical
/// register accordingly. Used to keep a chained segment's measurements on
/// their own clbits when composing attack pipelines.
inline Circuit with_clbit_offset(const Circuit& c, std::size_t offset) {
    Circuit out(c.num_qubits(), c.num_clbits() + offset, c.name());
    for (auto instr : c) {
        for (auto& cl : instr.clbits)
            cl = static_cast<std::uint32_t>(cl + offset);
        out.add(std::move(instr));
    }
    return out;
}

enum class CxRole { Control, Target };

/// The subset of a circuit that involves one specific qubit, split into
/// the single-qubit gate stream and the CX involvements. Barriers are
/// ignored; Measure/Reset set flags instead of appearing in the lists.
struct QubitSlice {
    std::uint32_t qubit = 0;
    std::vector<Instruction> single_qubit_gates;
    /// (index into the parent circuit's instruction list, role)
    std::vector<std::pair<std::size_t, CxRole>> multiqubit_roles;
    bool has_measure = false;
    bool has_reset = false;
    bool first_op_is_measure = false;
};

inline QubitSlice slice_qubit(const Circuit& c, std::uint32_t q) {
    if (q >= c.num_qubits())
        throw std::out_of_range("slice_qubit: qubit index out of range");
    QubitSlice slice;
    slice.qubit = q;
    bool seen_any = false;
    const auto& instrs = c.instructions();
    for (std::size_t i = 0; i < instrs.size(); ++i) {
        const Instruction& instr = instrs[i];
        if (instr.kind == GateKind::Barrier || !instr.touches(q)) continue;
        if (!seen_any) {
            seen_any = true;
            slice.first_op_is_measure = instr.kind == GateKind::Measure;
        }
        switch (instr.kind) {
            case GateKind::Measure: slice.has_measure = true; break;
            case GateKind::Reset: slice.has_reset = true; break;
            case GateKind::CX:
                slice.multiqubit_roles.emplace_back(
                    i, instr.qubits[0] == q ? CxRole::Control : CxRole::Target);
                break;
            default: slice.single_qubit_gates.push_back(instr); break;
        }
    }
    return slice;
}

/// Instructions touching `q` strictly after q's last Reset (or from the
/// start if it has none) and strictly before q's final Measure (or to the
/// end if it has none). Barriers are excluded. This is the window an
/// attacker's masking circuit occupies.
inline std::vector<Instruction> scan_region(const Circuit& c,
                                            std::uint32_t q) {
    if (q >= c.num_qubits())
        throw std::out_of_range("scan_region: qubit index out of range");
    const auto& instrs = c.instructions();
    std::ptrdiff_t last_reset = -1;
    std::ptrdiff_t final_measure = static_cast<std::ptrdiff_t>(instrs.size());
    for (std::size_t i = 0; i < instrs.size(); ++i) {
        if (!instrs[i].touches(q)) continue;
        if (instrs[i].kind == GateKind::Reset)
            last_reset = static_cast<std::ptrdiff_t>(i);
        else if (instrs[i].kind == GateKind::Measure)
            final_measure = static_cast<std::ptrdiff_t>(i);
    }
    std::vector<Instruction> region;
    for (std::ptrdiff_t i = last_reset + 1; i < final_measure; ++i) {
        const Instruction& instr = instrs[static_cast<std::size_t>(i)];
        if (instr.kind == GateKind::Barrier || !instr.touches(q)) continue;
        region.push_back(instr);
    }
    return region;
}

/// Layered circuit depth over non-Barrier instructions: the length of the
/// longest per-qubit chain, with multi-qubit gates synchronizing their
/// operands. Measure and Reset occupy a slot on their qubit.
inline std::size_t depth(const Circuit& c) {
    std::vector<std::size_t> level(c.num_qubits(), 0);
    for (const auto& instr : c) {
        if (instr.kind == GateKind::Barrier) continue;
        std::size_t start = 0;
        for (auto q : instr.qubits) start = std::max(start, level[q]);
        for (auto q : instr.qubits) level[q] = start + 1;
    }
    return level.empty() ? 0 : *std::max_element(level.begin(), level.end());
}

}  // namespace resetguard
