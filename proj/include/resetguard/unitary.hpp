#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "resetguard/circuit.hpp"

namespace resetguard {

using Complex = std::complex<double>;

enum class UnitaryErrorKind {
    NonUnitaryInstruction,
    QubitCapExceeded,
    BadDimension,
};

class UnitaryError : public std::runtime_error {
public:
    UnitaryError(UnitaryErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    UnitaryErrorKind kind() const { return kind_; }

private:
    UnitaryErrorKind kind_;
};

/// Dense complex matrix of power-of-two dimension, row-major. Basis index
/// convention: bit q of the index is qubit q (qubit 0 is the least
/// significant bit).
class Unitary {
public:
    explicit Unitary(std::size_t dim)
        : dim_(dim), entries_(dim * dim, Complex(0.0, 0.0)) {
        if (dim == 0 || (dim & (dim - 1)) != 0)
            throw UnitaryError(UnitaryErrorKind::BadDimension,
                               "dimension must be a power of two");
    }

    static Unitary identity(std::size_t dim) {
        Unitary u(dim);
        for (std::size_t i = 0; i < dim; ++i) u(i, i) = 1.0;
        return u;
    }

    std::size_t dim() const { return dim_; }
    std::size_t num_qubits() const {
        std::size_t n = 0;
        for (std::size_t d = dim_; d > 1; d >>= 1) ++n;
        return n;
    }

    Complex& operator()(std::size_t row, std::size_t col) {
        return entries_[row * dim_ + col];
    }
    const Complex& operator()(std::size_t row, std::size_t col) const {
        return entries_[row * dim_ + col];
    }

    const std::vector<Complex>& entries() const { return entries_; }

    /// Left-multiplies by a single-qubit gate lifted to qubit `q`:
    /// this <- lift(g, q) * this.
    void apply_single(const Unitary& g, std::size_t q) {
        const Complex g00 = g(0, 0), g01 = g(0, 1);
        const Complex g10 = g(1, 0), g11 = g(1, 1);
        const std::size_t bit = std::size_t{1} << q;
        for (std::size_t r0 = 0; r0 < dim_; ++r0) {
            if (r0 & bit) continue;
            const std::size_t r1 = r0 | bit;
            Complex* row0 = entries_.data() + r0 * dim_;
            Complex* row1 = entries_.data() + r1 * dim_;
            for (std::size_t c = 0; c < dim_; ++c) {
                const Complex a = row0[c];
                const Complex b = row1[c];
                row0[c] = g00 * a + g01 * b;
                row1[c] = g10 * a + g11 * b;
            }
        }
    }

    /// Left-multiplies by CX(control, target): swaps the target-bit row
    /// pairs wherever the control bit is set.
    void apply_cx(std::size_t control, std::size_t target) {
        const std::size_t cbit = std::size_t{1} << control;
        const std::size_t tbit = std::size_t{1} << target;
        for (std::size_t r = 0; r < dim_; ++r) {
            if ((r & cbit) == 0 || (r & tbit)) continue;
            Complex* row0 = entries_.data() + r * dim_;
            Complex* row1 = entries_.data() + (r | tbit) * dim_;
            for (std::size_t c = 0; c < dim_; ++c) std::swap(row0[c], row1[c]);
        }
    }

    Unitary multiply(const Unitary& rhs) const {
        if (dim_ != rhs.dim_)
            throw UnitaryError(UnitaryErrorKind::BadDimension,
                               "dimension mismatch in multiply");
        Unitary out(dim_);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t k = 0; k < dim_; ++k) {
                const Complex v = (*this)(r, k);
                if (v == Complex{}) continue;
                for (std::size_t c = 0; c < dim_; ++c)
                    out(r, c) += v * rhs(k, c);
            }
        return out;
    }

    Unitary adjoint() const {
        Unitary out(dim_);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c)
                out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    double max_abs_diff(const Unitary& other) const {
        double m = 0.0;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            m = std::max(m, std::abs(entries_[i] - other.entries_[i]));
        return m;
    }

private:
    std::size_t dim_;
    std::vector<Complex> entries_;
};

/// Matrix of one gate. Single-qubit kinds give the standard 2x2 matrices;
/// CX gives the textbook 4x4 with the first operand (control) as the more
/// significant bit.
inline Unitary gate_matrix(GateKind kind, double angle = 0.0) {
    using std::numbers::sqrt2;
    Unitary u(kind == GateKind::CX ? 4 : 2);
    switch (kind) {
        case GateKind::I:
            u(0, 0) = 1.0;
            u(1, 1) = 1.0;
            break;
        case GateKind::X:
            u(0, 1) = 1.0;
            u(1, 0) = 1.0;
            break;
        case GateKind::SX:
            u(0, 0) = Complex(0.5, 0.5);
            u(0, 1) = Complex(0.5, -0.5);
            u(1, 0) = Complex(0.5, -0.5);
            u(1, 1) = Complex(0.5, 0.5);
            break;
        case GateKind::H:
            u(0, 0) = 1.0 / sqrt2;
            u(0, 1) = 1.0 / sqrt2;
            u(1, 0) = 1.0 / sqrt2;
            u(1, 1) = -1.0 / sqrt2;
            break;
        case GateKind::RZ:
            u(0, 0) = std::polar(1.0, -angle / 2.0);
            u(1, 1) = std::polar(1.0, angle / 2.0);
            break;
        case GateKind::RX: {
            const double c = std::cos(angle / 2.0);
            const double s = std::sin(angle / 2.0);
            u(0, 0) = c;
            u(0, 1) = Complex(0.0, -s);
            u(1, 0) = Complex(0.0, -s);
            u(1, 1) = c;
            break;
        }
        case GateKind::CX:
            u(0, 0) = 1.0;
            u(1, 1) = 1.0;
            u(2, 3) = 1.0;
            u(3, 2) = 1.0;
            break;
        default:
            throw UnitaryError(
                UnitaryErrorKind::NonUnitaryInstruction,
                std::string(gate_name(kind)) + " has no unitary matrix");
    }
    return u;
}

namespace unitary_detail {

// Construction sanity check. Full U*U^dagger comparison is cubic in the
// dimension, so past 256 it degrades to column norms plus sampled
// orthogonality probes.
inline void check_unitarity(const Unitary& u, double tol) {
    const std::size_t dim = u.dim();
    if (dim <= 256) {
        const Unitary product = u.multiply(u.adjoint());
        double frob = 0.0;
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) {
                const Complex want = r == c ? Complex(1.0) : Complex(0.0);
                frob += std::norm(product(r, c) - want);
            }
        if (std::sqrt(frob) > tol)
            throw UnitaryError(UnitaryErrorKind::NonUnitaryInstruction,
                               "constructed matrix failed unitarity check");
        return;
    }
    for (std::size_t c = 0; c < dim; ++c) {
        double norm2 = 0.0;
        Complex dot_next{};
        for (std::size_t r = 0; r < dim; ++r) {
            norm2 += std::norm(u(r, c));
            dot_next += std::conj(u(r, c)) * u(r, (c + 1) % dim);
        }
        if (std::abs(norm2 - 1.0) > tol || std::abs(dot_next) > tol)
            throw UnitaryError(UnitaryErrorKind::NonUnitaryInstruction,
                               "constructed matrix failed unitarity check");
    }
}

}  // namespace unitary_detail

/// Full-circuit operator: the product of lifted gate matrices in program
/// order (later instructions multiply on the left). The circuit must
/// contain only unitary gates; Barrier is skipped. The matrix is dense,
/// so construction refuses circuits above `qubit_cap` qubits.
inline Unitary circuit_unitary(const Circuit& c, std::size_t qubit_cap = 12) {
    if (c.num_qubits() > qubit_cap)
        throw UnitaryError(UnitaryErrorKind::QubitCapExceeded,
                           "circuit has " + std::to_string(c.num_qubits()) +
                               " qubits, cap is " + std::to_string(qubit_cap));
    Unitary u = Unitary::identity(std::size_t{1} << c.num_qubits());
    for (const auto& instr : c) {
        if (instr.kind == GateKind::Barrier) continue;
        if (!is_unitary_gate(instr.kind))
            throw UnitaryError(
                UnitaryErrorKind::NonUnitaryInstruction,
                std::string(gate_name(instr.kind)) +
                    " instruction has no unitary representation");
        if (instr.kind == GateKind::CX)
            u.apply_cx(instr.qubits[0], instr.qubits[1]);
        else
            u.apply_single(gate_matrix(instr.kind, instr.angle),
                           instr.qubits[0]);
    }
    unitary_detail::check_unitarity(u, 1e-9);
    return u;
}

/// Identity test. With `up_to_global_phase`, true iff u = e^{i a} * I for
/// some a: the diagonal must equal u(0,0) (a unit-modulus scalar) and all
/// off-diagonal entries must vanish, entrywise within `tol`.
inline bool is_identity(const Unitary& u, double tol,
                        bool up_to_global_phase) {
    const Complex lambda = up_to_global_phase ? u(0, 0) : Complex(1.0);
    if (std::abs(std::abs(lambda) - 1.0) > tol) return false;
    for (std::size_t r = 0; r < u.dim(); ++r)
        for (std::size_t c = 0; c < u.dim(); ++c) {
            const Complex want = r == c ? lambda : Complex(0.0);
            if (std::abs(u(r, c) - want) > tol) return false;
        }
    return true;
}

/// Reduces an angle to [0, 2*pi).
inline double wrap_angle(double theta) {
    const double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, two_pi);
    if (t < 0) t += two_pi;
    return t;
}

/// Folds an angle to [0, pi]: RX(theta) and RX(2*pi - theta) have the same
/// 1-output statistics, so the flag band is stated on [0, pi].
inline double fold_angle(double theta) {
    const double t = wrap_angle(theta);
    return std::min(t, 2.0 * std::numbers::pi - t);
}

/// If u equals e^{i a} * RX(theta) for some global phase, returns theta in
/// [0, 2*pi); otherwise empty. The magnitude pattern pins theta up to the
/// theta <-> 2*pi - theta ambiguity; reconstructing both candidates and
/// comparing entrywise resolves it. The identity returns theta = 0.
inline std::optional<double> effective_rx(const Unitary& u, double tol) {
    if (u.dim() != 2)
        throw UnitaryError(UnitaryErrorKind::BadDimension,
                           "effective_rx expects a 2x2 matrix");
    const double base = 2.0 * std::atan2(std::abs(u(0, 1)), std::abs(u(0, 0)));
    const double candidates[2] = {base, wrap_angle(2.0 * std::numbers::pi -
                                                   base)};
    for (double theta : candidates) {
        const double c = std::cos(theta / 2.0);
        const double s = std::sin(theta / 2.0);
        // Global phase from the larger-magnitude reference entry.
        Complex phase;
        if (std::abs(c) >= s)
            phase = u(0, 0) / Complex(c);
        else
            phase = u(0, 1) / Complex(0.0, -s);
        if (std::abs(std::abs(phase) - 1.0) > tol) continue;
        const Complex diag = phase * c;
        const Complex off = phase * Complex(0.0, -s);
        if (std::abs(u(0, 0) - diag) <= tol && std::abs(u(1, 1) - diag) <= tol &&
            std::abs(u(0, 1) - off) <= tol && std::abs(u(1, 0) - off) <= tol)
            return wrap_angle(theta);
    }
    return std::nullopt;
}

/// Product of the single-qubit gates of a per-qubit instruction stream, in
/// program order. Non-single-qubit instructions must be filtered out by
/// the caller.
inline Unitary single_qubit_product(std::span<const Instruction> gates) {
    Unitary u = Unitary::identity(2);
    for (const auto& instr : gates) {
        if (!is_unitary_gate(instr.kind) || instr.kind == GateKind::CX)
            throw UnitaryError(UnitaryErrorKind::NonUnitaryInstruction,
                               "single_qubit_product expects 1-qubit gates");
        u = gate_matrix(instr.kind, instr.angle).multiply(u);
    }
    return u;
}

}  // namespace resetguard
