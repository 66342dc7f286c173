#pragma once

#include <chrono>
#include <cstdio>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "resetguard/circuit.hpp"
#include "resetguard/unitary.hpp"

namespace resetguard {

enum class QubitCategory {
    BareMeasure,
    IdentityBeforeMeasure,
    EffectiveRxFlagged,
    EffectiveRxOk,
    ExposedControlOnly,
    SingleQubitComplex,
    MultiqubitTargetInvolved,
    NoMeasurement,
};

inline const char* category_name(QubitCategory category) {
    switch (category) {
        case QubitCategory::BareMeasure: return "BARE_MEASURE";
        case QubitCategory::IdentityBeforeMeasure:
            return "IDENTITY_BEFORE_MEASURE";
        case QubitCategory::EffectiveRxFlagged: return "EFFECTIVE_RX_FLAGGED";
        case QubitCategory::EffectiveRxOk: return "EFFECTIVE_RX_OK";
        case QubitCategory::ExposedControlOnly: return "EXPOSED_CONTROL_ONLY";
        case QubitCategory::SingleQubitComplex: return "SINGLE_QUBIT_COMPLEX";
        case QubitCategory::MultiqubitTargetInvolved:
            return "MULTIQUBIT_TARGET_INVOLVED";
        case QubitCategory::NoMeasurement: return "NO_MEASUREMENT";
    }
    return "?";
}

enum class Verdict { Suspicious, Noted, Clean };

inline const char* verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::Suspicious: return "SUSPICIOUS";
        case Verdict::Noted: return "NOTED";
        case Verdict::Clean: return "CLEAN";
    }
    return "?";
}

struct ScanConfig {
    double theta_low = std::numbers::pi / 4.0;
    double theta_high = 3.0 * std::numbers::pi / 4.0;
    double tol = 1e-6;
    std::size_t full_matrix_cap = 12;
    bool attempt_full_matrix = true;

    void validate() const {
        if (!(theta_low >= 0.0) || !(theta_low < theta_high) ||
            !(theta_high <= std::numbers::pi))
            throw std::invalid_argument(
                "scan config requires 0 <= theta_low < theta_high <= pi");
        if (!(tol > 0.0))
            throw std::invalid_argument("scan tolerance must be positive");
    }
};

struct QubitClassification {
    std::uint32_t qubit = 0;
    QubitCategory category = QubitCategory::NoMeasurement;
    std::optional<double> effective_theta;
    std::vector<std::string> notes;
};

struct ScanReport {
    std::string circuit_name;
    std::vector<QubitClassification> per_qubit;
    Verdict verdict = Verdict::Clean;
    double elapsed_seconds = 0.0;
    ScanConfig config;
};

inline bool is_suspicious_category(QubitCategory category) {
    return category == QubitCategory::BareMeasure ||
           category == QubitCategory::IdentityBeforeMeasure ||
           category == QubitCategory::EffectiveRxFlagged;
}

inline bool is_noted_category(QubitCategory category) {
    return category == QubitCategory::ExposedControlOnly ||
           category == QubitCategory::EffectiveRxOk;
}

namespace scanner_detail {

inline std::string format_theta(double theta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", theta);
    return buf;
}

}  // namespace scanner_detail

/// Classifies one qubit from its reset-to-measurement scan region:
///   1. qubits never measured are NO_MEASUREMENT (nothing is exfiltrated);
///   2. an empty region whose first operation is the measurement itself is
///      the prior-work attack shape, BARE_MEASURE;
///   3. a CX target in the region couples the qubit to others,
///      MULTIQUBIT_TARGET_INVOLVED;
///   4. otherwise the single-qubit gates form a 2x2 product (CX controls
///      are transparent to it but recorded): identity and effective-RX
///      equivalences decide the remaining categories, flagging folded
///      rotations outside the open band (theta_low, theta_high).
inline QubitClassification classify_qubit(const Circuit& c, std::uint32_t q,
                                          const ScanConfig& cfg) {
    cfg.validate();
    QubitClassification result;
    result.qubit = q;

    const QubitSlice slice = slice_qubit(c, q);
    if (!slice.has_measure) {
        result.category = QubitCategory::NoMeasurement;
        return result;
    }

    const std::vector<Instruction> region = scan_region(c, q);
    if (region.empty() && slice.first_op_is_measure) {
        result.category = QubitCategory::BareMeasure;
        result.notes.push_back("measurement with no preceding operation");
        return result;
    }

    bool has_control = false;
    bool has_interior_measure = false;
    std::vector<Instruction> single_gates;
    for (const auto& instr : region) {
        if (instr.kind == GateKind::CX) {
            if (instr.qubits[1] == q) {
                result.category = QubitCategory::MultiqubitTargetInvolved;
                return result;
            }
            has_control = true;
        } else if (instr.kind == GateKind::Measure) {
            has_interior_measure = true;
        } else {
            single_gates.push_back(instr);
        }
    }
    if (has_control)
        result.notes.push_back("appears as CX control in scan region");

    if (has_interior_measure) {
        // A mid-region measurement breaks the unitary reduction; report the
        // qubit as not reducible rather than pretend the product is valid.
        result.notes.push_back("scan region contains an interior measurement");
        result.category = has_control ? QubitCategory::ExposedControlOnly
                                      : QubitCategory::SingleQubitComplex;
        return result;
    }

    const Unitary u = single_qubit_product(single_gates);
    if (is_identity(u, cfg.tol, /*up_to_global_phase=*/true)) {
        result.category = QubitCategory::IdentityBeforeMeasure;
        result.effective_theta = 0.0;
        return result;
    }
    if (const auto theta = effective_rx(u, cfg.tol)) {
        const double folded = fold_angle(*theta);
        // Band edges count as inside: the flag band is open, and recovered
        // angles carry rounding of order tol.
        const bool flagged = folded < cfg.theta_low - cfg.tol ||
                             folded > cfg.theta_high + cfg.tol;
        result.category = flagged ? QubitCategory::EffectiveRxFlagged
                                  : QubitCategory::EffectiveRxOk;
        result.effective_theta = folded;
        result.notes.push_back("effective RX rotation of " +
                               scanner_detail::format_theta(folded) + " rad");
        return result;
    }
    result.category = has_control ? QubitCategory::ExposedControlOnly
                                  : QubitCategory::SingleQubitComplex;
    return result;
}

namespace scanner_detail {

// Instruction indices belonging to any qubit's scan region, provided the
// union forms a clean unitary block: every instruction must lie inside the
// region of each qubit it touches, and no Measure/Reset may appear inside.
// Returns empty when the full-matrix check is not applicable.
inline std::optional<std::vector<std::size_t>> union_region_block(
    const Circuit& c) {
    const auto& instrs = c.instructions();
    const std::size_t n = instrs.size();
    std::vector<std::ptrdiff_t> last_reset(c.num_qubits(), -1);
    std::vector<std::ptrdiff_t> final_measure(c.num_qubits(),
                                              static_cast<std::ptrdiff_t>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (auto q : instrs[i].qubits) {
            if (instrs[i].kind == GateKind::Reset)
                last_reset[q] = static_cast<std::ptrdiff_t>(i);
            else if (instrs[i].kind == GateKind::Measure)
                final_measure[q] = static_cast<std::ptrdiff_t>(i);
        }
    std::vector<std::size_t> block;
    for (std::size_t i = 0; i < n; ++i) {
        const Instruction& instr = instrs[i];
        if (instr.kind == GateKind::Barrier) continue;
        bool inside_any = false;
        bool outside_any = false;
        for (auto q : instr.qubits) {
            const auto pos = static_cast<std::ptrdiff_t>(i);
            const bool inside =
                pos > last_reset[q] && pos < final_measure[q];
            (inside ? inside_any : outside_any) = true;
        }
        if (!inside_any) continue;
        if (outside_any) return std::nullopt;  // straddles a region boundary
        if (!is_unitary_gate(instr.kind)) return std::nullopt;
        block.push_back(i);
    }
    return block;
}

}  // namespace scanner_detail

/// Scans a whole circuit: classifies every qubit, and for circuits small
/// enough additionally builds the full matrix of the combined scan regions.
/// When that matrix is the identity (up to global phase) every measured,
/// not-yet-suspicious qubit is upgraded to IDENTITY_BEFORE_MEASURE -- the
/// per-qubit heuristics cannot see identities hidden behind entangling
/// gates. The verdict is the maximum severity over qubits.
inline ScanReport scan(const Circuit& c, const ScanConfig& cfg = {}) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    ScanReport report;
    report.circuit_name = c.name();
    report.config = cfg;
    for (std::uint32_t q = 0; q < c.num_qubits(); ++q)
        report.per_qubit.push_back(classify_qubit(c, q, cfg));

    if (cfg.attempt_full_matrix && c.num_qubits() <= cfg.full_matrix_cap) {
        if (const auto block = scanner_detail::union_region_block(c)) {
            Circuit sub(c.num_qubits(), 0, c.name());
            for (auto i : *block) sub.add(c.instructions()[i]);
            const Unitary u = circuit_unitary(sub, cfg.full_matrix_cap);
            if (is_identity(u, cfg.tol, /*up_to_global_phase=*/true)) {
                for (auto& qc : report.per_qubit) {
                    if (qc.category == QubitCategory::NoMeasurement ||
                        is_suspicious_category(qc.category))
                        continue;
                    qc.category = QubitCategory::IdentityBeforeMeasure;
                    qc.effective_theta = 0.0;
                    qc.notes.push_back(
                        "full-circuit matrix of the scan regions is the "
                        "identity");
                }
            }
        }
    }

    report.verdict = Verdict::Clean;
    for (const auto& qc : report.per_qubit) {
        if (is_suspicious_category(qc.category)) {
            report.verdict = Verdict::Suspicious;
            break;
        }
        if (is_noted_category(qc.category)) report.verdict = Verdict::Noted;
    }

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return report;
}

inline nlohmann::json report_to_json(const ScanReport& report) {
    nlohmann::json qubits = nlohmann::json::array();
    for (const auto& qc : report.per_qubit) {
        nlohmann::json entry = {
            {"qubit", qc.qubit},
            {"category", category_name(qc.category)},
            {"effective_theta", nullptr},
            {"notes", qc.notes},
        };
        if (qc.effective_theta) entry["effective_theta"] = *qc.effective_theta;
        qubits.push_back(std::move(entry));
    }
    return nlohmann::json{
        {"circuit_name", report.circuit_name},
        {"verdict", verdict_name(report.verdict)},
        {"elapsed_seconds", report.elapsed_seconds},
        {"qubits", std::move(qubits)},
        {"config",
         {{"theta_low", report.config.theta_low},
          {"theta_high", report.config.theta_high},
          {"tol", report.config.tol}}},
    };
}

inline std::string report_to_text(const ScanReport& report) {
    std::string out;
    out += report.circuit_name.empty() ? "(unnamed circuit)"
                                       : report.circuit_name;
    out += ": ";
    out += verdict_name(report.verdict);
    out += "\n";
    for (const auto& qc : report.per_qubit) {
        out += "  q[" + std::to_string(qc.qubit) + "] " +
               category_name(qc.category);
        if (qc.effective_theta)
            out += " (theta=" +
                   scanner_detail::format_theta(*qc.effective_theta) + ")";
        for (const auto& note : qc.notes) out += "; " + note;
        out += "\n";
    }
    return out;
}

}  // namespace resetguard
