#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "resetguard/circuit.hpp"
#include "resetguard/unitary.hpp"

namespace resetguard {

enum class SimErrorKind { NonUnitaryMasking, CapExceeded, BadSpec };

class SimError : public std::runtime_error {
public:
    SimError(SimErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    SimErrorKind kind() const { return kind_; }

private:
    SimErrorKind kind_;
};

/// Reset-channel and final-readout confusion probabilities.
///
/// The defaults tie the channel to reported ibmq_jakarta readout rates:
/// measuring 0 from |1> at 0.0340 and measuring 1 from |0> at 0.0096. The
/// higher-energy |1> state is the harder one to reset, hence r1 >= r0.
struct ResetChannelParams {
    double r1 = 0.0340;           // P(post-reset |1>) given collapse to 1
    double r0 = 0.0096;           // P(post-reset |1>) given collapse to 0
    double eta_meas_10 = 0.0340;  // P(read 0) given |1> at final readout
    double eta_meas_01 = 0.0096;  // P(read 1) given |0> at final readout

    void validate() const {
        for (double p : {r1, r0, eta_meas_10, eta_meas_01})
            if (!(p >= 0.0 && p <= 1.0))
                throw SimError(SimErrorKind::BadSpec,
                               "channel probabilities must lie in [0, 1]");
    }
};

enum class ResetMode {
    Channel,        // phenomenological confusion channel per reset
    MeasureXIdeal,  // exact measurement + conditional X (noiseless reset)
};

/// One sweep condition: victim angle grids, reset count, masking circuit
/// and shot accounting. The grid is the cartesian product of every
/// per-qubit theta axis followed by every per-qubit phi axis.
struct ExperimentSpec {
    std::vector<std::vector<double>> victim_thetas;  // per-qubit axes
    std::vector<std::vector<double>> victim_phis;    // per-qubit axes
    std::size_t num_resets = 0;
    Circuit masking{1};
    std::size_t shots = 4096;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    ResetMode reset_mode = ResetMode::Channel;
};

struct GridCell {
    std::vector<double> thetas;  // per qubit
    std::vector<double> phis;    // per qubit
    /// 1-output frequency, indexed [qubit][trial].
    std::vector<std::vector<double>> freq1;
};

struct FrequencyTable {
    std::vector<std::vector<double>> theta_axes;
    std::vector<std::vector<double>> phi_axes;
    std::size_t num_qubits = 0;
    std::size_t shots = 0;
    std::size_t trials = 0;
    std::vector<GridCell> cells;

    std::vector<std::size_t> axis_sizes() const {
        std::vector<std::size_t> sizes;
        for (const auto& a : theta_axes) sizes.push_back(a.size());
        for (const auto& a : phi_axes) sizes.push_back(a.size());
        return sizes;
    }

    /// Decodes a flat cell index into per-axis indices (theta axes first,
    /// last axis fastest).
    std::vector<std::size_t> multi_index(std::size_t flat) const {
        const auto sizes = axis_sizes();
        std::vector<std::size_t> idx(sizes.size(), 0);
        for (std::size_t d = sizes.size(); d-- > 0;) {
            idx[d] = flat % sizes[d];
            flat /= sizes[d];
        }
        return idx;
    }
};

/// Born-rule probability of reading 1 from the state RX(theta)|0>.
inline double born_p1(double theta) {
    const double s = std::sin(theta / 2.0);
    return s * s;
}

/// One pass of the reset confusion channel: a qubit that collapsed to 1
/// stays |1> with probability r1, one that collapsed to 0 ends in |1> with
/// probability r0. Affine in the input probability.
inline double apply_reset_channel(double p1, const ResetChannelParams& params) {
    return p1 * params.r1 + (1.0 - p1) * params.r0;
}

namespace sim_detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream per (grid cell, trial), derived from the user seed by
/// counter so results do not depend on scheduling.
inline std::mt19937_64 cell_stream(std::uint64_t seed, std::uint64_t cell,
                                   std::uint64_t trial) {
    const std::uint64_t s =
        splitmix64(splitmix64(splitmix64(seed) ^ (cell + 1)) ^ (trial + 1));
    return std::mt19937_64(s);
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Masking circuits are unitary gates plus final measurements; anything
// else cannot be folded into a single operator.
inline Circuit unitary_part_of_masking(const Circuit& masking) {
    const auto& instrs = masking.instructions();
    Circuit sub(masking.num_qubits(), 0, masking.name());
    for (std::size_t i = 0; i < instrs.size(); ++i) {
        const Instruction& instr = instrs[i];
        if (instr.kind == GateKind::Barrier) continue;
        if (instr.kind == GateKind::Reset)
            throw SimError(SimErrorKind::NonUnitaryMasking,
                           "masking circuit contains a reset");
        if (instr.kind == GateKind::Measure) {
            for (std::size_t j = i + 1; j < instrs.size(); ++j) {
                if (instrs[j].kind == GateKind::Barrier) continue;
                if (instrs[j].touches(instr.qubits[0]))
                    throw SimError(SimErrorKind::NonUnitaryMasking,
                                   "masking circuit measures a qubit "
                                   "mid-circuit");
            }
            continue;
        }
        sub.add(instr);
    }
    return sub;
}

/// Cumulative output distributions of the masking operator, one per input
/// basis state, built lazily because reset-heavy runs only ever visit a
/// few input states.
class ColumnSampler {
public:
    ColumnSampler(const Unitary* u, std::size_t dim) : u_(u), dim_(dim) {}

    std::size_t sample(std::size_t input_state, double u01) {
        if (u_ == nullptr) return input_state;  // identity masking
        const std::vector<double>& cum = column(input_state);
        const auto it = std::upper_bound(cum.begin(), cum.end(), u01);
        const auto idx = static_cast<std::size_t>(it - cum.begin());
        return std::min(idx, dim_ - 1);
    }

private:
    const std::vector<double>& column(std::size_t b) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(b);
            if (it != cache_.end()) return it->second;
        }
        std::vector<double> cum(dim_);
        double acc = 0.0;
        for (std::size_t r = 0; r < dim_; ++r) {
            acc += std::norm((*u_)(r, b));
            cum[r] = acc;
        }
        cum.back() = 1.0;  // absorb rounding so sampling never overruns
        std::lock_guard<std::mutex> lock(mutex_);
        return cache_.emplace(b, std::move(cum)).first->second;
    }

    const Unitary* u_;
    std::size_t dim_;
    std::mutex mutex_;
    std::unordered_map<std::size_t, std::vector<double>> cache_;
};

}  // namespace sim_detail

/// Runs the victim -> resets -> masking -> measurement pipeline per shot:
///
///   1. each qubit is prepared with RX(theta) RZ(phi) from |0> and the
///      victim's end-of-circuit measurement collapses it (the record is
///      discarded, so no readout confusion applies to it);
///   2. num_resets channel iterations follow: in Channel mode the post-
///      reset state is |1> with probability r1 or r0 depending on the
///      collapse outcome; in MeasureXIdeal mode the conditional X lands
///      exactly in |0>;
///   3. the masking operator maps the resulting basis state to the final
///      measurement distribution, and each readout bit is flipped with the
///      eta confusion probabilities.
///
/// Deterministic for a given seed; cells of the grid run in parallel.
inline FrequencyTable simulate(const ExperimentSpec& spec,
                               const ResetChannelParams& params,
                               unsigned threads = 0) {
    params.validate();
    const std::size_t n = spec.masking.num_qubits();
    if (n > 12)
        throw SimError(SimErrorKind::CapExceeded,
                       "simulate caps dense masking evolution at 12 qubits");
    if (spec.victim_thetas.size() != n || spec.victim_phis.size() != n)
        throw SimError(SimErrorKind::BadSpec,
                       "victim angle grids must match masking qubit count");
    for (const auto& axis : spec.victim_thetas)
        if (axis.empty())
            throw SimError(SimErrorKind::BadSpec, "empty theta axis");
    for (const auto& axis : spec.victim_phis)
        if (axis.empty())
            throw SimError(SimErrorKind::BadSpec, "empty phi axis");
    if (spec.shots < 1 || spec.trials < 1)
        throw SimError(SimErrorKind::BadSpec, "shots and trials must be >= 1");

    const Circuit unitary_part =
        sim_detail::unitary_part_of_masking(spec.masking);
    std::optional<Unitary> op;
    if (!unitary_part.empty()) op = circuit_unitary(unitary_part, 12);
    sim_detail::ColumnSampler sampler(op ? &*op : nullptr, std::size_t{1} << n);

    FrequencyTable table;
    table.theta_axes = spec.victim_thetas;
    table.phi_axes = spec.victim_phis;
    table.num_qubits = n;
    table.shots = spec.shots;
    table.trials = spec.trials;

    const auto sizes = table.axis_sizes();
    std::size_t num_cells = 1;
    for (auto s : sizes) num_cells *= s;
    table.cells.resize(num_cells);

    auto run_cell = [&](std::size_t flat) {
        const auto idx = table.multi_index(flat);
        GridCell& cell = table.cells[flat];
        cell.thetas.resize(n);
        cell.phis.resize(n);
        for (std::size_t q = 0; q < n; ++q) {
            cell.thetas[q] = spec.victim_thetas[q][idx[q]];
            cell.phis[q] = spec.victim_phis[q][idx[n + q]];
        }
        std::vector<double> p_victim(n);
        for (std::size_t q = 0; q < n; ++q)
            p_victim[q] = born_p1(cell.thetas[q]);

        cell.freq1.assign(n, std::vector<double>(spec.trials, 0.0));
        std::vector<std::size_t> count1(n);
        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
            auto rng = sim_detail::cell_stream(spec.seed, flat, trial);
            std::fill(count1.begin(), count1.end(), std::size_t{0});
            for (std::size_t shot = 0; shot < spec.shots; ++shot) {
                std::size_t basis = 0;
                for (std::size_t q = 0; q < n; ++q) {
                    // Victim collapse: RZ(phi) leaves the Born probability
                    // untouched, so the outcome is Bernoulli(sin^2(theta/2)).
                    const bool one =
                        sim_detail::uniform01(rng) < p_victim[q];
                    basis |= std::size_t{one} << q;
                }
                for (std::size_t round = 0; round < spec.num_resets; ++round) {
                    if (spec.reset_mode == ResetMode::MeasureXIdeal) {
                        // The measurement of a basis state is deterministic
                        // and the conditional X always lands in |0>.
                        basis = 0;
                        continue;
                    }
                    std::size_t next = 0;
                    for (std::size_t q = 0; q < n; ++q) {
                        const bool was_one = (basis >> q) & 1;
                        const double p = was_one ? params.r1 : params.r0;
                        const bool one = sim_detail::uniform01(rng) < p;
                        next |= std::size_t{one} << q;
                    }
                    basis = next;
                }
                const std::size_t readout =
                    sampler.sample(basis, sim_detail::uniform01(rng));
                for (std::size_t q = 0; q < n; ++q) {
                    bool bit = (readout >> q) & 1;
                    const double flip =
                        bit ? params.eta_meas_10 : params.eta_meas_01;
                    if (sim_detail::uniform01(rng) < flip) bit = !bit;
                    count1[q] += bit;
                }
            }
            for (std::size_t q = 0; q < n; ++q)
                cell.freq1[q][trial] = static_cast<double>(count1[q]) /
                                       static_cast<double>(spec.shots);
        }
    };

    unsigned workers = threads != 0 ? threads
                                    : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, num_cells));
    if (workers <= 1) {
        for (std::size_t flat = 0; flat < num_cells; ++flat) run_cell(flat);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t flat = next.fetch_add(1); flat < num_cells;
                     flat = next.fetch_add(1))
                    run_cell(flat);
            });
        for (auto& t : pool) t.join();
    }
    return table;
}

namespace sim_detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace sim_detail

/// CSV with one row per (grid cell, qubit, trial):
/// qubit,theta_0..theta_{n-1},phi_0..phi_{n-1},trial,freq1,shots
inline std::string table_to_csv(const FrequencyTable& table) {
    std::string out = "qubit";
    for (std::size_t q = 0; q < table.num_qubits; ++q)
        out += ",theta_" + std::to_string(q);
    for (std::size_t q = 0; q < table.num_qubits; ++q)
        out += ",phi_" + std::to_string(q);
    out += ",trial,freq1,shots\n";
    for (const auto& cell : table.cells) {
        for (std::size_t q = 0; q < table.num_qubits; ++q) {
            for (std::size_t trial = 0; trial < table.trials; ++trial) {
                out += std::to_string(q);
                for (double v : cell.thetas)
                    out += "," + sim_detail::format_double(v);
                for (double v : cell.phis)
                    out += "," + sim_detail::format_double(v);
                out += "," + std::to_string(trial);
                out += "," + sim_detail::format_double(cell.freq1[q][trial]);
                out += "," + std::to_string(table.shots);
                out += "\n";
            }
        }
    }
    return out;
}

inline nlohmann::json table_to_json(const FrequencyTable& table) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : table.cells)
        cells.push_back({{"thetas", cell.thetas},
                         {"phis", cell.phis},
                         {"freq1", cell.freq1}});
    return nlohmann::json{
        {"theta_axes", table.theta_axes}, {"phi_axes", table.phi_axes},
        {"num_qubits", table.num_qubits}, {"shots", table.shots},
        {"trials", table.trials},         {"cells", std::move(cells)},
    };
}

}  // namespace resetguard
