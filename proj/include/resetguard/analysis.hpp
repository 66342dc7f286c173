#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "resetguard/reset_sim.hpp"

namespace resetguard {

/// Fitted error-channel parameters for
///   E(theta) = a * (b * sin^2(theta/2) + (b - 1) * theta / pi) + c
/// with a in [-1, 1] and b, c in [0, 1].
struct SigmoidFit {
    double a = 0.0;
    double b = 1.0;
    double c = 0.0;
    double rss = std::numeric_limits<double>::infinity();
    bool converged = false;
};

struct SnrResult {
    double signal = 0.0;
    double noise_sigma = 0.0;
    double snr_db = 0.0;
};

inline double sigmoid_model(double theta, double a, double b, double c) {
    const double s = std::sin(theta / 2.0);
    return a * (b * s * s + (b - 1.0) * theta / std::numbers::pi) + c;
}

namespace analysis_detail {

inline std::array<double, 3> clamp_to_box(std::array<double, 3> p) {
    p[0] = std::clamp(p[0], -1.0, 1.0);
    p[1] = std::clamp(p[1], 0.0, 1.0);
    p[2] = std::clamp(p[2], 0.0, 1.0);
    return p;
}

inline double rss_of(std::span<const std::pair<double, double>> points,
                     const std::array<double, 3>& p) {
    double rss = 0.0;
    for (const auto& [theta, f] : points) {
        const double r = sigmoid_model(theta, p[0], p[1], p[2]) - f;
        rss += r * r;
    }
    return rss;
}

// Solves a symmetric 3x3 system by Gaussian elimination with partial
// pivoting; returns false when singular.
inline bool solve3(std::array<std::array<double, 3>, 3> m,
                   std::array<double, 3>& rhs) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        if (std::abs(m[pivot][col]) < 1e-300) return false;
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (int r = col + 1; r < 3; ++r) {
            const double factor = m[r][col] / m[col][col];
            for (int k = col; k < 3; ++k) m[r][k] -= factor * m[col][k];
            rhs[r] -= factor * rhs[col];
        }
    }
    for (int col = 2; col >= 0; --col) {
        for (int k = col + 1; k < 3; ++k) rhs[col] -= m[col][k] * rhs[k];
        rhs[col] /= m[col][col];
    }
    return true;
}

// Levenberg-damped Gauss-Newton from one start, with projection onto the
// parameter box after every accepted step.
inline std::array<double, 3> refine(
    std::span<const std::pair<double, double>> points,
    std::array<double, 3> p) {
    p = clamp_to_box(p);
    double lambda = 1e-8;
    double current = rss_of(points, p);
    for (int iter = 0; iter < 200; ++iter) {
        std::array<std::array<double, 3>, 3> jtj{};
        std::array<double, 3> jtr{};
        for (const auto& [theta, f] : points) {
            const double s = std::sin(theta / 2.0);
            const double basis = s * s;
            const double ramp = theta / std::numbers::pi;
            const std::array<double, 3> jac = {
                p[1] * basis + (p[1] - 1.0) * ramp,  // dE/da
                p[0] * (basis + ramp),               // dE/db
                1.0,                                 // dE/dc
            };
            const double r = sigmoid_model(theta, p[0], p[1], p[2]) - f;
            for (int i = 0; i < 3; ++i) {
                jtr[i] += jac[i] * r;
                for (int j = 0; j < 3; ++j) jtj[i][j] += jac[i] * jac[j];
            }
        }
        bool stepped = false;
        for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
            auto damped = jtj;
            for (int i = 0; i < 3; ++i)
                damped[i][i] += lambda * (1.0 + jtj[i][i]);
            std::array<double, 3> delta = {-jtr[0], -jtr[1], -jtr[2]};
            if (!solve3(damped, delta)) {
                lambda *= 10.0;
                continue;
            }
            const auto candidate = clamp_to_box(
                {p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]});
            const double candidate_rss = rss_of(points, candidate);
            if (candidate_rss <= current) {
                const double moved = std::max({std::abs(candidate[0] - p[0]),
                                               std::abs(candidate[1] - p[1]),
                                               std::abs(candidate[2] - p[2])});
                const double gained = current - candidate_rss;
                p = candidate;
                current = candidate_rss;
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                if (moved < 1e-15 && gained < 1e-18) return p;
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped) return p;
    }
    return p;
}

}  // namespace analysis_detail

/// Least-squares fit of the error-channel curve over the box constraints,
/// via multi-start damped Gauss-Newton (a 4x2x2 lattice of starts plus one
/// data-driven start). `converged` reports whether the best residual is
/// small relative to the data variance.
inline SigmoidFit fit_error_channel(
    std::span<const std::pair<double, double>> points,
    double converged_threshold = 0.5) {
    if (points.size() < 4)
        throw std::invalid_argument(
            "fit_error_channel needs at least 4 points");
    for (const auto& [theta, f] : points) {
        if (theta < -1e-9 || theta > std::numbers::pi + 1e-9)
            throw std::invalid_argument("theta values must lie in [0, pi]");
        if (f < -1e-9 || f > 1.0 + 1e-9)
            throw std::invalid_argument("frequencies must lie in [0, 1]");
    }

    std::vector<std::array<double, 3>> starts;
    for (double a : {-0.9, -0.3, 0.3, 0.9})
        for (double b : {0.25, 0.75})
            for (double c : {0.25, 0.75}) starts.push_back({a, b, c});
    // Data-driven start: the end-to-end rise approximates a when b ~ 1.
    double f_low = points.front().second, f_high = points.front().second;
    double t_low = points.front().first, t_high = points.front().first;
    for (const auto& [theta, f] : points) {
        if (theta < t_low) t_low = theta, f_low = f;
        if (theta > t_high) t_high = theta, f_high = f;
    }
    starts.push_back({f_high - f_low, 1.0, f_low});

    SigmoidFit best;
    for (const auto& start : starts) {
        const auto p = analysis_detail::refine(points, start);
        const double rss = analysis_detail::rss_of(points, p);
        if (rss < best.rss) {
            best.a = p[0];
            best.b = p[1];
            best.c = p[2];
            best.rss = rss;
        }
    }

    double mean = 0.0;
    for (const auto& [theta, f] : points) mean += f;
    mean /= static_cast<double>(points.size());
    double tss = 0.0;
    for (const auto& [theta, f] : points) tss += (f - mean) * (f - mean);
    best.converged = best.rss <= converged_threshold * tss + 1e-10;
    return best;
}

namespace analysis_detail {

inline double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double to_db(double signal, double sigma) {
    if (sigma == 0.0) return std::numeric_limits<double>::infinity();
    if (signal == 0.0) return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(signal / sigma);
}

inline void check_qubit(const FrequencyTable& table, std::uint32_t qubit) {
    if (qubit >= table.num_qubits)
        throw std::out_of_range("qubit index out of range for table");
}

}  // namespace analysis_detail

/// Collapses a table to (theta, mean frequency) points for one qubit,
/// averaging over every other grid dimension and over trials. This is the
/// input the sigmoid fit runs on.
inline std::vector<std::pair<double, double>> phi_averaged_points(
    const FrequencyTable& table, std::uint32_t qubit) {
    analysis_detail::check_qubit(table, qubit);
    const auto& axis = table.theta_axes[qubit];
    std::vector<double> sums(axis.size(), 0.0);
    std::vector<std::size_t> counts(axis.size(), 0);
    for (std::size_t flat = 0; flat < table.cells.size(); ++flat) {
        const std::size_t ti = table.multi_index(flat)[qubit];
        for (double f : table.cells[flat].freq1[qubit]) {
            sums[ti] += f;
            ++counts[ti];
        }
    }
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < axis.size(); ++i)
        points.emplace_back(axis[i],
                            sums[i] / static_cast<double>(counts[i]));
    return points;
}

/// Single-qubit SNR: signal is the fitted sigmoid amplitude |a|; noise is
/// the standard deviation of the 1-output frequency over (phi, trial)
/// samples at fixed theta, averaged over theta.
inline SnrResult snr_single(const SigmoidFit& fit, const FrequencyTable& table,
                            std::uint32_t qubit) {
    analysis_detail::check_qubit(table, qubit);
    const auto& axis = table.theta_axes[qubit];
    std::vector<std::vector<double>> groups(axis.size());
    for (std::size_t flat = 0; flat < table.cells.size(); ++flat) {
        const std::size_t ti = table.multi_index(flat)[qubit];
        for (double f : table.cells[flat].freq1[qubit])
            groups[ti].push_back(f);
    }
    double sigma_sum = 0.0;
    for (const auto& group : groups) {
        if (group.size() < 2)
            throw std::invalid_argument(
                "snr_single needs at least 2 samples per theta");
        sigma_sum += analysis_detail::sample_std(group);
    }
    SnrResult result;
    result.signal = std::abs(fit.a);
    result.noise_sigma = sigma_sum / static_cast<double>(groups.size());
    result.snr_db = analysis_detail::to_db(result.signal, result.noise_sigma);
    return result;
}

/// Root-mean-square gradient magnitude of the trial-averaged 1-output
/// frequency with respect to every victim theta dimension, estimated by
/// central differences (one-sided at the grid edges).
inline double rms_gradient(const FrequencyTable& table, std::uint32_t qubit) {
    analysis_detail::check_qubit(table, qubit);
    const auto sizes = table.axis_sizes();
    bool any_axis = false;
    for (std::size_t q = 0; q < table.num_qubits; ++q)
        if (sizes[q] >= 2) any_axis = true;
    if (!any_axis)
        throw std::invalid_argument(
            "rms_gradient needs at least one theta axis with 2+ points");

    std::vector<double> mean_f(table.cells.size());
    for (std::size_t flat = 0; flat < table.cells.size(); ++flat) {
        double sum = 0.0;
        for (double f : table.cells[flat].freq1[qubit]) sum += f;
        mean_f[flat] = sum / static_cast<double>(table.trials);
    }

    std::vector<std::size_t> strides(sizes.size(), 1);
    for (std::size_t d = sizes.size() - 1; d-- > 0;)
        strides[d] = strides[d + 1] * sizes[d + 1];

    double sum_sq = 0.0;
    for (std::size_t flat = 0; flat < table.cells.size(); ++flat) {
        const auto idx = table.multi_index(flat);
        double mag2 = 0.0;
        for (std::size_t d = 0; d < table.num_qubits; ++d) {
            if (sizes[d] < 2) continue;
            const auto& axis = table.theta_axes[d];
            const std::size_t i = idx[d];
            std::size_t lo = i > 0 ? i - 1 : i;
            std::size_t hi = i + 1 < sizes[d] ? i + 1 : i;
            const double df = mean_f[flat + (hi - i) * strides[d]] -
                              mean_f[flat - (i - lo) * strides[d]];
            const double dx = axis[hi] - axis[lo];
            const double g = df / dx;
            mag2 += g * g;
        }
        sum_sq += mag2;
    }
    return std::sqrt(sum_sq / static_cast<double>(table.cells.size()));
}

/// Multi-qubit SNR: signal is the RMS gradient; noise is the standard
/// deviation over trials, averaged over the grid.
inline SnrResult snr_multi(const FrequencyTable& table, std::uint32_t qubit) {
    analysis_detail::check_qubit(table, qubit);
    if (table.trials < 2)
        throw std::invalid_argument("snr_multi needs at least 2 trials");
    double sigma_sum = 0.0;
    for (const auto& cell : table.cells)
        sigma_sum += analysis_detail::sample_std(cell.freq1[qubit]);
    SnrResult result;
    result.signal = rms_gradient(table, qubit);
    result.noise_sigma = sigma_sum / static_cast<double>(table.cells.size());
    result.snr_db = analysis_detail::to_db(result.signal, result.noise_sigma);
    return result;
}

/// Standard Pearson correlation coefficient.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument(
            "pearson needs equal-length inputs of size >= 2");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson requires nonzero variance");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace resetguard
