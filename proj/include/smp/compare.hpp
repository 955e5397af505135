#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "smp/quantities.hpp"
#include "smp/simulation.hpp"

namespace smp {

struct Comparison {
    std::string quantity; // "P", "G", "v", "M"
    unsigned k = 0;
    double t = 0.0;
    std::size_t target = 0;
    double analytic = 0.0;
    double simulated = 0.0;
    double std_error = 0.0;
    /// |simulated - analytic| beyond the inversion allowance, in standard errors.
    double deviation = 0.0;
};

struct ComparisonReport {
    std::size_t start_state = 0;
    std::size_t trajectories = 0;
    std::vector<Comparison> rows;
    double max_deviation = 0.0;

    const Comparison& worst() const {
        return *std::max_element(rows.begin(), rows.end(),
                                 [](const Comparison& a, const Comparison& b) { return a.deviation < b.deviation; });
    }
};

/// Absolute allowance for inversion error when scoring deviations.
inline constexpr double kInversionAllowance = 1e-6;

/// Deviation in standard errors. For indicator quantities the standard error
/// is the binomial one at the analytic value (the estimator's spread if the
/// analytic value is right). For M it is the sample standard error, floored by
/// the smallest spread an integer-valued count with the analytic mean can
/// have: Var N >= f(1 - f), f = frac(E N).
inline double deviation_in_se(double analytic, double simulated, double std_error) {
    const double gap = std::max(0.0, std::abs(simulated - analytic) - kInversionAllowance);
    if (gap == 0.0) return 0.0;
    if (!(std_error > 0.0)) return std::numeric_limits<double>::infinity();
    return gap / std_error;
}

/// Solves P, G, v(0..k_max) and M analytically from `start` and checks them
/// against a Monte Carlo run of `n_traj` trajectories.
inline ComparisonReport compare(const SmpModel& model, std::size_t start, std::span<const double> times,
                                std::size_t n_traj, std::uint64_t seed, unsigned k_max = 2,
                                const SolveOptions& options = {}) {
    std::vector<QuantityRequest> requests = {{Quantity::P}, {Quantity::G}, {Quantity::M}};
    for (unsigned k = 0; k <= k_max; ++k) requests.push_back({Quantity::v, k});
    const auto analytic = solve(model, times, requests, options);
    const auto sim = estimate_all(model, start, times, n_traj, seed, k_max, options.threads);

    ComparisonReport report;
    report.start_state = start;
    report.trajectories = n_traj;
    const double N = static_cast<double>(n_traj);
    auto add = [&](const char* name, unsigned k, const QuantityResult& a,
                   const std::vector<std::vector<Estimate>>& est, bool indicator) {
        for (std::size_t ti = 0; ti < times.size(); ++ti)
            for (std::size_t j = 0; j < model.size(); ++j) {
                Comparison c;
                c.quantity = name;
                c.k = k;
                c.t = times[ti];
                c.target = j;
                c.analytic = a(ti, start, j);
                c.simulated = est[ti][j].value;
                if (indicator) {
                    const double p = std::clamp(c.analytic, 0.0, 1.0);
                    c.std_error = std::sqrt(p * (1.0 - p) / N);
                } else {
                    const double mean = std::max(0.0, c.analytic);
                    const double f = mean - std::floor(mean);
                    c.std_error = std::max(est[ti][j].std_error, std::sqrt(f * (1.0 - f) / N));
                }
                c.deviation = deviation_in_se(c.analytic, c.simulated, c.std_error);
                report.max_deviation = std::max(report.max_deviation, c.deviation);
                report.rows.push_back(c);
            }
    };
    add("P", 0, analytic[0], sim.P, true);
    add("G", 0, analytic[1], sim.G, true);
    add("M", 0, analytic[2], sim.M, false);
    for (unsigned k = 0; k <= k_max; ++k) add("v", k, analytic[3 + k], sim.v[k], true);
    return report;
}

} // namespace smp
