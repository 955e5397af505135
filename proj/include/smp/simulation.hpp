#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "smp/error.hpp"
#include "smp/model.hpp"
#include "smp/parallel.hpp"

namespace smp {

/// Counter-based generator: the i-th output of stream (seed, index) is a
/// SplitMix64 finalization of key + i·golden. Streams are independent of how
/// trajectories are scheduled across workers.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct TrajectoryEvent {
    double time;
    std::size_t state;
    friend bool operator==(const TrajectoryEvent&, const TrajectoryEvent&) = default;
};

/// One simulated path. The start (0, start_state) is implicit; `events` lists
/// later entries in strictly increasing time, none beyond `horizon`.
struct TrajectoryRecord {
    std::size_t start_state = 0;
    std::vector<TrajectoryEvent> events;
    double horizon = 0.0;

    friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;

    /// Z(t) for 0 <= t <= horizon.
    std::size_t state_at(double t) const {
        std::size_t s = start_state;
        for (const auto& e : events) {
            if (e.time > t) break;
            s = e.state;
        }
        return s;
    }

    /// N_j(t): entries into j during (0, t].
    unsigned visits(std::size_t j, double t) const {
        unsigned n = 0;
        for (const auto& e : events) {
            if (e.time > t) break;
            if (e.state == j) ++n;
        }
        return n;
    }
};

namespace detail {

inline TrajectoryRecord run_trajectory(const SmpModel& model, std::size_t start, double horizon, CounterRng& rng) {
    TrajectoryRecord rec;
    rec.start_state = start;
    rec.horizon = horizon;
    const std::size_t n = model.size();
    std::size_t state = start;
    double now = 0.0;
    while (!model.is_absorbing(state)) {
        // Next state from row p_state, then the waiting time of that transition.
        const double u = rng.uniform();
        double cum = 0.0;
        std::size_t next = n;
        std::size_t last_positive = n;
        for (std::size_t j = 0; j < n; ++j) {
            const double pj = model.p(state, j);
            if (pj <= 0.0) continue;
            last_positive = j;
            cum += pj;
            if (u < cum) {
                next = j;
                break;
            }
        }
        if (next == n) next = last_positive; // row sums may fall short of 1 by rounding
        const double wait = model.dist(state, next)->sample([&rng] { return rng.uniform(); });
        now += wait;
        if (now > horizon) break;
        // A zero draw would make entry times tie; it has probability 0 for
        // continuous laws and is nudged forward here.
        if (!rec.events.empty() && now <= rec.events.back().time) now = std::nextafter(rec.events.back().time, horizon);
        rec.events.push_back({now, next});
        state = next;
    }
    return rec;
}

} // namespace detail

/// Simulates one trajectory from `start` until absorption or `horizon`.
/// Deterministic in `seed`.
inline TrajectoryRecord simulate_trajectory(const SmpModel& model, std::size_t start, double horizon,
                                            std::uint64_t seed) {
    if (start >= model.size()) throw DomainError("simulate_trajectory: start state out of range");
    if (!(horizon > 0.0)) throw DomainError("simulate_trajectory: horizon must be positive");
    CounterRng rng(seed, 0);
    return detail::run_trajectory(model, start, horizon, rng);
}

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimates for one start state: index [time][target], and for
/// v an extra leading index k = 0..k_max.
struct SimulationEstimates {
    std::size_t start_state = 0;
    std::size_t trajectories = 0;
    std::vector<double> times;
    std::vector<std::vector<Estimate>> P;
    std::vector<std::vector<Estimate>> G;
    std::vector<std::vector<std::vector<Estimate>>> v;
    std::vector<std::vector<Estimate>> M;
};

/// Simulates `n_traj` trajectories (stream i uses CounterRng(seed, i)) and
/// estimates P (Z(t) = j), G (N_j(t) > 0), v (N_j(t) = k, k <= k_max) and
/// M (E N_j(t)) with binomial / sample standard errors. Accumulation is in
/// integers, so results do not depend on worker scheduling.
inline SimulationEstimates estimate_all(const SmpModel& model, std::size_t start, std::span<const double> times,
                                        std::size_t n_traj, std::uint64_t seed, unsigned k_max = 2,
                                        unsigned threads = 0) {
    if (start >= model.size()) throw DomainError("estimate: start state out of range");
    if (n_traj < 1) throw DomainError("estimate: need at least one trajectory");
    if (times.empty()) throw DomainError("estimate: empty time grid");
    for (double t : times)
        if (!(t > 0.0)) throw DomainError("estimate: time points must be positive");
    const double horizon = *std::max_element(times.begin(), times.end());
    const std::size_t n = model.size();
    const std::size_t nt = times.size();
    const std::size_t kc = k_max + 1;

    struct Tally {
        std::vector<std::uint64_t> in_state, reached, visits, visits_sq, count_k;
        explicit Tally(std::size_t cells, std::size_t kc)
            : in_state(cells), reached(cells), visits(cells), visits_sq(cells), count_k(cells * kc) {}
    };

    const std::size_t chunk = 4096;
    const std::size_t chunks = (n_traj + chunk - 1) / chunk;
    std::vector<Tally> tallies(chunks, Tally(nt * n, kc));
    parallel_for(
        chunks,
        [&](std::size_t c) {
            auto& tally = tallies[c];
            const std::size_t end = std::min(n_traj, (c + 1) * chunk);
            for (std::size_t traj = c * chunk; traj < end; ++traj) {
                CounterRng rng(seed, traj);
                const auto rec = detail::run_trajectory(model, start, horizon, rng);
                for (std::size_t ti = 0; ti < nt; ++ti) {
                    const double t = times[ti];
                    tally.in_state[ti * n + rec.state_at(t)] += 1;
                    for (std::size_t j = 0; j < n; ++j) {
                        const std::uint64_t visits = rec.visits(j, t);
                        const std::size_t cell = ti * n + j;
                        if (visits > 0) tally.reached[cell] += 1;
                        tally.visits[cell] += visits;
                        tally.visits_sq[cell] += visits * visits;
                        if (visits <= k_max) tally.count_k[cell * kc + visits] += 1;
                    }
                }
            }
        },
        threads);

    Tally total(nt * n, kc);
    for (const auto& t : tallies)
        for (std::size_t c = 0; c < nt * n; ++c) {
            total.in_state[c] += t.in_state[c];
            total.reached[c] += t.reached[c];
            total.visits[c] += t.visits[c];
            total.visits_sq[c] += t.visits_sq[c];
            for (std::size_t k = 0; k < kc; ++k) total.count_k[c * kc + k] += t.count_k[c * kc + k];
        }

    const double N = static_cast<double>(n_traj);
    auto proportion = [N](std::uint64_t hits) {
        const double p = static_cast<double>(hits) / N;
        return Estimate{p, std::sqrt(p * (1.0 - p) / N)};
    };

    SimulationEstimates out;
    out.start_state = start;
    out.trajectories = n_traj;
    out.times.assign(times.begin(), times.end());
    out.P.assign(nt, std::vector<Estimate>(n));
    out.G.assign(nt, std::vector<Estimate>(n));
    out.M.assign(nt, std::vector<Estimate>(n));
    out.v.assign(kc, std::vector<std::vector<Estimate>>(nt, std::vector<Estimate>(n)));
    for (std::size_t ti = 0; ti < nt; ++ti)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t cell = ti * n + j;
            out.P[ti][j] = proportion(total.in_state[cell]);
            out.G[ti][j] = proportion(total.reached[cell]);
            for (std::size_t k = 0; k < kc; ++k) out.v[k][ti][j] = proportion(total.count_k[cell * kc + k]);
            const double mean = static_cast<double>(total.visits[cell]) / N;
            const double second = static_cast<double>(total.visits_sq[cell]) / N;
            const double var = n_traj > 1 ? std::max(0.0, second - mean * mean) * N / (N - 1.0) : 0.0;
            out.M[ti][j] = {mean, std::sqrt(var / N)};
        }
    return out;
}

enum class SimQuantity { P, G, v, M };

/// Estimates of one quantity: result[time][target].
inline std::vector<std::vector<Estimate>> estimate(const SmpModel& model, std::size_t start, SimQuantity quantity,
                                                   std::span<const double> times, std::size_t n_traj,
                                                   std::uint64_t seed, unsigned k = 0, unsigned threads = 0) {
    auto all = estimate_all(model, start, times, n_traj, seed, quantity == SimQuantity::v ? k : 0, threads);
    switch (quantity) {
    case SimQuantity::P: return all.P;
    case SimQuantity::G: return all.G;
    case SimQuantity::v: return all.v[k];
    case SimQuantity::M: return all.M;
    }
    return {};
}

} // namespace smp
