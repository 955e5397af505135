#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "smp/distributions.hpp"
#include "smp/error.hpp"
#include "smp/euler.hpp"
#include "smp/matrix.hpp"
#include "smp/model.hpp"
#include "smp/parallel.hpp"

namespace smp {

/// Time-domain quantities of an SMP.
///   P         P(Z(t) = j | Z(0) = i)
///   Occupancy ∫_0^t P_ij(u) du
///   G, g      first-passage CDF and density
///   v, V      P(N_j(t) = k), P(N_j(t) <= k)
///   M         E[N_j(t)]
///   Hazard    g_ij(t) / (G_ij(∞) - G_ij(t))
/// N_j counts entries into j after time 0; the start state is not counted.
enum class Quantity { P, Occupancy, G, g, v, V, M, Hazard };

inline const char* to_string(Quantity q) {
    switch (q) {
    case Quantity::P: return "P";
    case Quantity::Occupancy: return "occupancy";
    case Quantity::G: return "G";
    case Quantity::g: return "g";
    case Quantity::v: return "v";
    case Quantity::V: return "V";
    case Quantity::M: return "M";
    case Quantity::Hazard: return "hazard";
    }
    return "?";
}

inline std::optional<Quantity> parse_quantity(const std::string& name) {
    for (auto q : {Quantity::P, Quantity::Occupancy, Quantity::G, Quantity::g, Quantity::v, Quantity::V,
                   Quantity::M, Quantity::Hazard})
        if (name == to_string(q)) return q;
    return std::nullopt;
}

inline bool is_probability(Quantity q) {
    return q == Quantity::P || q == Quantity::G || q == Quantity::v || q == Quantity::V;
}

struct QuantityRequest {
    Quantity kind;
    unsigned k = 0;
};

struct SolveOptions {
    EulerConfig euler;
    unsigned threads = 0;
    LaplaceCache* cache = nullptr;
};

/// A matrix-valued quantity sampled on a time grid. values[t] is n×n for the
/// matrix quantities and 1×1 for a conditional hazard (see `start_state` and
/// `target`). Stored values are raw inversion output, never clamped.
struct QuantityResult {
    Quantity kind = Quantity::P;
    unsigned k = 0;
    std::vector<double> times;
    std::vector<RealMatrix> values;
    std::optional<std::size_t> start_state;
    std::optional<std::size_t> target;
    /// False when the model contains empirical laws (non-smooth kernels).
    bool accuracy_guaranteed = true;
    std::vector<std::string> warnings;

    double operator()(std::size_t time_index, std::size_t i, std::size_t j) const {
        return values.at(time_index)(i, j);
    }

    /// Time series of entry (i, j).
    std::vector<double> series(std::size_t i, std::size_t j) const {
        std::vector<double> out;
        out.reserve(values.size());
        for (const auto& m : values) out.push_back(m(i, j));
        return out;
    }
};

/// Probability-valued inversion output may overshoot [0, 1] by this much.
inline constexpr double kProbabilitySlack = 1e-5;

/// Transform-domain matrices at one frequency s, computed lazily and shared by
/// every quantity requested at s.
class TransformSet {
public:
    TransformSet(const SmpModel& model, Complex s, LaplaceCache* cache = nullptr)
        : model_(&model), s_(s), cache_(cache) {}

    Complex s() const noexcept { return s_; }

    /// q̃(s)
    const ComplexMatrix& kernel() {
        if (!q_) q_ = model_->kernel_lt(s_, cache_);
        return *q_;
    }

    /// h̃(s)
    const ComplexMatrix& holding() {
        if (!h_) h_ = SmpModel::holding_from_kernel(kernel());
        return *h_;
    }

    /// (I - q̃(s))^-1
    const ComplexMatrix& resolvent() {
        if (!r_) {
            const std::size_t n = model_->size();
            r_ = complex_linear_solve(ComplexMatrix::identity(n) - kernel(), ComplexMatrix::identity(n));
        }
        return *r_;
    }

    /// g̃(s) = q̃ (I - q̃)^-1 [I ∘ (I - q̃)^-1]^-1
    const ComplexMatrix& first_passage() {
        if (!g_) {
            const auto& r = resolvent();
            ComplexMatrix g = kernel() * r;
            const std::size_t n = model_->size();
            for (std::size_t j = 0; j < n; ++j) {
                const Complex d = r(j, j);
                if (std::abs(d) < 1e-300)
                    throw SingularMatrix("first passage: zero diagonal element of (I - q)^-1 for state " +
                                         model_->label(j));
                const Complex inv = 1.0 / d;
                for (std::size_t i = 0; i < n; ++i) g(i, j) *= inv;
            }
            g_ = std::move(g);
        }
        return *g_;
    }

    /// Laplace transform of a quantity (every kind except Hazard).
    ComplexMatrix quantity(QuantityRequest req) {
        const std::size_t n = model_->size();
        const Complex inv_s = 1.0 / s_;
        switch (req.kind) {
        case Quantity::P:
            return resolvent() * (ComplexMatrix::identity(n) - holding()) * inv_s;
        case Quantity::Occupancy:
            return resolvent() * (ComplexMatrix::identity(n) - holding()) * (inv_s * inv_s);
        case Quantity::G:
            return first_passage() * inv_s;
        case Quantity::g:
            return first_passage();
        case Quantity::M:
            return (resolvent() - ComplexMatrix::identity(n)) * inv_s;
        case Quantity::v: {
            const auto& g = first_passage();
            ComplexMatrix out(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (req.k == 0) {
                        out(i, j) = (1.0 - g(i, j)) * inv_s;
                    } else {
                        const Complex gjj = g(j, j);
                        out(i, j) = g(i, j) * (1.0 - gjj) * std::pow(gjj, static_cast<int>(req.k - 1)) * inv_s;
                    }
                }
            return out;
        }
        case Quantity::V: {
            const auto& g = first_passage();
            ComplexMatrix out(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    out(i, j) = (1.0 - g(i, j) * std::pow(g(j, j), static_cast<int>(req.k))) * inv_s;
            return out;
        }
        case Quantity::Hazard:
            break;
        }
        throw DomainError("hazard has no direct transform; use conditional_hazard");
    }

private:
    const SmpModel* model_;
    Complex s_;
    LaplaceCache* cache_;
    std::optional<ComplexMatrix> q_, h_, r_, g_;
};

/// g̃(s) of the model.
inline ComplexMatrix first_passage_lt(const SmpModel& model, Complex s, LaplaceCache* cache = nullptr) {
    if (!(s.real() > 0.0)) throw DomainError("first_passage_lt: requires Re(s) > 0");
    TransformSet set(model, s, cache);
    return set.first_passage();
}

namespace detail {

inline void check_times(std::span<const double> times) {
    if (times.empty()) throw DomainError("time grid is empty");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > 0.0) || !std::isfinite(times[k])) throw DomainError("time points must be positive");
        if (k > 0 && times[k] < times[k - 1]) throw DomainError("time grid must be ascending");
    }
}

inline void check_probability_range(const QuantityResult& r) {
    for (std::size_t t = 0; t < r.values.size(); ++t)
        for (double v : r.values[t].data())
            if (!(v >= -kProbabilitySlack && v <= 1.0 + kProbabilitySlack)) {
                std::string what = std::string("inverted ") + to_string(r.kind) + " value " + std::to_string(v) +
                                   " outside [0, 1]";
                throw NumericFailure(what, std::abs(v < 0.0 ? v : v - 1.0)).at(r.times[t], {});
            }
}

} // namespace detail

/// Computes every requested quantity on the time grid. Per time point the
/// Euler nodes are generated once and each node's q̃, (I - q̃)^-1 and g̃ are
/// shared by all requests; time points run in parallel.
inline std::vector<QuantityResult> solve(const SmpModel& model, std::span<const double> times,
                                         std::span<const QuantityRequest> requests, const SolveOptions& options = {}) {
    detail::check_times(times);
    options.euler.check();
    for (const auto& r : requests)
        if (r.kind == Quantity::Hazard) throw DomainError("solve: use conditional_hazard for hazards");

    std::vector<std::vector<RealMatrix>> per_time(times.size());
    parallel_for(
        times.size(),
        [&](std::size_t ti) {
            auto evaluator = [&](Complex s) {
                TransformSet set(model, s, options.cache);
                std::vector<ComplexMatrix> out;
                out.reserve(requests.size());
                for (const auto& r : requests) out.push_back(set.quantity(r));
                return out;
            };
            per_time[ti] = invert_matrix_functions(evaluator, times[ti], options.euler);
        },
        options.threads);

    std::vector<QuantityResult> results;
    results.reserve(requests.size());
    for (std::size_t q = 0; q < requests.size(); ++q) {
        QuantityResult r;
        r.kind = requests[q].kind;
        r.k = requests[q].k;
        r.times.assign(times.begin(), times.end());
        r.accuracy_guaranteed = model.is_smooth();
        if (!r.accuracy_guaranteed) r.warnings.push_back("model has empirical kernels: inversion accuracy not guaranteed");
        r.values.reserve(times.size());
        for (auto& row : per_time) r.values.push_back(std::move(row[q]));
        if (is_probability(r.kind)) detail::check_probability_range(r);
        results.push_back(std::move(r));
    }
    return results;
}

inline QuantityResult solve_one(const SmpModel& model, std::span<const double> times, QuantityRequest req,
                                const SolveOptions& options = {}) {
    const QuantityRequest reqs[] = {req};
    return std::move(solve(model, times, reqs, options).front());
}

inline QuantityResult state_probabilities(const SmpModel& model, std::span<const double> times,
                                          const SolveOptions& options = {}) {
    return solve_one(model, times, {Quantity::P}, options);
}

inline QuantityResult expected_occupancy(const SmpModel& model, std::span<const double> times,
                                         const SolveOptions& options = {}) {
    return solve_one(model, times, {Quantity::Occupancy}, options);
}

struct FirstPassageResult {
    QuantityResult cdf;     // G
    QuantityResult density; // g
};

inline FirstPassageResult first_passage(const SmpModel& model, std::span<const double> times,
                                        const SolveOptions& options = {}) {
    const QuantityRequest reqs[] = {{Quantity::G}, {Quantity::g}};
    auto r = solve(model, times, reqs, options);
    return {std::move(r[0]), std::move(r[1])};
}

inline QuantityResult count_probability(const SmpModel& model, unsigned k, std::span<const double> times,
                                        const SolveOptions& options = {}) {
    return solve_one(model, times, {Quantity::v, k}, options);
}

inline QuantityResult count_cdf(const SmpModel& model, unsigned k, std::span<const double> times,
                                const SolveOptions& options = {}) {
    return solve_one(model, times, {Quantity::V, k}, options);
}

inline QuantityResult expected_visits(const SmpModel& model, std::span<const double> times,
                                      const SolveOptions& options = {}) {
    return solve_one(model, times, {Quantity::M}, options);
}

/// Limits obtained by extrapolating transforms to s -> 0+.
struct LimitResult {
    RealMatrix value;
    /// Largest disagreement between the two first-order extrapolants.
    double disagreement = 0.0;
    bool flagged = false;
    std::vector<std::string> warnings;
};

namespace detail {

/// Ladder s_k = c·{1e-5, 5e-6, 2.5e-6}, c = 1 / (largest mean holding time).
inline std::array<double, 3> small_s_ladder(const SmpModel& model) {
    double longest = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) longest = std::max(longest, model.mean_holding_time(i));
    const double c = longest > 0.0 && std::isfinite(longest) ? 1.0 / longest : 1.0;
    return {1e-5 * c, 5e-6 * c, 2.5e-6 * c};
}

inline constexpr double kExtrapolationTolerance = 1e-4;

} // namespace detail

/// G_ij(∞): g̃(s) at the small-s ladder, Richardson-extrapolated to s = 0.
inline LimitResult reach_probability(const SmpModel& model, const SolveOptions& options = {}) {
    const auto ladder = detail::small_s_ladder(model);
    const std::size_t n = model.size();
    std::array<ComplexMatrix, 3> g;
    for (std::size_t k = 0; k < 3; ++k) g[k] = first_passage_lt(model, ladder[k], options.cache);

    LimitResult out;
    out.value = RealMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double r1a = 2.0 * g[1](i, j).real() - g[0](i, j).real();
            const double r1b = 2.0 * g[2](i, j).real() - g[1](i, j).real();
            out.disagreement = std::max(out.disagreement, std::abs(r1b - r1a));
            out.value(i, j) = (4.0 * r1b - r1a) / 3.0;
        }
    if (out.disagreement > detail::kExtrapolationTolerance) {
        out.flagged = true;
        out.warnings.push_back("G(inf) extrapolants disagree by " + std::to_string(out.disagreement));
    }
    return out;
}

/// Mean first-return time -g̃'_jj(0) for each state, from one-sided difference
/// quotients on the small-s ladder with one Richardson step. Only meaningful
/// where G_jj(∞) = 1.
inline std::vector<double> mean_return_times(const SmpModel& model, const SolveOptions& options = {}) {
    const auto ladder = detail::small_s_ladder(model);
    std::array<ComplexMatrix, 3> g;
    for (std::size_t k = 0; k < 3; ++k) g[k] = first_passage_lt(model, ladder[k], options.cache);
    std::vector<double> out(model.size());
    for (std::size_t j = 0; j < model.size(); ++j) {
        const double d12 = (g[0](j, j).real() - g[1](j, j).real()) / (ladder[0] - ladder[1]);
        const double d23 = (g[1](j, j).real() - g[2](j, j).real()) / (ladder[1] - ladder[2]);
        out[j] = -(2.0 * d23 - d12);
    }
    return out;
}

struct AsymptoticResult {
    RealMatrix pi;
    LimitResult reach;
    StateClassification classes;
    std::vector<std::string> warnings;
};

/// π_ij = G_ij(∞)·m_j / μ_jj for recurrent j (m_j mean holding time, μ_jj mean
/// return time); G_ij(∞) for absorbing j; 0 for transient j.
inline AsymptoticResult asymptotic_probabilities(const SmpModel& model, const SolveOptions& options = {}) {
    for (const auto& d : model.distinct_distributions())
        if (!std::isfinite(d.mean()))
            throw UndefinedQuantity("asymptotic probabilities need finite means; " + d.describe() + " has none");

    AsymptoticResult out;
    out.classes = classify_states(model);
    out.reach = reach_probability(model, options);
    out.warnings = out.reach.warnings;
    const std::size_t n = model.size();
    out.pi = RealMatrix(n, n);

    const bool any_recurrent =
        std::any_of(out.classes.begin(), out.classes.end(), [](StateClass c) { return c == StateClass::Recurrent; });
    std::vector<double> returns;
    if (any_recurrent) returns = mean_return_times(model, options);

    for (std::size_t j = 0; j < n; ++j) {
        double factor = 0.0;
        switch (out.classes[j]) {
        case StateClass::Absorbing: factor = 1.0; break;
        case StateClass::Transient: factor = 0.0; break;
        case StateClass::Recurrent:
            if (!(returns[j] > 0.0) || !std::isfinite(returns[j]))
                throw UndefinedQuantity("mean return time of " + model.label(j) + " is not finite and positive");
            factor = model.mean_holding_time(j) / returns[j];
            break;
        }
        for (std::size_t i = 0; i < n; ++i) out.pi(i, j) = factor == 0.0 ? 0.0 : out.reach.value(i, j) * factor;
    }
    return out;
}

/// Smallest G(∞) - G(t) for which a conditional hazard is reported; below it
/// the ratio is dominated by inversion error and the value is NaN.
inline constexpr double kHazardResolution = 1e-6;

/// Conditional first-passage hazards g_ij(t) / (G_ij(∞) - G_ij(t)) from start
/// i toward each target, sharing one inversion pass. Each result holds 1×1
/// values. Throws UndefinedQuantity when G_ij(∞) < 1e-6.
inline std::vector<QuantityResult> conditional_hazards(const SmpModel& model, std::size_t i,
                                                       std::span<const std::size_t> targets,
                                                       std::span<const double> times,
                                                       const SolveOptions& options = {}) {
    if (i >= model.size()) throw DomainError("conditional_hazard: start state out of range");
    const auto reach = reach_probability(model, options);
    for (std::size_t j : targets) {
        if (j >= model.size()) throw DomainError("conditional_hazard: target out of range");
        if (reach.value(i, j) < 1e-6)
            throw UndefinedQuantity("hazard " + model.label(i) + " -> " + model.label(j) +
                                    " undefined: target is (almost) never reached");
    }
    const auto fp = first_passage(model, times, options);

    std::vector<QuantityResult> out;
    for (std::size_t j : targets) {
        QuantityResult r;
        r.kind = Quantity::Hazard;
        r.times.assign(times.begin(), times.end());
        r.start_state = i;
        r.target = j;
        r.accuracy_guaranteed = fp.cdf.accuracy_guaranteed;
        r.warnings = reach.warnings;
        const double limit = reach.value(i, j);
        std::optional<double> unresolved_from;
        for (std::size_t t = 0; t < times.size(); ++t) {
            RealMatrix m(1, 1);
            const double remaining = limit - fp.cdf(t, i, j);
            if (remaining < kHazardResolution) {
                m(0, 0) = std::numeric_limits<double>::quiet_NaN();
                if (!unresolved_from) unresolved_from = times[t];
            } else {
                m(0, 0) = fp.density(t, i, j) / remaining;
            }
            r.values.push_back(std::move(m));
        }
        if (unresolved_from) {
            std::ostringstream os;
            os << "hazard " << model.label(i) << " -> " << model.label(j) << " is NaN from t=" << *unresolved_from
               << ": G(inf) - G(t) is below " << kHazardResolution;
            r.warnings.push_back(os.str());
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline QuantityResult conditional_hazard(const SmpModel& model, std::size_t i, std::size_t j,
                                         std::span<const double> times, const SolveOptions& options = {}) {
    const std::size_t targets[] = {j};
    return std::move(conditional_hazards(model, i, targets, times, options).front());
}

} // namespace smp
