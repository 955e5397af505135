#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "smp/distributions.hpp"
#include "smp/error.hpp"
#include "smp/matrix.hpp"

namespace smp {

using DistributionPtr = std::shared_ptr<const WaitingTimeDistribution>;

/// Unvalidated model description: labels, embedded transition matrix and a
/// partial matrix of waiting-time laws (null where there is no transition).
struct RawModel {
    std::vector<std::string> labels;
    RealMatrix p;
    std::vector<std::vector<DistributionPtr>> dists;
    /// Allowed |row sum - 1| for non-absorbing rows.
    double row_sum_tolerance = 1e-9;
};

enum class StateClass { Absorbing, Transient, Recurrent };

inline const char* to_string(StateClass c) {
    switch (c) {
    case StateClass::Absorbing: return "absorbing";
    case StateClass::Transient: return "transient";
    case StateClass::Recurrent: return "recurrent";
    }
    return "?";
}

using StateClassification = std::vector<StateClass>;

class SmpModel;
SmpModel validate(const RawModel& raw);

/// A validated finite-state semi-Markov process. Immutable.
class SmpModel {
public:
    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }

    std::optional<std::size_t> index_of(const std::string& label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return i;
        return std::nullopt;
    }

    const RealMatrix& p() const noexcept { return p_; }
    double p(std::size_t i, std::size_t j) const { return p_(i, j); }

    /// Waiting-time law of i -> j, or nullptr when p_ij = 0.
    const WaitingTimeDistribution* dist(std::size_t i, std::size_t j) const {
        const int slot = slot_[i * size() + j];
        return slot < 0 ? nullptr : &distinct_[static_cast<std::size_t>(slot)];
    }

    bool is_absorbing(std::size_t i) const noexcept { return absorbing_[i]; }

    /// Distinct waiting-time laws referenced by the model.
    const std::vector<WaitingTimeDistribution>& distinct_distributions() const noexcept { return distinct_; }

    /// True when every law is parametric (the Euler inversion is then accurate).
    bool is_smooth() const noexcept {
        for (const auto& d : distinct_)
            if (!d.is_parametric()) return false;
        return true;
    }

    /// Mean sojourn time in state i: Σ_j p_ij · E[X_ij]; 0 for absorbing i.
    double mean_holding_time(std::size_t i) const {
        double m = 0.0;
        for (std::size_t j = 0; j < size(); ++j)
            if (const auto* d = dist(i, j)) m += p_(i, j) * d->mean();
        return m;
    }

    /// q̃(s): entry (i, j) = p_ij · f̃_ij(s). Each distinct law is transformed
    /// once per call (and at most once overall when a cache is given).
    ComplexMatrix kernel_lt(Complex s, LaplaceCache* cache = nullptr) const {
        std::vector<Complex> lt(distinct_.size());
        for (std::size_t k = 0; k < distinct_.size(); ++k)
            lt[k] = cache ? cache->get(distinct_[k], s) : distinct_[k].laplace_transform(s);
        const std::size_t n = size();
        ComplexMatrix q(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const int slot = slot_[i * n + j];
                if (slot >= 0) q(i, j) = p_(i, j) * lt[static_cast<std::size_t>(slot)];
            }
        return q;
    }

    /// h̃(s): diagonal matrix of the row sums of q̃(s).
    static ComplexMatrix holding_from_kernel(const ComplexMatrix& q) {
        const std::size_t n = q.rows();
        ComplexMatrix h(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            Complex sum{};
            for (std::size_t j = 0; j < n; ++j) sum += q(i, j);
            h(i, i) = sum;
        }
        return h;
    }

    ComplexMatrix holding_lt(Complex s, LaplaceCache* cache = nullptr) const {
        return holding_from_kernel(kernel_lt(s, cache));
    }

private:
    friend SmpModel validate(const RawModel& raw);
    SmpModel() = default;

    std::vector<std::string> labels_;
    RealMatrix p_;
    std::vector<WaitingTimeDistribution> distinct_;
    std::vector<int> slot_;
    std::vector<bool> absorbing_;
};

/// Checks every model invariant and returns the validated model, or throws
/// ValidationError listing all violations.
inline SmpModel validate(const RawModel& raw) {
    std::vector<std::string> errors;
    const std::size_t n = raw.labels.size();
    if (n == 0) throw ValidationError({"model has no states"});
    if (raw.p.rows() != n || raw.p.cols() != n)
        throw ValidationError({"transition matrix must be " + std::to_string(n) + "x" + std::to_string(n)});
    if (raw.dists.size() != n)
        throw ValidationError({"distribution matrix must have " + std::to_string(n) + " rows"});
    for (std::size_t i = 0; i < n; ++i)
        if (raw.dists[i].size() != n)
            throw ValidationError({"distribution matrix row " + raw.labels[i] + " must have " +
                                   std::to_string(n) + " entries"});

    std::unordered_set<std::string> seen;
    for (const auto& l : raw.labels) {
        if (l.empty()) errors.push_back("empty state label");
        if (!seen.insert(l).second) errors.push_back("duplicate state label '" + l + "'");
    }

    const auto& L = raw.labels;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double pij = raw.p(i, j);
            if (!std::isfinite(pij) || pij < 0.0) {
                std::ostringstream os;
                os << "negative or non-finite probability p(" << L[i] << " -> " << L[j] << ") = " << pij;
                errors.push_back(os.str());
            }
            if (i == j && pij != 0.0) {
                std::ostringstream os;
                os << "self-transition " << L[i] << " -> " << L[i] << " with probability " << pij;
                errors.push_back(os.str());
            }
            if (pij > 0.0 && !raw.dists[i][j])
                errors.push_back("missing distribution for " + L[i] + " -> " + L[j]);
            if (!(pij > 0.0) && raw.dists[i][j])
                errors.push_back("distribution given for " + L[i] + " -> " + L[j] + " but p = 0");
            if (std::isfinite(pij)) sum += pij;
        }
        if (sum != 0.0 && std::abs(sum - 1.0) > raw.row_sum_tolerance) {
            std::ostringstream os;
            os.precision(12);
            os << "row " << L[i] << " sums to " << sum << " (expected 1 or 0)";
            errors.push_back(os.str());
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));

    SmpModel m;
    m.labels_ = raw.labels;
    m.p_ = raw.p;
    m.slot_.assign(n * n, -1);
    m.absorbing_.assign(n, true);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (!(raw.p(i, j) > 0.0)) continue;
            m.absorbing_[i] = false;
            const auto& d = *raw.dists[i][j];
            std::size_t k = 0;
            while (k < m.distinct_.size() && !(m.distinct_[k].key() == d.key())) ++k;
            if (k == m.distinct_.size()) m.distinct_.push_back(d);
            m.slot_[i * n + j] = static_cast<int>(k);
        }
    return m;
}

/// Absorbing: zero row. Otherwise recurrent iff the state's strongly connected
/// component of {(i, j) : p_ij > 0} has no edge leaving it, else transient.
inline StateClassification classify_states(const SmpModel& model) {
    const std::size_t n = model.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) reach[i][j] = model.p(i, j) > 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = true;

    StateClassification out(n, StateClass::Transient);
    for (std::size_t i = 0; i < n; ++i) {
        if (model.is_absorbing(i)) {
            out[i] = StateClass::Absorbing;
            continue;
        }
        // Closed class: everything reachable from i leads back to i.
        bool closed = true;
        for (std::size_t j = 0; j < n && closed; ++j)
            if (reach[i][j] && !reach[j][i]) closed = false;
        out[i] = closed ? StateClass::Recurrent : StateClass::Transient;
    }
    return out;
}

} // namespace smp
