#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "smp/error.hpp"
#include "smp/matrix.hpp"
#include "smp/quadrature.hpp"

namespace smp {

enum class DistributionKind { Weibull, Exponential, Empirical };

/// Waiting-time law of a single transition.
///
/// Weibull uses the density (γ/θ)·x^(γ-1)·exp(-x^γ/θ), i.e. θ scales x^γ and
/// is *not* the conventional scale (x/θ)^γ. Parameters are stored exactly as
/// given. Instances are immutable and cheap to copy (empirical samples are
/// shared).
class WaitingTimeDistribution {
public:
    static WaitingTimeDistribution weibull(double shape, double scale) {
        if (!(shape > 0.0) || !std::isfinite(shape) || !(scale > 0.0) || !std::isfinite(scale))
            throw DomainError("weibull: shape and scale must be finite and > 0");
        return WaitingTimeDistribution(DistributionKind::Weibull, shape, scale, nullptr);
    }

    static WaitingTimeDistribution exponential(double rate) {
        if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential: rate must be finite and > 0");
        return WaitingTimeDistribution(DistributionKind::Exponential, rate, 0.0, nullptr);
    }

    static WaitingTimeDistribution empirical(std::vector<double> samples) {
        if (samples.empty()) throw DomainError("empirical: sample list is empty");
        for (double x : samples)
            if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("empirical: samples must be finite and > 0");
        std::sort(samples.begin(), samples.end());
        return WaitingTimeDistribution(DistributionKind::Empirical, 0.0, 0.0,
                                       std::make_shared<const std::vector<double>>(std::move(samples)));
    }

    DistributionKind kind() const noexcept { return kind_; }
    double shape() const noexcept { return a_; }
    double scale() const noexcept { return b_; }
    double rate() const noexcept { return a_; }
    /// Sorted sample values (empty for parametric kinds).
    const std::vector<double>& samples() const noexcept {
        static const std::vector<double> none;
        return samples_ ? *samples_ : none;
    }
    bool is_parametric() const noexcept { return kind_ != DistributionKind::Empirical; }

    double pdf(double x) const {
        check_time(x, "pdf");
        switch (kind_) {
        case DistributionKind::Weibull:
            if (x == 0.0) {
                if (a_ < 1.0) return std::numeric_limits<double>::infinity();
                return a_ == 1.0 ? 1.0 / b_ : 0.0;
            }
            return weibull_density(x);
        case DistributionKind::Exponential:
            return a_ * std::exp(-a_ * x);
        case DistributionKind::Empirical:
            break;
        }
        throw UnsupportedOperation("pdf is not defined for an empirical distribution");
    }

    double cdf(double x) const {
        check_time(x, "cdf");
        switch (kind_) {
        case DistributionKind::Weibull:
            return -std::expm1(-std::pow(x, a_) / b_);
        case DistributionKind::Exponential:
            return -std::expm1(-a_ * x);
        case DistributionKind::Empirical: {
            const auto& xs = *samples_;
            const auto count = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
            return static_cast<double>(count) / static_cast<double>(xs.size());
        }
        }
        return 0.0;
    }

    double mean() const {
        switch (kind_) {
        case DistributionKind::Weibull:
            return std::exp(std::log(b_) / a_) * std::tgamma(1.0 + 1.0 / a_);
        case DistributionKind::Exponential:
            return 1.0 / a_;
        case DistributionKind::Empirical: {
            const auto& xs = *samples_;
            return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        }
        }
        return 0.0;
    }

    /// Inverse CDF for the parametric kinds; p in [0, 1).
    double quantile(double p) const {
        if (!(p >= 0.0 && p < 1.0)) throw DomainError("quantile: probability must lie in [0, 1)");
        switch (kind_) {
        case DistributionKind::Weibull:
            return std::pow(-b_ * std::log1p(-p), 1.0 / a_);
        case DistributionKind::Exponential:
            return -std::log1p(-p) / a_;
        case DistributionKind::Empirical:
            break;
        }
        throw UnsupportedOperation("quantile is not defined for an empirical distribution");
    }

    /// E[exp(-s·X)] for Re(s) >= 0.
    Complex laplace_transform(Complex s) const {
        if (s.real() < 0.0 || !std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw DomainError("laplace_transform: requires finite s with Re(s) >= 0");
        if (s == Complex{}) return {1.0, 0.0};
        switch (kind_) {
        case DistributionKind::Exponential:
            return a_ / (a_ + s);
        case DistributionKind::Weibull:
            if (a_ == 1.0) return (1.0 / b_) / (1.0 / b_ + s);
            return weibull_lt(s);
        case DistributionKind::Empirical: {
            Complex acc{};
            for (double x : *samples_) acc += std::exp(-s * x);
            return acc / static_cast<double>(samples_->size());
        }
        }
        return {};
    }

    /// Draws one waiting time; `u01` must yield uniforms on [0, 1).
    template <typename Uniform>
    double sample(Uniform&& u01) const {
        const double u = u01();
        switch (kind_) {
        case DistributionKind::Weibull:
            return std::pow(-b_ * std::log1p(-u), 1.0 / a_);
        case DistributionKind::Exponential:
            return -std::log1p(-u) / a_;
        case DistributionKind::Empirical: {
            const auto& xs = *samples_;
            auto idx = static_cast<std::size_t>(u * static_cast<double>(xs.size()));
            return xs[std::min(idx, xs.size() - 1)];
        }
        }
        return 0.0;
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(15);
        switch (kind_) {
        case DistributionKind::Weibull: os << "weibull(" << a_ << ", " << b_ << ")"; break;
        case DistributionKind::Exponential: os << "exponential(" << a_ << ")"; break;
        case DistributionKind::Empirical: os << "empirical(n=" << samples_->size() << ")"; break;
        }
        return os.str();
    }

    /// Exact identity of the law: equal keys mean equal transforms.
    struct Key {
        DistributionKind kind;
        double a;
        double b;
        const void* samples;
        friend bool operator==(const Key&, const Key&) = default;
    };
    Key key() const noexcept { return {kind_, a_, b_, samples_.get()}; }

private:
    WaitingTimeDistribution(DistributionKind kind, double a, double b,
                            std::shared_ptr<const std::vector<double>> samples)
        : kind_(kind), a_(a), b_(b), samples_(std::move(samples)) {}

    static void check_time(double x, const char* op) {
        if (!(x >= 0.0)) throw DomainError(std::string(op) + ": time must be >= 0");
    }

    double weibull_density(double x) const {
        const double lx = std::log(x);
        return std::exp(std::log(a_ / b_) + (a_ - 1.0) * lx - std::exp(a_ * lx) / b_);
    }

    // Real and imaginary parts are integrated together as one complex-valued
    // integrand over [lo, hi]: lo is the 1e-16 quantile, hi the 1 - 1e-12
    // quantile (or the point where exp(-Re(s)·x) < e^-40). Panels span at
    // most half an oscillation of exp(-i·Im(s)·x). For shape < 1 the density
    // is singular at 0 and the first panel is integrated in u = x^shape,
    // where dF = exp(-u/θ)/θ du is smooth.
    Complex weibull_lt(Complex s) const {
        const double re = s.real();
        const double im = std::abs(s.imag());
        const double lo = a_ < 1.0 ? 0.0 : quantile(1e-16);
        double hi = quantile(1.0 - 1e-12);
        if (re > 0.0) hi = std::min(hi, 40.0 / re);
        if (!(hi > lo)) return {0.0, 0.0};

        const double span = hi - lo;
        const double half_period = im > 0.0 ? std::numbers::pi / im : span;
        const auto panels = static_cast<std::size_t>(std::max(8.0, std::ceil(span / half_period)));
        std::vector<double> breaks(panels + 1);
        for (std::size_t k = 0; k <= panels; ++k) breaks[k] = lo + span * static_cast<double>(k) / panels;
        breaks.back() = hi;

        const double log_norm = std::log(a_ / b_);
        const double inv_b = 1.0 / b_;
        auto integrand = [&](double x) -> Complex {
            if (x <= 0.0) return {};
            const double lx = std::log(x);
            const double mag = std::exp(log_norm + (a_ - 1.0) * lx - std::exp(a_ * lx) * inv_b - re * x);
            return std::polar(mag, -s.imag() * x);
        };

        quadrature::Tolerance tol;
        Complex total{};
        std::span<const double> rest(breaks);
        if (a_ < 1.0) {
            const double upper = std::pow(breaks[1], a_);
            const double inv_a = 1.0 / a_;
            auto singular_part = [&](double u) -> Complex {
                const double x = std::pow(u, inv_a);
                return std::polar(std::exp(-u * inv_b - re * x) * inv_b, -s.imag() * x);
            };
            const double ubreaks[] = {0.0, upper};
            total += quadrature::integrate<Complex>(singular_part, ubreaks, tol).value;
            rest = rest.subspan(1);
        }
        total += quadrature::integrate<Complex>(integrand, rest, tol).value;
        return total;
    }

    DistributionKind kind_;
    double a_;
    double b_;
    std::shared_ptr<const std::vector<double>> samples_;
};

/// Thread-safe memo of (distribution, s) -> Laplace transform.
class LaplaceCache {
public:
    Complex get(const WaitingTimeDistribution& dist, Complex s) {
        const Entry key{dist.key(), s.real(), s.imag()};
        {
            std::shared_lock lock(mutex_);
            if (auto it = map_.find(key); it != map_.end()) return it->second;
        }
        const Complex value = dist.laplace_transform(s);
        std::unique_lock lock(mutex_);
        map_.emplace(key, value);
        return value;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return map_.size();
    }

    void clear() {
        std::unique_lock lock(mutex_);
        map_.clear();
    }

private:
    struct Entry {
        WaitingTimeDistribution::Key dist;
        double re;
        double im;
        friend bool operator==(const Entry&, const Entry&) = default;
    };
    struct EntryHash {
        std::size_t operator()(const Entry& e) const noexcept {
            std::size_t h = std::hash<int>{}(static_cast<int>(e.dist.kind));
            auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
            mix(std::hash<double>{}(e.dist.a));
            mix(std::hash<double>{}(e.dist.b));
            mix(std::hash<const void*>{}(e.dist.samples));
            mix(std::hash<double>{}(e.re));
            mix(std::hash<double>{}(e.im));
            return h;
        }
    };

    mutable std::shared_mutex mutex_;
    std::unordered_map<Entry, Complex, EntryHash> map_;
};

} // namespace smp
