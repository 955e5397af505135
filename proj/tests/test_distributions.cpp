#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "smp/distributions.hpp"
#include "smp/euler.hpp"
#include "smp/simulation.hpp"

using smp::Complex;
using smp::WaitingTimeDistribution;

namespace {

std::vector<WaitingTimeDistribution> kao_laws() {
    return {WaitingTimeDistribution::weibull(4.738025, 4566277818.13),
            WaitingTimeDistribution::weibull(2.207438, 14541.6089),
            WaitingTimeDistribution::weibull(0.766338, 16.6991),
            WaitingTimeDistribution::weibull(2.303331, 1017649.5158),
            WaitingTimeDistribution::weibull(1.623492, 4707.3132)};
}

std::vector<WaitingTimeDistribution> corpus() {
    auto out = kao_laws();
    out.push_back(WaitingTimeDistribution::weibull(2.0, 1.0));
    out.push_back(WaitingTimeDistribution::weibull(0.5, 3.0));
    out.push_back(WaitingTimeDistribution::weibull(1.0, 5.0));
    out.push_back(WaitingTimeDistribution::exponential(0.3));
    return out;
}

// Composite Simpson in long double with step halving until successive
// estimates agree to 1e-13; independent of the library's quadrature.
long double simpson_oracle(auto&& f, long double a, long double b) {
    auto simpson = [&](int panels) {
        const long double h = (b - a) / panels;
        long double acc = f(a) + f(b);
        for (int k = 1; k < panels; ++k) acc += f(a + k * h) * (k % 2 ? 4.0L : 2.0L);
        return acc * h / 3.0L;
    };
    int panels = 64;
    long double prev = simpson(panels);
    for (;;) {
        panels *= 2;
        const long double next = simpson(panels);
        if (std::fabs(next - prev) < 1e-13L || panels > (1 << 22)) return next;
        prev = next;
    }
}

} // namespace

TEST(Pdf, ExponentialCaseOfWeibull) {
    EXPECT_NEAR(WaitingTimeDistribution::weibull(1.0, 2.0).pdf(1.0), 0.5 * std::exp(-0.5), 1e-15);
    EXPECT_NEAR(WaitingTimeDistribution::weibull(1.0, 2.0).pdf(1.0), 0.3032653, 1e-7);
}

TEST(Pdf, VanishesAtZeroForShapeAboveOne) {
    EXPECT_EQ(WaitingTimeDistribution::weibull(2.0, 1.0).pdf(0.0), 0.0);
}

TEST(Pdf, KaoLawIntegratesToOne) {
    const auto d = WaitingTimeDistribution::weibull(4.738025, 4566277818.13);
    const long double total = simpson_oracle([&](long double x) { return (long double)d.pdf((double)x); }, 0.0L, 400.0L);
    EXPECT_NEAR((double)total, 1.0, 1e-8);
}

TEST(Pdf, Errors) {
    EXPECT_THROW(WaitingTimeDistribution::empirical({1.0, 2.0}).pdf(1.0), smp::UnsupportedOperation);
    EXPECT_THROW(WaitingTimeDistribution::weibull(2.0, 1.0).pdf(-1.0), smp::DomainError);
}

TEST(Cdf, ClosedFormAndEdf) {
    EXPECT_NEAR(WaitingTimeDistribution::weibull(2.0, 1.0).cdf(1.0), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_NEAR(WaitingTimeDistribution::weibull(2.0, 1.0).cdf(1.0), 0.6321206, 1e-7);
    for (const auto& d : corpus()) EXPECT_EQ(d.cdf(0.0), 0.0);
    EXPECT_DOUBLE_EQ(WaitingTimeDistribution::empirical({1.0, 2.0, 3.0}).cdf(2.0), 2.0 / 3.0);
    EXPECT_THROW(WaitingTimeDistribution::exponential(1.0).cdf(-0.5), smp::DomainError);
}

TEST(Cdf, NondecreasingTowardsOne) {
    for (const auto& d : corpus()) {
        double prev = 0.0;
        for (double p = 0.01; p < 1.0; p += 0.01) {
            const double x = d.quantile(p);
            const double c = d.cdf(x);
            EXPECT_GE(c, prev);
            EXPECT_NEAR(c, p, 1e-12);
            prev = c;
        }
        EXPECT_GT(d.cdf(d.quantile(1.0 - 1e-12)), 1.0 - 2e-12);
    }
}

TEST(Mean, Examples) {
    EXPECT_NEAR(WaitingTimeDistribution::weibull(1.0, 5.0).mean(), 5.0, 1e-12);
    EXPECT_NEAR(WaitingTimeDistribution::weibull(2.0, 1.0).mean(), std::sqrt(std::numbers::pi) / 2.0, 1e-15);
    EXPECT_NEAR(WaitingTimeDistribution::weibull(2.0, 1.0).mean(), 0.8862269, 1e-7);
    EXPECT_DOUBLE_EQ(WaitingTimeDistribution::empirical({1.0, 2.0, 3.0}).mean(), 2.0);
    EXPECT_DOUBLE_EQ(WaitingTimeDistribution::exponential(4.0).mean(), 0.25);
}

TEST(Construction, RejectsInvalidParameters) {
    EXPECT_THROW(WaitingTimeDistribution::weibull(0.0, 1.0), smp::DomainError);
    EXPECT_THROW(WaitingTimeDistribution::weibull(1.0, -1.0), smp::DomainError);
    EXPECT_THROW(WaitingTimeDistribution::exponential(0.0), smp::DomainError);
    EXPECT_THROW(WaitingTimeDistribution::empirical({}), smp::DomainError);
    EXPECT_THROW(WaitingTimeDistribution::empirical({1.0, 0.0}), smp::DomainError);
}

TEST(LaplaceTransform, ClosedFormExamples) {
    const Complex v = WaitingTimeDistribution::weibull(1.0, 0.5).laplace_transform(1.0);
    EXPECT_NEAR(v.real(), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(v.imag(), 0.0);
    for (const auto& d : corpus()) EXPECT_EQ(d.laplace_transform(0.0), Complex(1.0, 0.0));
    EXPECT_EQ(WaitingTimeDistribution::empirical({1.0}).laplace_transform(0.0), Complex(1.0, 0.0));
    EXPECT_NEAR(WaitingTimeDistribution::empirical({1.5}).laplace_transform(2.0).real(), std::exp(-3.0), 1e-15);
    EXPECT_NEAR(WaitingTimeDistribution::empirical({1.5}).laplace_transform(2.0).real(), 0.0497871, 1e-7);
}

TEST(LaplaceTransform, NumericWeibullMatchesQuadratureOracle) {
    const long double oracle = simpson_oracle(
        [](long double x) { return std::exp(-x) * 2.0L * x * std::exp(-x * x); }, 0.0L, 12.0L);
    const Complex lt = WaitingTimeDistribution::weibull(2.0, 1.0).laplace_transform(1.0);
    EXPECT_NEAR(lt.real(), (double)oracle, 1e-9);
    EXPECT_NEAR(lt.imag(), 0.0, 1e-15);
    // Second, closed-form route: 1 - s·(√π/2)·e^{s²/4}·erfc(s/2) at s = 1.
    const double closed = 1.0 - std::sqrt(std::numbers::pi) / 2.0 * std::exp(0.25) * std::erfc(0.5);
    EXPECT_NEAR(lt.real(), closed, 1e-12);
}

TEST(LaplaceTransform, NumericWeibullAtComplexPoint) {
    const Complex s(0.3, 4.0);
    const auto w = WaitingTimeDistribution::weibull(0.766338, 16.6991);
    // Oracle integrates in u = x^γ, where the law is Exp(1/θ): smooth integrand.
    const double g = 0.766338, th = 16.6991;
    auto part = [&](bool imag) {
        return simpson_oracle(
            [&](long double u) {
                const long double x = std::pow(u, 1.0L / g);
                const long double w = std::exp(-u / th) / th * std::exp(-s.real() * x);
                return imag ? -w * std::sin(s.imag() * x) : w * std::cos(s.imag() * x);
            },
            0.0L, 700.0L);
    };
    const Complex lt = w.laplace_transform(s);
    EXPECT_NEAR(lt.real(), (double)part(false), 1e-9);
    EXPECT_NEAR(lt.imag(), (double)part(true), 1e-9);
}

TEST(LaplaceTransform, RejectsNegativeRealPart) {
    EXPECT_THROW(WaitingTimeDistribution::weibull(2.0, 1.0).laplace_transform({-0.1, 0.0}), smp::DomainError);
}

TEST(LaplaceTransform, RealAxisIsPositiveDecreasingAndBounded) {
    for (const auto& d : corpus()) {
        const double scale = 1.0 / d.mean();
        double prev = 1.0;
        for (double r = 0.05; r < 20.0; r *= 1.5) {
            const Complex v = d.laplace_transform(r * scale);
            EXPECT_EQ(v.imag(), 0.0) << d.describe();
            EXPECT_GT(v.real(), 0.0) << d.describe();
            EXPECT_LE(v.real(), 1.0);
            EXPECT_LT(v.real(), prev) << d.describe() << " at s=" << r * scale;
            prev = v.real();
        }
    }
}

TEST(LaplaceTransform, ModulusBoundedByRealAxisValue) {
    for (const auto& d : corpus()) {
        const double scale = 1.0 / d.mean();
        for (double x : {0.01, 0.3, 2.0}) {
            const double bound = d.laplace_transform(x * scale).real();
            for (double y : {0.1, 1.0, 7.5, 40.0})
                EXPECT_LE(std::abs(d.laplace_transform(Complex(x, y) * scale)), bound + 1e-12) << d.describe();
        }
    }
}

TEST(LaplaceTransform, MomentPropertyRecoversMean) {
    for (const auto& d : corpus()) {
        // D(h) = (1 - f̃(h))/h = mean - h·E[X²]/2 + ...; one Richardson step.
        const double h = 1e-4 / d.mean();
        auto slope = [&](double s) { return (1.0 - d.laplace_transform(s).real()) / s; };
        const double estimate = 2.0 * slope(h / 2.0) - slope(h);
        EXPECT_NEAR(estimate / d.mean(), 1.0, 1e-4) << d.describe();
    }
}

TEST(LaplaceTransform, EulerRoundTripReproducesCdf) {
    for (const auto& d : corpus()) {
        for (double p : {0.05, 0.3, 0.5, 0.8, 0.97}) {
            const double x = d.quantile(p);
            const double inverted = smp::invert_function([&](Complex s) { return d.laplace_transform(s) / s; }, x);
            EXPECT_NEAR(inverted, d.cdf(x), 1e-6) << d.describe() << " at x=" << x;
        }
    }
}

TEST(LaplaceTransform, EmpiricalConvergesToParametric) {
    const auto w = WaitingTimeDistribution::weibull(2.0, 1.0);
    const std::size_t n = 100000;
    std::vector<double> samples(n);
    smp::CounterRng rng(99, 0);
    for (auto& x : samples) x = w.sample([&] { return rng.uniform(); });
    const auto elt = WaitingTimeDistribution::empirical(samples);
    for (Complex s : {Complex(1.0), Complex(0.5, 2.0), Complex(3.0, -1.0)})
        EXPECT_LT(std::abs(elt.laplace_transform(s) - w.laplace_transform(s)), 3.0 / std::sqrt(double(n)));
}

TEST(LaplaceCache, MemoizesByIdentityAndFrequency) {
    smp::LaplaceCache cache;
    const auto a = WaitingTimeDistribution::weibull(2.0, 1.0);
    const auto b = WaitingTimeDistribution::weibull(2.0, 1.0);
    const Complex s(0.7, 3.0);
    const Complex first = cache.get(a, s);
    EXPECT_EQ(cache.get(b, s), first);
    EXPECT_EQ(cache.size(), 1u);
    cache.get(a, Complex(0.7, 3.5));
    EXPECT_EQ(cache.size(), 2u);
    EXPECT_EQ(first, a.laplace_transform(s));
}
