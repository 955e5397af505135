#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "smp/distributions.hpp"
#include "smp/euler.hpp"

using namespace smp;

TEST(EulerNodes, Layout) {
    const EulerConfig cfg;
    const auto n1 = euler_nodes(1.0, cfg);
    EXPECT_EQ(n1.size(), static_cast<std::size_t>(cfg.n_trunc + cfg.m_euler + 1));
    EXPECT_EQ(n1.size(), 50u);
    EXPECT_DOUBLE_EQ(n1[0].real(), 9.2);
    EXPECT_EQ(n1[0].imag(), 0.0);
    const auto n2 = euler_nodes(2.0, cfg);
    EXPECT_DOUBLE_EQ(n2[1].real(), cfg.A / 4.0);
    EXPECT_DOUBLE_EQ(n2[1].imag(), std::numbers::pi / 2.0);
    for (const auto& s : n2) EXPECT_EQ(s.real(), n2[0].real());
    EXPECT_THROW(euler_nodes(0.0, cfg), DomainError);
}

TEST(EulerWeights, BinomialTail) {
    const EulerConfig cfg;
    const auto w = cfg.weights();
    ASSERT_EQ(w.size(), 50u);
    EXPECT_EQ(w[0], 0.5);
    for (int j = 1; j <= cfg.n_trunc; ++j) EXPECT_EQ(w[j], 1.0);
    EXPECT_DOUBLE_EQ(w.back(), std::ldexp(1.0, -cfg.m_euler));
    for (std::size_t j = cfg.n_trunc + 1; j < w.size(); ++j) EXPECT_LT(w[j], w[j - 1]);
    // Sum over the tail of 2^-m C(m, r) r = m/2.
    double tail = 0.0;
    for (std::size_t j = cfg.n_trunc + 1; j < w.size(); ++j) tail += w[j];
    EXPECT_NEAR(tail, cfg.m_euler / 2.0, 1e-14);
}

TEST(EulerConfig, RejectsBadParameters) {
    EXPECT_THROW((EulerConfig{0.0, 38, 11}.check()), DomainError);
    EXPECT_THROW((EulerConfig{50.0, 38, 11}.check()), DomainError);
    EXPECT_THROW((EulerConfig{18.4, 0, 11}.check()), DomainError);
}

TEST(EulerInvert, KnownPairs) {
    EXPECT_NEAR(invert_function([](Complex s) { return 1.0 / (s + 1.0); }, 1.0), std::exp(-1.0), 1e-7);
    EXPECT_NEAR(invert_function([](Complex s) { return 1.0 / s; }, 7.3), 1.0, 1e-7);
    const auto w = WaitingTimeDistribution::weibull(2.0, 1.0);
    EXPECT_NEAR(invert_function([&](Complex s) { return w.laplace_transform(s) / s; }, 1.0), 0.6321206, 1e-6);
}

TEST(EulerInvert, NonFiniteInputFails) {
    const EulerConfig cfg;
    std::vector<Complex> values(cfg.terms() + 1, Complex(0.1));
    values[3] = Complex(std::nan(""), 0.0);
    EXPECT_THROW(euler_invert(values, 1.0, cfg), NumericFailure);
    values.pop_back();
    EXPECT_THROW(euler_invert(values, 1.0, cfg), DomainError);
}

TEST(EulerInvert, Linearity) {
    const double a = 0.7, b = -2.5;
    for (double t : {0.3, 1.0, 4.0}) {
        const auto nodes = euler_nodes(t, {});
        std::vector<Complex> phi, psi, mix;
        for (const auto& s : nodes) {
            phi.push_back(1.0 / (s + 2.0));
            psi.push_back(1.0 / (s * s + 1.0));
            mix.push_back(a * phi.back() + b * psi.back());
        }
        const double lhs = euler_invert(mix, t, {});
        const double rhs = a * euler_invert(phi, t, {}) + b * euler_invert(psi, t, {});
        EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs)));
    }
}

TEST(EulerInvert, CdfOnLogGridForCorpus) {
    const std::vector<WaitingTimeDistribution> corpus = {
        WaitingTimeDistribution::weibull(2.0, 1.0), WaitingTimeDistribution::weibull(0.766338, 16.6991),
        WaitingTimeDistribution::weibull(4.738025, 4566277818.13), WaitingTimeDistribution::exponential(0.5)};
    for (const auto& d : corpus) {
        const double lo = d.quantile(0.001), hi = d.quantile(0.999);
        for (int k = 0; k < 50; ++k) {
            const double t = lo * std::pow(hi / lo, k / 49.0);
            const double inv = invert_function([&](Complex s) { return d.laplace_transform(s) / s; }, t);
            EXPECT_NEAR(inv, d.cdf(t), 1e-6) << d.describe() << " t=" << t;
        }
    }
}

TEST(InvertMatrix, ScaledIdentity) {
    const auto m = invert_matrix_function([](Complex s) { return ComplexMatrix::identity(3) * (1.0 / s); }, 2.5);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(m(i, j), i == j ? 1.0 : 0.0, 1e-7);
}

TEST(InvertMatrix, DiagonalEqualsEntrywiseInversion) {
    auto evaluator = [](Complex s) {
        ComplexMatrix m(2, 2);
        m(0, 0) = 1.0 / (s + 1.0);
        m(1, 1) = 1.0 / (s + 2.0);
        return m;
    };
    int calls = 0;
    const auto m = invert_matrix_function(
        [&](Complex s) {
            ++calls;
            return evaluator(s);
        },
        1.0);
    EXPECT_EQ(calls, 50);
    EXPECT_NEAR(m(0, 0), std::exp(-1.0), 1e-7);
    EXPECT_NEAR(m(1, 1), std::exp(-2.0), 1e-7);
    EXPECT_EQ(m(0, 0), invert_function([](Complex s) { return 1.0 / (s + 1.0); }, 1.0));
    EXPECT_EQ(m(1, 1), invert_function([](Complex s) { return 1.0 / (s + 2.0); }, 1.0));
    EXPECT_EQ(m(0, 1), 0.0);
}

TEST(InvertMatrix, ErrorsCarryTimeAndNode) {
    try {
        invert_matrix_function(
            [](Complex s) -> ComplexMatrix {
                if (s.imag() > 1.0) throw NumericFailure("boom", 0.5);
                return ComplexMatrix::identity(1);
            },
            2.0);
        FAIL() << "expected NumericFailure";
    } catch (const NumericFailure& e) {
        ASSERT_TRUE(e.time().has_value());
        EXPECT_EQ(*e.time(), 2.0);
        ASSERT_TRUE(e.node().has_value());
        EXPECT_NEAR(e.node()->imag(), std::numbers::pi / 2.0, 1e-15);
        EXPECT_EQ(e.achieved_error(), 0.5);
    }
}
