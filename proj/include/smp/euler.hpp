#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "smp/error.hpp"
#include "smp/matrix.hpp"

namespace smp {

/// Parameters of the Euler-summation Laplace inversion.
///
/// The alternating series is truncated after `n_trunc` terms and the next
/// `m_euler` partial sums are binomially averaged, so N = n_trunc + m_euler
/// and N + 1 transform values are needed per time point. Discretization error
/// is about e^-A; round-off is amplified by e^(A/2).
struct EulerConfig {
    double A = 18.4;
    int n_trunc = 38;
    int m_euler = 11;

    /// Largest A allowed: e^(A/2)·ε_double stays below 1e-6.
    static constexpr double max_A = 44.0;

    int terms() const noexcept { return n_trunc + m_euler; }

    void check() const {
        if (!(A > 0.0) || A > max_A) throw DomainError("EulerConfig: A must lie in (0, 44]");
        if (n_trunc < 1 || m_euler < 1) throw DomainError("EulerConfig: term counts must be positive");
        if (m_euler > 60) throw DomainError("EulerConfig: m_euler must be <= 60");
    }

    /// w_0 = 1/2 (the trapezoid end point), w_j = 1 for 1 <= j <= n_trunc and
    /// w_{n_trunc+l} = 2^-m Σ_{r=l}^{m} C(m, r) for the averaged tail.
    std::vector<double> weights() const {
        check();
        const int n = n_trunc;
        const int m = m_euler;
        std::vector<double> w(static_cast<std::size_t>(n + m + 1), 1.0);
        w[0] = 0.5;
        // Binomial coefficients of m scaled by 2^-m.
        std::vector<double> binom(static_cast<std::size_t>(m + 1));
        binom[0] = std::ldexp(1.0, -m);
        for (int r = 1; r <= m; ++r) binom[r] = binom[r - 1] * (m - r + 1) / r;
        double tail = 0.0;
        for (int l = m; l >= 1; --l) {
            tail += binom[l];
            w[static_cast<std::size_t>(n + l)] = tail;
        }
        return w;
    }
};

/// s_j = A/(2t) + jπi/t for j = 0..N.
inline std::vector<Complex> euler_nodes(double t, const EulerConfig& config) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("euler_nodes: t must be positive");
    config.check();
    std::vector<Complex> nodes(static_cast<std::size_t>(config.terms() + 1));
    const double re = config.A / (2.0 * t);
    for (std::size_t j = 0; j < nodes.size(); ++j)
        nodes[j] = {re, static_cast<double>(j) * std::numbers::pi / t};
    return nodes;
}

/// Euler inversion with precomputed weights.
inline double euler_invert(std::span<const Complex> lt_values, double t, const EulerConfig& config,
                           std::span<const double> weights) {
    if (lt_values.size() != weights.size())
        throw DomainError("euler_invert: expected " + std::to_string(weights.size()) + " transform values");
    double acc = 0.0;
    for (std::size_t j = 0; j < lt_values.size(); ++j) {
        const double re = lt_values[j].real();
        if (!std::isfinite(re) || !std::isfinite(lt_values[j].imag()))
            throw NumericFailure("euler_invert: non-finite transform value at node " + std::to_string(j));
        acc += (j % 2 == 0 ? weights[j] : -weights[j]) * re;
    }
    return std::exp(0.5 * config.A) / t * acc;
}

/// φ(t) from φ̃ evaluated at euler_nodes(t, config).
inline double euler_invert(std::span<const Complex> lt_values, double t, const EulerConfig& config) {
    if (!(t > 0.0)) throw DomainError("euler_invert: t must be positive");
    const auto w = config.weights();
    return euler_invert(lt_values, t, config, w);
}

/// Inverts a scalar transform at t.
template <typename Transform>
double invert_function(Transform&& phi, double t, const EulerConfig& config = {}) {
    const auto nodes = euler_nodes(t, config);
    std::vector<Complex> values(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) values[j] = phi(nodes[j]);
    return euler_invert(values, t, config);
}

/// Inverts several matrix-valued transforms at t from one pass over the Euler
/// nodes: `evaluator(s)` returns every matrix transform at s, and is called
/// exactly N + 1 times. Errors are re-raised with (t, node) attached.
template <typename Evaluator>
std::vector<RealMatrix> invert_matrix_functions(Evaluator&& evaluator, double t, const EulerConfig& config) {
    const auto nodes = euler_nodes(t, config);
    const auto weights = config.weights();
    std::vector<std::vector<ComplexMatrix>> at_node;
    at_node.reserve(nodes.size());
    for (const auto& s : nodes) {
        try {
            at_node.push_back(evaluator(s));
        } catch (const NumericFailure& e) {
            throw e.at(t, s);
        } catch (const SingularMatrix& e) {
            throw NumericFailure(e.what()).at(t, s);
        }
        if (at_node.back().size() != at_node.front().size())
            throw DomainError("invert_matrix_functions: evaluator returned a varying number of matrices");
    }

    const std::size_t count = at_node.front().size();
    std::vector<RealMatrix> out;
    out.reserve(count);
    std::vector<Complex> series(nodes.size());
    for (std::size_t q = 0; q < count; ++q) {
        const auto& shape = at_node.front()[q];
        RealMatrix result(shape.rows(), shape.cols());
        for (std::size_t i = 0; i < shape.rows(); ++i)
            for (std::size_t j = 0; j < shape.cols(); ++j) {
                for (std::size_t k = 0; k < nodes.size(); ++k) series[k] = at_node[k][q](i, j);
                try {
                    result(i, j) = euler_invert(series, t, config, weights);
                } catch (const NumericFailure& e) {
                    throw e.at(t, nodes.front());
                }
            }
        out.push_back(std::move(result));
    }
    return out;
}

/// Single matrix-valued transform version of invert_matrix_functions.
template <typename Evaluator>
RealMatrix invert_matrix_function(Evaluator&& evaluator, double t, const EulerConfig& config = {}) {
    auto wrapped = [&](Complex s) { return std::vector<ComplexMatrix>{evaluator(s)}; };
    return std::move(invert_matrix_functions(wrapped, t, config).front());
}

} // namespace smp
