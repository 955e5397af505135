#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include "smp/error.hpp"

namespace smp::quadrature {

namespace detail {

// 15-point Kronrod abscissae on [-1, 1] (non-negative half) and weights;
// the embedded 7-point Gauss rule uses the odd-indexed abscissae.
inline constexpr std::array<double, 8> kKronrodX = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodW = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussW = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Value>
struct Segment {
    double a;
    double b;
    Value estimate;
    double error;
    int depth;
    friend bool operator<(const Segment& l, const Segment& r) { return l.error < r.error; }
};

template <typename Value, typename F>
Segment<Value> gauss_kronrod(F& f, double a, double b, int depth) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const Value fc = f(mid);
    Value kronrod = fc * kKronrodW[7];
    Value gauss = fc * kGaussW[3];
    for (std::size_t k = 0; k < 7; ++k) {
        const double dx = half * kKronrodX[k];
        const Value sum = f(mid - dx) + f(mid + dx);
        kronrod += sum * kKronrodW[k];
        if (k % 2 == 1) gauss += sum * kGaussW[k / 2];
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss), depth};
}

} // namespace detail

struct Tolerance {
    double absolute = 1e-13;
    double relative = 1e-10;
    int max_depth = 48;
    std::size_t max_segments = 200000;
};

template <typename Value>
struct Result {
    Value value;
    double error;
    std::size_t evaluations;
};

/// Globally adaptive 7/15-point Gauss–Kronrod integration over the panels
/// delimited by `breakpoints` (sorted, at least two entries). The segment with
/// the largest error estimate is bisected until the summed estimate satisfies
/// err <= max(absolute, relative·|I|). Throws NumericFailure if the budget is
/// exhausted first.
template <typename Value, typename F>
Result<Value> integrate(F&& f, std::span<const double> breakpoints, const Tolerance& tol = {}) {
    if (breakpoints.size() < 2) throw DomainError("integrate: need at least two breakpoints");

    std::priority_queue<detail::Segment<Value>> heap;
    Value total{};
    double total_error = 0.0;
    std::size_t evaluations = 0;

    for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
        if (!(breakpoints[p + 1] > breakpoints[p])) continue;
        auto seg = detail::gauss_kronrod<Value>(f, breakpoints[p], breakpoints[p + 1], 0);
        evaluations += 15;
        total += seg.estimate;
        total_error += seg.error;
        heap.push(seg);
    }

    // Segments that reach max_depth are retired; their error still counts.
    while (!heap.empty()) {
        const double target = std::max(tol.absolute, tol.relative * std::abs(total));
        if (total_error <= target || heap.size() > tol.max_segments) break;

        auto worst = heap.top();
        heap.pop();
        if (worst.depth >= tol.max_depth) continue;
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gauss_kronrod<Value>(f, worst.a, mid, worst.depth + 1);
        auto right = detail::gauss_kronrod<Value>(f, mid, worst.b, worst.depth + 1);
        evaluations += 30;
        total += left.estimate + right.estimate - worst.estimate;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    const double err = std::max(total_error, 0.0);
    const double target = std::max(tol.absolute, tol.relative * std::abs(total));
    if (!(err <= target) || !std::isfinite(std::abs(total)))
        throw NumericFailure("quadrature did not converge (error estimate " + std::to_string(err) + ")", err);
    return {total, err, evaluations};
}

} // namespace smp::quadrature
