#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace osdyn::quadrature {

/// Gauss-Legendre nodes and weights on [-1, 1], computed once per order by
/// Newton iteration on P_N.
template <std::size_t N>
struct GaussLegendre {
    static_assert(N >= 2);

    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    static const GaussLegendre& rule()
    {
        static const GaussLegendre instance = build();
        return instance;
    }

private:
    static GaussLegendre build()
    {
        GaussLegendre gl;
        const std::size_t half = (N + 1) / 2;
        for (std::size_t i = 0; i < half; ++i) {
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(N) + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = x;
                for (std::size_t k = 2; k <= N; ++k) {
                    const double kk = static_cast<double>(k);
                    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                    p0 = p1;
                    p1 = p2;
                }
                dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) {
                    break;
                }
            }
            // recompute derivative at the converged node for the weight
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= N; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            gl.nodes[i] = -x;
            gl.weights[i] = w;
            gl.nodes[N - 1 - i] = x;
            gl.weights[N - 1 - i] = w;
        }
        if (N % 2 == 1) {
            gl.nodes[N / 2] = 0.0;
        }
        return gl;
    }
};

/// Single-panel Gauss-Legendre rule on [lo, hi].
template <std::size_t N, class F>
double gauss(F&& f, double lo, double hi)
{
    const auto& gl = GaussLegendre<N>::rule();
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        sum += gl.weights[i] * f(mid + half * gl.nodes[i]);
    }
    return sum * half;
}

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

template <class F>
Estimate adaptive(F& f, double lo, double hi, double whole, double tol, int depth)
{
    const double mid = 0.5 * (lo + hi);
    const double left = gauss<64>(f, lo, mid);
    const double right = gauss<64>(f, mid, hi);
    const double refined = left + right;
    const double diff = std::abs(refined - whole);
    if (diff <= tol * std::max(1.0, std::abs(refined)) || depth <= 0) {
        return {refined, diff};
    }
    const Estimate l = adaptive(f, lo, mid, left, 0.5 * tol, depth - 1);
    const Estimate r = adaptive(f, mid, hi, right, 0.5 * tol, depth - 1);
    return {l.value + r.value, l.error + r.error};
}

}  // namespace detail

/// Integral of f over [lo, hi] by 64-node Gauss-Legendre with a panel-halving
/// (Richardson-style) check; panels are bisected until one- and two-panel
/// results agree to `tol` relative. `f` must be smooth on the open interval.
template <class F>
Estimate integrate(F&& f, double lo, double hi, double tol = 1e-12, int max_depth = 12)
{
    if (hi <= lo) {
        return {};
    }
    const double whole = gauss<64>(f, lo, hi);
    return detail::adaptive(f, lo, hi, whole, tol, max_depth);
}

}  // namespace osdyn::quadrature
