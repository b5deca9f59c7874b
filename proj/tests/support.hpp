#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "osdyn/coefficients.hpp"
#include "osdyn/model.hpp"

namespace osdyn::support {

/// Random nonnegative coefficient: base plus up to three harmonics and an
/// optional 2-4 piece seasonal step profile.
inline PeriodicCoefficient random_coefficient(std::mt19937_64& rng, double period, bool with_segments = true)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double base = 0.5 + 2.0 * unit(rng);
    std::vector<Harmonic> hs;
    const int nh = static_cast<int>(unit(rng) * 4.0);
    double amp_budget = 0.9 * base;
    for (int i = 0; i < nh; ++i) {
        const double amp = amp_budget * unit(rng) * 0.5;
        amp_budget -= amp;
        hs.push_back({amp, 1 + static_cast<int>(unit(rng) * 4.0), 6.283185307179586 * unit(rng)});
    }
    std::vector<Segment> segs;
    if (with_segments && unit(rng) < 0.6) {
        const int ns = 2 + static_cast<int>(unit(rng) * 3.0);
        std::vector<double> cuts{0.0};
        for (int i = 1; i < ns; ++i) {
            cuts.push_back(unit(rng));
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.push_back(1.0);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] - cuts[i] < 1e-3) {
                continue;
            }
            segs.push_back({cuts[i], cuts[i + 1], 2.0 * unit(rng)});
        }
        // re-tile after dropping slivers
        if (!segs.empty()) {
            segs.front().start = 0.0;
            for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
                segs[i].end = segs[i + 1].start;
            }
            segs.back().end = 1.0;
        }
    }
    return PeriodicCoefficient(period, base, std::move(hs), std::move(segs));
}

/// Brute-force extrema on a uniform grid.
template <class F>
std::pair<double, double> grid_extrema(F&& f, double period, std::size_t n)
{
    double lo = f(0.0);
    double hi = lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = f(period * static_cast<double>(i) / static_cast<double>(n));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

struct ConstantSet {
    double a = 1.0, b = 1.0, c = 0.1, alpha = 2.0, beta = 1.0, gamma = 0.05, rho = 0.0, R = 0.2;
};

inline SimplifiedParams constant_params(const ConstantSet& k, double period = 1.0)
{
    auto C = [period](double v) { return PeriodicFunction::constant(v, period); };
    return SimplifiedParams({C(k.a), C(k.b), C(k.c), C(k.alpha), C(k.beta), C(k.gamma), C(k.rho), C(k.R)});
}

/// Interior equilibrium of the constant-coefficient system: x = (v - rho)/(beta + v)
/// solves alpha x^2 - R x - gamma = 0, then h balances the vegetation equation.
inline State constant_equilibrium(const ConstantSet& k)
{
    const double x = (k.R + std::sqrt(k.R * k.R + 4.0 * k.alpha * k.gamma)) / (2.0 * k.alpha);
    const double v = (x * k.beta + k.rho) / (1.0 - x);
    const double h = v * (k.a - k.b * v) * (k.beta + v) / (k.c * (v - k.rho));
    return {v, h};
}

}  // namespace osdyn::support
