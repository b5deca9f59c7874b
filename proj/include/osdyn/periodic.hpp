#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "osdyn/analysis.hpp"
#include "osdyn/errors.hpp"
#include "osdyn/integrate.hpp"
#include "osdyn/model.hpp"

namespace osdyn {

/// Period map: the state after exactly one period starting from x0 at t0.
inline State poincare(const SimplifiedParams& p, const State& x0, double t0, const IntegratorConfig& cfg = {})
{
    return flow_map(p, x0, t0, p.period(), cfg);
}

/// Integration settings for orbit work. Finite differences of the period map
/// divide integration error by the FD step, so adaptive runs are tightened.
inline IntegratorConfig orbit_config(IntegratorConfig cfg)
{
    if (cfg.scheme == Scheme::rk45) {
        cfg.rel_tol = std::min(cfg.rel_tol, 1e-12);
        cfg.abs_tol = std::min(cfg.abs_tol, 1e-14);
    }
    return cfg;
}

struct FixedPointOptions {
    double fp_tol = 1e-10;
    int max_iter = 50;
    int max_picard = 200;
    double fd_step = 1e-6;
    IntegratorConfig integrator = orbit_config({});
};

struct PoincareResult {
    State fixed_state;
    /// max-norm of sigma(x) - x, scaled by 1 + max-norm of x
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string method;
    std::vector<double> history;
};

/// Residual of the period map in the scaled max-norm used for convergence.
inline double scaled_residual(const State& x, const State& sx) { return max_norm(sx - x) / (1.0 + max_norm(x)); }

namespace detail {

inline double fd_delta(double xj, double rel) { return rel * std::max(std::abs(xj), 1.0); }

inline bool admissible(const SimplifiedParams& p, const State& x, double t0)
{
    if (!(x.v > 0.0) || x.h < 0.0 || !std::isfinite(x.v) || !std::isfinite(x.h)) {
        return false;
    }
    return x.h == 0.0 || x.v - p.rho().eval(t0, t0) > p.singular_epsilon();
}

}  // namespace detail

/// Damped Newton on F(x) = sigma(x) - x with a forward-difference Jacobian,
/// falling back to direct iteration x <- sigma(x) when the Jacobian is singular
/// or Newton stalls.
inline PoincareResult find_fixed_point(const SimplifiedParams& p, const State& guess, double t0 = 0.0,
                                       const FixedPointOptions& opts = {})
{
    if (!detail::admissible(p, guess, t0)) {
        throw DomainError("fixed-point seed is not an admissible state");
    }
    const auto& cfg = opts.integrator;
    const double rho0 = p.rho().eval(t0, t0);
    const double floor = 1e-4 * (1.0 + p.rho_sup());
    PoincareResult out;
    out.method = "newton";
    State x = guess;
    State sx = poincare(p, x, t0, cfg);
    double res = scaled_residual(x, sx);
    out.history.push_back(res);
    bool newton_failed = false;
    // once inside fp_tol, keep polishing while Newton still gains: weakly
    // contracting orbits amplify the residual into the state error
    const double polish = 1e-3 * opts.fp_tol;

    while (res > polish && out.iterations < opts.max_iter) {
        // forward-difference Jacobian of F
        std::array<State, 2> cols;
        for (int j = 0; j < 2; ++j) {
            State xp = x;
            double& comp = j == 0 ? xp.v : xp.h;
            const double d = detail::fd_delta(comp, opts.fd_step);
            comp += d;
            const State fp = poincare(p, xp, t0, cfg) - xp;
            cols[static_cast<std::size_t>(j)] = (1.0 / d) * (fp - (sx - x));
        }
        const double j11 = cols[0].v, j21 = cols[0].h, j12 = cols[1].v, j22 = cols[1].h;
        const double det = j11 * j22 - j12 * j21;
        const double scale = std::max({std::abs(j11), std::abs(j12), std::abs(j21), std::abs(j22), 1e-300});
        if (!(std::abs(det) > 1e-12 * scale * scale) || !std::isfinite(det)) {
            newton_failed = res > opts.fp_tol;
            break;
        }
        const State F = sx - x;
        const State dx{-(j22 * F.v - j12 * F.h) / det, -(-j21 * F.v + j11 * F.h) / det};

        // trust region: no component moves by more than 1 + its magnitude,
        // which keeps trials out of the stiff large-h corner
        const double reach = std::max(std::abs(dx.v) / (1.0 + std::abs(x.v)), std::abs(dx.h) / (1.0 + std::abs(x.h)));
        double lambda = reach > 1.0 ? 1.0 / reach : 1.0;
        bool improved = false;
        for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
            const State trial = x + lambda * dx;
            // the herbivore rate is stiff like gamma/(v - rho) near the reserve,
            // and the origin is a trivial fixed point: stay clear of both
            const double gap = x.v - rho0;
            if (!detail::admissible(p, trial, t0) || trial.v - rho0 < 0.1 * gap || trial.v - rho0 < floor) {
                continue;
            }
            State strial;
            try {
                strial = poincare(p, trial, t0, cfg);
            } catch (const Error&) {
                continue;
            }
            const double r = scaled_residual(trial, strial);
            if (r < res) {
                x = trial;
                sx = strial;
                res = r;
                improved = true;
                break;
            }
        }
        if (!improved) {
            newton_failed = res > opts.fp_tol;
            break;
        }
        ++out.iterations;
        out.history.push_back(res);
    }

    if (res > opts.fp_tol && newton_failed) {
        out.method = "picard";
        for (int k = 0; k < opts.max_picard && res > opts.fp_tol; ++k) {
            x = sx;
            try {
                sx = poincare(p, x, t0, cfg);
            } catch (const Error&) {
                break;
            }
            res = scaled_residual(x, sx);
            ++out.iterations;
            out.history.push_back(res);
        }
    }

    out.fixed_state = x;
    out.residual = res;
    out.converged = res <= opts.fp_tol;
    return out;
}

/// As find_fixed_point, but NoConvergence carries the residual history.
inline PoincareResult require_fixed_point(const SimplifiedParams& p, const State& guess, double t0 = 0.0,
                                          const FixedPointOptions& opts = {})
{
    PoincareResult r = find_fixed_point(p, guess, t0, opts);
    if (!r.converged) {
        std::ostringstream os;
        os << "period-map fixed point not found from (" << guess.v << ", " << guess.h << "): residual " << r.residual
           << " after " << r.iterations << " iterations (" << r.method << ")";
        throw NoConvergence(os.str(), r.history);
    }
    return r;
}

/// Seed for the fixed-point search: the state at t0 + n w after a long run.
inline State simulation_seed(const SimplifiedParams& p, const State& x0, double t0, int periods,
                             const IntegratorConfig& cfg = {})
{
    return flow_map(p, x0, t0, periods * p.period(), cfg);
}

enum class Stability { attracting, repelling, saddle, marginal };

inline const char* to_string(Stability s)
{
    switch (s) {
    case Stability::attracting:
        return "attracting";
    case Stability::repelling:
        return "repelling";
    case Stability::saddle:
        return "saddle";
    case Stability::marginal:
        return "marginal";
    }
    return "?";
}

struct Floquet {
    std::array<double, 4> matrix{};  // row-major d sigma / d x
    std::complex<double> mu1, mu2;
    Stability stability = Stability::marginal;
};

inline Stability classify(std::complex<double> mu1, std::complex<double> mu2, double band = 1e-6)
{
    const double r1 = std::abs(mu1);
    const double r2 = std::abs(mu2);
    auto inside = [band](double r) { return r < 1.0 - band; };
    auto outside = [band](double r) { return r > 1.0 + band; };
    if (inside(r1) && inside(r2)) {
        return Stability::attracting;
    }
    if (outside(r1) && outside(r2)) {
        return Stability::repelling;
    }
    if ((inside(r1) && outside(r2)) || (outside(r1) && inside(r2))) {
        return Stability::saddle;
    }
    return Stability::marginal;
}

/// Eigenvalues of a real 2x2 matrix, larger modulus (or + imaginary part) first.
inline std::pair<std::complex<double>, std::complex<double>> eigenvalues(const std::array<double, 4>& m)
{
    const double tr = m[0] + m[3];
    const double det = m[0] * m[3] - m[1] * m[2];
    const double disc = 0.25 * tr * tr - det;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        // avoid cancellation in the smaller root
        const double big = 0.5 * tr + (tr >= 0.0 ? s : -s);
        const double small = big != 0.0 ? det / big : 0.5 * tr - s;
        return std::abs(big) >= std::abs(small) ? std::pair{std::complex<double>(big), std::complex<double>(small)}
                                                : std::pair{std::complex<double>(small), std::complex<double>(big)};
    }
    const double s = std::sqrt(-disc);
    return {{0.5 * tr, s}, {0.5 * tr, -s}};
}

/// Central-difference linearization of the period map about x.
inline Floquet monodromy(const SimplifiedParams& p, const State& x, double t0 = 0.0,
                         const IntegratorConfig& cfg = orbit_config({}), double fd_step = 1e-6)
{
    Floquet f;
    for (int j = 0; j < 2; ++j) {
        State xp = x;
        State xm = x;
        const double d = detail::fd_delta(j == 0 ? x.v : x.h, fd_step);
        (j == 0 ? xp.v : xp.h) += d;
        (j == 0 ? xm.v : xm.h) -= d;
        const State col = (0.5 / d) * (poincare(p, xp, t0, cfg) - poincare(p, xm, t0, cfg));
        f.matrix[static_cast<std::size_t>(j)] = col.v;
        f.matrix[static_cast<std::size_t>(2 + j)] = col.h;
    }
    std::tie(f.mu1, f.mu2) = eigenvalues(f.matrix);
    f.stability = classify(f.mu1, f.mu2);
    return f;
}

/// Multipliers of the herbivore-free orbit (v*, 0) from the diagonal
/// variational equation: exp(int (a - 2 b v*)) and exp(int percapita_h(v*)).
struct BoundaryMultipliers {
    double vegetation = 0.0;
    double herbivore = 0.0;
};

inline BoundaryMultipliers boundary_multipliers(const SimplifiedParams& p, const ClosedFormLogistic& vs)
{
    const PeriodicFunction v = vs.as_function();
    detail::require_above_reserve(v, p.rho(), "boundary_multipliers");
    const double w = p.period();
    const auto x = (v - p.rho()) / (p.beta() + v);
    const double veg = (p.a() - 2.0 * p.b() * v).quadrature_average().value;
    const double herb = (-p.R() + p.alpha() * x - p.gamma() / x).quadrature_average().value;
    return {std::exp(w * veg), std::exp(w * herb)};
}

/// Finite-difference boundary multipliers, ordered (vegetation, herbivore).
/// On the boundary the monodromy matrix is upper triangular.
inline BoundaryMultipliers boundary_multipliers_fd(const SimplifiedParams& p, const ClosedFormLogistic& vs,
                                                   double t0 = 0.0, const IntegratorConfig& cfg = orbit_config({}))
{
    const Floquet f = monodromy(p, {vs(t0), 0.0}, t0, cfg);
    return {f.matrix[0], f.matrix[3]};
}

struct PeriodicOrbit {
    State initial_state;
    double t0 = 0.0;
    double period = 1.0;
    PoincareResult search;
    Trajectory samples;
    Floquet floquet;

    /// n equally spaced samples on [t0, t0 + period).
    std::vector<std::pair<double, State>> grid(std::size_t n = 256) const
    {
        auto g = samples.sample(period / static_cast<double>(n));
        g.resize(std::min(g.size(), n));
        return g;
    }
};

/// Converged fixed point, one-period trajectory and Floquet data.
inline PeriodicOrbit periodic_orbit(const SimplifiedParams& p, const State& guess, double t0 = 0.0,
                                    const FixedPointOptions& opts = {})
{
    PeriodicOrbit o;
    o.search = require_fixed_point(p, guess, t0, opts);
    o.initial_state = o.search.fixed_state;
    o.t0 = t0;
    o.period = p.period();
    o.samples = integrate(p, o.initial_state, t0, t0 + p.period(), opts.integrator);
    o.floquet = monodromy(p, o.initial_state, t0, opts.integrator, opts.fd_step);
    return o;
}

/// Orbits found from several seeds, with duplicates (max-norm within `sep`)
/// removed. Seeds that fail to converge are skipped and counted.
struct OrbitSearch {
    std::vector<PeriodicOrbit> orbits;
    std::vector<std::string> failures;
};

inline OrbitSearch multi_seed_orbits(const SimplifiedParams& p, const std::vector<State>& seeds, double t0 = 0.0,
                                     const FixedPointOptions& opts = {}, double sep = 1e-6)
{
    OrbitSearch out;
    for (const State& s : seeds) {
        try {
            PeriodicOrbit o = periodic_orbit(p, s, t0, opts);
            const bool dup = std::any_of(out.orbits.begin(), out.orbits.end(), [&](const PeriodicOrbit& q) {
                return max_norm(q.initial_state - o.initial_state) <= sep;
            });
            if (!dup) {
                out.orbits.push_back(std::move(o));
            }
        } catch (const Error& e) {
            out.failures.emplace_back(e.what());
        }
    }
    return out;
}

}  // namespace osdyn
