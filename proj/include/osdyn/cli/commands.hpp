#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "osdyn/analysis.hpp"
#include "osdyn/cli/format.hpp"
#include "osdyn/cli/scenario.hpp"
#include "osdyn/periodic.hpp"

namespace osdyn::cli {

enum Exit : int {
    ok = 0,
    config_error = 1,
    singular = 2,
    inapplicable = 3,
    no_orbit = 4,
};

/// Command-line overrides shared by all subcommands.
struct CommandOptions {
    std::optional<std::string> out_path;
    std::optional<double> tol;
    std::optional<Scheme> scheme;
    std::optional<double> periods;
    std::optional<int> seed_grid;
    /// Sweep worker cap; falls back to OSDYN_THREADS, then the hardware.
    std::optional<unsigned> threads;
};

inline Scenario apply_overrides(Scenario s, const CommandOptions& o)
{
    if (o.tol) {
        if (!(*o.tol > 0.0)) {
            throw ConfigError("--tol: must be positive");
        }
        s.integrator.rel_tol = *o.tol;
    }
    if (o.scheme) {
        s.integrator.scheme = *o.scheme;
    }
    if (o.periods) {
        if (!(*o.periods > 0.0)) {
            throw ConfigError("--periods: must be positive");
        }
        s.horizon_periods = *o.periods;
        s.probe_periods = *o.periods;
    }
    if (o.seed_grid) {
        if (*o.seed_grid < 1) {
            throw ConfigError("--seed-grid: must be >= 1");
        }
        s.orbit_grid = *o.seed_grid;
        s.orbit_seeds.clear();
    }
    return s;
}

namespace detail {

/// Runs `body` with the --out file, or with `fallback` when no path is set.
inline void with_output(const CommandOptions& o, std::ostream& fallback, const std::function<void(std::ostream&)>& body)
{
    if (!o.out_path) {
        body(fallback);
        return;
    }
    std::ofstream f(*o.out_path, std::ios::binary);
    if (!f) {
        throw ConfigError("--out: cannot write '" + *o.out_path + "'");
    }
    body(f);
}

inline std::string sibling_path(const std::string& path, const std::string& suffix)
{
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    const std::string stem = dot != std::string::npos && (slash == std::string::npos || dot > slash) ? path.substr(0, dot) : path;
    return stem + suffix;
}

inline unsigned worker_count(const CommandOptions& o, std::size_t jobs)
{
    unsigned n = o.threads.value_or(0);
    if (n == 0) {
        if (const char* env = std::getenv("OSDYN_THREADS")) {
            n = static_cast<unsigned>(std::max(0L, std::strtol(env, nullptr, 10)));
        }
    }
    if (n == 0) {
        n = std::max(1U, std::thread::hardware_concurrency());
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

inline void mark_inapplicable(ConditionReport& r, const std::string& name, const std::string& why)
{
    r.set_verdict(name, Verdict::inapplicable);
    r.set_note(name + ".inapplicable", why);
}

}  // namespace detail

/// Every checker on one scenario. Failures of a checker's preconditions are
/// recorded as `inapplicable` verdicts, not thrown.
inline ConditionReport run_checks(const Scenario& s, const SimplifiedParams& p)
{
    ConditionReport r;
    std::optional<ClosedFormLogistic> vs;
    try {
        vs.emplace(vstar(p));
    } catch (const HypothesisError& e) {
        for (const char* name :
             {"vegetation_persistence", "herbivore_persistence", "permanence_iff", "gas", "periodic_existence"}) {
            detail::mark_inapplicable(r, name, e.what());
        }
        return r;
    }

    std::optional<BoundsReport> bounds;
    try {
        bounds = upper_bounds(p, *vs, s.integrator, s.bounds);
        r.append(to_report(*bounds));
    } catch (const Error& e) {
        r.set_note("bounds.error", e.what());
    }

    auto guarded = [&](const std::string& name, auto&& fn) {
        try {
            r.append(fn());
        } catch (const InapplicableError& e) {
            detail::mark_inapplicable(r, name, e.what());
        } catch (const SingularityError& e) {
            detail::mark_inapplicable(r, name, e.what());
        } catch (const BlowupError& e) {
            detail::mark_inapplicable(r, name, e.what());
        }
    };
    auto need_bounds = [&](const std::string& name) {
        if (!bounds) {
            detail::mark_inapplicable(r, name, "bounds unavailable: " + r.note("bounds.error"));
            return false;
        }
        return true;
    };

    if (need_bounds("vegetation_persistence")) {
        guarded("vegetation_persistence", [&] { return check_vegetation_persistence(p, bounds->M1, bounds->M2); });
    }
    guarded("herbivore_persistence", [&] { return check_herbivore_persistence(p, *vs); });
    guarded("permanence_iff", [&] { return check_permanence_iff(p, *vs); });
    if (need_bounds("gas")) {
        guarded("gas", [&] {
            const State x0 = s.initial_state ? *s.initial_state : bounds_grid(p, bounds->M1, 3)[4];
            const Trajectory ref = integrate(p, x0, 0.0, s.horizon_periods * p.period(), s.integrator);
            return check_gas(p, ref, *bounds);
        });
    }
    if (need_bounds("periodic_existence")) {
        guarded("periodic_existence", [&] { return check_periodic_existence(p, *vs, bounds->M1, bounds->M2); });
    }
    return r;
}

/// Trajectory CSV plus a summary of the final half of the horizon.
inline int cmd_simulate(const Scenario& s, const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    const SimplifiedParams p = s.params();
    const State x0 = s.require_initial_state();
    const double w = p.period();
    const double T = s.horizon_periods * w;
    std::optional<Trajectory> traj;
    std::string failure;
    double fail_time = 0.0;
    try {
        traj = integrate(p, x0, 0.0, T, s.integrator);
    } catch (const SingularityError& e) {
        failure = e.what();
        fail_time = e.time();
    } catch (const BlowupError& e) {
        failure = e.what();
        fail_time = e.time();
    }

    detail::with_output(o, out, [&](std::ostream& os) {
        csv_row(os, {"t", "v", "h"});
        if (traj) {
            for (const auto& [t, x] : traj->sample(w / s.samples_per_period)) {
                csv_row(os, {fmt(t), fmt(x.v), fmt(x.h)});
            }
        }
    });

    if (!traj) {
        if (o.out_path) {
            out << "status = singular\n" << "crossing_time = " << fmt(fail_time) << '\n';
        }
        err << "simulate: " << failure << '\n';
        return Exit::singular;
    }
    if (o.out_path) {
        const WindowStats ws = traj->window(0.5 * T, T);
        const State& xf = traj->states().back();
        out << "status = ok\n"
            << "final_t = " << fmt(traj->t_end()) << '\n'
            << "final_v = " << fmt(xf.v) << '\n'
            << "final_h = " << fmt(xf.h) << '\n'
            << "tail_v_inf = " << fmt(ws.v_inf) << '\n'
            << "tail_v_sup = " << fmt(ws.v_sup) << '\n'
            << "tail_h_inf = " << fmt(ws.h_inf) << '\n'
            << "tail_h_sup = " << fmt(ws.h_sup) << '\n'
            << "steps = " << traj->steps().size() << '\n';
    }
    return Exit::ok;
}

inline int cmd_check(const Scenario& s, const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    const SimplifiedParams p = s.params();
    const ConditionReport r = run_checks(s, p);
    detail::with_output(o, out, [&](std::ostream& os) { write_report(os, r); });
    if (r.any_inapplicable()) {
        for (const auto& [k, v] : r.verdicts()) {
            if (v == Verdict::inapplicable) {
                err << "check: " << k << " is inapplicable\n";
            }
        }
        return Exit::inapplicable;
    }
    return Exit::ok;
}

/// Seeds spread over (sup rho, M1] x (0, M2].
inline std::vector<State> orbit_grid_seeds(const SimplifiedParams& p, int n, double M1, double M2)
{
    const double rho = p.rho_sup();
    const double vlo = M1 > rho ? rho : 0.0;
    std::vector<State> out;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double fi = (i + 0.5) / n;
            const double fj = (j + 0.5) / n;
            out.push_back({vlo + fi * (M1 - vlo), fj * M2});
        }
    }
    return out;
}

inline int cmd_orbit(const Scenario& s, const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    const SimplifiedParams p = s.params();
    const double t0 = s.orbit_t0;
    std::optional<ClosedFormLogistic> vs;
    try {
        vs.emplace(vstar(p));
    } catch (const HypothesisError&) {
    }

    std::vector<State> seeds = s.orbit_seeds;
    if (s.orbit_grid > 0) {
        double M1 = std::max(1.0, 2.0 * p.rho_sup());
        double M2 = 1.0;
        if (vs) {
            try {
                const BoundsReport b = upper_bounds(p, *vs, s.integrator, s.bounds);
                M1 = b.M1;
                M2 = b.M2 > 0.0 ? b.M2 : 1e-3;
            } catch (const Error&) {
                M1 = vs->extrema().sup;
            }
        }
        seeds = orbit_grid_seeds(p, s.orbit_grid, M1, M2);
    }
    if (seeds.empty()) {
        throw ConfigError("orbit.seeds: no seeds given (use a list, 'grid:N' or --seed-grid)");
    }

    FixedPointOptions fo;
    fo.integrator = orbit_config(s.integrator);
    const double sep = 1e-6;
    std::vector<PeriodicOrbit> orbits;
    std::vector<std::string> failures;
    auto keep = [&](PeriodicOrbit&& orbit) {
        const bool dup = std::any_of(orbits.begin(), orbits.end(), [&](const PeriodicOrbit& q) {
            return max_norm(q.initial_state - orbit.initial_state) <= sep;
        });
        if (!dup) {
            orbits.push_back(std::move(orbit));
        }
    };
    for (const State& seed : seeds) {
        std::optional<PeriodicOrbit> found;
        std::string why;
        // straight from the seed, then from a long-run image of it
        for (int attempt = 0; attempt < 2 && !found; ++attempt) {
            try {
                const State start = attempt == 0 ? seed : simulation_seed(p, seed, t0, 50, s.integrator);
                found = periodic_orbit(p, start, t0, fo);
            } catch (const Error& e) {
                why = e.what();
            }
        }
        if (!found) {
            failures.push_back(why);
            continue;
        }
        // orbits that collapse onto the herbivore-free orbit are reported as that orbit
        if (vs && max_norm(found->initial_state - State{(*vs)(t0), 0.0}) <= sep) {
            try {
                found = periodic_orbit(p, {(*vs)(t0), 0.0}, t0, fo);
            } catch (const Error& e) {
                failures.push_back(e.what());
                continue;
            }
        }
        keep(std::move(*found));
    }

    detail::with_output(o, out, [&](std::ostream& os) {
        csv_row(os, {"orbit", "kind", "t0", "v0", "h0", "residual", "iterations", "method", "mu1_re", "mu1_im",
                     "mu2_re", "mu2_im", "stability", "file"});
        for (std::size_t k = 0; k < orbits.size(); ++k) {
            const auto& q = orbits[k];
            std::string file;
            if (o.out_path) {
                file = detail::sibling_path(*o.out_path, "_orbit" + std::to_string(k) + ".csv");
                std::ofstream f(file, std::ios::binary);
                if (!f) {
                    throw ConfigError("--out: cannot write '" + file + "'");
                }
                csv_row(f, {"t", "v", "h"});
                for (const auto& [t, x] : q.grid(256)) {
                    csv_row(f, {fmt(t), fmt(x.v), fmt(x.h)});
                }
            }
            const auto& fl = q.floquet;
            csv_row(os, {std::to_string(k), q.initial_state.h == 0.0 ? "boundary" : "interior", fmt(q.t0),
                         fmt(q.initial_state.v), fmt(q.initial_state.h), fmt(q.search.residual),
                         std::to_string(q.search.iterations), q.search.method, fmt(fl.mu1.real()), fmt(fl.mu1.imag()),
                         fmt(fl.mu2.real()), fmt(fl.mu2.imag()), to_string(fl.stability), file});
        }
    });
    if (orbits.empty()) {
        err << "orbit: no seed converged (" << failures.size() << " failures)";
        if (!failures.empty()) {
            err << "; last: " << failures.back();
        }
        err << '\n';
        return Exit::no_orbit;
    }
    return Exit::ok;
}

/// Column order of sweep rows after the knob values.
inline const std::vector<std::string>& sweep_columns()
{
    static const std::vector<std::string> cols{
        "bounds.M1",
        "bounds.M2_empirical",
        "vegetation_persistence.margin",
        "herbivore_persistence.margin",
        "permanence_iff.margin",
        "permanence_iff.proof_variant_margin",
        "permanence_iff.invasion_exponent",
        "gas.inf_condition_1",
        "gas.inf_condition_2",
        "gas.avg_vegetation_margin",
        "gas.avg_herbivore_margin",
        "periodic_existence.margin_1",
        "periodic_existence.margin_2",
        "periodic_existence.margin_3",
    };
    return cols;
}

inline const std::vector<std::string>& sweep_verdicts()
{
    static const std::vector<std::string> cols{"vegetation_persistence", "herbivore_persistence", "permanence_iff",
                                               "gas", "periodic_existence"};
    return cols;
}

/// One sweep row: knob values, margins, verdicts and the probe run's final state.
inline std::vector<std::string> sweep_point(const Scenario& s, const std::vector<double>& knob_values)
{
    std::vector<std::string> row;
    for (double v : knob_values) {
        row.push_back(fmt(v));
    }
    const auto pad = [&](const std::string& status) {
        row.resize(knob_values.size() + sweep_columns().size() + sweep_verdicts().size() + 2, "nan");
        row.push_back(status);
        return row;
    };
    std::optional<SimplifiedParams> p;
    try {
        p.emplace(s.params());
    } catch (const Error&) {
        return pad("invalid_params");
    }
    ConditionReport r;
    try {
        r = run_checks(s, *p);
    } catch (const Error&) {
        return pad("error");
    }
    for (const auto& c : sweep_columns()) {
        row.push_back(r.has_value(c) ? fmt(r.value(c)) : "nan");
    }
    for (const auto& c : sweep_verdicts()) {
        row.push_back(r.has_verdict(c) ? to_string(r.verdict_state(c)) : "nan");
    }
    const State x0 = s.require_initial_state();
    try {
        const State xf = flow_map(*p, x0, 0.0, s.probe_periods * p->period(), s.integrator);
        row.push_back(fmt(xf.v));
        row.push_back(fmt(xf.h));
        row.push_back("ok");
    } catch (const SingularityError&) {
        row.push_back("nan");
        row.push_back("nan");
        row.push_back("singular");
    } catch (const BlowupError&) {
        row.push_back("nan");
        row.push_back("nan");
        row.push_back("blowup");
    }
    return row;
}

/// Grid sweep over one or two knobs. Points run concurrently; rows are
/// written in row-major grid order as soon as all earlier rows are done.
inline int cmd_sweep(const Scenario& s, const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    (void)err;
    if (s.sweep.empty()) {
        throw ConfigError("sweep: missing");
    }
    s.require_initial_state();
    for (const auto& k : s.sweep) {
        (void)s.with_knob(k.path, k.from);
    }
    std::vector<std::vector<double>> points;
    const int n0 = s.sweep[0].count;
    const int n1 = s.sweep.size() > 1 ? s.sweep[1].count : 1;
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            std::vector<double> pt{s.sweep[0].at(i)};
            if (s.sweep.size() > 1) {
                pt.push_back(s.sweep[1].at(j));
            }
            points.push_back(std::move(pt));
        }
    }

    std::vector<std::optional<std::vector<std::string>>> rows(points.size());
    std::mutex mu;
    std::condition_variable ready;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            Scenario sp = s;
            for (std::size_t k = 0; k < points[i].size(); ++k) {
                sp = sp.with_knob(s.sweep[k].path, points[i][k]);
            }
            auto row = sweep_point(sp, points[i]);
            {
                std::lock_guard lock(mu);
                rows[i] = std::move(row);
            }
            ready.notify_all();
        }
    };

    const unsigned workers = detail::worker_count(o, points.size());
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    detail::with_output(o, out, [&](std::ostream& os) {
        std::vector<std::string> header;
        for (const auto& k : s.sweep) {
            header.push_back(k.path);
        }
        for (const auto& c : sweep_columns()) {
            header.push_back(c);
        }
        for (const auto& c : sweep_verdicts()) {
            header.push_back(c);
        }
        header.insert(header.end(), {"final_v", "final_h", "status"});
        csv_row(os, header);
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::unique_lock lock(mu);
            ready.wait(lock, [&] { return rows[i].has_value(); });
            const auto row = std::move(*rows[i]);
            lock.unlock();
            csv_row(os, row);
            os.flush();
        }
    });
    return Exit::ok;
}

/// Writes the scenario with raw parameters replaced by the equivalent
/// simplified block.
inline int cmd_reduce(const Scenario& s, const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    if (!s.raw) {
        throw ConfigError("raw_params: reduce needs a raw_params block");
    }
    std::optional<SimplifiedParams> p;
    try {
        p.emplace(reduce(s.raw_params()));
    } catch (const HalfSaturationMismatch& e) {
        err << "reduce: " << e.what() << '\n';
        return Exit::config_error;
    } catch (const NonpositiveBeta& e) {
        err << "reduce: " << e.what() << '\n';
        return Exit::config_error;
    }
    Scenario r = s;
    r.raw = false;
    r.coefficients.clear();
    for (auto [name, fn] : p->named()) {
        if (!fn->closed_form()) {
            err << "reduce: coefficient '" << name
                << "' is a product or quotient of seasonal raw parameters and has no finite harmonic/step form\n";
            return Exit::config_error;
        }
        r.coefficients.emplace_back(name, *fn->closed_form());
    }
    detail::with_output(o, out, [&](std::ostream& os) { os << emit(r); });
    return Exit::ok;
}

}  // namespace osdyn::cli
