#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "osdyn/errors.hpp"
#include "osdyn/model.hpp"

namespace osdyn {

enum class Scheme { rk4, rk45 };

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    /// Upper bound on the step; <= 0 means period / 64.
    double max_step = 0.0;
    Scheme scheme = Scheme::rk45;

    void validate() const
    {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
            throw ConfigError("integrator tolerances must be positive");
        }
        if (!(max_step >= 0.0) || !std::isfinite(max_step)) {
            throw ConfigError("integrator max_step must be positive");
        }
    }

    double step_cap(double period) const { return max_step > 0.0 ? max_step : period / 64.0; }
};

/// One accepted step with its continuous extension
/// y(theta) = r0 + theta (r1 + (1-theta)(r2 + theta (r3 + (1-theta) r4))).
struct DenseStep {
    double t0 = 0.0;
    double dt = 0.0;
    std::array<State, 5> r{};

    double t1() const { return t0 + dt; }

    State at(double t) const
    {
        const double th = dt > 0.0 ? (t - t0) / dt : 0.0;
        const double th1 = 1.0 - th;
        auto comp = [&](double State::*m) {
            return r[0].*m + th * (r[1].*m + th1 * (r[2].*m + th * (r[3].*m + th1 * r[4].*m)));
        };
        return {comp(&State::v), comp(&State::h)};
    }
};

struct WindowStats {
    double v_inf = std::numeric_limits<double>::infinity();
    double v_sup = -std::numeric_limits<double>::infinity();
    double h_inf = std::numeric_limits<double>::infinity();
    double h_sup = -std::numeric_limits<double>::infinity();
};

/// Accepted step endpoints plus dense output of a single integration run.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(double t0, const State& x0) : times_{t0}, states_{x0} {}

    void push(const DenseStep& step, const State& end)
    {
        steps_.push_back(step);
        times_.push_back(step.t1());
        states_.push_back(end);
    }

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<State>& states() const noexcept { return states_; }
    const std::vector<DenseStep>& steps() const noexcept { return steps_; }
    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    const State& back() const { return states_.back(); }

    /// Dense-output state at t in [t_begin, t_end].
    State at(double t) const
    {
        const double slack = 1e-12 * (1.0 + std::abs(t_end()));
        if (t < t_begin() - slack || t > t_end() + slack) {
            std::ostringstream os;
            os << "time " << t << " outside trajectory span [" << t_begin() << ", " << t_end() << "]";
            throw DomainError(os.str());
        }
        if (steps_.empty() || t <= t_begin()) {
            return states_.front();
        }
        if (t >= t_end()) {
            return states_.back();
        }
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const auto idx = static_cast<std::size_t>(it - times_.begin()) - 1;
        return steps_[std::min(idx, steps_.size() - 1)].at(t);
    }

    /// States on a uniform grid of spacing dt from t_begin, always including t_end.
    std::vector<std::pair<double, State>> sample(double dt) const
    {
        std::vector<std::pair<double, State>> out;
        const double span = t_end() - t_begin();
        const auto n = static_cast<std::size_t>(std::floor(span / dt + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = t_begin() + dt * static_cast<double>(i);
            out.emplace_back(t, at(t));
        }
        if (out.empty() || t_end() - out.back().first > 1e-9 * dt) {
            out.emplace_back(t_end(), states_.back());
        }
        return out;
    }

    /// Extremes over [lo, hi] from step endpoints and interior dense points.
    WindowStats window(double lo, double hi, int dense_per_step = 4) const
    {
        WindowStats w;
        auto take = [&](const State& x) {
            w.v_inf = std::min(w.v_inf, x.v);
            w.v_sup = std::max(w.v_sup, x.v);
            w.h_inf = std::min(w.h_inf, x.h);
            w.h_sup = std::max(w.h_sup, x.h);
        };
        take(at(std::clamp(lo, t_begin(), t_end())));
        take(at(std::clamp(hi, t_begin(), t_end())));
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            const DenseStep& s = steps_[i];
            if (s.t1() < lo || s.t0 > hi) {
                continue;
            }
            for (int k = 1; k <= dense_per_step; ++k) {
                const double t = s.t0 + s.dt * static_cast<double>(k) / static_cast<double>(dense_per_step + 1);
                if (t >= lo && t <= hi) {
                    take(s.at(t));
                }
            }
            if (s.t1() >= lo && s.t1() <= hi) {
                take(states_[i + 1]);
            }
        }
        return w;
    }

private:
    std::vector<double> times_;
    std::vector<State> states_;
    std::vector<DenseStep> steps_;
};

/// What the stepper needs from a planar non-autonomous system.
template <class S>
concept PlanarSystem = requires(const S& s, double t, const State& x) {
    { s.derivative(t, t, x) } -> std::convertible_to<State>;
    { s.margin(t, t, x) } -> std::convertible_to<double>;
    { s.period() } -> std::convertible_to<double>;
    { s.boundaries(t, t) } -> std::convertible_to<std::vector<double>>;
};

/// The reduced model as a PlanarSystem.
class ModelSystem {
public:
    explicit ModelSystem(const SimplifiedParams& p) : p_(&p) {}

    State derivative(double t, double tref, const State& x) const
    {
        return rhs(p_->at(t, tref), t, x, p_->singular_epsilon());
    }

    /// Distance to the singular set; positive means admissible.
    double margin(double t, double tref, const State& x) const
    {
        if (x.h == 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        return x.v - p_->rho().eval(t, tref) - p_->singular_epsilon();
    }

    double period() const { return p_->period(); }

    /// Step-boundary times strictly inside (t0, t1).
    std::vector<double> boundaries(double t0, double t1) const
    {
        std::vector<double> out;
        const double w = p_->period();
        const auto& fr = p_->breakpoints();
        if (fr.size() <= 1) {
            return out;
        }
        const double slack = 1e-12 * w;
        for (double n = std::floor(t0 / w) - 1.0; n * w <= t1 + w; n += 1.0) {
            for (double f : fr) {
                const double t = (n + f) * w;
                if (t > t0 + slack && t < t1 - slack) {
                    out.push_back(t);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    const SimplifiedParams* p_;
};

namespace detail {

inline double error_norm(const State& err, const State& y0, const State& y1, double rtol, double atol)
{
    const double sv = atol + rtol * std::max(std::abs(y0.v), std::abs(y1.v));
    const double sh = atol + rtol * std::max(std::abs(y0.h), std::abs(y1.h));
    const double ev = err.v / sv;
    const double eh = err.h / sh;
    return std::sqrt(0.5 * (ev * ev + eh * eh));
}

inline void check_blowup(const State& x, double t)
{
    if (!std::isfinite(x.v) || !std::isfinite(x.h) || std::abs(x.v) > 1e12 || std::abs(x.h) > 1e12) {
        std::ostringstream os;
        os << "state left the bounded region (|x| > 1e12) at t=" << t;
        throw BlowupError(os.str(), t);
    }
}

/// Bisection on the dense output of `step` for the first zero of the
/// admissibility margin; throws SingularityError at the located time.
template <PlanarSystem System>
[[noreturn]] void locate_singularity(const System& sys, const DenseStep& step, double tref)
{
    double lo = step.t0;
    double hi = step.t1();
    for (int i = 0; i < 80 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (sys.margin(mid, tref, step.at(mid)) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    std::ostringstream os;
    os << "vegetation reached the ungrazable reserve with herbivores present at t=" << hi;
    throw SingularityError(os.str(), hi);
}

// Dormand-Prince 5(4) tableau and dense-output weights.
struct DOPRI5 {
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

inline State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms)
{
    State out = y;
    for (const auto& [c, k] : terms) {
        out.v += h * c * k->v;
        out.h += h * c * k->h;
    }
    return out;
}

/// Cubic Hermite continuous extension in DenseStep form.
inline DenseStep hermite_step(double t0, double dt, const State& y0, const State& y1, const State& f0,
                              const State& f1)
{
    DenseStep s{t0, dt, {}};
    const State diff = y1 - y0;
    const State bspl = dt * f0 - diff;
    s.r[0] = y0;
    s.r[1] = diff;
    s.r[2] = bspl;
    s.r[3] = diff - dt * f1 - bspl;
    s.r[4] = State{};
    return s;
}

/// Integrates from (t0, x0) to t1, handing every accepted step to `observer`.
/// Steps never straddle a coefficient step boundary.
template <PlanarSystem System, class Observer>
State drive(const System& sys, State x, double t0, double t1, const IntegratorConfig& cfg, Observer&& observer)
{
    cfg.validate();
    if (!(t1 >= t0)) {
        throw DomainError("integration end must not precede its start");
    }
    check_blowup(x, t0);
    if (t1 == t0) {
        return x;
    }
    std::vector<double> cuts = sys.boundaries(t0, t1);
    cuts.push_back(t1);

    const double hmax = cfg.step_cap(sys.period());
    const double rtol = cfg.rel_tol;
    const double atol = cfg.abs_tol;
    constexpr std::size_t max_steps = 50'000'000;
    std::size_t steps = 0;
    double t = t0;
    double h = 0.0;
    double facold = 1e-4;

    for (double tb : cuts) {
        const double ta = t;
        const double tref = 0.5 * (ta + tb);
        if (sys.margin(ta, tref, x) <= 0.0) {
            std::ostringstream os;
            os << "state is not admissible at t=" << ta << " (v too close to the ungrazable reserve)";
            throw SingularityError(os.str(), ta);
        }
        const auto f = [&](double s, const State& y) { return sys.derivative(s, tref, y); };

        if (cfg.scheme == Scheme::rk4) {
            const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((tb - ta) / hmax - 1e-9)));
            const double dt = (tb - ta) / static_cast<double>(n);
            // a failed stage splits the step in halves until the crossing is bracketed
            std::function<void(double, double)> advance = [&](double ts, double te) {
                const double hs = te - ts;
                State y1;
                State k1, k4;
                try {
                    k1 = f(ts, x);
                    const State k2 = f(ts + 0.5 * hs, axpy(x, 0.5 * hs, {{1.0, &k1}}));
                    const State k3 = f(ts + 0.5 * hs, axpy(x, 0.5 * hs, {{1.0, &k2}}));
                    k4 = f(te, axpy(x, hs, {{1.0, &k3}}));
                    y1 = axpy(x, hs / 6.0, {{1.0, &k1}, {2.0, &k2}, {2.0, &k3}, {1.0, &k4}});
                } catch (const SingularityError&) {
                    if (hs < 1e-13 * (1.0 + std::abs(ts))) {
                        std::ostringstream os;
                        os << "vegetation reached the ungrazable reserve with herbivores present at t=" << ts;
                        throw SingularityError(os.str(), ts);
                    }
                    const double mid = ts + 0.5 * hs;
                    advance(ts, mid);
                    advance(mid, te);
                    return;
                }
                check_blowup(y1, te);
                const bool admissible = sys.margin(te, tref, y1) > 0.0;
                const State f1 = admissible ? f(te, y1) : k4;
                const DenseStep step = hermite_step(ts, hs, x, y1, k1, f1);
                if (!admissible) {
                    locate_singularity(sys, step, tref);
                }
                observer(step, y1);
                x = y1;
                if (++steps > max_steps) {
                    throw Error("integration exceeded the step budget");
                }
            };
            for (std::size_t i = 0; i < n; ++i) {
                const double ts = ta + dt * static_cast<double>(i);
                const double te = i + 1 == n ? tb : ta + dt * static_cast<double>(i + 1);
                advance(ts, te);
            }
            t = tb;
            continue;
        }

        using T = DOPRI5;
        State k1 = f(ta, x);
        if (h <= 0.0) {
            // initial step guess from the local derivative scale
            const double sv = atol + rtol * std::abs(x.v);
            const double sh = atol + rtol * std::abs(x.h);
            const double d0 = std::hypot(x.v / sv, x.h / sh);
            const double d1 = std::hypot(k1.v / sv, k1.h / sh);
            h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
            h = std::min({h, hmax, tb - ta});
        }
        bool last_rejected = false;
        while (t < tb) {
            bool final_step = false;
            if (t + h >= tb - 1e-13 * (1.0 + std::abs(tb))) {
                h = tb - t;
                final_step = true;
            }
            State k2, k3, k4, k5, k6, k7, y1, err;
            bool stage_failed = false;
            try {
                k2 = f(t + T::c2 * h, axpy(x, h, {{T::a21, &k1}}));
                k3 = f(t + T::c3 * h, axpy(x, h, {{T::a31, &k1}, {T::a32, &k2}}));
                k4 = f(t + T::c4 * h, axpy(x, h, {{T::a41, &k1}, {T::a42, &k2}, {T::a43, &k3}}));
                k5 = f(t + T::c5 * h, axpy(x, h, {{T::a51, &k1}, {T::a52, &k2}, {T::a53, &k3}, {T::a54, &k4}}));
                k6 = f(final_step ? tb : t + h,
                       axpy(x, h, {{T::a61, &k1}, {T::a62, &k2}, {T::a63, &k3}, {T::a64, &k4}, {T::a65, &k5}}));
                y1 = axpy(x, h, {{T::a71, &k1}, {T::a73, &k3}, {T::a74, &k4}, {T::a75, &k5}, {T::a76, &k6}});
                k7 = f(final_step ? tb : t + h, y1);
                err = axpy(State{}, h,
                           {{T::e1, &k1}, {T::e3, &k3}, {T::e4, &k4}, {T::e5, &k5}, {T::e6, &k6}, {T::e7, &k7}});
            } catch (const SingularityError&) {
                stage_failed = true;
            }
            if (stage_failed) {
                // shrink toward the crossing; the accepted time brackets it
                if (h < 1e-14 * (1.0 + std::abs(t))) {
                    std::ostringstream os;
                    os << "vegetation reached the ungrazable reserve with herbivores present at t=" << t;
                    throw SingularityError(os.str(), t);
                }
                h *= 0.5;
                last_rejected = true;
                continue;
            }
            if (!std::isfinite(y1.v) || !std::isfinite(y1.h)) {
                h *= 0.25;
                last_rejected = true;
                if (h < 1e-14 * (1.0 + std::abs(t))) {
                    check_blowup(y1, t);
                }
                continue;
            }
            const double e = error_norm(err, x, y1, rtol, atol);
            constexpr double beta = 0.04;
            constexpr double expo1 = 0.2 - beta * 0.75;
            constexpr double safe = 0.9;
            const double fac11 = std::pow(std::max(e, 1e-300), expo1);
            if (e <= 1.0) {
                double fac = fac11 / std::pow(facold, beta);
                fac = std::clamp(fac / safe, 0.1, 5.0);
                double hnew = h / fac;
                facold = std::max(e, 1e-4);
                const double tnew = final_step ? tb : t + h;
                check_blowup(y1, tnew);
                DenseStep step{t, tnew - t, {}};
                const State ydiff = y1 - x;
                const State bspl = h * k1 - ydiff;
                step.r[0] = x;
                step.r[1] = ydiff;
                step.r[2] = bspl;
                step.r[3] = ydiff - h * k7 - bspl;
                step.r[4] = axpy(State{}, h,
                                 {{T::d1, &k1}, {T::d3, &k3}, {T::d4, &k4}, {T::d5, &k5}, {T::d6, &k6}, {T::d7, &k7}});
                if (sys.margin(tnew, tref, y1) <= 0.0) {
                    locate_singularity(sys, step, tref);
                }
                observer(step, y1);
                x = y1;
                k1 = k7;
                t = tnew;
                if (last_rejected) {
                    hnew = std::min(hnew, h);
                }
                last_rejected = false;
                h = std::min(hnew, hmax);
                if (++steps > max_steps) {
                    throw Error("integration exceeded the step budget");
                }
            } else {
                h /= std::min(5.0, fac11 / safe);
                last_rejected = true;
            }
        }
        t = tb;
    }
    return x;
}

}  // namespace detail

template <PlanarSystem System>
Trajectory integrate(const System& sys, const State& x0, double t0, double t1, const IntegratorConfig& cfg = {})
{
    Trajectory traj(t0, x0);
    detail::drive(sys, x0, t0, t1, cfg, [&](const DenseStep& s, const State& y) { traj.push(s, y); });
    return traj;
}

/// Solution of the reduced model on [t0, t1] from x0 with dense output.
inline Trajectory integrate(const SimplifiedParams& p, const State& x0, double t0, double t1,
                            const IntegratorConfig& cfg = {})
{
    if (!(t1 > t0)) {
        throw DomainError("integrate requires t1 > t0");
    }
    return integrate(ModelSystem(p), x0, t0, t1, cfg);
}

/// Endpoint of the flow from (t0, x0) over a duration dt >= 0.
inline State flow_map(const SimplifiedParams& p, const State& x0, double t0, double dt,
                      const IntegratorConfig& cfg = {})
{
    return detail::drive(ModelSystem(p), x0, t0, t0 + dt, cfg, [](const DenseStep&, const State&) {});
}

}  // namespace osdyn
