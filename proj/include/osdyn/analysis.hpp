#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "osdyn/coefficients.hpp"
#include "osdyn/errors.hpp"
#include "osdyn/integrate.hpp"
#include "osdyn/model.hpp"
#include "osdyn/quadrature.hpp"

namespace osdyn {

/// The positive periodic solution of v' = v (a - b v), evaluated from
///   1 / v*(t) = e^{-A(t)} c* + int_0^t b(s) e^{A(s) - A(t)} ds,  A(t) = int_0^t a,
/// with c* = int_0^w b e^{A} / (e^{A(w)} - 1), the unique constant that makes
/// v*(0) = v*(w). Cumulative integrals are cached per panel; evaluation inside
/// a panel uses nested Gauss-Legendre rules.
class ClosedFormLogistic {
public:
    ClosedFormLogistic(const PeriodicFunction& a, const PeriodicFunction& b, std::size_t panels_per_period = 512)
    {
        detail::require_same_period(a.period(), b.period());
        const double avg_a = a.average();
        const double avg_b = b.average();
        if (!(avg_a > 0.0) || !(avg_b > 0.0)) {
            std::ostringstream os;
            os << "periodic logistic solution needs positive averages of a and b (got " << avg_a << ", " << avg_b
               << ")";
            throw HypothesisError(os.str());
        }
        auto impl = std::make_shared<Impl>();
        impl->a = a;
        impl->b = b;
        impl->period = a.period();
        impl->breaks = detail::merge_breaks(a.breakpoints(), b.breakpoints());
        impl->build(panels_per_period);
        impl_ = std::move(impl);
    }

    double operator()(double t) const { return impl_->value(t); }
    double period() const noexcept { return impl_->period; }

    /// Integration constant of the closed form, pinned by periodicity.
    double c_star() const noexcept { return impl_->bn / -std::expm1(-impl_->a_total); }
    /// int_0^w a
    double integral_a() const noexcept { return impl_->a_total; }

    const Extrema& extrema() const { return impl_->range(); }

    /// v* as a lazily evaluated periodic expression for the averaging calculus.
    PeriodicFunction as_function() const
    {
        auto impl = impl_;
        return PeriodicFunction(impl->period, [impl](double t, double) { return impl->value(t); }, impl->breaks);
    }

private:
    static constexpr std::size_t order = 12;

    struct Panel {
        double lo, hi, tref;
        double a_lo;  // A(lo)
        double i_lo;  // int_0^lo b(s) e^{A(s) - A(lo)} ds
    };

    struct Impl {
        PeriodicFunction a, b;
        double period = 1.0;
        std::vector<double> breaks;
        std::vector<Panel> panels;
        std::vector<double> starts;
        double a_total = 0.0;
        double bn = 0.0;  // int_0^w b(s) e^{A(s) - A(w)} ds
        mutable std::once_flag range_once;
        mutable Extrema range_cache;

        double a_from(const Panel& p, double t) const
        {
            return quadrature::gauss<order>([&](double s) { return a.eval(s, p.tref); }, p.lo, t);
        }

        /// int_lo^t b(s) e^{A(s) - A(t)} ds, given dA = A(t) - A(lo)
        double j_from(const Panel& p, double t, double dA) const
        {
            return quadrature::gauss<order>(
                [&](double s) { return b.eval(s, p.tref) * std::exp(a_from(p, s) - dA); }, p.lo, t);
        }

        void build(std::size_t per_period)
        {
            std::vector<double> bounds = breaks;
            bounds.push_back(1.0);
            double a_acc = 0.0;
            double i_acc = 0.0;
            for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
                const double lo = bounds[k] * period;
                const double hi = bounds[k + 1] * period;
                const auto n = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::ceil((bounds[k + 1] - bounds[k]) * static_cast<double>(per_period))));
                const double tref = 0.5 * (lo + hi);
                for (std::size_t i = 0; i < n; ++i) {
                    const double plo = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
                    const double phi = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(n);
                    Panel p{plo, phi, tref, a_acc, i_acc};
                    panels.push_back(p);
                    starts.push_back(plo);
                    const double dA = a_from(p, phi);
                    i_acc = i_acc * std::exp(-dA) + j_from(p, phi, dA);
                    a_acc += dA;
                }
            }
            a_total = a_acc;
            bn = i_acc;
        }

        double value(double t) const
        {
            const double tau = detail::wrap_time(t, period);
            auto it = std::upper_bound(starts.begin(), starts.end(), tau);
            const std::size_t k = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
            const Panel& p = panels[k];
            const double dA = a_from(p, tau);
            const double at = p.a_lo + dA;
            const double u = std::exp(-at) * bn / -std::expm1(-a_total) + p.i_lo * std::exp(-dA) + j_from(p, tau, dA);
            return 1.0 / u;
        }

        const Extrema& range() const
        {
            std::call_once(range_once, [this] {
                range_cache = detail::piecewise_extrema([this](double t, double) { return value(t); }, period,
                                                        breaks);
            });
            return range_cache;
        }
    };

    std::shared_ptr<const Impl> impl_;
};

/// Closed-form periodic solution of the herbivore-free subsystem.
inline ClosedFormLogistic vstar(const PeriodicFunction& a, const PeriodicFunction& b)
{
    return ClosedFormLogistic(a, b);
}

inline ClosedFormLogistic vstar(const SimplifiedParams& p) { return ClosedFormLogistic(p.a(), p.b()); }

/// Time series sampled at the accepted steps of a trajectory.
struct Series {
    std::vector<double> t;
    std::vector<double> value;

    /// Largest single-step increase (negative when strictly decreasing).
    double max_increase() const
    {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < value.size(); ++i) {
            worst = std::max(worst, value[i] - value[i - 1]);
        }
        return worst;
    }
};

/// W(t) = |ln v(t) - ln v*(t)| along a herbivore-free trajectory.
inline Series lyapunov_W(const Trajectory& traj, const ClosedFormLogistic& ref)
{
    Series out;
    for (std::size_t i = 0; i < traj.times().size(); ++i) {
        const double t = traj.times()[i];
        const State& x = traj.states()[i];
        if (!(x.v > 0.0)) {
            throw DomainError("lyapunov_W needs v > 0 on every sample");
        }
        out.t.push_back(t);
        out.value.push_back(std::abs(std::log(x.v) - std::log(ref(t))));
    }
    return out;
}

/// X(t) = |ln v - ln v^| + |ln h - ln h^| on the given time grid.
inline Series lyapunov_X(const Trajectory& traj, const Trajectory& ref, const std::vector<double>& times)
{
    Series out;
    for (double t : times) {
        const State x = traj.at(t);
        const State y = ref.at(t);
        if (!(x.v > 0.0 && x.h > 0.0 && y.v > 0.0 && y.h > 0.0)) {
            throw DomainError("lyapunov_X needs strictly positive states on both trajectories");
        }
        out.t.push_back(t);
        out.value.push_back(std::abs(std::log(x.v) - std::log(y.v)) + std::abs(std::log(x.h) - std::log(y.h)));
    }
    return out;
}

/// Uniform grid of n+1 times covering the common span of two trajectories.
inline std::vector<double> common_grid(const Trajectory& x, const Trajectory& y, std::size_t n)
{
    const double lo = std::max(x.t_begin(), y.t_begin());
    const double hi = std::min(x.t_end(), y.t_end());
    std::vector<double> out;
    for (std::size_t i = 0; i <= n; ++i) {
        out.push_back(i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n));
    }
    return out;
}

enum class Verdict { holds, fails, inapplicable };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::holds:
        return "true";
    case Verdict::fails:
        return "false";
    case Verdict::inapplicable:
        return "inapplicable";
    }
    return "?";
}

/// Ordered named results of one or more checkers. Verdicts are strict sign
/// tests; margins are kept so callers can apply their own band.
class ConditionReport {
public:
    void set_value(const std::string& name, double v) { upsert(values_, name, v); }
    void set_verdict(const std::string& name, bool holds) { set_verdict(name, holds ? Verdict::holds : Verdict::fails); }
    void set_verdict(const std::string& name, Verdict v) { upsert(verdicts_, name, v); }
    void set_note(const std::string& name, std::string text) { upsert(notes_, name, std::move(text)); }

    double value(const std::string& name) const { return find(values_, name); }
    Verdict verdict_state(const std::string& name) const { return find(verdicts_, name); }
    bool verdict(const std::string& name) const { return find(verdicts_, name) == Verdict::holds; }
    const std::string& note(const std::string& name) const { return find(notes_, name); }
    bool has_value(const std::string& name) const { return contains(values_, name); }
    bool has_verdict(const std::string& name) const { return contains(verdicts_, name); }

    const auto& values() const noexcept { return values_; }
    const auto& verdicts() const noexcept { return verdicts_; }
    const auto& notes() const noexcept { return notes_; }

    bool any_inapplicable() const
    {
        return std::any_of(verdicts_.begin(), verdicts_.end(),
                           [](const auto& kv) { return kv.second == Verdict::inapplicable; });
    }

    void append(const ConditionReport& other)
    {
        for (const auto& [k, v] : other.values_) {
            set_value(k, v);
        }
        for (const auto& [k, v] : other.verdicts_) {
            set_verdict(k, v);
        }
        for (const auto& [k, v] : other.notes_) {
            set_note(k, v);
        }
    }

private:
    template <class V>
    static void upsert(std::vector<std::pair<std::string, V>>& xs, const std::string& name, V v)
    {
        for (auto& [k, old] : xs) {
            if (k == name) {
                old = std::move(v);
                return;
            }
        }
        xs.emplace_back(name, std::move(v));
    }

    template <class V>
    static const V& find(const std::vector<std::pair<std::string, V>>& xs, const std::string& name)
    {
        for (const auto& [k, v] : xs) {
            if (k == name) {
                return v;
            }
        }
        throw DomainError("report has no entry '" + name + "'");
    }

    template <class V>
    static bool contains(const std::vector<std::pair<std::string, V>>& xs, const std::string& name)
    {
        return std::any_of(xs.begin(), xs.end(), [&](const auto& kv) { return kv.first == name; });
    }

    std::vector<std::pair<std::string, double>> values_;
    std::vector<std::pair<std::string, Verdict>> verdicts_;
    std::vector<std::pair<std::string, std::string>> notes_;
};

/// M1 from the closed form; M2, m1, m2 are empirical long-run surrogates.
struct BoundsReport {
    double M1 = 0.0;
    double M2 = 0.0;
    double m1_emp = 0.0;
    double m2_emp = 0.0;
    double epsilon = 0.0;
    double vstar_sup = 0.0;
};

struct BoundsOptions {
    double periods = 100.0;
    double tail_periods = 50.0;
    /// The initial-state grid is grid x grid (at least 3 x 3).
    std::size_t grid = 3;
    double safety = 1.05;
};

/// Initial states for the empirical bound runs: v above the reserve, spread
/// up to beyond M1; h spread on the same scale.
inline std::vector<State> bounds_grid(const SimplifiedParams& p, double M1, std::size_t n)
{
    n = std::max<std::size_t>(n, 3);
    const double rho = p.rho_sup();
    const double span = M1 > rho ? M1 - rho : M1;
    std::vector<State> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double fv = 0.25 + 0.85 * static_cast<double>(i) / static_cast<double>(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            const double fh = 0.1 + 1.4 * static_cast<double>(j) / static_cast<double>(n - 1);
            out.push_back({rho + fv * span, fh * M1});
        }
    }
    return out;
}

inline BoundsReport upper_bounds(const SimplifiedParams& p, const ClosedFormLogistic& vs, const IntegratorConfig& cfg,
                                 const BoundsOptions& opts = {})
{
    BoundsReport r;
    r.vstar_sup = vs.extrema().sup;
    r.epsilon = 1e-3 * r.vstar_sup;
    r.M1 = r.vstar_sup + r.epsilon;
    const double w = p.period();
    const double t1 = opts.periods * w;
    const double tail0 = (opts.periods - opts.tail_periods) * w;
    double h_sup = 0.0;
    double v_inf = std::numeric_limits<double>::infinity();
    double h_inf = std::numeric_limits<double>::infinity();
    for (const State& x0 : bounds_grid(p, r.M1, opts.grid)) {
        const Trajectory traj = integrate(p, x0, 0.0, t1, cfg);
        const WindowStats ws = traj.window(tail0, t1);
        h_sup = std::max(h_sup, ws.h_sup);
        v_inf = std::min(v_inf, ws.v_inf);
        h_inf = std::min(h_inf, ws.h_inf);
    }
    r.M2 = opts.safety * h_sup;
    r.m1_emp = std::min(v_inf, r.M1);
    r.m2_emp = std::max(0.0, std::min(h_inf, r.M2));
    return r;
}

inline BoundsReport upper_bounds(const SimplifiedParams& p, const IntegratorConfig& cfg,
                                 const BoundsOptions& opts = {})
{
    return upper_bounds(p, vstar(p), cfg, opts);
}

inline ConditionReport to_report(const BoundsReport& b)
{
    ConditionReport r;
    r.set_value("bounds.M1", b.M1);
    r.set_value("bounds.epsilon", b.epsilon);
    r.set_value("bounds.vstar_sup", b.vstar_sup);
    r.set_value("bounds.M2_empirical", b.M2);
    r.set_value("bounds.m1_empirical", b.m1_emp);
    r.set_value("bounds.m2_empirical", b.m2_emp);
    r.set_note("bounds.method", "M1 = sup v* + eps; M2, m1, m2 empirical from long-run grid simulation");
    return r;
}

namespace detail {

inline double record_average(ConditionReport& r, const std::string& name, const PeriodicFunction& f)
{
    double value = 0.0;
    double err = 0.0;
    if (f.closed_form()) {
        value = f.average();
    } else {
        const auto est = f.quadrature_average();
        value = est.value;
        err = est.error;
    }
    r.set_value(name, value);
    r.set_value(name + ".quad_err", err);
    return value;
}

/// inf over one period of (v* - rho); the herbivore checkers are singular
/// unless it is positive.
inline double require_above_reserve(const PeriodicFunction& v, const PeriodicFunction& rho, const char* who)
{
    const double gap = (v - rho).extrema().inf;
    if (!(gap > 0.0)) {
        std::ostringstream os;
        os << who << ": inf(v - rho) = " << gap << " <= 0, integrand is singular";
        throw InapplicableError(os.str());
    }
    return gap;
}

}  // namespace detail

/// Vegetation persistence: A(b) > 0 and A(a - c (M1 - rho) M2 / beta) > 0.
inline ConditionReport check_vegetation_persistence(const SimplifiedParams& p, double M1, double M2)
{
    ConditionReport r;
    const double avg_b = detail::record_average(r, "vegetation_persistence.avg_b", p.b());
    const auto integrand = p.a() - p.c() * (M1 - p.rho()) * M2 / p.beta();
    const double margin = detail::record_average(r, "vegetation_persistence.margin", integrand);
    r.set_verdict("vegetation_persistence.avg_b_positive", avg_b > 0.0);
    r.set_verdict("vegetation_persistence", avg_b > 0.0 && margin > 0.0);
    r.set_note("vegetation_persistence.formula", "A(b) > 0 and A(a - c (M1 - rho) M2 / beta) > 0");
    return r;
}

/// Herbivore persistence: A(-R + alpha (v* - rho)/(beta + v*) - gamma (1 + beta_bar/(v* - rho))) > 0
/// with beta_bar = beta + rho.
inline ConditionReport check_herbivore_persistence(const SimplifiedParams& p, const ClosedFormLogistic& vs)
{
    const PeriodicFunction v = vs.as_function();
    ConditionReport r;
    r.set_value("herbivore_persistence.inf_vstar_minus_rho",
                detail::require_above_reserve(v, p.rho(), "herbivore_persistence"));
    const auto integrand = -p.R() + p.alpha() * (v - p.rho()) / (p.beta() + v) -
                           p.gamma() * (1.0 + p.beta_bar() / (v - p.rho()));
    const double margin = detail::record_average(r, "herbivore_persistence.margin", integrand);
    r.set_verdict("herbivore_persistence", margin > 0.0);
    r.set_note("herbivore_persistence.formula",
               "A(-R + alpha (v* - rho)/(beta + v*) - gamma (1 + (beta + rho)/(v* - rho))) > 0");
    return r;
}

inline ConditionReport check_herbivore_persistence(const SimplifiedParams& p)
{
    return check_herbivore_persistence(p, vstar(p));
}

/// Permanence iff A(-R + alpha (v* - rho)/(beta + v*) - gamma beta/(v* - rho)) > 0.
/// Also reports the variant with gamma (v* - beta)/(v* - rho) used in the
/// extinction argument, and the boundary invasion exponent A(percapita_h(v*)).
inline ConditionReport check_permanence_iff(const SimplifiedParams& p, const ClosedFormLogistic& vs)
{
    const PeriodicFunction v = vs.as_function();
    ConditionReport r;
    r.set_value("permanence_iff.inf_vstar_minus_rho", detail::require_above_reserve(v, p.rho(), "permanence_iff"));
    const auto holling = p.alpha() * (v - p.rho()) / (p.beta() + v);
    const auto gap = v - p.rho();
    const double margin = detail::record_average(r, "permanence_iff.margin", -p.R() + holling - p.gamma() * p.beta() / gap);
    detail::record_average(r, "permanence_iff.proof_variant_margin", -p.R() + holling - p.gamma() * (v - p.beta()) / gap);
    detail::record_average(r, "permanence_iff.invasion_exponent",
                           -p.R() + holling - p.gamma() * (p.beta() + v) / gap);
    r.set_verdict("permanence_iff", margin > 0.0);
    r.set_note("permanence_iff.formula", "A(-R + alpha (v* - rho)/(beta + v*) - gamma beta/(v* - rho)) > 0");
    return r;
}

inline ConditionReport check_permanence_iff(const SimplifiedParams& p) { return check_permanence_iff(p, vstar(p)); }

/// The final period [t_end - w, t_end) of a trajectory as a periodic function
/// of coefficient time. When the run is periodic the wrap point is seamless;
/// otherwise it is a breakpoint.
inline std::pair<PeriodicFunction, PeriodicFunction> final_period(const Trajectory& traj, double period)
{
    if (traj.t_end() - traj.t_begin() < period * (1.0 - 1e-12)) {
        throw DomainError("reference trajectory must span at least one period");
    }
    const double t_end = traj.t_end();
    auto to_traj_time = [t_end, period](double t) {
        // unique s in (t_end - w, t_end] congruent to t
        const double s = t_end - detail::wrap_time(t_end - t, period);
        return s;
    };
    auto shared = std::make_shared<const Trajectory>(traj);
    const std::vector<double> br{t_end / period};
    PeriodicFunction v(period, [shared, to_traj_time](double t, double) { return shared->at(to_traj_time(t)).v; }, br);
    PeriodicFunction h(period, [shared, to_traj_time](double t, double) { return shared->at(to_traj_time(t)).h; }, br);
    return {v, h};
}

/// Sufficient conditions for global asymptotic stability of the reference
/// solution (v^, h^): two infimum conditions evaluated as printed by
/// 8192-point sampling over the final period, plus two averages.
inline ConditionReport check_gas(const SimplifiedParams& p, const Trajectory& reference, const BoundsReport& bounds)
{
    ConditionReport r;
    const double w = p.period();
    auto [vh, hh] = final_period(reference, w);
    const double m1 = bounds.m1_emp;
    const double M1 = bounds.M1;
    const double M2 = bounds.M2;
    r.set_value("gas.m1_used", m1);
    r.set_value("gas.M1_used", M1);
    r.set_value("gas.M2_used", M2);

    const double vh_inf = vh.extrema(8192).inf;
    const double m1_gap = (m1 - p.rho()).extrema().inf;
    const double vh_gap = (vh - p.rho()).extrema(8192).inf;
    if (!(vh_inf > 0.0) || !(m1_gap > 0.0) || !(vh_gap > 0.0)) {
        std::ostringstream os;
        os << "gas: a denominator loses positivity (inf v^ = " << vh_inf << ", inf(m1 - rho) = " << m1_gap
           << ", inf(v^ - rho) = " << vh_gap << ")";
        throw InapplicableError(os.str());
    }

    const auto& b = p.b();
    const auto& c = p.c();
    const auto& alpha = p.alpha();
    const auto& beta = p.beta();
    const auto& gamma = p.gamma();
    const auto& rho = p.rho();
    // first condition; "rho (m1)" is kept as the product it is printed as
    const auto inf1_expr = b + c * (rho * m1 - (m1 * vh - rho * beta) * hh) / (M1 * vh * (beta + M1) * (beta + vh)) -
                           (alpha * beta + alpha * rho) / ((beta + m1) * (beta + vh)) -
                           (gamma * beta - gamma * rho) / ((m1 - rho) * (vh - rho));
    // second condition with the printed denominator M1 v^ (beta + M1) M1 v^ (beta + v^)
    const auto inf2_expr = c * (vh * (m1 * (beta + vh) - vh * rho * (beta + rho * vh))) /
                           (M1 * vh * (beta + M1) * M1 * vh * (beta + vh));
    const double inf1 = inf1_expr.extrema(8192).inf;
    const double inf2 = inf2_expr.extrema(8192).inf;
    r.set_value("gas.inf_condition_1", inf1);
    r.set_value("gas.inf_condition_2", inf2);

    const double avg_v = detail::record_average(r, "gas.avg_vegetation_margin", p.a() - c * (M1 - rho) * M2 / beta);
    const double avg_h = detail::record_average(r, "gas.avg_herbivore_margin",
                                                -p.R() + alpha * (vh - rho) / (beta + vh) - gamma * beta / (vh - rho));
    r.set_verdict("gas.inf_condition_1", inf1 > 0.0);
    r.set_verdict("gas.inf_condition_2", inf2 > 0.0);
    r.set_verdict("gas.avg_vegetation", avg_v > 0.0);
    r.set_verdict("gas.avg_herbivore", avg_h > 0.0);
    r.set_verdict("gas", inf1 > 0.0 && inf2 > 0.0 && avg_v > 0.0 && avg_h > 0.0);
    r.set_note("gas.formula_1",
               "inf{ b + c (rho (m1) - (m1 v^ - rho beta) h^)/(M1 v^ (beta + M1)(beta + v^)) - (alpha beta + alpha "
               "rho)/((beta + m1)(beta + v^)) - (gamma beta - gamma rho)/((m1 - rho)(v^ - rho)) } > 0");
    r.set_note("gas.formula_2",
               "inf{ c v^ [m1 (beta + v^) - v^ rho (beta + rho v^)] / (M1 v^ (beta + M1) M1 v^ (beta + v^)) } > 0");
    r.set_note("gas.inf_method", "8192-point sampling of the final simulated period; m1 empirical");
    return r;
}

/// Conditions for a positive periodic orbit inside the bounding box:
/// A(-R + alpha (v* + eps - rho)/beta - gamma beta/(M1 - rho)) > 0,
/// A(gamma / (alpha (M1 - rho))) > 0 and A(a - c M2 / beta) > 0.
inline ConditionReport check_periodic_existence(const SimplifiedParams& p, const ClosedFormLogistic& vs, double M1,
                                                double M2)
{
    ConditionReport r;
    const double eps = 1e-3 * vs.extrema().sup;
    if (!(M1 > p.rho_sup())) {
        std::ostringstream os;
        os << "periodic_existence: M1 = " << M1 << " does not exceed sup rho = " << p.rho_sup();
        throw InapplicableError(os.str());
    }
    const PeriodicFunction v = vs.as_function();
    const auto& alpha = p.alpha();
    const auto& beta = p.beta();
    const auto& rho = p.rho();
    r.set_value("periodic_existence.epsilon", eps);
    const double m1 = detail::record_average(r, "periodic_existence.margin_1",
                                             -p.R() + alpha * (v + eps - rho) / beta - p.gamma() * beta / (M1 - rho));
    if (!(alpha.extrema().inf > 0.0)) {
        throw InapplicableError("periodic_existence: alpha must be strictly positive for the second condition");
    }
    const double m2 = detail::record_average(r, "periodic_existence.margin_2", p.gamma() / (alpha * (M1 - rho)));
    const double m3 = detail::record_average(r, "periodic_existence.margin_3", p.a() - p.c() * M2 / beta);
    r.set_verdict("periodic_existence.condition_1", m1 > 0.0);
    r.set_verdict("periodic_existence.condition_2", m2 > 0.0);
    r.set_verdict("periodic_existence.condition_3", m3 > 0.0);
    r.set_verdict("periodic_existence", m1 > 0.0 && m2 > 0.0 && m3 > 0.0);
    return r;
}

}  // namespace osdyn
