#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <tuple>
#include <utility>
#include <vector>

#include "osdyn/errors.hpp"
#include "osdyn/quadrature.hpp"

namespace osdyn {

/// amplitude * sin(2 pi k t / period + phase)
struct Harmonic {
    double amplitude = 0.0;
    int frequency = 1;
    double phase = 0.0;
};

/// Piecewise-constant seasonal step on the half-open fraction interval
/// [start, end) of one period.
struct Segment {
    double start = 0.0;
    double end = 1.0;
    double value = 0.0;
};

struct Extrema {
    double inf = 0.0;
    double sup = 0.0;
    /// Largest time-bracket width left by the local refinement.
    double bracket = 0.0;
};

namespace detail {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Position of t inside [0, period).
inline double wrap_time(double t, double period)
{
    double tau = t - period * std::floor(t / period);
    if (tau >= period || tau < 0.0) {
        tau = 0.0;
    }
    return tau;
}

inline double wrap_fraction(double f)
{
    double r = f - std::floor(f);
    if (r >= 1.0 || r < 0.0) {
        r = 0.0;
    }
    return r;
}

/// Sorted unique fractions in [0, 1), always containing 0.
inline std::vector<double> normalize_breaks(std::vector<double> breaks)
{
    for (auto& b : breaks) {
        b = wrap_fraction(b);
    }
    breaks.push_back(0.0);
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> out;
    for (double b : breaks) {
        if (out.empty() || b - out.back() > 1e-13) {
            out.push_back(b);
        }
    }
    if (out.size() > 1 && 1.0 - out.back() <= 1e-13) {
        out.pop_back();
    }
    return out;
}

inline std::vector<double> merge_breaks(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> all = a;
    all.insert(all.end(), b.begin(), b.end());
    return normalize_breaks(std::move(all));
}

inline bool same_period(double p, double q)
{
    return std::abs(p - q) <= 1e-12 * std::max(std::abs(p), std::abs(q));
}

inline void require_same_period(double p, double q)
{
    if (!same_period(p, q)) {
        std::ostringstream os;
        os << "operands have different periods (" << p << " vs " << q << ")";
        throw DomainError(os.str());
    }
}

/// Golden-section search for a minimum of g on [lo, hi]; returns (t, g(t), width).
template <class G>
std::tuple<double, double, double> golden_min(G&& g, double lo, double hi, double tol)
{
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = g(x1);
    double f2 = g(x2);
    for (int i = 0; i < 200 && (hi - lo) > tol; ++i) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = g(x2);
        }
    }
    const double t = f1 <= f2 ? x1 : x2;
    return {t, std::min(f1, f2), hi - lo};
}

/// Infimum and supremum of a piecewise-smooth periodic function.
/// `eval(t, tref)` must evaluate the smooth extension of the piece that
/// contains `tref`, so piece endpoints give exact one-sided limits.
template <class Eval>
Extrema piecewise_extrema(const Eval& eval, double period, const std::vector<double>& breaks,
                          std::size_t samples_per_period = 4096)
{
    Extrema out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                0.0};
    std::vector<double> bounds = breaks;
    bounds.push_back(1.0);
    constexpr std::size_t max_candidates = 6;
    for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
        const double lo = bounds[p] * period;
        const double hi = bounds[p + 1] * period;
        const double tref = 0.5 * (lo + hi);
        const double width = bounds[p + 1] - bounds[p];
        const std::size_t n = std::max<std::size_t>(
            16, static_cast<std::size_t>(std::ceil(width * static_cast<double>(samples_per_period))));
        std::vector<double> ts(n + 1);
        std::vector<double> fs(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            ts[i] = i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
            fs[i] = eval(ts[i], tref);
            out.inf = std::min(out.inf, fs[i]);
            out.sup = std::max(out.sup, fs[i]);
        }
        // local extremum candidates among interior samples, best few refined
        std::vector<std::size_t> mins;
        std::vector<std::size_t> maxs;
        for (std::size_t i = 1; i < n; ++i) {
            if (fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1] && (fs[i] < fs[i - 1] || fs[i] < fs[i + 1])) {
                mins.push_back(i);
            }
            if (fs[i] >= fs[i - 1] && fs[i] >= fs[i + 1] && (fs[i] > fs[i - 1] || fs[i] > fs[i + 1])) {
                maxs.push_back(i);
            }
        }
        std::sort(mins.begin(), mins.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
        std::sort(maxs.begin(), maxs.end(), [&](auto a, auto b) { return fs[a] > fs[b]; });
        const double tol = 1e-11 * period;
        for (std::size_t k = 0; k < std::min(max_candidates, mins.size()); ++k) {
            const std::size_t i = mins[k];
            auto [t, v, w] = golden_min([&](double x) { return eval(x, tref); }, ts[i - 1], ts[i + 1], tol);
            out.inf = std::min(out.inf, v);
            out.bracket = std::max(out.bracket, w);
        }
        for (std::size_t k = 0; k < std::min(max_candidates, maxs.size()); ++k) {
            const std::size_t i = maxs[k];
            auto [t, v, w] = golden_min([&](double x) { return -eval(x, tref); }, ts[i - 1], ts[i + 1], tol);
            out.sup = std::max(out.sup, -v);
            out.bracket = std::max(out.bracket, w);
        }
    }
    return out;
}

}  // namespace detail

/// A continuous-plus-steps omega-periodic scalar: a constant, a finite sine
/// series and an optional piecewise-constant seasonal profile. Immutable.
class PeriodicCoefficient {
public:
    PeriodicCoefficient() = default;

    PeriodicCoefficient(double period, double base, std::vector<Harmonic> harmonics = {},
                        std::vector<Segment> segments = {})
        : period_(period), base_(base), harmonics_(std::move(harmonics)), segments_(std::move(segments))
    {
        if (!(period_ > 0.0) || !std::isfinite(period_)) {
            throw DomainError("coefficient period must be positive and finite");
        }
        for (const auto& h : harmonics_) {
            if (h.frequency < 1) {
                throw DomainError("harmonic frequency must be an integer >= 1");
            }
            if (!std::isfinite(h.amplitude) || !std::isfinite(h.phase)) {
                throw DomainError("harmonic amplitude and phase must be finite");
            }
        }
        validate_segments();
        starts_.reserve(segments_.size());
        for (const auto& s : segments_) {
            starts_.push_back(s.start);
        }
    }

    static PeriodicCoefficient constant(double value, double period = 1.0)
    {
        return PeriodicCoefficient(period, value);
    }

    double period() const noexcept { return period_; }
    double base() const noexcept { return base_; }
    const std::vector<Harmonic>& harmonics() const noexcept { return harmonics_; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }

    double operator()(double t) const { return eval(t, t); }

    /// Value at t, with the seasonal step looked up at `segment_ref` instead of
    /// t. Passing a time strictly inside the current step gives one-sided
    /// limits at step boundaries.
    double eval(double t, double segment_ref) const
    {
        return smooth(t) + step_value(segment_ref);
    }

    /// Base plus harmonics, without the seasonal steps.
    double smooth(double t) const
    {
        double value = base_;
        if (!harmonics_.empty()) {
            const double tau = detail::wrap_time(t, period_);
            for (const auto& h : harmonics_) {
                value += h.amplitude *
                         std::sin(detail::two_pi * static_cast<double>(h.frequency) * tau / period_ + h.phase);
            }
        }
        return value;
    }

    double step_value(double t) const
    {
        if (segments_.empty()) {
            return 0.0;
        }
        const double frac = detail::wrap_fraction(detail::wrap_time(t, period_) / period_);
        auto it = std::upper_bound(starts_.begin(), starts_.end(), frac);
        const std::size_t idx = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
        return segments_[idx].value;
    }

    /// Exact mean over one period: harmonics integrate to zero and each step
    /// contributes value * width.
    double average() const
    {
        double avg = base_;
        for (const auto& s : segments_) {
            avg += s.value * (s.end - s.start);
        }
        return avg;
    }

    /// Step boundaries as fractions of the period.
    std::vector<double> breakpoints() const
    {
        return detail::normalize_breaks(starts_);
    }

    bool is_constant() const
    {
        for (const auto& h : harmonics_) {
            if (h.amplitude != 0.0) {
                return false;
            }
        }
        for (const auto& s : segments_) {
            if (s.value != segments_.front().value) {
                return false;
            }
        }
        return true;
    }

    /// Only meaningful when is_constant().
    double constant_value() const
    {
        return base_ + (segments_.empty() ? 0.0 : segments_.front().value);
    }

    Extrema extrema() const
    {
        return detail::piecewise_extrema([this](double t, double tref) { return eval(t, tref); }, period_,
                                         breakpoints());
    }

    PeriodicCoefficient scaled(double k) const
    {
        PeriodicCoefficient out = *this;
        out.base_ *= k;
        for (auto& h : out.harmonics_) {
            h.amplitude *= k;
        }
        for (auto& s : out.segments_) {
            s.value *= k;
        }
        return out;
    }

    /// t -> c(t + dt)
    PeriodicCoefficient shifted(double dt) const
    {
        std::vector<Harmonic> hs = harmonics_;
        for (auto& h : hs) {
            h.phase += detail::two_pi * static_cast<double>(h.frequency) * dt / period_;
        }
        std::vector<Segment> segs;
        const double s = detail::wrap_fraction(dt / period_);
        for (const auto& seg : segments_) {
            double lo = seg.start - s;
            double hi = seg.end - s;
            if (lo < 0.0 && hi <= 0.0) {
                lo += 1.0;
                hi += 1.0;
            }
            if (lo < 0.0) {
                segs.push_back({lo + 1.0, 1.0, seg.value});
                segs.push_back({0.0, hi, seg.value});
            } else {
                segs.push_back({lo, hi, seg.value});
            }
        }
        std::sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) { return a.start < b.start; });
        snap_tiling(segs);
        return PeriodicCoefficient(period_, base_, std::move(hs), std::move(segs));
    }

    PeriodicCoefficient with_base(double base) const
    {
        PeriodicCoefficient out = *this;
        out.base_ = base;
        return out;
    }

    PeriodicCoefficient with_segment_value(std::size_t index, double value) const
    {
        if (index >= segments_.size()) {
            throw DomainError("segment index out of range");
        }
        PeriodicCoefficient out = *this;
        out.segments_[index].value = value;
        return out;
    }

    friend PeriodicCoefficient operator+(const PeriodicCoefficient& x, const PeriodicCoefficient& y)
    {
        detail::require_same_period(x.period_, y.period_);
        std::vector<Harmonic> hs = x.harmonics_;
        hs.insert(hs.end(), y.harmonics_.begin(), y.harmonics_.end());
        std::vector<Segment> segs;
        if (!x.segments_.empty() || !y.segments_.empty()) {
            std::vector<double> cuts = detail::merge_breaks(x.breakpoints(), y.breakpoints());
            cuts.push_back(1.0);
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                const double mid = 0.5 * (cuts[i] + cuts[i + 1]) * x.period_;
                segs.push_back({cuts[i], cuts[i + 1], x.step_value(mid) + y.step_value(mid)});
            }
        }
        return PeriodicCoefficient(x.period_, x.base_ + y.base_, std::move(hs), std::move(segs));
    }

    friend PeriodicCoefficient operator-(const PeriodicCoefficient& x, const PeriodicCoefficient& y)
    {
        return x + y.scaled(-1.0);
    }

private:
    void validate_segments()
    {
        if (segments_.empty()) {
            return;
        }
        std::sort(segments_.begin(), segments_.end(),
                  [](const Segment& a, const Segment& b) { return a.start < b.start; });
        constexpr double slack = 1e-12;
        if (std::abs(segments_.front().start) > slack) {
            throw DomainError("segments must start at fraction 0");
        }
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const auto& s = segments_[i];
            if (!std::isfinite(s.value)) {
                throw DomainError("segment value must be finite");
            }
            if (!(s.end > s.start) || s.start < -slack || s.end > 1.0 + slack) {
                throw DomainError("segment must satisfy 0 <= start < end <= 1");
            }
            if (i + 1 < segments_.size() && std::abs(s.end - segments_[i + 1].start) > slack) {
                throw DomainError("segments must tile [0,1) without gaps or overlaps");
            }
        }
        if (std::abs(segments_.back().end - 1.0) > slack) {
            throw DomainError("segments must end at fraction 1");
        }
        snap_tiling(segments_);
    }

    static void snap_tiling(std::vector<Segment>& segs)
    {
        if (segs.empty()) {
            return;
        }
        segs.front().start = 0.0;
        for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
            segs[i].end = segs[i + 1].start;
        }
        segs.back().end = 1.0;
    }

    double period_ = 1.0;
    double base_ = 0.0;
    std::vector<Harmonic> harmonics_;
    std::vector<Segment> segments_;
    std::vector<double> starts_;
};

/// Lazily evaluated omega-periodic expression. Built from coefficients with
/// + - * /, scalar arithmetic, `map`, or any callable (e.g. a sampled periodic
/// trajectory). Keeps an exact PeriodicCoefficient representation while the
/// algebra allows one, so averages stay closed-form where possible.
class PeriodicFunction {
public:
    /// f(t, tref): value at t using the smooth piece that contains tref.
    using Fn = std::function<double(double, double)>;

    PeriodicFunction() : PeriodicFunction(PeriodicCoefficient{}) {}

    PeriodicFunction(const PeriodicCoefficient& c)  // NOLINT(google-explicit-constructor)
        : period_(c.period()), breaks_(c.breakpoints()), closed_(c)
    {
        auto shared = std::make_shared<const PeriodicCoefficient>(c);
        fn_ = [shared](double t, double tref) { return shared->eval(t, tref); };
    }

    PeriodicFunction(double period, Fn fn, std::vector<double> breaks = {})
        : period_(period), fn_(std::move(fn)), breaks_(detail::normalize_breaks(std::move(breaks)))
    {
        if (!(period_ > 0.0)) {
            throw DomainError("period must be positive");
        }
    }

    static PeriodicFunction constant(double value, double period)
    {
        return PeriodicCoefficient::constant(value, period);
    }

    double period() const noexcept { return period_; }
    const std::vector<double>& breakpoints() const noexcept { return breaks_; }
    const std::optional<PeriodicCoefficient>& closed_form() const noexcept { return closed_; }

    double operator()(double t) const { return fn_(t, t); }
    double eval(double t, double tref) const { return fn_(t, tref); }

    bool is_constant() const { return closed_ && closed_->is_constant(); }

    /// Mean over one period: exact when a closed form is known, quadrature
    /// otherwise.
    double average() const
    {
        if (closed_) {
            return closed_->average();
        }
        return quadrature_average().value;
    }

    /// Mean over one period by composite Gauss-Legendre on each smooth piece.
    quadrature::Estimate quadrature_average(double tol = 1e-12) const
    {
        quadrature::Estimate total;
        std::vector<double> bounds = breaks_;
        bounds.push_back(1.0);
        for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
            const double lo = bounds[i] * period_;
            const double hi = bounds[i + 1] * period_;
            const double tref = 0.5 * (lo + hi);
            const auto piece = quadrature::integrate([&](double t) { return fn_(t, tref); }, lo, hi, tol);
            total.value += piece.value;
            total.error += piece.error;
        }
        total.value /= period_;
        total.error /= period_;
        return total;
    }

    /// Dense-sampled infimum/supremum with local refinement. Exact for
    /// constants.
    Extrema extrema(std::size_t samples_per_period = 4096) const
    {
        if (is_constant()) {
            const double v = closed_->constant_value();
            return {v, v, 0.0};
        }
        return detail::piecewise_extrema(fn_, period_, breaks_, samples_per_period);
    }

    /// t -> f(t + dt)
    PeriodicFunction shifted(double dt) const
    {
        if (closed_) {
            return PeriodicFunction(closed_->shifted(dt));
        }
        std::vector<double> bs;
        for (double b : breaks_) {
            bs.push_back(b - dt / period_);
        }
        auto f = fn_;
        return PeriodicFunction(period_, [f, dt](double t, double tref) { return f(t + dt, tref + dt); },
                                std::move(bs));
    }

    template <class Unary>
    PeriodicFunction map(Unary op) const
    {
        auto f = fn_;
        return PeriodicFunction(period_, [f, op](double t, double tref) { return op(f(t, tref)); }, breaks_);
    }

    friend PeriodicFunction operator+(const PeriodicFunction& x, const PeriodicFunction& y)
    {
        auto out = binary(x, y, std::plus<>{});
        if (x.closed_ && y.closed_) {
            out.closed_ = *x.closed_ + *y.closed_;
        }
        return out;
    }

    friend PeriodicFunction operator-(const PeriodicFunction& x, const PeriodicFunction& y)
    {
        auto out = binary(x, y, std::minus<>{});
        if (x.closed_ && y.closed_) {
            out.closed_ = *x.closed_ - *y.closed_;
        }
        return out;
    }

    friend PeriodicFunction operator*(const PeriodicFunction& x, const PeriodicFunction& y)
    {
        auto out = binary(x, y, std::multiplies<>{});
        if (x.closed_ && y.closed_) {
            if (y.closed_->is_constant()) {
                out.closed_ = x.closed_->scaled(y.closed_->constant_value());
            } else if (x.closed_->is_constant()) {
                out.closed_ = y.closed_->scaled(x.closed_->constant_value());
            }
        }
        return out;
    }

    /// Throws DomainError unless the denominator's infimum is positive.
    friend PeriodicFunction operator/(const PeriodicFunction& x, const PeriodicFunction& y)
    {
        detail::require_same_period(x.period_, y.period_);
        const Extrema e = y.extrema();
        if (!(e.inf > 0.0)) {
            std::ostringstream os;
            os << "division by a periodic function with infimum " << e.inf << " <= 0";
            throw DomainError(os.str());
        }
        auto out = binary(x, y, std::divides<>{});
        if (x.closed_ && y.closed_ && y.closed_->is_constant()) {
            out.closed_ = x.closed_->scaled(1.0 / y.closed_->constant_value());
        }
        return out;
    }

    friend PeriodicFunction operator-(const PeriodicFunction& x)
    {
        auto out = x.map([](double v) { return -v; });
        if (x.closed_) {
            out.closed_ = x.closed_->scaled(-1.0);
        }
        return out;
    }

    friend PeriodicFunction operator+(const PeriodicFunction& x, double k) { return x + constant(k, x.period_); }
    friend PeriodicFunction operator+(double k, const PeriodicFunction& x) { return constant(k, x.period_) + x; }
    friend PeriodicFunction operator-(const PeriodicFunction& x, double k) { return x - constant(k, x.period_); }
    friend PeriodicFunction operator-(double k, const PeriodicFunction& x) { return constant(k, x.period_) - x; }
    friend PeriodicFunction operator*(const PeriodicFunction& x, double k) { return x * constant(k, x.period_); }
    friend PeriodicFunction operator*(double k, const PeriodicFunction& x) { return constant(k, x.period_) * x; }
    friend PeriodicFunction operator/(const PeriodicFunction& x, double k) { return x / constant(k, x.period_); }
    friend PeriodicFunction operator/(double k, const PeriodicFunction& x) { return constant(k, x.period_) / x; }

private:
    template <class Op>
    static PeriodicFunction binary(const PeriodicFunction& x, const PeriodicFunction& y, Op op)
    {
        detail::require_same_period(x.period_, y.period_);
        auto f = x.fn_;
        auto g = y.fn_;
        return PeriodicFunction(
            x.period_, [f, g, op](double t, double tref) { return op(f(t, tref), g(t, tref)); },
            detail::merge_breaks(x.breaks_, y.breaks_));
    }

    double period_ = 1.0;
    Fn fn_;
    std::vector<double> breaks_;
    std::optional<PeriodicCoefficient> closed_;
};

}  // namespace osdyn
