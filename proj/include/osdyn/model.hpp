#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "osdyn/coefficients.hpp"
#include "osdyn/errors.hpp"

namespace osdyn {

/// Vegetation and herbivore biomass densities.
struct State {
    double v = 0.0;
    double h = 0.0;

    friend bool operator==(const State&, const State&) = default;
};

inline double max_norm(const State& x) { return std::max(std::abs(x.v), std::abs(x.h)); }
inline State operator-(const State& x, const State& y) { return {x.v - y.v, x.h - y.h}; }
inline State operator+(const State& x, const State& y) { return {x.v + y.v, x.h + y.h}; }
inline State operator*(double k, const State& x) { return {k * x.v, k * x.h}; }

/// Pointwise values of the simplified coefficients at one instant.
struct CoefficientValues {
    double a, b, c, alpha, beta, gamma, rho, R;
};

/// Metaphysiological coefficients before the change of variables. Each entry is an
/// omega-periodic function; constants are period-omega constants.
struct RawParams {
    PeriodicFunction r;    ///< maximum relative vegetation growth rate
    PeriodicFunction K;    ///< vegetation carrying capacity
    PeriodicFunction i_m;  ///< maximum intake rate per unit herbivore
    PeriodicFunction b_i;  ///< half-saturation biomass for intake
    PeriodicFunction b_g;  ///< half-saturation biomass for conversion
    PeriodicFunction v_u;  ///< ungrazable vegetation reserve
    PeriodicFunction C;    ///< conversion efficiency
    PeriodicFunction m_p;  ///< physiological attrition rate
    PeriodicFunction q_0;
    PeriodicFunction q_s;  ///< senescence mortality
    PeriodicFunction q;

    std::array<std::pair<const char*, const PeriodicFunction*>, 11> named() const
    {
        return {{{"r", &r}, {"K", &K}, {"i_m", &i_m}, {"b_i", &b_i}, {"b_g", &b_g}, {"v_u", &v_u},
                 {"C", &C}, {"m_p", &m_p}, {"q_0", &q_0}, {"q_s", &q_s}, {"q", &q}}};
    }
};

namespace detail {

inline void require_nonnegative(const char* name, const PeriodicFunction& f)
{
    const Extrema e = f.extrema();
    if (e.inf < -1e-12 * (1.0 + std::abs(e.sup))) {
        std::ostringstream os;
        os << "coefficient '" << name << "' must be nonnegative (infimum " << e.inf << ")";
        throw DomainError(os.str());
    }
}

inline void require_positive(const char* name, const PeriodicFunction& f)
{
    const Extrema e = f.extrema();
    if (!(e.inf > 0.0)) {
        std::ostringstream os;
        os << "coefficient '" << name << "' must be strictly positive (infimum " << e.inf << ")";
        throw DomainError(os.str());
    }
}

}  // namespace detail

/// Coefficients a, b, c, alpha, beta, gamma, rho, R of the reduced system,
/// all sharing one period. beta must be strictly positive; the rest are
/// nonnegative.
class SimplifiedParams {
public:
    struct Fields {
        PeriodicFunction a, b, c, alpha, beta, gamma, rho, R;
    };

    explicit SimplifiedParams(Fields f) : f_(std::move(f))
    {
        const double w = f_.a.period();
        std::vector<double> breaks;
        for (auto [name, fn] : named()) {
            detail::require_same_period(w, fn->period());
            if (fn == &f_.beta) {
                detail::require_positive(name, *fn);
            } else {
                detail::require_nonnegative(name, *fn);
            }
            breaks.insert(breaks.end(), fn->breakpoints().begin(), fn->breakpoints().end());
        }
        breaks_ = detail::normalize_breaks(std::move(breaks));
        rho_sup_ = f_.rho.extrema().sup;
        eps_sing_ = 1e-9 * (1.0 + rho_sup_);
    }

    const PeriodicFunction& a() const noexcept { return f_.a; }
    const PeriodicFunction& b() const noexcept { return f_.b; }
    const PeriodicFunction& c() const noexcept { return f_.c; }
    const PeriodicFunction& alpha() const noexcept { return f_.alpha; }
    const PeriodicFunction& beta() const noexcept { return f_.beta; }
    const PeriodicFunction& gamma() const noexcept { return f_.gamma; }
    const PeriodicFunction& rho() const noexcept { return f_.rho; }
    const PeriodicFunction& R() const noexcept { return f_.R; }
    const Fields& fields() const noexcept { return f_; }

    /// beta + rho
    PeriodicFunction beta_bar() const { return f_.beta + f_.rho; }

    double period() const noexcept { return f_.a.period(); }
    /// Union of all coefficient step boundaries, as fractions of the period.
    const std::vector<double>& breakpoints() const noexcept { return breaks_; }
    double rho_sup() const noexcept { return rho_sup_; }
    /// Minimum admissible distance v - rho while herbivores are present.
    double singular_epsilon() const noexcept { return eps_sing_; }

    CoefficientValues at(double t) const { return at(t, t); }

    CoefficientValues at(double t, double tref) const
    {
        return {f_.a.eval(t, tref),     f_.b.eval(t, tref),    f_.c.eval(t, tref),   f_.alpha.eval(t, tref),
                f_.beta.eval(t, tref),  f_.gamma.eval(t, tref), f_.rho.eval(t, tref), f_.R.eval(t, tref)};
    }

    SimplifiedParams shifted(double dt) const
    {
        return SimplifiedParams({f_.a.shifted(dt), f_.b.shifted(dt), f_.c.shifted(dt), f_.alpha.shifted(dt),
                                 f_.beta.shifted(dt), f_.gamma.shifted(dt), f_.rho.shifted(dt),
                                 f_.R.shifted(dt)});
    }

    std::array<std::pair<const char*, const PeriodicFunction*>, 8> named() const
    {
        return {{{"a", &f_.a}, {"b", &f_.b}, {"c", &f_.c}, {"alpha", &f_.alpha}, {"beta", &f_.beta},
                 {"gamma", &f_.gamma}, {"rho", &f_.rho}, {"R", &f_.R}}};
    }

private:
    Fields f_;
    std::vector<double> breaks_;
    double rho_sup_ = 0.0;
    double eps_sing_ = 1e-9;
};

namespace detail {

[[noreturn]] inline void throw_singular(double t, double v, double rho)
{
    std::ostringstream os;
    os << "vegetation reached the ungrazable reserve with herbivores present (t=" << t << ", v=" << v
       << ", rho=" << rho << ")";
    throw SingularityError(os.str(), t);
}

}  // namespace detail

/// Herbivore per-capita growth rate for coefficient values `k` at biomass v.
inline double percapita_h(const CoefficientValues& k, double v)
{
    const double x = (v - k.rho) / (k.beta + v);
    return k.alpha * x - k.R - k.gamma / x;
}

/// Vector field of the reduced system for already-evaluated coefficients.
/// Throws SingularityError when h != 0 and v - rho <= eps_sing.
inline State rhs(const CoefficientValues& k, double t, const State& x, double eps_sing)
{
    const double logistic = x.v * (k.a - k.b * x.v);
    if (x.h == 0.0) {
        return {logistic, 0.0};
    }
    if (!(x.v - k.rho > eps_sing)) {
        detail::throw_singular(t, x.v, k.rho);
    }
    const double dv = logistic - k.c * (x.v - k.rho) / (k.beta + x.v) * x.h;
    const double dh = x.h * percapita_h(k, x.v);
    return {dv, dh};
}

inline State rhs(const SimplifiedParams& p, double t, const State& x)
{
    return rhs(p.at(t), t, x, p.singular_epsilon());
}

inline double percapita_h(const SimplifiedParams& p, double t, double v)
{
    const CoefficientValues k = p.at(t);
    if (!(v - k.rho > p.singular_epsilon())) {
        detail::throw_singular(t, v, k.rho);
    }
    return percapita_h(k, v);
}

/// Change of variables from the raw metaphysiological parameters to the reduced
/// system. Requires b_i == b_g and b_i > v_u everywhere.
inline SimplifiedParams reduce(const RawParams& raw)
{
    const double w = raw.r.period();
    for (auto [name, fn] : raw.named()) {
        detail::require_same_period(w, fn->period());
    }
    detail::require_positive("K", raw.K);
    detail::require_positive("i_m", raw.i_m);
    detail::require_positive("b_i", raw.b_i);
    detail::require_positive("b_g", raw.b_g);
    detail::require_nonnegative("r", raw.r);
    detail::require_nonnegative("v_u", raw.v_u);
    detail::require_nonnegative("m_p", raw.m_p);
    detail::require_nonnegative("q_0", raw.q_0);
    detail::require_nonnegative("q_s", raw.q_s);
    detail::require_nonnegative("q", raw.q);
    const Extrema ce = raw.C.extrema();
    if (!(ce.inf > 0.0) || ce.sup > 1.0 + 1e-12) {
        throw DomainError("conversion efficiency 'C' must lie in (0, 1]");
    }

    const Extrema mismatch = (raw.b_i - raw.b_g).extrema();
    if (std::max(std::abs(mismatch.inf), std::abs(mismatch.sup)) > 1e-12) {
        throw HalfSaturationMismatch(
            "reduction assumes the half saturation rates for consumption and conversion are equal (b_i == b_g)");
    }
    const PeriodicFunction beta = raw.b_i - raw.v_u;
    if (!(beta.extrema().inf > 0.0)) {
        throw NonpositiveBeta("reduction requires b_i > v_u at all times (beta = b_i - v_u must be positive)");
    }
    const PeriodicFunction alpha = raw.C * raw.i_m;
    return SimplifiedParams({
        raw.r,
        raw.r / raw.K,
        raw.i_m,
        alpha,
        beta,
        raw.q * raw.m_p / alpha,
        raw.v_u,
        raw.m_p + raw.q_0 + raw.q_s,
    });
}

}  // namespace osdyn
