#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "osdyn/analysis.hpp"
#include "osdyn/cli/format.hpp"
#include "osdyn/coefficients.hpp"
#include "osdyn/errors.hpp"
#include "osdyn/integrate.hpp"
#include "osdyn/model.hpp"

namespace osdyn::cli {

inline constexpr std::array<const char*, 8> simplified_names{"a", "b", "c", "alpha", "beta", "gamma", "rho", "R"};
inline constexpr std::array<const char*, 11> raw_names{"r", "K", "i_m", "b_i", "b_g", "v_u",
                                                       "C", "m_p", "q_0", "q_s", "q"};

/// One scalar sweep axis: `<coefficient>.base` or `<coefficient>.segment.<i>`.
struct SweepKnob {
    std::string path;
    double from = 0.0;
    double to = 0.0;
    int count = 1;

    double at(int i) const
    {
        return count == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

struct Scenario {
    std::string name;
    double period = 1.0;
    bool raw = false;
    /// In canonical order for the chosen parameter set.
    std::vector<std::pair<std::string, PeriodicCoefficient>> coefficients;
    std::optional<State> initial_state;
    IntegratorConfig integrator;
    double horizon_periods = 100.0;
    int samples_per_period = 64;
    BoundsOptions bounds;
    std::vector<SweepKnob> sweep;
    double probe_periods = 200.0;
    std::vector<State> orbit_seeds;
    int orbit_grid = 0;
    double orbit_t0 = 0.0;

    const PeriodicCoefficient& coefficient(const std::string& key) const
    {
        for (const auto& [k, c] : coefficients) {
            if (k == key) {
                return c;
            }
        }
        throw ConfigError("unknown coefficient '" + key + "'");
    }

    RawParams raw_params() const
    {
        if (!raw) {
            throw ConfigError("raw_params: scenario has simplified_params only");
        }
        auto c = [&](const char* k) { return PeriodicFunction(coefficient(k)); };
        return {c("r"), c("K"), c("i_m"), c("b_i"), c("b_g"), c("v_u"), c("C"), c("m_p"), c("q_0"), c("q_s"), c("q")};
    }

    /// Simplified coefficients, reducing raw parameters when given.
    SimplifiedParams params() const
    {
        if (raw) {
            return reduce(raw_params());
        }
        auto c = [&](const char* k) { return PeriodicFunction(coefficient(k)); };
        try {
            return SimplifiedParams({c("a"), c("b"), c("c"), c("alpha"), c("beta"), c("gamma"), c("rho"), c("R")});
        } catch (const DomainError& e) {
            throw ConfigError(std::string("simplified_params: ") + e.what());
        }
    }

    const State& require_initial_state() const
    {
        if (!initial_state) {
            throw ConfigError("initial_state: required for this command");
        }
        return *initial_state;
    }

    /// Copy with one knob set; knob paths are validated here.
    Scenario with_knob(const std::string& path, double value) const
    {
        const auto dot = path.find('.');
        if (dot == std::string::npos) {
            throw ConfigError("sweep knob '" + path + "': expected <coefficient>.base or <coefficient>.segment.<i>");
        }
        const std::string key = path.substr(0, dot);
        const std::string rest = path.substr(dot + 1);
        Scenario out = *this;
        PeriodicCoefficient* c = nullptr;
        for (auto& [k, coef] : out.coefficients) {
            if (k == key) {
                c = &coef;
            }
        }
        if (!c) {
            throw ConfigError("sweep knob '" + path + "': no coefficient '" + key + "' in this scenario");
        }
        if (rest == "base") {
            *c = c->with_base(value);
            return out;
        }
        if (rest.rfind("segment.", 0) == 0) {
            std::size_t idx = 0;
            const std::string num = rest.substr(8);
            auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), idx);
            if (ec != std::errc{} || p != num.data() + num.size() || idx >= c->segments().size()) {
                throw ConfigError("sweep knob '" + path + "': segment index out of range");
            }
            *c = c->with_segment_value(idx, value);
            return out;
        }
        throw ConfigError("sweep knob '" + path + "': expected <coefficient>.base or <coefficient>.segment.<i>");
    }
};

namespace detail {

inline std::string where(const YAML::Node& n, const std::string& key)
{
    std::ostringstream os;
    os << key;
    if (n.Mark().line >= 0) {
        os << " (line " << n.Mark().line + 1 << ")";
    }
    return os.str();
}

template <class T>
T scalar(const YAML::Node& n, const std::string& key)
{
    if (!n.IsScalar()) {
        throw ConfigError(where(n, key) + ": expected a scalar");
    }
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where(n, key) + ": cannot read '" + n.Scalar() + "'");
    }
}

inline void only_keys(const YAML::Node& n, const std::string& key, std::initializer_list<const char*> allowed)
{
    if (!n.IsMap()) {
        throw ConfigError(where(n, key) + ": expected a mapping");
    }
    for (const auto& kv : n) {
        const auto k = kv.first.as<std::string>();
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || k == a;
        }
        if (!ok) {
            throw ConfigError(where(kv.first, key.empty() ? k : key + "." + k) + ": unknown key");
        }
    }
}

inline std::vector<double> triple(const YAML::Node& n, const std::string& key)
{
    if (!n.IsSequence() || n.size() != 3) {
        throw ConfigError(where(n, key) + ": expected a list of three numbers");
    }
    return {scalar<double>(n[0], key), scalar<double>(n[1], key), scalar<double>(n[2], key)};
}

inline PeriodicCoefficient parse_coefficient(const YAML::Node& n, const std::string& key, double period)
{
    try {
        if (n.IsScalar()) {
            return PeriodicCoefficient(period, scalar<double>(n, key));
        }
        only_keys(n, key, {"base", "harmonics", "segments"});
        const double base = n["base"] ? scalar<double>(n["base"], key + ".base") : 0.0;
        std::vector<Harmonic> hs;
        if (const auto h = n["harmonics"]) {
            if (!h.IsSequence()) {
                throw ConfigError(where(h, key + ".harmonics") + ": expected a list of [amplitude, k, phase]");
            }
            for (std::size_t i = 0; i < h.size(); ++i) {
                const std::string k = key + ".harmonics[" + std::to_string(i) + "]";
                const auto t = triple(h[i], k);
                const int freq = scalar<int>(h[i][1], k);
                hs.push_back({t[0], freq, t[2]});
            }
        }
        std::vector<Segment> segs;
        if (const auto s = n["segments"]) {
            if (!s.IsSequence()) {
                throw ConfigError(where(s, key + ".segments") + ": expected a list of [start, end, value]");
            }
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto t = triple(s[i], key + ".segments[" + std::to_string(i) + "]");
                segs.push_back({t[0], t[1], t[2]});
            }
        }
        return PeriodicCoefficient(period, base, std::move(hs), std::move(segs));
    } catch (const DomainError& e) {
        throw ConfigError(where(n, key) + ": " + e.what());
    }
}

template <std::size_t N>
std::vector<std::pair<std::string, PeriodicCoefficient>> parse_set(const YAML::Node& n, const std::string& key,
                                                                   const std::array<const char*, N>& names,
                                                                   double period)
{
    if (!n.IsMap()) {
        throw ConfigError(where(n, key) + ": expected a mapping");
    }
    for (const auto& kv : n) {
        const auto k = kv.first.as<std::string>();
        if (std::find_if(names.begin(), names.end(), [&](const char* s) { return k == s; }) == names.end()) {
            throw ConfigError(where(kv.first, key + "." + k) + ": unknown key");
        }
    }
    std::vector<std::pair<std::string, PeriodicCoefficient>> out;
    for (const char* name : names) {
        const std::string k = key + "." + name;
        if (!n[name]) {
            throw ConfigError(k + ": missing");
        }
        out.emplace_back(name, parse_coefficient(n[name], k, period));
    }
    return out;
}

inline State parse_pair(const YAML::Node& n, const std::string& key)
{
    if (!n.IsSequence() || n.size() != 2) {
        throw ConfigError(where(n, key) + ": expected [v, h]");
    }
    return {scalar<double>(n[0], key), scalar<double>(n[1], key)};
}

inline int parse_grid_spec(const std::string& text, const std::string& key)
{
    if (text.rfind("grid:", 0) != 0) {
        throw ConfigError(key + ": expected a list of [v, h] seeds or 'grid:N'");
    }
    int n = 0;
    auto [p, ec] = std::from_chars(text.data() + 5, text.data() + text.size(), n);
    if (ec != std::errc{} || p != text.data() + text.size() || n < 1) {
        throw ConfigError(key + ": grid size must be a positive integer");
    }
    return n;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    using detail::scalar;
    detail::only_keys(root, "", {"name", "period", "simplified_params", "raw_params", "initial_state", "integrator",
                                 "horizon_periods", "output", "bounds", "sweep", "orbit"});
    Scenario s;
    if (root["name"]) {
        s.name = scalar<std::string>(root["name"], "name");
    }
    if (!root["period"]) {
        throw ConfigError("period: missing");
    }
    s.period = scalar<double>(root["period"], "period");
    if (!(s.period > 0.0) || !std::isfinite(s.period)) {
        throw ConfigError("period: must be positive");
    }
    const bool has_s = static_cast<bool>(root["simplified_params"]);
    const bool has_r = static_cast<bool>(root["raw_params"]);
    if (has_s == has_r) {
        throw ConfigError("simplified_params / raw_params: exactly one must be given");
    }
    s.raw = has_r;
    s.coefficients = has_r ? detail::parse_set(root["raw_params"], "raw_params", raw_names, s.period)
                           : detail::parse_set(root["simplified_params"], "simplified_params", simplified_names,
                                               s.period);

    if (const auto n = root["initial_state"]) {
        detail::only_keys(n, "initial_state", {"v0", "h0"});
        if (!n["v0"] || !n["h0"]) {
            throw ConfigError("initial_state: needs both v0 and h0");
        }
        s.initial_state = State{scalar<double>(n["v0"], "initial_state.v0"), scalar<double>(n["h0"], "initial_state.h0")};
        if (!(s.initial_state->v > 0.0) || s.initial_state->h < 0.0) {
            throw ConfigError("initial_state: needs v0 > 0 and h0 >= 0");
        }
    }
    if (const auto n = root["integrator"]) {
        detail::only_keys(n, "integrator", {"rel_tol", "abs_tol", "max_step", "scheme"});
        if (n["rel_tol"]) {
            s.integrator.rel_tol = scalar<double>(n["rel_tol"], "integrator.rel_tol");
        }
        if (n["abs_tol"]) {
            s.integrator.abs_tol = scalar<double>(n["abs_tol"], "integrator.abs_tol");
        }
        if (n["max_step"]) {
            s.integrator.max_step = scalar<double>(n["max_step"], "integrator.max_step");
        }
        if (n["scheme"]) {
            const auto v = scalar<std::string>(n["scheme"], "integrator.scheme");
            if (v == "rk4") {
                s.integrator.scheme = Scheme::rk4;
            } else if (v == "rk45") {
                s.integrator.scheme = Scheme::rk45;
            } else {
                throw ConfigError("integrator.scheme: expected rk4 or rk45");
            }
        }
        try {
            s.integrator.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("integrator: ") + e.what());
        }
    }
    if (root["horizon_periods"]) {
        s.horizon_periods = scalar<double>(root["horizon_periods"], "horizon_periods");
        if (!(s.horizon_periods > 0.0)) {
            throw ConfigError("horizon_periods: must be positive");
        }
    }
    if (const auto n = root["output"]) {
        detail::only_keys(n, "output", {"samples_per_period"});
        if (n["samples_per_period"]) {
            s.samples_per_period = scalar<int>(n["samples_per_period"], "output.samples_per_period");
            if (s.samples_per_period < 1) {
                throw ConfigError("output.samples_per_period: must be >= 1");
            }
        }
    }
    if (const auto n = root["bounds"]) {
        detail::only_keys(n, "bounds", {"periods", "tail_periods", "grid"});
        if (n["periods"]) {
            s.bounds.periods = scalar<double>(n["periods"], "bounds.periods");
        }
        if (n["tail_periods"]) {
            s.bounds.tail_periods = scalar<double>(n["tail_periods"], "bounds.tail_periods");
        }
        if (n["grid"]) {
            s.bounds.grid = scalar<std::size_t>(n["grid"], "bounds.grid");
        }
        if (!(s.bounds.tail_periods > 0.0) || s.bounds.tail_periods > s.bounds.periods || s.bounds.grid < 3) {
            throw ConfigError("bounds: need 0 < tail_periods <= periods and grid >= 3");
        }
    }
    if (const auto n = root["sweep"]) {
        detail::only_keys(n, "sweep", {"knobs", "probe_periods"});
        if (n["probe_periods"]) {
            s.probe_periods = scalar<double>(n["probe_periods"], "sweep.probe_periods");
            if (!(s.probe_periods > 0.0)) {
                throw ConfigError("sweep.probe_periods: must be positive");
            }
        }
        const auto knobs = n["knobs"];
        if (!knobs || !knobs.IsSequence() || knobs.size() < 1 || knobs.size() > 2) {
            throw ConfigError("sweep.knobs: expected a list of one or two knobs");
        }
        for (std::size_t i = 0; i < knobs.size(); ++i) {
            const std::string k = "sweep.knobs[" + std::to_string(i) + "]";
            detail::only_keys(knobs[i], k, {"path", "from", "to", "count"});
            if (!knobs[i]["path"] || !knobs[i]["from"] || !knobs[i]["to"] || !knobs[i]["count"]) {
                throw ConfigError(k + ": needs path, from, to and count");
            }
            SweepKnob kn{scalar<std::string>(knobs[i]["path"], k + ".path"), scalar<double>(knobs[i]["from"], k + ".from"),
                         scalar<double>(knobs[i]["to"], k + ".to"), scalar<int>(knobs[i]["count"], k + ".count")};
            if (kn.count < 1) {
                throw ConfigError(k + ".count: must be >= 1");
            }
            s.sweep.push_back(std::move(kn));
        }
    }
    if (const auto n = root["orbit"]) {
        detail::only_keys(n, "orbit", {"seeds", "t0"});
        if (n["t0"]) {
            s.orbit_t0 = scalar<double>(n["t0"], "orbit.t0");
        }
        if (const auto seeds = n["seeds"]) {
            if (seeds.IsScalar()) {
                s.orbit_grid = detail::parse_grid_spec(seeds.Scalar(), "orbit.seeds");
            } else if (seeds.IsSequence()) {
                for (std::size_t i = 0; i < seeds.size(); ++i) {
                    s.orbit_seeds.push_back(detail::parse_pair(seeds[i], "orbit.seeds[" + std::to_string(i) + "]"));
                }
            } else {
                throw ConfigError("orbit.seeds: expected a list of [v, h] seeds or 'grid:N'");
            }
        }
    }
    return s;
}

inline Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

inline std::string emit_coefficient(const PeriodicCoefficient& c)
{
    if (c.harmonics().empty() && c.segments().empty()) {
        return fmt(c.base());
    }
    std::ostringstream os;
    os << "{base: " << fmt(c.base());
    if (!c.harmonics().empty()) {
        os << ", harmonics: [";
        for (std::size_t i = 0; i < c.harmonics().size(); ++i) {
            const auto& h = c.harmonics()[i];
            os << (i ? ", " : "") << '[' << fmt(h.amplitude) << ", " << h.frequency << ", " << fmt(h.phase) << ']';
        }
        os << ']';
    }
    if (!c.segments().empty()) {
        os << ", segments: [";
        for (std::size_t i = 0; i < c.segments().size(); ++i) {
            const auto& s = c.segments()[i];
            os << (i ? ", " : "") << '[' << fmt(s.start) << ", " << fmt(s.end) << ", " << fmt(s.value) << ']';
        }
        os << ']';
    }
    os << '}';
    return os.str();
}

/// YAML text that parses back to the same scenario.
inline std::string emit(const Scenario& s)
{
    std::ostringstream os;
    if (!s.name.empty()) {
        YAML::Emitter e;
        e << s.name;
        os << "name: " << e.c_str() << '\n';
    }
    os << "period: " << fmt(s.period) << '\n';
    os << (s.raw ? "raw_params:\n" : "simplified_params:\n");
    for (const auto& [k, c] : s.coefficients) {
        os << "  " << k << ": " << emit_coefficient(c) << '\n';
    }
    if (s.initial_state) {
        os << "initial_state: {v0: " << fmt(s.initial_state->v) << ", h0: " << fmt(s.initial_state->h) << "}\n";
    }
    const auto& ic = s.integrator;
    os << "integrator: {rel_tol: " << fmt(ic.rel_tol) << ", abs_tol: " << fmt(ic.abs_tol)
       << ", max_step: " << fmt(ic.max_step) << ", scheme: " << (ic.scheme == Scheme::rk4 ? "rk4" : "rk45") << "}\n";
    os << "horizon_periods: " << fmt(s.horizon_periods) << '\n';
    os << "output: {samples_per_period: " << s.samples_per_period << "}\n";
    os << "bounds: {periods: " << fmt(s.bounds.periods) << ", tail_periods: " << fmt(s.bounds.tail_periods)
       << ", grid: " << s.bounds.grid << "}\n";
    if (!s.sweep.empty()) {
        os << "sweep:\n  probe_periods: " << fmt(s.probe_periods) << "\n  knobs:\n";
        for (const auto& k : s.sweep) {
            os << "    - {path: " << k.path << ", from: " << fmt(k.from) << ", to: " << fmt(k.to)
               << ", count: " << k.count << "}\n";
        }
    }
    if (s.orbit_grid > 0 || !s.orbit_seeds.empty() || s.orbit_t0 != 0.0) {
        os << "orbit:\n  t0: " << fmt(s.orbit_t0) << '\n';
        if (s.orbit_grid > 0) {
            os << "  seeds: \"grid:" << s.orbit_grid << "\"\n";
        } else if (!s.orbit_seeds.empty()) {
            os << "  seeds: [";
            for (std::size_t i = 0; i < s.orbit_seeds.size(); ++i) {
                os << (i ? ", " : "") << '[' << fmt(s.orbit_seeds[i].v) << ", " << fmt(s.orbit_seeds[i].h) << ']';
            }
            os << "]\n";
        }
    }
    return os.str();
}

}  // namespace osdyn::cli
