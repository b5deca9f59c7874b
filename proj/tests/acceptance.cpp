// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "osdyn/cli/commands.hpp"
#include "support.hpp"

using namespace osdyn;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

SimplifiedParams load(const std::string& yaml) { return cli::parse_scenario(yaml).params(); }

IntegratorConfig tight()
{
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    return cfg;
}

// Vegetation-only suite. The herbivore block is shared and only matters for
// the boundary multipliers.
const char* const kHerbivore = R"(  c: 0.2
  alpha: {base: 1, harmonics: [[0.3, 1, 0.4]]}
  beta: 1
  gamma: 0.02
  rho: 0.05
  R: 0.2
)";

std::vector<std::pair<std::string, std::string>> logistic_suite(const std::string& herbivore = kHerbivore)
{
    const std::vector<std::pair<std::string, std::string>> growth{
        {"constants", "period: 1\nsimplified_params:\n  a: 1.3\n  b: 0.9\n"},
        {"single harmonic", "period: 1\nsimplified_params:\n  a: {base: 1, harmonics: [[0.5, 1, 0]]}\n  b: 1\n"},
        {"two harmonics",
         "period: 2\nsimplified_params:\n  a: {base: 1, harmonics: [[0.4, 1, 0], [0.3, 3, 1]]}\n"
         "  b: {base: 0.8, harmonics: [[0.2, 1, 0.5]]}\n"},
        {"step", "period: 1\nsimplified_params:\n  a: {base: 0, segments: [[0, 0.4, 2], [0.4, 1, 0.1]]}\n  b: 1\n"},
        {"step+harmonic",
         "period: 1\nsimplified_params:\n  a: {base: 0.3, harmonics: [[0.2, 1, 0]], segments: [[0, 0.3, 1.5], [0.3, 1, 0]]}\n"
         "  b: {base: 1, harmonics: [[0.3, 2, 0]]}\n"},
    };
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, text] : growth) {
        out.emplace_back(name, text + herbivore);
    }
    return out;
}

// Permanent scenarios found by a random scan with every checker verdict true.
const std::vector<std::string> kPermanent{
    R"(period: 1
simplified_params:
  a: {base: 1.998, harmonics: [[0.4369, 1, 0]]}
  b: 2.129
  c: 0.2972
  alpha: 4.489
  beta: 8.443
  gamma: 0.01691
  rho: 0.02754
  R: 0.1148
initial_state: {v0: 0.5, h0: 0.5}
)",
    R"(period: 1
simplified_params:
  a: {base: 0.521, harmonics: [[0.02097, 1, 0]]}
  b: 0.5053
  c: 0.09229
  alpha: 1.227
  beta: 2.466
  gamma: 0.001245
  rho: 3.04e-05
  R: 0.1268
initial_state: {v0: 0.5, h0: 0.5}
)",
    R"(period: 1
simplified_params:
  a: {base: 1.581, harmonics: [[0.06784, 1, 0]]}
  b: 1.543
  c: 0.2306
  alpha: 4.099
  beta: 6.088
  gamma: 0.01446
  rho: 0.0005688
  R: 0.4088
initial_state: {v0: 0.5, h0: 0.5}
)",
    R"(period: 1
simplified_params:
  a: {base: 1.523, harmonics: [[0.03206, 1, 0]]}
  b: 1.65
  c: 0.1842
  alpha: 4.06
  beta: 8.037
  gamma: 0.01833
  rho: 0.04771
  R: 0.06727
initial_state: {v0: 0.5, h0: 0.5}
)",
    R"(period: 1
simplified_params:
  a: {base: 0.9315, harmonics: [[0.1958, 1, 0]]}
  b: 0.8813
  c: 0.1005
  alpha: 3.593
  beta: 6.744
  gamma: 0.002885
  rho: 0.01161
  R: 0.2864
initial_state: {v0: 0.5, h0: 0.5}
)",
};

const std::vector<State> kPermanentStarts{{0.5, 0.5}, {0.2, 3.0}, {1.0, 0.05}, {0.8, 8.0}};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome closed_form_vstar()
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    double worst = 0.0;
    for (const auto& [name, text] : logistic_suite()) {
        const auto p = load(text);
        const auto vs = vstar(p);
        const double w = p.period();
        const Trajectory traj = integrate(p, {vs(0.0), 0.0}, 0.0, 5.0 * w, tight());
        double err = 0.0;
        for (const auto& [t, x] : traj.sample(w / 512.0)) {
            err = std::max(err, std::abs(x.v - vs(t)));
        }
        worst = std::max(worst, err);
        if (err > 1e-7) {
            o.pass = false;
            o.detail += " [" + name + " " + num(err) + "]";
        }
    }
    const double secs = seconds_since(t0);
    o.pass = o.pass && secs < 5.0;
    o.detail = "max |v* - v| = " + num(worst) + " over 5 scenarios, " + num(secs) + " s" + o.detail;
    return o;
}

Outcome vstar_attracts()
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> logv(std::log(1e-2), std::log(10.0));
    double worst = 0.0;
    for (const auto& [name, text] : logistic_suite()) {
        const auto p = load(text);
        const auto vs = vstar(p);
        const double T = 50.0 * p.period();
        for (int k = 0; k < 10; ++k) {
            const double v0 = std::exp(logv(rng));
            const double err = std::abs(flow_map(p, {v0, 0.0}, 0.0, T, tight()).v - vs(T));
            worst = std::max(worst, err);
            if (err > 1e-7) {
                o.pass = false;
                o.detail += " [" + name + " v0=" + num(v0) + " " + num(err) + "]";
            }
        }
    }
    const double secs = seconds_since(t0);
    o.pass = o.pass && secs < 10.0;
    o.detail = "max |v(50w) - v*(50w)| = " + num(worst) + " over 50 starts, " + num(secs) + " s" + o.detail;
    return o;
}

/// Random full model with a small reserve and positive coefficients.
SimplifiedParams random_model(std::mt19937_64& rng, double w)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto coef = [&](double lo, double hi) {
        return PeriodicFunction(support::random_coefficient(rng, w)) * (lo + (hi - lo) * u(rng));
    };
    return SimplifiedParams({coef(0.3, 1.5), coef(0.3, 1.5), coef(0.05, 1.0), coef(0.5, 3.0), coef(0.3, 1.5),
                             coef(0.0, 0.1), coef(0.0, 0.1), coef(0.05, 0.4)});
}

Outcome comparison_principle()
{
    Outcome o;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = -1e300;
    int done = 0, singular = 0;
    while (done < 20) {
        const double w = 0.5 + 2.0 * u(rng);
        const auto p = random_model(rng, w);
        const State x0{p.rho_sup() + 0.1 + 2.0 * u(rng), 2.0 * u(rng)};
        try {
            const Trajectory full = integrate(p, x0, 0.0, 20.0 * w, tight());
            const Trajectory upper = integrate(p, {x0.v, 0.0}, 0.0, 20.0 * w, tight());
            for (const auto& [t, x] : full.sample(w / 64.0)) {
                worst = std::max(worst, x.v - upper.at(t).v);
            }
            ++done;
        } catch (const SingularityError&) {
            ++singular;
        }
    }
    o.pass = worst <= 1e-8;
    o.detail = "max v - U = " + num(worst) + " over 20 scenarios";
    if (singular > 0) {
        o.detail += " (" + std::to_string(singular) + " draws hit the reserve guard and were redrawn)";
    }
    return o;
}

Outcome positivity()
{
    Outcome o;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int runs = 0, bad = 0, singular = 0;
    double v_min = 1e300, h_min = 1e300;
    // runs stopped by the reserve guard (v meeting a rising rho(t)) are counted
    // separately; every state they produced before the stop had v > rho >= 0
    while (runs < 100) {
        const double w = 0.5 + 2.0 * u(rng);
        const auto p = random_model(rng, w);
        const State x0{p.rho_sup() + 0.01 + 3.0 * u(rng), u(rng) < 0.1 ? 0.0 : 5.0 * u(rng)};
        try {
            const Trajectory traj = integrate(p, x0, 0.0, 50.0 * w);
            ++runs;
            for (const State& x : traj.states()) {
                v_min = std::min(v_min, x.v);
                h_min = std::min(h_min, x.h);
                if (!(x.v > 0.0) || !(x.h >= 0.0)) {
                    ++bad;
                    break;
                }
            }
        } catch (const SingularityError&) {
            ++singular;
        }
    }
    o.pass = bad == 0;
    o.detail = std::to_string(runs) + " complete runs x 50 periods, min v = " + num(v_min) + ", min h = " +
               num(h_min) + ", sign violations " + std::to_string(bad) + "; " + std::to_string(singular) +
               " further draws stopped at the reserve guard";
    return o;
}

Outcome equilibrium_oracle()
{
    Outcome o;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_rhs = 0.0, worst_fp = 0.0;
    int found = 0;
    while (found < 10) {
        support::ConstantSet k;
        k.a = 0.5 + 1.5 * u(rng);
        k.b = 0.5 + 1.5 * u(rng);
        k.c = 0.05 + 0.45 * u(rng);
        k.alpha = 1.0 + 3.0 * u(rng);
        k.beta = 0.5 + 2.5 * u(rng);
        k.gamma = 0.005 + 0.045 * u(rng);
        k.rho = 0.1 * u(rng);
        k.R = 0.05 + 0.35 * u(rng);
        const auto p = support::constant_params(k);
        if (k.rho >= k.a / k.b || !(check_permanence_iff(p).value("permanence_iff.margin") > 0.0)) {
            continue;
        }
        ++found;
        const State eq = support::constant_equilibrium(k);
        if (!(eq.h > 0.0)) {
            o.pass = false;
            o.detail += " [no interior equilibrium: v^ = " + num(eq.v) + " >= a/b]";
            continue;
        }
        const State f = rhs(p, 0.0, eq);
        worst_rhs = std::max(worst_rhs, max_norm(f));
        try {
            const auto r = find_fixed_point(p, 1.2 * eq);
            const double err = max_norm(r.fixed_state - eq);
            worst_fp = std::max(worst_fp, err);
            if (!r.converged || err > 1e-9) {
                o.pass = false;
            }
        } catch (const Error& e) {
            o.pass = false;
            o.detail += std::string(" [") + e.what() + "]";
        }
    }
    o.pass = o.pass && worst_rhs <= 1e-12;
    o.detail = "10 sets: max |rhs| = " + num(worst_rhs) + ", max |x - x^| = " + num(worst_fp) + o.detail;
    return o;
}

Outcome extinction()
{
    Outcome o;
    std::vector<std::string> suite{
        "period: 1\nsimplified_params:\n  a: 1\n  b: 1\n  c: 0.1\n  alpha: 0.1\n  beta: 1\n  gamma: 0.05\n  rho: 0\n  R: 0.2\n"};
    const std::string weak = R"(  c: 0.2
  alpha: {base: 0.4, harmonics: [[0.2, 1, 0.4]]}
  beta: 1
  gamma: 0.05
  rho: 0.05
  R: 0.25
)";
    for (const auto& [name, text] : logistic_suite(weak)) {
        if (name != "constants") {
            suite.push_back(text);
        }
    }
    double worst_h = 0.0, worst_mu = 0.0, worst_margin = -1e300;
    for (const auto& text : suite) {
        const auto p = load(text);
        const auto vs = vstar(p);
        const double margin = check_permanence_iff(p, vs).value("permanence_iff.margin");
        worst_margin = std::max(worst_margin, margin);
        for (const State x0 : {State{0.5, 0.5}, State{1.5, 2.0}, State{0.2, 5.0}, State{vs(0.0), 1.0}}) {
            worst_h = std::max(worst_h, flow_map(p, x0, 0.0, 200.0 * p.period()).h);
        }
        worst_mu = std::max(worst_mu, std::abs(boundary_multipliers_fd(p, vs).herbivore));
    }
    o.pass = worst_margin <= -0.05 && worst_h < 1e-6 && worst_mu <= 1.0;
    o.detail = "5 scenarios, margins <= " + num(worst_margin) + ": max h(200w) = " + num(worst_h) +
               ", max |mu_h| = " + num(worst_mu);
    return o;
}

Outcome permanence()
{
    Outcome o;
    double worst_min = 1e300, worst_spread = 0.0;
    int gas_count = 0;
    for (std::size_t i = 0; i < kPermanent.size(); ++i) {
        const cli::Scenario s = cli::parse_scenario(kPermanent[i]);
        const auto p = s.params();
        const ConditionReport r = cli::run_checks(s, p);
        const bool eligible = r.value("permanence_iff.margin") >= 0.05 && r.verdict("vegetation_persistence") &&
                              r.verdict("herbivore_persistence");
        if (!eligible) {
            o.pass = false;
            o.detail += " [scenario " + std::to_string(i) + " not permanent by the checkers]";
            continue;
        }
        const bool gas = r.verdict("gas");
        gas_count += gas;
        const double w = p.period();
        std::vector<State> ends;
        for (const State& x0 : kPermanentStarts) {
            const Trajectory traj = integrate(p, x0, 0.0, 200.0 * w);
            const WindowStats ws = traj.window(100.0 * w, 200.0 * w);
            worst_min = std::min({worst_min, ws.v_inf, ws.h_inf});
            ends.push_back(traj.states().back());
        }
        if (gas) {
            for (std::size_t a = 0; a < ends.size(); ++a) {
                for (std::size_t b = a + 1; b < ends.size(); ++b) {
                    worst_spread = std::max(worst_spread, max_norm(ends[a] - ends[b]));
                }
            }
        }
    }
    o.pass = o.pass && worst_min >= 1e-4 && worst_spread <= 1e-5;
    o.detail = "5 scenarios x 4 starts: min v,h on [100w,200w] = " + num(worst_min) + ", max spread at 200w = " +
               num(worst_spread) + " (" + std::to_string(gas_count) + " with all stability verdicts true)" + o.detail;
    return o;
}

Outcome boundary_floquet()
{
    Outcome o;
    double worst = 0.0;
    for (const auto& [name, text] : logistic_suite()) {
        const auto p = load(text);
        const auto vs = vstar(p);
        const auto q = boundary_multipliers(p, vs);
        const auto fd = boundary_multipliers_fd(p, vs);
        const double err = std::max(std::abs(fd.vegetation - q.vegetation), std::abs(fd.herbivore - q.herbivore));
        worst = std::max(worst, err);
        if (err > 1e-5) {
            o.pass = false;
            o.detail += " [" + name + " " + num(err) + "]";
        }
    }
    o.detail = "max |FD - quadrature| = " + num(worst) + " over 5 scenarios" + o.detail;
    return o;
}

Outcome lyapunov()
{
    Outcome o;
    double worst_w = -1e300;
    for (const auto& [name, text] : logistic_suite()) {
        const auto p = load(text);
        const auto vs = vstar(p);
        for (double v0 : {0.05, 0.7, 3.0}) {
            const auto W = lyapunov_W(integrate(p, {v0, 0.0}, 0.0, 20.0 * p.period()), vs);
            worst_w = std::max(worst_w, W.max_increase());
        }
    }
    double worst_ratio = 0.0;
    int gas_count = 0;
    for (const auto& text : kPermanent) {
        const cli::Scenario s = cli::parse_scenario(text);
        const auto p = s.params();
        const ConditionReport r = cli::run_checks(s, p);
        if (!(r.verdict("gas.inf_condition_1") && r.verdict("gas.inf_condition_2") && r.verdict("gas.avg_vegetation") &&
              r.verdict("gas.avg_herbivore"))) {
            continue;
        }
        ++gas_count;
        const double T = 150.0 * p.period();
        const Trajectory ref = integrate(p, kPermanentStarts[0], 0.0, T, tight());
        for (std::size_t k = 1; k < kPermanentStarts.size(); ++k) {
            const Trajectory other = integrate(p, kPermanentStarts[k], 0.0, T, tight());
            const auto X = lyapunov_X(other, ref, {0.0, T});
            worst_ratio = std::max(worst_ratio, X.value.back() / X.value.front());
        }
    }
    o.pass = worst_w <= 1e-8 && gas_count > 0 && worst_ratio <= 1e-6;
    o.detail = "max W increase = " + num(worst_w) + "; max X(150w)/X(0) = " + num(worst_ratio) + " on " +
               std::to_string(gas_count) + " stable scenarios";
    return o;
}

Outcome sweep_threshold()
{
    Outcome o;
    const double a = 1.0, b = 1.0, beta = 1.0, gamma = 0.05, rho = 0.0, R = 0.2;
    // zero of alpha (v* - rho)/(beta + v*) - R - gamma beta/(v* - rho) at v* = a/b
    const double v = a / b;
    const double root = (R + gamma * beta / (v - rho)) * (beta + v) / (v - rho);
    const std::string text = R"(period: 1
simplified_params:
  a: 1
  b: 1
  c: 0.1
  alpha: 2
  beta: 1
  gamma: 0.05
  rho: 0
  R: 0.2
initial_state: {v0: 0.5, h0: 0.5}
sweep:
  probe_periods: 50
  knobs:
    - {path: alpha.base, from: 0.1, to: 2, count: 50}
)";
    std::ostringstream out, err;
    const int code = cli::cmd_sweep(cli::parse_scenario(text), {}, out, err);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    for (std::istringstream ls(line); std::getline(ls, line, ',');) {
        header.push_back(line);
    }
    const auto col = std::find(header.begin(), header.end(), "permanence_iff.margin") - header.begin();
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        for (std::istringstream ls(line); std::getline(ls, line, ',');) {
            f.push_back(line);
        }
        rows.emplace_back(std::stod(f[0]), std::stod(f[col]));
    }
    int crossings = 0;
    bool bracketed = false;
    std::string cell;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if ((rows[i].second > 0.0) != (rows[i + 1].second > 0.0)) {
            ++crossings;
            bracketed = rows[i].first <= root && root <= rows[i + 1].first;
            cell = "[" + num(rows[i].first) + ", " + num(rows[i + 1].first) + "]";
        }
    }
    o.pass = code == 0 && rows.size() == 50 && crossings == 1 && bracketed;
    o.detail = "analytic alpha = " + num(root) + ", margin sign change in " + cell + " (" + std::to_string(crossings) +
               " crossing, " + std::to_string(rows.size()) + " rows)";
    return o;
}

Outcome average_calculus()
{
    Outcome o;
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int identity_failures = 0;
    for (int i = 0; i < 1000; ++i) {
        const double w = 0.2 + 5.0 * u(rng);
        const PeriodicCoefficient c = support::random_coefficient(rng, w);
        const double closed = c.average();
        worst = std::max(worst, std::abs(PeriodicFunction(c).quadrature_average().value - closed));
        // harmonics contribute nothing, each step contributes value * width
        double weighted = c.base();
        for (const auto& s : c.segments()) {
            weighted += s.value * (s.end - s.start);
        }
        const PeriodicCoefficient plain(w, c.base(), {}, c.segments());
        const PeriodicCoefficient harmonics_only(w, c.base(), c.harmonics());
        identity_failures += closed != weighted || closed != plain.average() || harmonics_only.average() != c.base();
    }
    const PeriodicCoefficient half(1.0, 0.0, {}, {{0.0, 0.5, 2.0}, {0.5, 1.0, 0.0}});
    identity_failures += half.average() != 1.0;
    o.pass = worst <= 1e-10 && identity_failures == 0;
    o.detail = "1000 coefficients: max |closed - quadrature| = " + num(worst) + ", identity failures " +
               std::to_string(identity_failures);
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"closed-form v* matches integration", closed_form_vstar},
        {"v* attracts positive vegetation", vstar_attracts},
        {"vegetation stays below the herbivore-free trajectory", comparison_principle},
        {"positivity of v and h", positivity},
        {"constant-coefficient equilibrium recovered", equilibrium_oracle},
        {"extinction when the permanence average is negative", extinction},
        {"permanence and a common attracting orbit", permanence},
        {"boundary Floquet multipliers, FD vs quadrature", boundary_floquet},
        {"Lyapunov functions decrease", lyapunov},
        {"alpha sweep brackets the permanence threshold", sweep_threshold},
        {"closed-form and quadrature averages", average_calculus},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " -- "
                  << o.detail << '\n'
                  << std::flush;
    }
    return failed == 0 ? 0 : 1;
}
