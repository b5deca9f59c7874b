#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "osdyn/model.hpp"
#include "support.hpp"

using namespace osdyn;

namespace {

PeriodicFunction K(double v) { return PeriodicFunction::constant(v, 1.0); }

RawParams raw_constants()
{
    return RawParams{K(1.0), K(2.0), K(2.0), K(1.0), K(1.0), K(0.0), K(0.5), K(0.1), K(0.02), K(0.03), K(0.0)};
}

}  // namespace

TEST(Reduce, GrowthAndCrowding)
{
    RawParams raw = raw_constants();
    const auto p = reduce(raw);
    EXPECT_EQ(p.a()(0.3), 1.0);
    EXPECT_EQ(p.b()(0.3), 0.5);
}

TEST(Reduce, ConversionAndLosses)
{
    RawParams raw = raw_constants();
    raw.C = K(0.5);
    raw.i_m = K(2.0);
    raw.q = K(0.0);
    raw.m_p = K(0.1);
    raw.q_0 = K(0.0);
    raw.q_s = K(0.0);
    const auto p = reduce(raw);
    EXPECT_DOUBLE_EQ(p.alpha()(0.0), 1.0);
    EXPECT_DOUBLE_EQ(p.gamma()(0.0), 0.0);
    EXPECT_DOUBLE_EQ(p.R()(0.0), 0.1);
}

TEST(Reduce, RawConstants)
{
    const auto p = reduce(raw_constants());
    const auto k = p.at(0.0);
    EXPECT_DOUBLE_EQ(k.a, 1.0);
    EXPECT_DOUBLE_EQ(k.b, 0.5);
    EXPECT_DOUBLE_EQ(k.c, 2.0);
    EXPECT_DOUBLE_EQ(k.alpha, 1.0);
    EXPECT_DOUBLE_EQ(k.beta, 1.0);
    EXPECT_DOUBLE_EQ(k.gamma, 0.0);
    EXPECT_DOUBLE_EQ(k.rho, 0.0);
    EXPECT_DOUBLE_EQ(k.R, 0.15);
    for (auto [name, fn] : p.named()) {
        EXPECT_TRUE(fn->closed_form().has_value()) << name;
    }
}

TEST(Reduce, ReserveShiftsHalfSaturation)
{
    RawParams raw = raw_constants();
    raw.v_u = K(0.2);
    raw.b_i = K(1.0);
    raw.b_g = K(1.0);
    const auto p = reduce(raw);
    EXPECT_DOUBLE_EQ(p.beta()(0.0), 0.8);
    EXPECT_DOUBLE_EQ(p.rho()(0.0), 0.2);
}

TEST(Reduce, HalfSaturationMismatch)
{
    RawParams raw = raw_constants();
    raw.b_g = K(1.1);
    EXPECT_THROW(reduce(raw), HalfSaturationMismatch);
}

TEST(Reduce, NonpositiveBeta)
{
    RawParams raw = raw_constants();
    raw.v_u = K(1.0);
    EXPECT_THROW(reduce(raw), NonpositiveBeta);
}

TEST(Reduce, CommutesWithEvaluation)
{
    RawParams raw = raw_constants();
    raw.r = PeriodicCoefficient(1.0, 1.0, {{0.4, 1, 0.1}}, {{0.0, 0.6, 0.5}, {0.6, 1.0, 0.0}});
    raw.q = PeriodicCoefficient(1.0, 0.3, {{0.1, 2, 0.0}});
    const auto p = reduce(raw);
    for (int i = 0; i < 200; ++i) {
        const double t = -3.0 + 0.0371 * i;
        EXPECT_EQ(p.a()(t), raw.r(t));
        EXPECT_NEAR(p.b()(t), raw.r(t) / 2.0, 1e-15);
        EXPECT_NEAR(p.gamma()(t), raw.q(t) * 0.1 / 1.0, 1e-15);
    }
    EXPECT_TRUE(p.b().closed_form().has_value());
}

TEST(Params, BetaMustBePositive)
{
    support::ConstantSet k;
    k.beta = 0.0;
    EXPECT_THROW(support::constant_params(k), DomainError);
    k.beta = 1.0;
    k.R = -0.1;
    EXPECT_THROW(support::constant_params(k), DomainError);
}

TEST(Rhs, LogisticEquilibrium)
{
    support::ConstantSet k;
    k.a = 1.0;
    k.b = 1.0;
    const auto p = support::constant_params(k);
    const State d = rhs(p, 0.0, {1.0, 0.0});
    EXPECT_EQ(d.v, 0.0);
    EXPECT_EQ(d.h, 0.0);
}

TEST(Rhs, HerbivoreNullclineFromQuadratic)
{
    support::ConstantSet k;
    k.alpha = 2.0;
    k.R = 0.5;
    k.gamma = 0.25;
    k.beta = 1.0;
    k.rho = 0.0;
    const auto p = support::constant_params(k);
    const double x = (0.5 + std::sqrt(0.25 + 2.0)) / 4.0;
    const double v = x * 1.0 / (1.0 - x);
    EXPECT_LE(std::abs(rhs(p, 0.0, {v, 1.0}).h), 1e-12);
    EXPECT_LE(std::abs(percapita_h(p, 0.0, v)), 1e-12);
}

TEST(Rhs, SingularityGuard)
{
    support::ConstantSet k;
    k.rho = 0.3;
    const auto p = support::constant_params(k);
    const double eps = p.singular_epsilon();
    EXPECT_DOUBLE_EQ(eps, 1e-9 * 1.3);
    EXPECT_THROW(rhs(p, 0.0, {0.3 + eps / 2.0, 1.0}), SingularityError);
    EXPECT_THROW(percapita_h(p, 0.0, 0.3), SingularityError);
    // no herbivores: logistic field only
    EXPECT_NO_THROW(rhs(p, 0.0, {0.3, 0.0}));
}

TEST(Rhs, SingularityGuardWithZeroReserve)
{
    support::ConstantSet k;
    k.rho = 0.0;
    const auto p = support::constant_params(k);
    EXPECT_THROW(rhs(p, 0.0, {0.0, 1.0}), SingularityError);
}

TEST(PercapitaH, SaturatesWithoutStarvationTerm)
{
    support::ConstantSet k;
    k.gamma = 0.0;
    const auto p = support::constant_params(k);
    double prev = -1e300;
    for (double v = 0.01; v < 1e4; v *= 1.5) {
        const double g = percapita_h(p, 0.0, v);
        EXPECT_GT(g, prev);
        EXPECT_LT(g, k.alpha - k.R);
        prev = g;
    }
    EXPECT_NEAR(prev, k.alpha - k.R, 1e-3);
}

TEST(PercapitaH, DivergesAtReserveWithStarvationTerm)
{
    support::ConstantSet k;
    k.rho = 0.2;
    k.gamma = 0.1;
    const auto p = support::constant_params(k);
    EXPECT_LT(percapita_h(p, 0.0, 0.2 + 1e-6), -1e4);
}

TEST(Properties, PercapitaTimesDensityIsHerbivoreRate)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int i = 0; i < 500; ++i) {
        support::ConstantSet k{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng) * 0.3, u(rng)};
        const auto p = support::constant_params(k);
        const State x{k.rho + u(rng), u(rng)};
        const double dh = rhs(p, 0.0, x).h;
        EXPECT_LE(std::abs(percapita_h(p, 0.0, x.v) * x.h - dh), 1e-14 * std::abs(dh) + 1e-300);
    }
}
