#include <doctest.h>

#include "dynheat/errors.hpp"
#include "dynheat/nonlinearity.hpp"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace dynheat;

TEST_CASE("source evaluation") {
    const auto f = SourceTerm::power(3.0);
    CHECK(f.eval(0.3, 2.0) == 4.0);
    CHECK(f.eval(0.3, -2.0) == -4.0);
    CHECK(f.eval(0.3, 0.0) == 0.0);

    const auto g = SourceTerm::f0(2.0, 4.0, PiecewiseConstant(-1.0), PiecewiseConstant(1.0));
    CHECK(g.eval(0.5, 2.0) == 6.0);

    CHECK_THROWS_AS(f.eval(0.0, std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(f.eval(0.0, std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("f0 with a zero subcritical part is the power source") {
    const auto f = SourceTerm::power(3.5);
    const auto g = SourceTerm::f0(2.5, 3.5, PiecewiseConstant(0.0), PiecewiseConstant(1.0));
    for (double u = -7.0; u <= 7.0; u += 0.37) {
        CHECK(g.eval(0.2, u) == doctest::Approx(f.eval(0.2, u)).epsilon(1e-15));
        CHECK(g.potential(0.2, u) == doctest::Approx(f.potential(0.2, u)).epsilon(1e-15));
    }
}

TEST_CASE("piecewise constant coefficients") {
    PiecewiseConstant a({0.5}, {-1.0, 2.0});
    CHECK(a(0.2) == -1.0);
    CHECK(a(0.5) == 2.0);
    CHECK(a(0.9) == 2.0);
    CHECK(a.min() == -1.0);
    CHECK(a.max() == 2.0);
    const auto f = SourceTerm::f0(2.0, 3.0, a, PiecewiseConstant(1.0));
    CHECK(f.eval(0.1, 1.0) == 0.0);
    CHECK(f.eval(0.7, 1.0) == 3.0);
}

TEST_CASE("potentials") {
    CHECK(SourceTerm::power(4.0).potential(0.0, 2.0) == 4.0);
    CHECK(SourceTerm::f1_capped(3.0).potential(0.0, 2.0) == doctest::Approx(17.0 / 6.0).epsilon(1e-14));
    CHECK(SourceTerm::f1_capped(3.0).potential(0.0, -2.0) == doctest::Approx(17.0 / 6.0).epsilon(1e-14));
    for (const auto& f : {SourceTerm::power(3.0), SourceTerm::f1_capped(4.0), SourceTerm::zero(3.0)})
        CHECK(f.potential(0.4, 0.0) == 0.0);
}

TEST_CASE("quadrature potential agrees with closed forms") {
    const std::vector<SourceTerm> kinds{
        SourceTerm::power(3.0), SourceTerm::power(4.7), SourceTerm::f1_capped(3.0),
        SourceTerm::f0(2.0, 4.0, PiecewiseConstant(-1.0), PiecewiseConstant(1.0)),
        SourceTerm::f0(2.5, 3.0, PiecewiseConstant(0.5), PiecewiseConstant(2.0))};
    for (const auto& f : kinds)
        for (double u : {-9.0, -2.0, -0.7, -0.01, 0.3, 1.0, 1.5, 4.0, 12.0}) {
            const double exact = f.potential(0.3, u);
            CAPTURE(u);
            CHECK(std::abs(f.potential_by_quadrature(0.3, u) - exact) <= 1e-9 * std::abs(exact));
        }
}

TEST_CASE("custom sources") {
    const auto e = SourceTerm::custom("exp", 3.0, [](double, double u) { return std::exp(u); });
    CHECK_FALSE(e.has_closed_form_potential());
    CHECK(e.potential(0.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-10));
    CHECK(e.derivative(0.0, 0.5) == doctest::Approx(std::exp(0.5)).epsilon(1e-7));

    const auto f = SourceTerm::custom("cubic", 4.0, [](double, double u) { return u * u * u; });
    const double F = oracle::simpson([](double s) { return s * s * s; }, 0.0, 2.5);
    CHECK(f.potential(0.0, 2.5) == doctest::Approx(F).epsilon(1e-10));
}

TEST_CASE("power source: f u - (p - eps) F = (eps/p) |u|^p pointwise") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-20.0, 20.0);
    for (double p : {2.5, 3.0, 4.0, 6.5}) {
        const auto f = SourceTerm::power(p);
        for (double eps : {0.05, 0.1, 0.25}) {
            for (int i = 0; i < 200; ++i) {
                const double u = U(rng);
                const double lhs = f.eval(0.0, u) * u - (p - eps) * f.potential(0.0, u);
                const double rhs = eps / p * std::pow(std::abs(u), p);
                CHECK(std::abs(lhs - rhs) <= 1e-13 * std::pow(std::abs(u), p) * p);
            }
        }
    }
}

TEST_CASE("F1 validation") {
    SampleSpec spec;
    const auto r = validate_F1(SourceTerm::power(3.0), spec);
    CHECK(r.pass);
    CHECK(r.samples > 0);
    CHECK(r.constants.at("c7") <= 2.0);

    const auto same = validate_F1(SourceTerm::f0(2.0, 3.0, PiecewiseConstant(0.0), PiecewiseConstant(1.0)), spec);
    CHECK(same.constants.at("c7") == doctest::Approx(r.constants.at("c7")).epsilon(1e-12));

    const auto e = SourceTerm::custom("exp", 3.0, [](double, double u) { return std::exp(u); });
    const auto bad = validate_F1(e, spec);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_margin > 0.0);
    CHECK(bad.constants.at("c7_growth") > spec.growth_limit);
}

TEST_CASE("F2 and F3 validation") {
    const auto power = validate_F2_F3(SourceTerm::power(3.0), 0.1);
    CHECK(power.f2.pass);
    CHECK(power.f2.constants.at("c10") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(power.f3.pass);
    CHECK(power.f3.constants.at("c11") == doctest::Approx(0.1 / 3.0).epsilon(1e-10));

    const auto pos = validate_F2_F3(SourceTerm::f0(2.0, 4.0, PiecewiseConstant(1.0), PiecewiseConstant(1.0)), 0.1);
    CHECK_FALSE(pos.f2.pass);
    CHECK(pos.f2.worst_margin > 0.0);

    const auto neg = validate_F2_F3(SourceTerm::f0(2.0, 4.0, PiecewiseConstant(-1.0), PiecewiseConstant(1.0)), 0.1);
    CHECK(neg.f2.pass);

    const auto zero = validate_F2_F3(SourceTerm::zero(3.0), 0.1);
    CHECK(zero.f2.pass);
    CHECK(zero.f2.constants.at("c10") == 0.0);
    CHECK_FALSE(zero.f3.pass);
    CHECK(zero.f3.constants.at("c11") == 0.0);

    CHECK(default_epsilon0(3.0) == 0.5);
    CHECK(default_epsilon0(2.5) == 0.25);
}

TEST_CASE("damping evaluation") {
    const auto q = BoundaryDamping::power(3.0);
    CHECK(q.eval(0.0, 1.0, -2.0) == -4.0);
    const auto ph = BoundaryDamping::physical(4.0);
    CHECK(ph.eval(0.0, 1.0, 2.0) == 10.0);
    const auto w = BoundaryDamping::q1_weighted(1.0, 2.0, 2.0, 3.0, 0.5);
    CHECK(w.eval(3.0, 1.0, 1.0) == doctest::Approx(2.0 * 3.0).epsilon(1e-15));
    CHECK(w.weight(3.0) == 2.0);
    CHECK(q.weight(3.0) == 1.0);
}

TEST_CASE("damping vanishes at zero and has the sign of v") {
    const std::vector<BoundaryDamping> kinds{
        BoundaryDamping::power(1.5), BoundaryDamping::power(3.0), BoundaryDamping::q0(0.5, 1.0, 1.5, 3.0),
        BoundaryDamping::q1_weighted(0.5, 1.0, 1.5, 3.0, 0.7), BoundaryDamping::physical(4.0),
        make_registered_damping("tanh_plus_power", {{"m", 3.0}})};
    for (const auto& q : kinds)
        for (double t : {0.0, 1.0, 7.5}) {
            CHECK(q.eval(t, 1.0, 0.0) == 0.0);
            for (double v : {-5.0, -1e-3, 1e-6, 0.4, 30.0}) CHECK(q.eval(t, 1.0, v) * v > 0.0);
        }
}

TEST_CASE("damping derivative") {
    const auto q = BoundaryDamping::q0(0.5, 1.0, 1.5, 3.0);
    for (double v : {-2.0, -0.3, 0.1, 1.7}) {
        const double fd = (q.eval(0, 1, v + 1e-6) - q.eval(0, 1, v - 1e-6)) / 2e-6;
        CHECK(q.derivative(0, 1, v) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(std::isfinite(BoundaryDamping::power(1.5).derivative(0, 1, 0.0)));
}

TEST_CASE("Q validation") {
    const auto power = validate_Q(BoundaryDamping::power(3.0));
    CHECK(power.pass);
    CHECK(power.constants.at("c1") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(power.constants.at("c2") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(power.constants.at("c3") == doctest::Approx(1.0).epsilon(1e-12));

    const auto phys = BoundaryDamping::physical(4.0);
    CHECK(validate_Q(phys).pass);
    CHECK(phys.mu() == 2.0);
    CHECK(validate_Q(phys, {}, DampingHypothesis::Q1Q2Prime).pass);

    const auto neg = BoundaryDamping::custom("minus", 2.0, 2.0, [](double, double, double v) { return -v; });
    const auto r = validate_Q(neg);
    CHECK_FALSE(r.pass);
    CHECK(r.constants.at("monotonicity_violation") > 0.0);

    SampleSpec window;
    window.t_hi = 5.0;
    CHECK(validate_Q(BoundaryDamping::q1_weighted(1.0, 2.0, 1.5, 3.0, 0.5), window, DampingHypothesis::Q1Q2Prime).pass);
    CHECK(validate_Q(BoundaryDamping::q1_weighted(1.0, 2.0, 3.0, 3.0, 0.5), window).pass);
}

TEST_CASE("over-damping") {
    CHECK(check_overdamping(1.0, 3.0, 3.0));
    CHECK(check_overdamping(0.0, 2.5, 1.5));
    CHECK_FALSE(check_overdamping(2.0, 3.0, 2.0));
    for (double beta = -2.0; beta <= 4.0; beta += 0.25)
        for (double mu = 1.25; mu <= 4.0; mu += 0.25)
            for (double m = mu; m <= 5.0; m += 0.5) CHECK(check_overdamping(beta, m, mu) == (beta <= mu - 1.0));
    CHECK_THROWS(check_overdamping(1.0, 2.0, 3.0));
    CHECK_THROWS(check_overdamping(1.0, 2.0, 1.0));
}

TEST_CASE("registry") {
    const auto names = registered_sources();
    CHECK(std::find(names.begin(), names.end(), "exp_minus_one") != names.end());
    const auto f = make_registered_source("exp_minus_one", {});
    CHECK(f.eval(0.0, 0.0) == 0.0);
    CHECK(f.eval(0.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0));
    CHECK_THROWS_AS(make_registered_source("nope", {}), ConfigError);
    CHECK_THROWS_AS(make_registered_damping("nope", {}), ConfigError);

    register_source("twice_power", [](const ParamMap& p) {
        const double e = p.count("p") ? p.at("p") : 3.0;
        return SourceTerm::custom("twice_power", e, [e](double, double u) { return 2.0 * std::pow(std::abs(u), e - 2.0) * u; });
    });
    const auto g = make_registered_source("twice_power", {{"p", 4.0}});
    CHECK(g.eval(0.0, 2.0) == 16.0);
    CHECK(g.potential(0.0, 2.0) == doctest::Approx(8.0).epsilon(1e-10));
}
