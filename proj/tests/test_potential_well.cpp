#include <doctest.h>

#include "dynheat/errors.hpp"
#include "dynheat/potential_well.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace dynheat;

namespace {

FemField ramp(const MeshPtr& m, double c = 1.0) {
    return FemField::interpolate(m, [c](double x) { return c * x; });
}

}  // namespace

TEST_CASE("J and K of the ramp") {
    const auto m = build_mesh(1.0, 20);
    const auto u = ramp(m);
    CHECK(J_functional(FemField::zero(m), SourceTerm::power(4.0)) == 0.0);
    CHECK(J_functional(u, SourceTerm::power(4.0)) == doctest::Approx(0.45).epsilon(1e-13));
    CHECK(J_functional(u, SourceTerm::power(3.0)) == doctest::Approx(5.0 / 12.0).epsilon(1e-13));
    CHECK(K_functional(FemField::zero(m), 4.0) == 0.0);
    CHECK(K_functional(u, 4.0) == doctest::Approx(0.8).epsilon(1e-13));
    const double c = 3.0;
    CHECK(K_functional(ramp(m, c), 4.0) == doctest::Approx(c * c - std::pow(c, 4) / 5.0).epsilon(1e-12));
    CHECK(K_functional(ramp(m, c), 4.0) < 0.0);
}

TEST_CASE("sup over the ray") {
    const auto m = build_mesh(1.0, 20);
    CHECK(sup_lambda_J(ramp(m), 4.0) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK_THROWS_AS(sup_lambda_J(FemField::zero(m), 4.0), DomainError);
    CHECK_THROWS_AS(sup_lambda_J(ramp(m), 2.0), DomainError);

    // Direct maximization over lambda agrees with the closed form.
    const auto f = SourceTerm::power(3.0);
    const auto u = random_smooth_field(m, 11);
    double best = -1e300;
    for (double lam = 0.01; lam < 40.0; lam *= 1.001) best = std::max(best, J_functional(lam * u, f));
    CHECK(best == doctest::Approx(sup_lambda_J(u, 3.0)).epsilon(1e-5));

    // The ray, not the scale, determines the peak.
    for (std::uint64_t seed = 1; seed < 30; ++seed) {
        const auto v = random_smooth_field(m, seed);
        for (double c : {-3.0, 0.1, 7.0})
            CHECK(sup_lambda_J(c * v, 3.5) == doctest::Approx(sup_lambda_J(v, 3.5)).epsilon(1e-12));
    }
}

TEST_CASE("well constants from B1") {
    auto wc = well_constants(1.0, 4.0);
    CHECK(wc.lambda1 == 1.0);
    CHECK(wc.lambda1_tilde == 1.0);
    CHECK(wc.E1 == 0.25);
    CHECK(well_constants(1.0, 3.0).E1 == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    for (double p : {2.5, 3.0, 4.0, 7.0})
        for (double B1 : {0.3, 0.7, 1.9}) {
            wc = well_constants(B1, p);
            CHECK(std::abs(wc.lambda1 - std::pow(B1, -p / (p - 2))) <= 1e-12 * wc.lambda1);
            CHECK(std::abs(wc.lambda1_tilde - B1 * wc.lambda1) <= 1e-12 * wc.lambda1_tilde);
            CHECK(std::abs(wc.E1 - (0.5 - 1 / p) * std::pow(B1, -2 * p / (p - 2))) <= 1e-12 * wc.E1);
        }
}

TEST_CASE("B1 for p = 2 is the first eigenvalue constant") {
    AscentOptions o;
    o.allow_p2 = true;
    const auto r = compute_B1(build_mesh(1.0, 200), 2.0, o);
    CHECK(std::abs(r.B1 - 2.0 / M_PI) < 1e-4);
    CHECK_THROWS(compute_B1(build_mesh(1.0, 20), 2.0));
}

TEST_CASE("B1 against independent oracles") {
    for (double p : {3.0, 4.0}) {
        const auto r = compute_B1(build_mesh(1.0, 100), p);
        const double same_mesh = oracle::inverse_iteration_B1(p, 100);
        CHECK(r.B1 == doctest::Approx(same_mesh).epsilon(1e-9));
        const double continuum = oracle::shooting_B1(p);
        CHECK(r.B1 <= continuum);
        CHECK(r.B1 == doctest::Approx(continuum).epsilon(1e-4));
        CHECK(r.diagnostics.spread <= 1e-8);
        CHECK(r.diagnostics.start_values.size() == 6u);
        CHECK(norm_gradL2(r.maximizer) == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 1; i < r.maximizer.size(); ++i) CHECK(r.maximizer[i] > 0.0);
    }
    CHECK(oracle::shooting_B1(2.0) == doctest::Approx(2.0 / M_PI).epsilon(1e-8));
    // Scaling with the length of the interval.
    const auto r2 = compute_B1(build_mesh(2.0, 100), 4.0);
    CHECK(r2.B1 == doctest::Approx(oracle::shooting_B1(4.0, 2.0)).epsilon(1e-4));
}

TEST_CASE("B1 is monotone under mesh nesting") {
    auto m = build_mesh(1.0, 10);
    double prev = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double b = compute_B1(m, 4.0).B1;
        CHECK(b >= prev);
        prev = b;
        m = std::make_shared<const Mesh1D>(m->refined());
    }
}

TEST_CASE("d equals E1 on random fields") {
    const auto m = build_mesh(1.0, 60);
    const auto b1 = compute_B1(m, 4.0);
    const auto wc = well_constants(b1, 4.0, *m);
    double worst = 1e300;
    for (std::uint64_t s = 1; s <= 300; ++s) worst = std::min(worst, sup_lambda_J(random_smooth_field(m, s), 4.0));
    CHECK(worst >= wc.E1 * (1.0 - 1e-6));
    CHECK(sup_lambda_J(b1.maximizer, 4.0) == doctest::Approx(wc.E1).epsilon(1e-4));
}

TEST_CASE("D1") {
    const auto m = build_mesh(1.0, 60);
    const auto b1 = compute_B1(m, 4.0);
    const auto d1 = compute_D1(m, SourceTerm::power(4.0));
    CHECK(d1.D1 == doctest::Approx(std::pow(b1.B1, 4) / 4.0).epsilon(1e-8));
    const auto gen = generalized_constants(d1, 4.0, *m);
    const auto wc = well_constants(b1, 4.0, *m);
    CHECK(gen.lambda1 == doctest::Approx(wc.lambda1).epsilon(1e-8));
    CHECK(gen.E1 == doctest::Approx(wc.E1).epsilon(1e-8));
    CHECK(std::isnan(gen.lambda1_tilde));
    CHECK(gen.generalized);

    const auto z = compute_D1(m, SourceTerm::zero(4.0));
    CHECK(z.D1 == 0.0);
    const auto zc = generalized_constants(z.D1, 4.0);
    CHECK(std::isinf(zc.lambda1));
    CHECK(std::isinf(zc.E1));

    const auto neg = compute_D1(m, SourceTerm::f0(2.0, 4.0, PiecewiseConstant(-1.0), PiecewiseConstant(1.0)));
    CHECK(neg.D1 < std::pow(b1.B1, 4) / 4.0);

    const auto pos = compute_D1(m, SourceTerm::f0(3.0, 4.0, PiecewiseConstant(0.0), PiecewiseConstant(2.0)));
    CHECK(pos.D1 == doctest::Approx(2.0 * std::pow(b1.B1, 4) / 4.0).epsilon(1e-8));
}

TEST_CASE("classification examples") {
    const auto m = build_mesh(1.0, 80);
    const auto f = SourceTerm::power(4.0);
    const auto b1 = compute_B1(m, 4.0);
    const auto wc = well_constants(b1, 4.0, *m);

    const auto z = classify(FemField::zero(m), wc, f);
    CHECK(z.label == Membership::Ws);
    CHECK(z.agreement);
    CHECK(z.all_characterizations);

    const auto wu = classify((1.05 * wc.lambda1) * b1.maximizer, wc, f);
    CHECK(wu.values.J < wc.E1);
    CHECK(wu.label == Membership::Wu);
    CHECK(wu.by_K == Membership::Wu);
    CHECK(wu.by_Lp == Membership::Wu);
    CHECK(wu.agreement);

    const auto ws = classify((0.9 * wc.lambda1) * b1.maximizer, wc, f);
    CHECK(ws.label == Membership::Ws);

    // Scale a field until J exceeds E1: the ray peak sup_lambda_J >= E1.
    const auto u = random_smooth_field(m, 5);
    double c = 0.0;
    while (J_functional(c * u, f) <= 1.01 * wc.E1) c += 0.01;
    CHECK(classify(c * u, wc, f).label == Membership::Neither);

    // At the peak of the maximizer ray J = E1 exactly: ambiguous.
    CHECK(classify(wc.lambda1 * b1.maximizer, wc, f).label == Membership::BoundaryAmbiguous);
    CHECK(to_string(Membership::BoundaryAmbiguous) == "boundary-ambiguous");
}

TEST_CASE("classification errors") {
    const auto m = build_mesh(1.0, 40);
    const auto wc = well_constants(compute_B1(m, 4.0), 4.0, *m);
    const auto other = build_mesh(1.0, 41);
    CHECK_THROWS_AS(classify(random_smooth_field(other, 1), wc, SourceTerm::power(4.0)), MismatchError);
    CHECK_THROWS_AS(classify(random_smooth_field(m, 1), wc, SourceTerm::power(3.0)), MismatchError);
}

TEST_CASE("characterizations agree away from thresholds") {
    const auto m = build_mesh(1.0, 60);
    const auto f = SourceTerm::power(4.0);
    const auto wc = well_constants(compute_B1(m, 4.0), 4.0, *m);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> logc(-1.0, 1.0);
    int ws = 0, wu = 0, checked = 0;
    for (std::uint64_t s = 1; s <= 400; ++s) {
        const double c = wc.lambda1 * std::pow(10.0, logc(rng));
        auto u = random_smooth_field(m, s);
        u *= c / norm_gradL2(u);
        const auto v = classify(u, wc, f);
        if (v.label == Membership::BoundaryAmbiguous) continue;
        ++checked;
        CHECK(v.agreement);
        CHECK_FALSE((v.by_K == Membership::Ws && v.by_gradient == Membership::Wu));
        if (v.label == Membership::Ws) ++ws;
        if (v.label == Membership::Wu) ++wu;
        if (v.label == Membership::Ws) CHECK(v.values.K >= 0.0);
        if (v.label == Membership::Wu) CHECK(v.values.K <= 0.0);
    }
    CHECK(checked > 350);
    CHECK(ws > 20);
    CHECK(wu > 20);
}

TEST_CASE("general sources use the gradient characterization") {
    const auto m = build_mesh(1.0, 60);
    const auto f = SourceTerm::f0(3.0, 4.0, PiecewiseConstant(0.0), PiecewiseConstant(1.0));
    const auto d1 = compute_D1(m, f);
    const auto wc = generalized_constants(d1, 4.0, *m);
    const auto small = classify((0.5 * wc.lambda1) * d1.maximizer, wc, f);
    CHECK(small.label == Membership::Ws);
    CHECK_FALSE(small.all_characterizations);
    const auto big = classify((1.1 * wc.lambda1) * d1.maximizer, wc, f);
    CHECK(big.label == Membership::Wu);
}

TEST_CASE("random fields are reproducible") {
    const auto m = build_mesh(1.0, 30);
    const auto a = random_smooth_field(m, 42);
    const auto b = random_smooth_field(m, 42);
    const auto c = random_smooth_field(m, 43);
    CHECK(a.coefficients() == b.coefficients());
    CHECK(a.coefficients() != c.coefficients());
    CHECK(a[0] == 0.0);
}
