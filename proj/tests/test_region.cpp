#include <doctest.h>

#include "dynheat/errors.hpp"
#include "dynheat/region.hpp"

#include <sstream>

using namespace dynheat::region;

TEST_CASE("critical exponent") {
    CHECK(critical_exponent(1).is_infinite());
    CHECK(critical_exponent(2).is_infinite());
    CHECK(critical_exponent(3).value() == 6.0);
    CHECK(critical_exponent(4).value() == 4.0);
    CHECK_THROWS_AS(critical_exponent(1).value(), dynheat::DomainError);
    std::ostringstream os;
    os << critical_exponent(1);
    CHECK(os.str() == "inf");
}

TEST_CASE("p admissibility") {
    CHECK(p_admissible(4.0, 3));
    CHECK_FALSE(p_admissible(4.1, 3));
    CHECK(p_admissible(10.0, 1));
    CHECK(p_admissible(1e6, 2));
    CHECK_FALSE(p_admissible(1.9, 1));
    CHECK(p_max(1).is_infinite());
    CHECK(p_max(3).value() == 4.0);
}

TEST_CASE("m0 values") {
    for (int n = 1; n <= 6; ++n) CHECK(m0(2.0, n) == 2.0);
    CHECK(m0(4.0, 3) == 2.4);
    CHECK(m0(3.0, 1) == doctest::Approx(12.0 / 5.0).epsilon(1e-15));
}

TEST_CASE("supremum of m0 over admissible p") {
    CHECK(std::abs(m0_supremum(1) - 4.0) < 1e-12);
    CHECK(std::abs(m0_supremum(2) - 3.0) < 1e-12);
    for (int n = 3; n <= 5; ++n) CHECK(std::abs(m0_supremum(n) - (2.0 + 2.0 / (3.0 * n - 4.0))) < 1e-12);
    // n <= 2: approached as p grows, never exceeded.
    CHECK(m0(1e8, 1) < 4.0);
    CHECK(m0(1e8, 1) > 4.0 - 1e-6);
}

TEST_CASE("m0 lies in (2, p] for p > 2") {
    for (int n = 1; n <= 6; ++n)
        for (double p = 2.01; p <= 12.0; p += 0.01) {
            if (!p_admissible(p, n)) continue;
            CHECK(m0(p, n) <= p);
            CHECK(m0(p, n) > 2.0);
        }
}

TEST_CASE("blow-up admissibility") {
    CHECK(blowup_admissible(3.0, 2.0, 1));
    CHECK_FALSE(blowup_admissible(3.0, 2.5, 1));
    CHECK_FALSE(blowup_admissible(2.0, 1.5, 1));
    CHECK_FALSE(blowup_admissible(2.0, 1.5, 3));
    CHECK_FALSE(blowup_admissible(4.5, 2.0, 3));
    CHECK_FALSE(blowup_admissible(3.0, 1.0, 1));
}

TEST_CASE("s window") {
    auto w = s_window(3.0, 2.0, 1);
    CHECK(w.lo == 0.5);
    CHECK(w.hi == 1.0);
    w = s_window(4.0, 2.2, 3);
    CHECK(w.lo == doctest::Approx(1.5 - 2.0 / 2.2).epsilon(1e-14));
    CHECK(w.hi == doctest::Approx((4.0 / 2.2 - 1.0) / 1.0).epsilon(1e-14));
    CHECK_THROWS_AS(s_window(3.0, 2.4, 1), dynheat::DomainError);
}

TEST_CASE("nonempty s window exactly on the admissible region") {
    for (int n = 1; n <= 5; ++n)
        for (double p = 2.05; p <= 8.0; p += 0.05)
            for (double m = 1.01; m <= 4.5; m += 0.01) {
                if (!p_admissible(p, n)) continue;
                CAPTURE(p);
                CAPTURE(m);
                CAPTURE(n);
                const bool open = !s_window_bounds(p, m, n).empty();
                CHECK(open == blowup_admissible(p, m, n));
            }
}

TEST_CASE("rate exponents") {
    const auto r = rate_exponents({3.0, 2.0, 1}, 0.75);
    CHECK(r.alpha_bar == doctest::Approx(0.125 / 3.0).epsilon(1e-14));
    CHECK(r.beta_bar == doctest::Approx(0.125 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(rate_exponents({3.0, 2.0, 1}, 1.0), dynheat::DomainError);
    CHECK_THROWS_AS(rate_exponents({3.0, 2.0, 1}, 0.4), dynheat::DomainError);

    for (double p = 2.1; p < 6.0; p += 0.1)
        for (double m = 1.1; m < m0(p, 1); m += 0.05) {
            const auto w = s_window(p, m, 1);
            for (double s = w.lo + 1e-3; s < w.hi; s += 0.01) {
                const auto e = rate_exponents({p, m, 1}, s);
                CHECK(e.beta_bar <= 0.5 - 1.0 / p);
                CHECK(e.alpha_bar > 0.0);
            }
        }
}

TEST_CASE("alpha vanishes at the window edge where the bracket is zero") {
    // 1 - s - p(1/m - s/2) = 0  =>  s = (p/m - 1)/(p/2 - 1)
    const double p = 3.0, m = 2.2;
    const double edge = (p / m - 1.0) / (p / 2.0 - 1.0);
    const auto w = s_window(p, m, 1);
    CHECK(w.hi == doctest::Approx(edge));
    const auto r = rate_exponents({p, m, 1}, edge - 1e-9);
    CHECK(r.alpha_bar > 0.0);
    CHECK(r.alpha_bar < 1e-8);
}

TEST_CASE("region grid") {
    const auto [pr, mr] = default_ranges(3);
    CHECK(pr.lo == 2.0);
    CHECK(pr.hi == 4.0);
    const auto rows = emit_region_grid(3, pr, mr, 21);
    CHECK(rows.size() == 21u * 21u);
    for (const auto& r : rows) {
        CHECK(r.blowup_admissible == blowup_admissible(r.p, r.m, 3));
        if (r.blowup_admissible) CHECK(r.m < 2.4);
    }
    std::ostringstream os;
    write_grid_csv(os, rows);
    CHECK(os.str().rfind("p,m,blowup_admissible,p_admissible\n", 0) == 0);

    const auto [pr1, mr1] = default_ranges(1);
    CHECK(mr1.hi == doctest::Approx(4.5));
    const auto [pr2, mr2] = default_ranges(2);
    CHECK(mr2.hi == doctest::Approx(3.5));
}
