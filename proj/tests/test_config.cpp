#include <doctest.h>

#include "dynheat/config.hpp"
#include "dynheat/errors.hpp"

#include <cmath>
#include <fstream>

using namespace dynheat;

TEST_CASE("defaults and basic parsing") {
    const auto c = parse_config("");
    CHECK(c.L == 1.0);
    CHECK(c.N == 200);
    CHECK(c.p == 3.0);
    CHECK(c.E2_policy == "midpoint");

    const auto d = parse_config(R"(# a comment
mesh.L = 2.5
mesh.N = 64   # trailing comment
exponents.p = 4
exponents.m = 1.5
time.adaptive = false
experiment.ws_amplitudes = 0.1, 0.2
source.kind = f0
source.q = 2
source.a = -1
source.b = 1
)");
    CHECK(d.L == 2.5);
    CHECK(d.N == 64);
    CHECK(d.p == 4.0);
    CHECK_FALSE(d.adaptive);
    CHECK(d.ws_amplitudes == std::vector<double>{0.1, 0.2});
    const auto f = make_source(d);
    CHECK(f.kind() == SourceKind::F0);
    CHECK(f.eval(0.3, 2.0) == 6.0);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("mesh.bogus = 1"), ConfigError);
    try {
        parse_config("mesh.N = 10\n\nnope = 3\n");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("mesh.N = ten"), ConfigError);
    CHECK_THROWS_AS(parse_config("mesh.N = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("mesh.L = -1"), ConfigError);
    CHECK_THROWS_AS(parse_config("time.T_end = 0"), ConfigError);
    CHECK_THROWS_AS(parse_config("initial.amplitude = inf"), ConfigError);
    CHECK_THROWS_AS(parse_config("mesh.gamma0 = none"), ConfigError);
    CHECK_NOTHROW(parse_config("mesh.gamma0 = dirichlet"));
    CHECK_THROWS_AS(parse_config("source.kind = custom\nsource.name = missing"), ConfigError);
    CHECK_THROWS_AS(parse_config("source.kind = warp"), ConfigError);
    CHECK_THROWS_AS(parse_config("damping.kind = custom"), ConfigError);
    CHECK_THROWS_AS(parse_config("mesh.N"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("registered kinds through the config") {
    const auto c = parse_config("source.kind = custom\nsource.name = exp_minus_one\n"
                                "damping.kind = custom\ndamping.name = tanh_plus_power\ndamping.param.m = 3\n");
    CHECK(make_source(c).eval(0.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0));
    CHECK(make_damping(c).m() == 3.0);
}

TEST_CASE("damping kinds") {
    CHECK(make_damping(parse_config("damping.kind = physical\nexponents.m = 4")).eval(0, 1, 2.0) == 10.0);
    const auto q = make_damping(parse_config("damping.kind = Q1_weighted\nexponents.m = 3\nexponents.mu = 2\n"
                                             "damping.a = 1\ndamping.b = 1\ndamping.beta = 1"));
    CHECK(q.eval(1.0, 1.0, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("fingerprints") {
    const auto a = parse_config("mesh.N = 100");
    const auto b = parse_config("# same\nmesh.N = 100\n");
    const auto c = parse_config("mesh.N = 101");
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint() != c.fingerprint());
    CHECK(a.canonical_text() == b.canonical_text());
    // The canonical text parses back to the same configuration.
    CHECK(parse_config(a.canonical_text()).fingerprint() == a.fingerprint());
}

TEST_CASE("schema lists every key") {
    const auto s = describe_schema();
    for (const char* k : {"mesh.L", "mesh.N", "exponents.p", "initial.profile", "time.growth_cap", "well.E2_policy",
                          "blowup.h1_threshold", "output.ledger", "seed"})
        CHECK(s.find(k) != std::string::npos);
}

TEST_CASE("manufactured forcing matches the exact solution") {
    const auto c = parse_config("mode = forced\nforcing.kind = manufactured\nforcing.amplitude = 0.7\nmesh.L = 1.5");
    const auto mode = make_mode(c);
    const auto& g = std::get<ForcedMode>(mode).g;
    // g = u_t - u_xx by central differences.
    for (double t : {0.0, 0.4}) {
        for (double x : {0.1, 0.5, 1.2}) {
            const double e = 1e-4;
            const double ut = (manufactured_solution(c, t + e, x) - manufactured_solution(c, t - e, x)) / (2 * e);
            const double uxx = (manufactured_solution(c, t, x + e) - 2 * manufactured_solution(c, t, x) +
                                manufactured_solution(c, t, x - e)) / (e * e);
            CHECK(g(t, x) == doctest::Approx(ut - uxx).epsilon(1e-5));
        }
        // Stationary at the dynamic boundary, zero at the Dirichlet end.
        CHECK(manufactured_solution(c, t, 0.0) == 0.0);
        const double v = (manufactured_solution(c, t + 1e-6, 1.5) - manufactured_solution(c, t, 1.5)) / 1e-6;
        CHECK(std::abs(v) < 1e-8);
    }
}

TEST_CASE("step options") {
    const auto c = parse_config("time.tau_min = 1e-9\ntime.tau_max = 0.2\nsolver.max_newton = 12\nsolver.guess = extrapolate");
    const auto o = make_step_options(c);
    CHECK(o.tau_min == 1e-9);
    CHECK(o.tau_max == 0.2);
    CHECK(o.max_newton == 12);
    CHECK(o.guess == NewtonGuess::Extrapolate);
}
