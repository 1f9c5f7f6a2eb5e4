#include "dynheat/config.hpp"

#include "dynheat/errors.hpp"
#include "dynheat/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace dynheat {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
    return out;
}

long parse_long(std::string_view key, std::string_view v) {
    v = trim(v);
    long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("key '" + std::string(key) + "': expected an integer, got '" + std::string(v) + "'");
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + std::string(key) + "': expected true/false");
}

std::vector<double> parse_list(std::string_view key, std::string_view v) {
    std::vector<double> out;
    v = trim(v);
    if (v.empty()) return out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const auto comma = v.find(',', pos);
        const auto item = v.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        out.push_back(parse_double(key, item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string choice(std::string_view key, std::string_view v, std::initializer_list<std::string_view> allowed) {
    v = trim(v);
    for (auto a : allowed)
        if (v == a) return std::string(v);
    std::string msg = "key '" + std::string(key) + "': '" + std::string(v) + "' is not one of";
    for (auto a : allowed) msg += " " + std::string(a);
    throw ConfigError(msg);
}

std::string list_text(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : "unset"; }

struct Key {
    std::string name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
    std::string doc;
};

template <class T>
Key number(std::string name, T RunConfig::*field, std::string doc) {
    return {name,
            [name, field](RunConfig& c, std::string_view v) {
                if constexpr (std::is_floating_point_v<T>)
                    c.*field = parse_double(name, v);
                else
                    c.*field = static_cast<T>(parse_long(name, v));
            },
            [field](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return format_double(c.*field);
                else
                    return std::to_string(c.*field);
            },
            std::move(doc)};
}

Key list(std::string name, std::vector<double> RunConfig::*field, std::string doc) {
    return {name, [name, field](RunConfig& c, std::string_view v) { c.*field = parse_list(name, v); },
            [field](const RunConfig& c) { return list_text(c.*field); }, std::move(doc)};
}

Key optional_number(std::string name, std::optional<double> RunConfig::*field, std::string doc) {
    return {name,
            [name, field](RunConfig& c, std::string_view v) {
                if (trim(v) == "unset")
                    c.*field = std::nullopt;
                else
                    c.*field = parse_double(name, v);
            },
            [field](const RunConfig& c) { return opt_text(c.*field); }, std::move(doc)};
}

Key text(std::string name, std::string RunConfig::*field, std::initializer_list<std::string_view> allowed,
         std::string doc) {
    std::vector<std::string> opts(allowed.begin(), allowed.end());
    return {name,
            [name, field, opts](RunConfig& c, std::string_view v) {
                v = trim(v);
                if (opts.empty() || std::find(opts.begin(), opts.end(), v) != opts.end()) {
                    c.*field = std::string(v);
                    return;
                }
                std::string msg = "key '" + name + "': '" + std::string(v) + "' is not one of";
                for (const auto& a : opts) msg += " " + a;
                throw ConfigError(msg);
            },
            [field](const RunConfig& c) { return c.*field; }, std::move(doc)};
}

const std::vector<Key>& schema() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        k.push_back(number("mesh.L", &RunConfig::L, "domain length, > 0"));
        k.push_back(number("mesh.N", &RunConfig::N, "number of elements, >= 2"));
        k.push_back({"mesh.mass",
                     [](RunConfig& c, std::string_view v) {
                         c.mass = choice("mesh.mass", v, {"consistent", "lumped"}) == "lumped"
                                      ? MassMode::Lumped
                                      : MassMode::Consistent;
                     },
                     [](const RunConfig& c) {
                         return std::string(c.mass == MassMode::Lumped ? "lumped" : "consistent");
                     },
                     "consistent | lumped"});
        k.push_back({"mesh.gamma0",
                     [](RunConfig&, std::string_view v) {
                         if (trim(v) != "dirichlet")
                             throw ConfigError(
                                 "mesh.gamma0: the Dirichlet part must be nonempty; only 'dirichlet' "
                                 "(x = 0) is supported");
                     },
                     [](const RunConfig&) { return std::string("dirichlet"); },
                     "dirichlet (the only supported value)"});
        k.push_back(number("exponents.p", &RunConfig::p, "source exponent, >= 2"));
        k.push_back(number("exponents.m", &RunConfig::m, "damping exponent, > 1"));
        k.push_back(optional_number("exponents.mu", &RunConfig::mu, "damping exponent near 0 (Q0, Q1_weighted, custom)"));
        k.push_back(number("exponents.n", &RunConfig::n, "dimension used for exponent-region checks"));
        k.push_back(text("mode", &RunConfig::mode, {"reaction", "forced"}, "reaction | forced"));
        k.push_back(text("source.kind", &RunConfig::source_kind, {"power", "f0", "f1_capped", "zero", "custom"},
                         "power | f0 | f1_capped | zero | custom"));
        k.push_back(number("source.q", &RunConfig::q, "f0 secondary exponent"));
        k.push_back(list("source.a", &RunConfig::a_values, "f0 coefficient a(x): values"));
        k.push_back(list("source.a_breaks", &RunConfig::a_breaks, "f0 coefficient a(x): breakpoints"));
        k.push_back(list("source.b", &RunConfig::b_values, "f0 coefficient b(x): values"));
        k.push_back(list("source.b_breaks", &RunConfig::b_breaks, "f0 coefficient b(x): breakpoints"));
        k.push_back(text("source.name", &RunConfig::source_name, {}, "registered custom source"));
        k.push_back(text("damping.kind", &RunConfig::damping_kind, {"power", "Q0", "Q1_weighted", "physical", "custom"},
                         "power | Q0 | Q1_weighted | physical | custom"));
        k.push_back(number("damping.a", &RunConfig::damping_a, "Q0 coefficient of |v|^{mu-2}v"));
        k.push_back(number("damping.b", &RunConfig::damping_b, "Q0 coefficient of |v|^{m-2}v"));
        k.push_back(optional_number("damping.beta", &RunConfig::damping_beta, "time weight (1+t)^beta"));
        k.push_back(text("damping.name", &RunConfig::damping_name, {}, "registered custom damping"));
        k.push_back(text("forcing.kind", &RunConfig::forcing_kind, {"zero", "manufactured", "sine"},
                         "zero | manufactured | sine (forced mode)"));
        k.push_back(number("forcing.amplitude", &RunConfig::forcing_amplitude, "forcing amplitude"));
        k.push_back(number("forcing.frequency", &RunConfig::forcing_frequency, "sine forcing: time frequency"));
        k.push_back(text("initial.profile", &RunConfig::profile,
                         {"linear-ramp", "sine-bump", "scaled-b1-maximizer", "nodal-table", "manufactured"},
                         "linear-ramp | sine-bump | scaled-b1-maximizer | nodal-table | manufactured"));
        k.push_back(number("initial.amplitude", &RunConfig::amplitude,
                           "profile amplitude; for scaled-b1-maximizer the multiple of lambda1"));
        k.push_back(list("initial.values", &RunConfig::nodal_values, "nodal-table values, N+1 entries"));
        k.push_back(number("time.T_end", &RunConfig::T_end, "final time, > 0"));
        k.push_back(number("time.tau0", &RunConfig::tau0, "initial step"));
        k.push_back(number("time.tau_min", &RunConfig::tau_min, "smallest step"));
        k.push_back(number("time.tau_max", &RunConfig::tau_max, "largest step"));
        k.push_back(number("time.growth_cap", &RunConfig::growth_cap, "relative |u|_p growth per step"));
        k.push_back({"time.adaptive", [](RunConfig& c, std::string_view v) { c.adaptive = parse_bool("time.adaptive", v); },
                     [](const RunConfig& c) { return std::string(c.adaptive ? "true" : "false"); },
                     "adaptive steps (true) or fixed tau0 (false)"});
        k.push_back(number("time.max_steps", &RunConfig::max_steps, "step budget"));
        k.push_back(number("solver.newton_tol", &RunConfig::newton_tol, "scaled residual tolerance"));
        k.push_back(number("solver.max_newton", &RunConfig::max_newton, "Newton iterations per attempt"));
        k.push_back({"solver.guess",
                     [](RunConfig& c, std::string_view v) {
                         c.guess = choice("solver.guess", v, {"previous", "extrapolate"}) == "extrapolate"
                                       ? NewtonGuess::Extrapolate
                                       : NewtonGuess::Previous;
                     },
                     [](const RunConfig& c) {
                         return std::string(c.guess == NewtonGuess::Extrapolate ? "extrapolate" : "previous");
                     },
                     "previous | extrapolate"});
        k.push_back(text("well.E2_policy", &RunConfig::E2_policy, {"midpoint", "value", "none"},
                         "midpoint (J(u0)+E1)/2 | value | none"));
        k.push_back(number("well.E2", &RunConfig::E2, "E2 when well.E2_policy = value"));
        k.push_back(number("well.classify_tol", &RunConfig::classify_tol, "relative boundary tolerance"));
        k.push_back(number("well.random_starts", &RunConfig::random_starts, "random starts of the ascent"));
        k.push_back(number("blowup.h1_threshold", &RunConfig::h1_threshold, "H1 norm declaring blow-up"));
        k.push_back(number("blowup.tail_fraction", &RunConfig::tail_fraction, "fraction of records in the fit"));
        k.push_back(number("blowup.min_points", &RunConfig::min_points, "minimum records in the fit"));
        k.push_back(list("experiment.ws_amplitudes", &RunConfig::ws_amplitudes, "invariant-sets: stable amplitudes"));
        k.push_back(list("experiment.wu_amplitudes", &RunConfig::wu_amplitudes, "invariant-sets: unstable amplitudes"));
        k.push_back(number("experiment.epsilon", &RunConfig::epsilon, "depend: largest perturbation"));
        k.push_back(number("experiment.ladder", &RunConfig::ladder, "depend: rungs eps, eps/2, ..."));
        k.push_back(number("experiment.N0", &RunConfig::N0, "convergence: coarsest mesh"));
        k.push_back(number("experiment.tau_fine", &RunConfig::tau_fine, "convergence: step of the spatial study"));
        k.push_back(number("experiment.hadamard_slack", &RunConfig::hadamard_slack, "stability ratio slack"));
        k.push_back(text("output.ledger", &RunConfig::ledger_path, {}, "ledger CSV path"));
        k.push_back(text("output.report", &RunConfig::report_path, {}, "JSON report path"));
        k.push_back(number("seed", &RunConfig::seed, "random seed"));
        return k;
    }();
    return keys;
}

void validate(const RunConfig& c) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(c.L > 0.0 && std::isfinite(c.L), "mesh.L must be positive");
    require(c.N >= 2, "mesh.N must be >= 2");
    require(c.p >= 2.0 && std::isfinite(c.p), "exponents.p must be >= 2");
    require(c.m > 1.0 && std::isfinite(c.m), "exponents.m must be > 1");
    require(c.n >= 1, "exponents.n must be >= 1");
    require(c.T_end > 0.0 && std::isfinite(c.T_end), "time.T_end must be positive");
    require(c.tau0 > 0.0, "time.tau0 must be positive");
    require(c.tau_min > 0.0 && c.tau_min <= c.tau_max, "need 0 < tau_min <= tau_max");
    require(c.growth_cap > 0.0, "time.growth_cap must be positive");
    require(std::isfinite(c.amplitude), "initial.amplitude must be finite");
    require(c.newton_tol > 0.0 && c.max_newton >= 1, "invalid solver settings");
    require(c.classify_tol >= 0.0, "well.classify_tol must be >= 0");
    require(c.random_starts >= 0, "well.random_starts must be >= 0");
    require(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0, "blowup.tail_fraction must be in (0, 1]");
    require(c.min_points >= 2, "blowup.min_points must be >= 2");
    require(c.ladder >= 2, "experiment.ladder must be >= 2");
    require(c.N0 >= 2, "experiment.N0 must be >= 2");
    if (c.profile == "nodal-table")
        require(c.nodal_values.size() == static_cast<std::size_t>(c.N) + 1,
                "initial.values must have N+1 entries");
    if (c.source_kind == "custom") require(!c.source_name.empty(), "source.name required for custom source");
    if (c.damping_kind == "custom") require(!c.damping_name.empty(), "damping.name required for custom damping");
    try {
        (void)make_source(c);
        (void)make_damping(c);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

RunConfig parse_config(std::string_view text_in) {
    RunConfig cfg;
    const auto& keys = schema();
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text_in.size()) {
        const auto nl = text_in.find('\n', pos);
        std::string_view line = text_in.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text_in.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));

        if (key.starts_with("source.param.")) {
            cfg.source_params[key.substr(13)] = parse_double(key, value);
            continue;
        }
        if (key.starts_with("damping.param.")) {
            cfg.damping_params[key.substr(14)] = parse_double(key, value);
            continue;
        }
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
        if (it == keys.end())
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->set(cfg, value);
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string describe_schema() {
    std::ostringstream os;
    const RunConfig defaults;
    for (const auto& k : schema()) os << k.name << " = " << k.get(defaults) << "    # " << k.doc << '\n';
    os << "source.param.<name> = <number>    # parameters of a registered custom source\n";
    os << "damping.param.<name> = <number>    # parameters of a registered custom damping\n";
    return os.str();
}

std::string RunConfig::canonical_text() const {
    std::ostringstream os;
    for (const auto& k : schema()) os << k.name << '=' << k.get(*this) << '\n';
    for (const auto& [name, v] : source_params) os << "source.param." << name << '=' << format_double(v) << '\n';
    for (const auto& [name, v] : damping_params) os << "damping.param." << name << '=' << format_double(v) << '\n';
    return os.str();
}

std::uint64_t RunConfig::fingerprint() const { return fnv1a(canonical_text()); }

SourceTerm make_source(const RunConfig& c) {
    if (c.source_kind == "power") return SourceTerm::power(c.p);
    if (c.source_kind == "f0")
        return SourceTerm::f0(c.q, c.p, PiecewiseConstant(c.a_breaks, c.a_values),
                              PiecewiseConstant(c.b_breaks, c.b_values));
    if (c.source_kind == "f1_capped") return SourceTerm::f1_capped(c.p);
    if (c.source_kind == "zero") return SourceTerm::zero(c.p);
    ParamMap params = c.source_params;
    params.emplace("p", c.p);
    return make_registered_source(c.source_name, params);
}

BoundaryDamping make_damping(const RunConfig& c) {
    BoundaryDamping q = [&] {
        if (c.damping_kind == "power") return BoundaryDamping::power(c.m);
        if (c.damping_kind == "Q0") return BoundaryDamping::q0(c.damping_a, c.damping_b, c.mu.value_or(c.m), c.m);
        if (c.damping_kind == "Q1_weighted")
            return BoundaryDamping::q1_weighted(c.damping_a, c.damping_b, c.mu.value_or(c.m), c.m,
                                                c.damping_beta.value_or(0.0));
        if (c.damping_kind == "physical") return BoundaryDamping::physical(c.m);
        ParamMap params = c.damping_params;
        params.emplace("m", c.m);
        if (c.mu) params.emplace("mu", *c.mu);
        return make_registered_damping(c.damping_name, params);
    }();
    if (c.damping_beta && c.damping_kind != "Q1_weighted") q = q.with_weight(*c.damping_beta);
    return q;
}

double manufactured_solution(const RunConfig& c, double t, double x) {
    const double pi = std::numbers::pi;
    const double s = std::sin(pi * x / c.L);
    return c.forcing_amplitude * (std::sin(pi * x / (2.0 * c.L)) + std::exp(-t) * s * s);
}

Mode make_mode(const RunConfig& c) {
    if (c.mode == "reaction") return ReactionMode{make_source(c)};
    const double A = c.forcing_amplitude, L = c.L, w = c.forcing_frequency;
    const double pi = std::numbers::pi;
    if (c.forcing_kind == "zero") return ForcedMode{[](double, double) { return 0.0; }};
    if (c.forcing_kind == "sine")
        return ForcedMode{[=](double t, double x) { return A * std::sin(w * t) * std::sin(pi * x / L); }};
    // u = A (psi + e^{-t} phi), psi = sin(pi x/2L), phi = sin^2(pi x/L):
    // g = u_t - u_xx = A ((pi/2L)^2 psi - e^{-t} (phi + phi'')).
    return ForcedMode{[=](double t, double x) {
        const double k = pi / L;
        const double psi = std::sin(0.5 * k * x);
        const double phi = std::pow(std::sin(k * x), 2);
        const double phi_xx = 2.0 * k * k * std::cos(2.0 * k * x);
        return A * (0.25 * k * k * psi - std::exp(-t) * (phi + phi_xx));
    }};
}

StepOptions make_step_options(const RunConfig& c) {
    StepOptions o;
    o.tau_min = c.tau_min;
    o.tau_max = c.tau_max;
    o.newton_tol = c.newton_tol;
    o.max_newton = c.max_newton;
    o.growth_cap = c.growth_cap;
    o.guess = c.guess;
    return o;
}

}  // namespace dynheat
