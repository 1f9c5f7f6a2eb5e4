#include "dynheat/nonlinearity.hpp"

#include "dynheat/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

namespace dynheat {

namespace {

constexpr double kJacobianDelta = 1e-12;
constexpr double kQuadratureTol = 1e-10;
constexpr double kPositiveFloor = 1e-12;

/// sign(u) |u|^e
double spow(double u, double e) {
    if (u == 0.0) return 0.0;
    const double r = std::pow(std::abs(u), e);
    return u > 0 ? r : -r;
}

/// d/du [sign(u)|u|^e] = e |u|^{e-1}, regularized at 0 when e < 1.
double dspow(double u, double e) {
    if (e == 1.0) return 1.0;
    if (e < 1.0) return e * std::pow(u * u + kJacobianDelta * kJacobianDelta, 0.5 * (e - 1.0));
    return e * std::pow(std::abs(u), e - 1.0);
}

void require_finite(double x, double u, const char* what) {
    if (!std::isfinite(x) || !std::isfinite(u)) {
        std::ostringstream msg;
        msg << what << ": non-finite input (x=" << x << ", u=" << u << ")";
        throw DomainError(msg.str());
    }
}

/// Radical-inverse (Halton) low-discrepancy sequence.
double halton(std::uint64_t index, unsigned base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13};

struct Halton {
    std::uint64_t i = 1;
    template <std::size_t D>
    std::array<double, D> next() {
        std::array<double, D> out{};
        for (std::size_t d = 0; d < D; ++d) out[d] = halton(i, kPrimes[d]);
        ++i;
        return out;
    }
};

double lerp(double lo, double hi, double s) { return lo + (hi - lo) * s; }

/// Log-uniform magnitude in [lo, hi] with sign chosen by `sign_sample`.
double signed_log_sample(double lo, double hi, double s, double sign_sample) {
    const double mag = std::exp(lerp(std::log(lo), std::log(hi), s));
    return sign_sample < 0.5 ? -mag : mag;
}

std::string window_text(const SampleSpec& s) {
    std::ostringstream os;
    os << "x in [" << s.x_lo << ", " << s.x_hi << "], |u| in [" << s.u_min << ", " << s.u_max
       << "] (extended x" << s.window_stretch << "), t in [" << s.t_lo << ", " << s.t_hi
       << "], " << s.count << " samples per window";
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// PiecewiseConstant

PiecewiseConstant::PiecewiseConstant(double value) : values_{value} {}

PiecewiseConstant::PiecewiseConstant(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (values_.size() != breaks_.size() + 1)
        throw DomainError("PiecewiseConstant: need one more value than breakpoints");
    if (!std::is_sorted(breaks_.begin(), breaks_.end()))
        throw DomainError("PiecewiseConstant: breakpoints must be ascending");
}

double PiecewiseConstant::operator()(double x) const {
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

double PiecewiseConstant::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PiecewiseConstant::max() const { return *std::max_element(values_.begin(), values_.end()); }

// ---------------------------------------------------------------------------
// SourceTerm

std::string to_string(SourceKind k) {
    switch (k) {
        case SourceKind::Power: return "power";
        case SourceKind::F0: return "f0";
        case SourceKind::F1Capped: return "f1_capped";
        case SourceKind::Custom: return "custom";
    }
    return "unknown";
}

SourceTerm SourceTerm::power(double p) {
    if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError("SourceTerm::power: p must be >= 2");
    SourceTerm f;
    f.kind_ = SourceKind::Power;
    f.p_ = p;
    f.q_ = p;
    f.name_ = "power";
    return f;
}

SourceTerm SourceTerm::f0(double q, double p, PiecewiseConstant a, PiecewiseConstant b) {
    if (!(p >= 2.0) || !(q >= 2.0) || q > p)
        throw DomainError("SourceTerm::f0: need 2 <= q <= p");
    SourceTerm f;
    f.kind_ = SourceKind::F0;
    f.p_ = p;
    f.q_ = q;
    f.a_ = std::move(a);
    f.b_ = std::move(b);
    f.name_ = "f0";
    return f;
}

SourceTerm SourceTerm::f1_capped(double p) {
    if (!(p >= 2.0)) throw DomainError("SourceTerm::f1_capped: p must be >= 2");
    SourceTerm f;
    f.kind_ = SourceKind::F1Capped;
    f.p_ = p;
    f.q_ = 2.0;
    f.name_ = "f1_capped";
    return f;
}

SourceTerm SourceTerm::zero(double p) { return f0(2.0, p, 0.0, 0.0); }

SourceTerm SourceTerm::custom(std::string name, double p, Fn value, Fn derivative, Fn potential) {
    if (!value) throw DomainError("SourceTerm::custom: evaluator required");
    if (!(p >= 2.0)) throw DomainError("SourceTerm::custom: p must be >= 2");
    SourceTerm f;
    f.kind_ = SourceKind::Custom;
    f.p_ = p;
    f.q_ = p;
    f.name_ = std::move(name);
    f.value_ = std::move(value);
    f.derivative_ = std::move(derivative);
    f.potential_ = std::move(potential);
    return f;
}

double SourceTerm::eval(double x, double u) const {
    require_finite(x, u, "eval_source");
    switch (kind_) {
        case SourceKind::Power: return spow(u, p_ - 1.0);
        case SourceKind::F0: return a_(x) * spow(u, q_ - 1.0) + b_(x) * spow(u, p_ - 1.0);
        case SourceKind::F1Capped: return std::abs(u) <= 1.0 ? u : spow(u, p_ - 1.0);
        case SourceKind::Custom: return value_(x, u);
    }
    return 0.0;
}

double SourceTerm::derivative(double x, double u) const {
    require_finite(x, u, "source derivative");
    switch (kind_) {
        case SourceKind::Power: return dspow(u, p_ - 1.0);
        case SourceKind::F0: return a_(x) * dspow(u, q_ - 1.0) + b_(x) * dspow(u, p_ - 1.0);
        case SourceKind::F1Capped: return std::abs(u) <= 1.0 ? 1.0 : dspow(u, p_ - 1.0);
        case SourceKind::Custom:
            if (derivative_) return derivative_(x, u);
            {
                const double h = 1e-7 * (1.0 + std::abs(u));
                return (value_(x, u + h) - value_(x, u - h)) / (2.0 * h);
            }
    }
    return 0.0;
}

double SourceTerm::potential(double x, double u) const {
    require_finite(x, u, "eval_potential");
    const double au = std::abs(u);
    switch (kind_) {
        case SourceKind::Power: return std::pow(au, p_) / p_;
        case SourceKind::F0:
            return a_(x) * std::pow(au, q_) / q_ + b_(x) * std::pow(au, p_) / p_;
        case SourceKind::F1Capped:
            return au <= 1.0 ? 0.5 * u * u : 0.5 + (std::pow(au, p_) - 1.0) / p_;
        case SourceKind::Custom:
            if (potential_) return potential_(x, u);
            return potential_by_quadrature(x, u);
    }
    return 0.0;
}

double SourceTerm::potential_by_quadrature(double x, double u) const {
    require_finite(x, u, "eval_potential");
    if (u == 0.0) return 0.0;
    auto integrand = [&](double s) { return eval(x, s); };
    const double lo = std::min(0.0, u), hi = std::max(0.0, u);
    // Split at the f1 kink so each panel is smooth.
    std::vector<double> cuts{lo};
    for (double k : {-1.0, 1.0})
        if (k > lo && k < hi) cuts.push_back(k);
    cuts.push_back(hi);

    double total = 0.0, err_total = 0.0, l1_total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0, l1 = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            integrand, cuts[i], cuts[i + 1], 30, kQuadratureTol, &err, &l1);
        err_total += err;
        l1_total += l1;
    }
    const double scale = std::max(l1_total, std::numeric_limits<double>::min());
    if (!std::isfinite(total) || err_total > 10.0 * kQuadratureTol * scale) {
        std::ostringstream msg;
        msg << "eval_potential: quadrature did not converge (relative error "
            << err_total / scale << ")";
        throw NumericalError(msg.str(), err_total / scale);
    }
    return u > 0 ? total : -total;
}

// ---------------------------------------------------------------------------
// BoundaryDamping

std::string to_string(DampingKind k) {
    switch (k) {
        case DampingKind::Power: return "power";
        case DampingKind::Q0: return "Q0";
        case DampingKind::Q1Weighted: return "Q1_weighted";
        case DampingKind::Physical: return "physical";
        case DampingKind::Custom: return "custom";
    }
    return "unknown";
}

BoundaryDamping BoundaryDamping::power(double m) {
    if (!(m > 1.0) || !std::isfinite(m)) throw DomainError("BoundaryDamping::power: m must be > 1");
    BoundaryDamping q;
    q.kind_ = DampingKind::Power;
    q.m_ = q.mu_ = m;
    q.name_ = "power";
    return q;
}

BoundaryDamping BoundaryDamping::q0(double a, double b, double mu, double m) {
    if (!(a >= 0.0) || !(b > 0.0)) throw DomainError("BoundaryDamping::q0: need a >= 0, b > 0");
    if (!(mu > 1.0) || mu > m) throw DomainError("BoundaryDamping::q0: need 1 < mu <= m");
    BoundaryDamping q;
    q.kind_ = DampingKind::Q0;
    q.a_ = a;
    q.b_ = b;
    q.mu_ = mu;
    q.m_ = m;
    q.name_ = "Q0";
    return q;
}

BoundaryDamping BoundaryDamping::q1_weighted(double a, double b, double mu, double m, double beta) {
    BoundaryDamping q = q0(a, b, mu, m);
    q.kind_ = DampingKind::Q1Weighted;
    q.beta_ = beta;
    q.name_ = "Q1_weighted";
    return q;
}

BoundaryDamping BoundaryDamping::physical(double m) {
    if (!(m > 1.0)) throw DomainError("BoundaryDamping::physical: m must be > 1");
    BoundaryDamping q;
    q.kind_ = DampingKind::Physical;
    q.m_ = m;
    q.mu_ = std::min(2.0, m);
    q.name_ = "physical";
    return q;
}

BoundaryDamping BoundaryDamping::custom(std::string name, double m, double mu, Fn value,
                                        Fn derivative) {
    if (!value) throw DomainError("BoundaryDamping::custom: evaluator required");
    if (!(mu > 1.0) || mu > m) throw DomainError("BoundaryDamping::custom: need 1 < mu <= m");
    BoundaryDamping q;
    q.kind_ = DampingKind::Custom;
    q.m_ = m;
    q.mu_ = mu;
    q.name_ = std::move(name);
    q.value_ = std::move(value);
    q.derivative_ = std::move(derivative);
    return q;
}

BoundaryDamping BoundaryDamping::with_weight(double beta) const {
    BoundaryDamping q = *this;
    q.beta_ = beta;
    return q;
}

double BoundaryDamping::weight(double t) const {
    return beta_ ? std::pow(1.0 + t, *beta_) : 1.0;
}

double BoundaryDamping::eval(double t, double x, double v) const {
    require_finite(x, v, "eval_damping");
    double base = 0.0;
    switch (kind_) {
        case DampingKind::Power: base = spow(v, m_ - 1.0); break;
        case DampingKind::Q0:
        case DampingKind::Q1Weighted: base = a_ * spow(v, mu_ - 1.0) + b_ * spow(v, m_ - 1.0); break;
        case DampingKind::Physical: base = v + spow(v, m_ - 1.0); break;
        case DampingKind::Custom: base = value_(t, x, v); break;
    }
    return weight(t) * base;
}

double BoundaryDamping::derivative(double t, double x, double v) const {
    require_finite(x, v, "damping derivative");
    double base = 0.0;
    switch (kind_) {
        case DampingKind::Power: base = dspow(v, m_ - 1.0); break;
        case DampingKind::Q0:
        case DampingKind::Q1Weighted:
            base = a_ * dspow(v, mu_ - 1.0) + b_ * dspow(v, m_ - 1.0);
            break;
        case DampingKind::Physical: base = 1.0 + dspow(v, m_ - 1.0); break;
        case DampingKind::Custom:
            if (derivative_) {
                base = derivative_(t, x, v);
            } else {
                const double h = 1e-7 * (1.0 + std::abs(v));
                base = (value_(t, x, v + h) - value_(t, x, v - h)) / (2.0 * h);
            }
            break;
    }
    return weight(t) * base;
}

// ---------------------------------------------------------------------------
// Validators

ValidationReport validate_F1(const SourceTerm& f, const SampleSpec& spec) {
    if (spec.count < 10) throw DomainError("validate_F1: need at least 10 samples");
    const double p = f.p();

    auto fit = [&](double range) {
        Halton seq;
        double c7 = 0.0;
        for (int i = 0; i < spec.count; ++i) {
            const auto s = seq.next<4>();
            const double x = lerp(spec.x_lo, spec.x_hi, s[0]);
            const double u1 = lerp(-range, range, s[1]);
            // Half of the pairs are near-diagonal to probe the local Lipschitz constant.
            const double u2 = (i % 2 == 0) ? lerp(-range, range, s[2])
                                           : u1 + range * 1e-4 * (s[2] - 0.5);
            const double du = std::abs(u1 - u2);
            if (du == 0.0) continue;
            const double rhs =
                du * (1.0 + std::pow(std::abs(u1), p - 2.0) + std::pow(std::abs(u2), p - 2.0));
            const double lhs = std::abs(f.eval(x, u1) - f.eval(x, u2));
            c7 = std::max(c7, lhs / rhs);
        }
        return c7;
    };

    ValidationReport r;
    r.hypothesis = "F1";
    r.samples = 2 * spec.count;
    r.window = window_text(spec);

    double zero_violation = 0.0;
    for (int i = 0; i <= 16; ++i)
        zero_violation = std::max(
            zero_violation, std::abs(f.eval(lerp(spec.x_lo, spec.x_hi, i / 16.0), 0.0)));

    const double c7_full = fit(spec.u_max);
    const double c7_half = fit(0.5 * spec.u_max);
    double growth = 1.0;
    if (!std::isfinite(c7_full)) {
        growth = std::numeric_limits<double>::infinity();
    } else if (c7_half > 0.0) {
        growth = c7_full / c7_half;
    } else if (c7_full > 0.0) {
        growth = std::numeric_limits<double>::infinity();
    }

    r.constants["c7"] = c7_full;
    r.constants["c7_half_window"] = c7_half;
    r.constants["c7_growth"] = growth;
    r.worst_margin = std::max(growth - spec.growth_limit, zero_violation);
    r.pass = r.worst_margin <= 0.0;
    if (zero_violation > 0.0) r.notes.push_back("f(x,0) != 0");
    if (growth > spec.growth_limit)
        r.notes.push_back("fitted c7 grows with the sampled range: non-polynomial growth");
    return r;
}

double default_epsilon0(double p) { return std::min(1.0, p - 2.0) / 2.0; }

F2F3Reports validate_F2_F3(const SourceTerm& f, double epsilon, const SampleSpec& spec) {
    const double p = f.p();
    if (!(p > 2.0)) throw DomainError("validate_F2_F3: p must be > 2");
    if (!(epsilon > 0.0) || !(epsilon < p)) throw DomainError("validate_F2_F3: need 0 < epsilon < p");

    struct Fit {
        double c10 = -std::numeric_limits<double>::infinity();
        double c11 = std::numeric_limits<double>::infinity();
    };
    auto fit = [&](double lo, double hi) {
        Halton seq;
        Fit out;
        for (int i = 0; i < spec.count; ++i) {
            const auto s = seq.next<3>();
            const double x = lerp(spec.x_lo, spec.x_hi, s[0]);
            const double u = signed_log_sample(lo, hi, s[1], s[2]);
            const double up = std::pow(std::abs(u), p);
            const double F = f.potential(x, u);
            out.c10 = std::max(out.c10, p * F / up);
            out.c11 = std::min(out.c11, (f.eval(x, u) * u - (p - epsilon) * F) / up);
        }
        return out;
    };
    const Fit core = fit(spec.u_min, spec.u_max);
    const Fit ext = fit(spec.u_min / spec.window_stretch, spec.u_max * spec.window_stretch);

    F2F3Reports out;
    auto& f2 = out.f2;
    f2.hypothesis = "F2";
    f2.samples = 2 * spec.count;
    f2.window = window_text(spec);
    const double c10_core = std::max(0.0, core.c10);
    const double c10_ext = std::max(0.0, ext.c10);
    f2.constants["c10"] = c10_ext;
    f2.constants["c10_core_window"] = c10_core;
    f2.worst_margin = std::isfinite(c10_ext) ? c10_ext - spec.growth_limit * c10_core
                                             : std::numeric_limits<double>::infinity();
    f2.pass = f2.worst_margin <= 0.0;
    if (!f2.pass) f2.notes.push_back("p F/|u|^p is not bounded on the sampled window");

    auto& f3 = out.f3;
    f3.hypothesis = "F3";
    f3.samples = 2 * spec.count;
    f3.window = window_text(spec);
    f3.constants["epsilon"] = epsilon;
    f3.constants["epsilon0_default"] = default_epsilon0(p);
    f3.constants["c11"] = ext.c11;
    f3.constants["c11_core_window"] = core.c11;
    f3.worst_margin =
        std::max(kPositiveFloor - ext.c11, core.c11 / spec.growth_limit - ext.c11);
    f3.pass = f3.worst_margin <= 0.0;
    if (!(ext.c11 > 0.0)) f3.notes.push_back("c11(epsilon) is not positive");
    if (epsilon > default_epsilon0(p)) f3.notes.push_back("epsilon exceeds the default epsilon_0");
    return out;
}

ValidationReport validate_Q(const BoundaryDamping& q, const SampleSpec& spec,
                            DampingHypothesis which) {
    const bool primed = which == DampingHypothesis::Q1Q2Prime;
    const double m = q.m();
    const double mu = q.mu();
    const double x = 1.0;  // Gamma_1 is a single point; the value is irrelevant for built-ins.

    struct MinMax {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
    };
    // Ratio |Q| / (w(t) |v|^{e-1}) over |v| in [lo, hi].
    auto ratio = [&](double lo, double hi, double e) {
        Halton seq;
        MinMax out;
        for (int i = 0; i < spec.count; ++i) {
            const auto s = seq.next<3>();
            const double t = lerp(spec.t_lo, spec.t_hi, s[0]);
            const double v = signed_log_sample(lo, hi, s[1], s[2]);
            const double w = primed ? q.weight(t) : 1.0;
            const double r = std::abs(q.eval(t, x, v)) / (w * std::pow(std::abs(v), e - 1.0));
            out.lo = std::min(out.lo, r);
            out.hi = std::max(out.hi, r);
        }
        return out;
    };

    ValidationReport r;
    r.hypothesis = primed ? "Q1'-Q2'" : "Q1-Q2";
    r.window = window_text(spec);
    double margin = -std::numeric_limits<double>::infinity();
    auto note = [&](double violation, const std::string& text) {
        margin = std::max(margin, violation);
        if (violation > 0.0) r.notes.push_back(text);
    };

    const double stretch = spec.window_stretch, g = spec.growth_limit;
    const std::string c = primed ? "c'" : "c";

    // |v| >= 1: two-sided with exponent m-1.
    const auto big_core = ratio(1.0, spec.u_max, m);
    const auto big_ext = ratio(1.0, spec.u_max * stretch, m);
    r.constants[c + "1"] = big_ext.lo;
    r.constants[c + "2"] = big_ext.hi;
    note(kPositiveFloor - big_ext.lo, "lower bound for |v| >= 1 degenerates");
    note(big_core.lo / g - big_ext.lo, "lower constant for |v| >= 1 decays with range");
    note(big_ext.hi - g * big_core.hi, "upper constant for |v| >= 1 grows with range");

    // |v| <= 1.
    const double e_small = primed ? mu : m;
    const auto small_core = ratio(spec.u_min, 1.0, e_small);
    const auto small_ext = ratio(spec.u_min / stretch, 1.0, e_small);
    r.constants[c + "3"] = small_ext.lo;
    note(kPositiveFloor - small_ext.lo, "lower bound for |v| <= 1 degenerates");
    note(small_core.lo / g - small_ext.lo, "lower constant for |v| <= 1 decays toward 0");
    if (primed) {
        r.constants[c + "4"] = small_ext.hi;
        note(small_ext.hi - g * small_core.hi, "upper constant for |v| <= 1 blows up toward 0");
    } else {
        double c4 = 0.0;
        Halton seq;
        for (int i = 0; i < spec.count; ++i) {
            const auto s = seq.next<2>();
            c4 = std::max(c4, std::abs(q.eval(lerp(spec.t_lo, spec.t_hi, s[0]), x, lerp(-1.0, 1.0, s[1]))));
        }
        r.constants[c + "4"] = c4;
    }

    // Q(t,x,0) = 0, sign(Q) = sign(v), monotone on sampled pairs.
    Halton seq;
    double zero_violation = 0.0, mono_violation = 0.0, sign_violation = 0.0;
    for (int i = 0; i < spec.count; ++i) {
        const auto s = seq.next<4>();
        const double t = lerp(spec.t_lo, spec.t_hi, s[0]);
        zero_violation = std::max(zero_violation, std::abs(q.eval(t, x, 0.0)));
        double v1, v2;
        if (i % 2 == 0) {
            v1 = lerp(-spec.u_max, spec.u_max, s[1]);
            v2 = lerp(-spec.u_max, spec.u_max, s[2]);
        } else {
            v1 = signed_log_sample(spec.u_min / stretch, spec.u_max, s[1], s[3]);
            v2 = v1 + std::abs(v1) * 1e-3 * s[2];
        }
        if (v1 > v2) std::swap(v1, v2);
        const double q1 = q.eval(t, x, v1), q2 = q.eval(t, x, v2);
        mono_violation = std::max(mono_violation, q1 - q2);
        sign_violation = std::max({sign_violation, -q1 * v1, -q2 * v2});
    }
    note(zero_violation, "Q(t,x,0) != 0");
    note(mono_violation, "Q(t,x,.) is not nondecreasing");
    note(sign_violation, "Q(t,x,v) v < 0 somewhere");

    r.constants["monotonicity_violation"] = mono_violation;
    r.samples = 5 * spec.count;
    r.worst_margin = margin;
    r.pass = margin <= 0.0;
    return r;
}

bool check_overdamping(double beta, double m, double mu) {
    if (!(mu > 1.0) || m < mu) throw DomainError("check_overdamping: need m >= mu > 1");
    return beta <= mu - 1.0;
}

// ---------------------------------------------------------------------------
// Registry

namespace {

struct Registry {
    std::mutex mutex;
    std::map<std::string, SourceFactory> sources;
    std::map<std::string, DampingFactory> dampings;
};

double param(const ParamMap& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

Registry& registry() {
    static Registry* r = [] {
        auto* reg = new Registry;
        reg->sources["exp_minus_one"] = [](const ParamMap& prm) {
            return SourceTerm::custom(
                "exp_minus_one", param(prm, "p", 3.0),
                [](double, double u) { return std::expm1(u); },
                [](double, double u) { return std::exp(u); },
                [](double, double u) { return std::expm1(u) - u; });
        };
        reg->sources["negative_power"] = [](const ParamMap& prm) {
            const double p = param(prm, "p", 3.0);
            return SourceTerm::custom("negative_power", p, [p](double, double u) {
                return -spow(u, p - 1.0);
            });
        };
        reg->dampings["tanh_plus_power"] = [](const ParamMap& prm) {
            const double m = param(prm, "m", 3.0);
            return BoundaryDamping::custom(
                "tanh_plus_power", m, std::min(2.0, m),
                [m](double, double, double v) { return std::tanh(v) + spow(v, m - 1.0); },
                [m](double, double, double v) {
                    const double c = std::cosh(v);
                    return 1.0 / (c * c) + dspow(v, m - 1.0);
                });
        };
        return reg;
    }();
    return *r;
}

}  // namespace

void register_source(const std::string& name, SourceFactory factory) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.sources[name] = std::move(factory);
}

void register_damping(const std::string& name, DampingFactory factory) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.dampings[name] = std::move(factory);
}

SourceTerm make_registered_source(const std::string& name, const ParamMap& params) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    const auto it = r.sources.find(name);
    if (it == r.sources.end()) throw ConfigError("unknown custom source '" + name + "'");
    return it->second(params);
}

BoundaryDamping make_registered_damping(const std::string& name, const ParamMap& params) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    const auto it = r.dampings.find(name);
    if (it == r.dampings.end()) throw ConfigError("unknown custom damping '" + name + "'");
    return it->second(params);
}

std::vector<std::string> registered_sources() {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> out;
    for (const auto& [k, v] : r.sources) out.push_back(k);
    return out;
}

std::vector<std::string> registered_dampings() {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> out;
    for (const auto& [k, v] : r.dampings) out.push_back(k);
    return out;
}

}  // namespace dynheat
