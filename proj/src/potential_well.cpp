#include "dynheat/potential_well.hpp"

#include "dynheat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace dynheat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int source_points(const SourceTerm& f) { return lp_gauss_points(std::max(f.p(), f.q())); }

std::vector<double> interior(const std::vector<double>& full) {
    return std::vector<double>(full.begin() + 1, full.end());
}

/// Solves A w = g on the constrained space; g is a full nodal vector.
FemField riesz(const TridiagonalMatrix& a_constrained, const MeshPtr& mesh,
               const std::vector<double>& g) {
    const auto w = solve_tridiagonal(a_constrained, interior(g));
    std::vector<double> c(mesh->size(), 0.0);
    std::copy(w.begin(), w.end(), c.begin() + 1);
    return FemField(mesh, std::move(c));
}

FemField normalized(FemField u) {
    const double g = norm_gradL2(u);
    if (!(g > 0.0)) throw DomainError("ascent: field collapsed to zero");
    return (1.0 / g) * std::move(u);
}

double inner(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// One smooth ascent problem on the unit sphere of the energy norm:
/// `value` is maximized, `tangent` returns the ascent direction at u
/// (A-orthogonal to u), already scaled so that a unit step is natural.
struct AscentProblem {
    std::function<double(const FemField&)> value;
    std::function<FemField(const FemField&, double value)> tangent;
};

struct AscentRun {
    FemField u;
    double value;
    int iterations;
    bool converged;
};

AscentRun ascend(const AscentProblem& prob, FemField u, const AscentOptions& opts) {
    u = normalized(std::move(u));
    double val = prob.value(u);
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const FemField d = prob.tangent(u, val);
        double step = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k, step *= 0.5) {
            FemField trial = normalized(u + step * d);
            const double tv = prob.value(trial);
            if (tv > val) {
                const double change = std::abs(tv - val) / std::max(std::abs(tv), 1e-300);
                u = std::move(trial);
                val = tv;
                accepted = true;
                if (change < opts.rel_tol && k == 0) return {std::move(u), val, it, true};
                break;
            }
        }
        // No increase at any step length: stationary to rounding.
        if (!accepted) return {std::move(u), val, it, true};
    }
    return {std::move(u), val, opts.max_iterations, false};
}

std::vector<FemField> starting_fields(const MeshPtr& mesh, const AscentOptions& opts) {
    std::vector<FemField> starts;
    const double L = mesh->length();
    starts.push_back(FemField::interpolate(mesh, [L](double x) { return x / L; }));
    for (int k = 0; k < opts.random_starts; ++k) {
        // Positive starts: the positive critical point is the unique maximizer.
        FemField r = random_smooth_field(mesh, opts.seed + 7919ULL * (k + 1), opts.modes);
        for (auto& v : r.coefficients()) v = std::abs(v);
        if (r.is_zero()) r = starts.front();
        starts.push_back(std::move(r));
    }
    return starts;
}

struct MultiStart {
    AscentRun best;
    AscentDiagnostics diagnostics;
};

MultiStart multi_start(const AscentProblem& prob, const MeshPtr& mesh, const AscentOptions& opts,
                       const std::function<double(double)>& reported, const char* what) {
    std::optional<AscentRun> best;
    AscentDiagnostics diag;
    for (auto& start : starting_fields(mesh, opts)) {
        AscentRun run = ascend(prob, std::move(start), opts);
        diag.start_values.push_back(reported(run.value));
        diag.iterations.push_back(run.iterations);
        if (!run.converged) {
            std::ostringstream msg;
            msg << what << ": ascent stagnated after " << run.iterations << " iterations";
            std::ostringstream d;
            d << "value " << reported(run.value);
            throw SolverError(msg.str(), d.str());
        }
        if (!best || run.value > best->value) best = std::move(run);
    }
    const auto [lo, hi] = std::minmax_element(diag.start_values.begin(), diag.start_values.end());
    const double scale = std::max(std::abs(*hi), std::abs(*lo));
    diag.spread = scale > 0.0 ? (*hi - *lo) / scale : 0.0;
    if (diag.spread > opts.agreement_tol) {
        std::ostringstream msg, d;
        msg << what << ": multi-start disagreement " << diag.spread;
        for (double v : diag.start_values) d << v << ' ';
        throw SolverError(msg.str(), d.str());
    }
    return {std::move(*best), std::move(diag)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Functionals

double J_functional(const FemField& u, const SourceTerm& f) {
    const double g = norm_gradL2(u);
    const double pot = integrate(u, source_points(f), [&](double x, double v) { return f.potential(x, v); });
    return 0.5 * g * g - pot;
}

double K_functional(const FemField& u, double p) {
    const double g = norm_gradL2(u);
    return g * g - std::pow(norm_Lp(u, p), p);
}

double sup_lambda_J(const FemField& u, double p) {
    if (!(p > 2.0)) throw DomainError("sup_lambda_J: p must be > 2");
    if (u.is_zero()) throw DomainError("sup_lambda_J: zero field");
    const double ratio = norm_gradL2(u) / norm_Lp(u, p);
    return (0.5 - 1.0 / p) * std::pow(ratio, 2.0 * p / (p - 2.0));
}

FemField random_smooth_field(MeshPtr mesh, std::uint64_t seed, int modes) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(modes));
    for (int k = 0; k < modes; ++k) a[k] = normal(rng) / (k + 1);
    const double L = mesh->length();
    return FemField::interpolate(std::move(mesh), [&](double x) {
        double s = 0.0;
        for (int k = 0; k < modes; ++k) s += a[k] * std::sin((k + 0.5) * std::numbers::pi * x / L);
        return s;
    });
}

// ---------------------------------------------------------------------------
// B1

B1Result compute_B1(MeshPtr mesh, double p, const AscentOptions& opts) {
    if (!(p > 2.0) && !(opts.allow_p2 && p == 2.0))
        throw DomainError("compute_B1: p must be > 2");
    const auto ops = assemble(mesh);
    const auto a_c = ops.constrained_stiffness();
    const int pts = lp_gauss_points(p);

    AscentProblem prob;
    prob.value = [&](const FemField& u) {
        return integrate(u, pts, [p](double, double v) { return std::pow(std::abs(v), p); });
    };
    // Energy-metric gradient of P(u) = int |u|^p, scaled so a unit step is
    // one step of nonlinear inverse iteration: A^{-1} b / P - u.
    prob.tangent = [&](const FemField& u, double P) {
        const auto b = load_vector(u, pts, [p](double, double v) {
            return v == 0.0 ? 0.0 : std::pow(std::abs(v), p - 2.0) * v;
        });
        FemField w = riesz(a_c, mesh, b);
        w *= 1.0 / P;
        return w - u;
    };

    auto reported = [p](double P) { return std::pow(P, 1.0 / p); };
    auto ms = multi_start(prob, mesh, opts, reported, "compute_B1");
    return {reported(ms.best.value), std::move(ms.best.u), std::move(ms.diagnostics)};
}

// ---------------------------------------------------------------------------
// D1

namespace {

struct ScaleSup {
    double value;
    double c;
};

/// sup over c in [1e-6, 1e6] of phi(c) = int F(c u) / c^p: log grid then
/// golden section on the bracketing cell.
ScaleSup scale_sup(const std::function<double(double)>& phi) {
    constexpr int kGrid = 121;
    const double lo = std::log(1e-6), hi = std::log(1e6);
    auto g = [&](double s) { return phi(std::exp(s)); };

    int best = 0;
    double best_val = -kInf;
    std::vector<double> vals(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        vals[i] = g(lo + (hi - lo) * i / (kGrid - 1));
        if (vals[i] > best_val) {
            best_val = vals[i];
            best = i;
        }
    }
    if (best == 0 || best == kGrid - 1) return {best_val, std::exp(lo + (hi - lo) * best / (kGrid - 1))};

    double a = lo + (hi - lo) * (best - 1) / (kGrid - 1);
    double b = lo + (hi - lo) * (best + 1) / (kGrid - 1);
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 100 && (b - a) > 1e-12; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1);
        }
    }
    const double s = f1 > f2 ? x1 : x2;
    const double v = std::max(f1, f2);
    if (v >= best_val) return {v, std::exp(s)};
    return {best_val, std::exp(lo + (hi - lo) * best / (kGrid - 1))};
}

}  // namespace

D1Result compute_D1(MeshPtr mesh, const SourceTerm& f, const AscentOptions& opts) {
    const double p = f.p();
    if (!(p > 2.0)) throw DomainError("compute_D1: p must be > 2");
    const auto ops = assemble(mesh);
    const auto a_c = ops.constrained_stiffness();
    const int pts = source_points(f);

    auto sup_at = [&](const FemField& u) {
        return scale_sup([&](double c) {
            const double F = integrate(u, pts, [&](double x, double v) { return f.potential(x, c * v); });
            return F / std::pow(c, p);
        });
    };

    AscentProblem prob;
    prob.value = [&](const FemField& u) { return sup_at(u).value; };
    // Envelope theorem: at the optimal scale c*, the u-gradient of
    // int F(c* u)/c*^p is int f(c* u) phi_i / c*^{p-1}.
    prob.tangent = [&](const FemField& u, double value) {
        const double c = sup_at(u).c;
        const auto g = load_vector(u, pts, [&](double x, double v) { return f.eval(x, c * v); });
        std::vector<double> gs(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) gs[i] = g[i] / std::pow(c, p - 1.0);
        FemField w = riesz(a_c, mesh, gs);
        const double along = inner(gs, u.coefficients());
        FemField d = w - along * u;
        const double scale = std::abs(value) > 0.0 ? 1.0 / (p * std::abs(value)) : 1.0;
        return scale * std::move(d);
    };

    auto ms = multi_start(prob, mesh, opts, [](double v) { return v; }, "compute_D1");
    const double c = sup_at(ms.best.u).c;
    return {ms.best.value, std::move(ms.best.u), c, std::move(ms.diagnostics)};
}

// ---------------------------------------------------------------------------
// Constants

WellConstants well_constants(double B1, double p) {
    if (!(p > 2.0)) throw DomainError("well_constants: p must be > 2");
    if (!(B1 > 0.0) || !std::isfinite(B1)) throw DomainError("well_constants: B1 must be positive");
    WellConstants wc;
    wc.p = p;
    wc.B1 = B1;
    wc.lambda1 = std::pow(B1, -p / (p - 2.0));
    wc.lambda1_tilde = std::pow(B1, -2.0 / (p - 2.0));
    wc.E1 = (0.5 - 1.0 / p) * wc.lambda1 * wc.lambda1;
    return wc;
}

WellConstants well_constants(const B1Result& b1, double p, const Mesh1D& mesh) {
    WellConstants wc = well_constants(b1.B1, p);
    wc.mesh_fingerprint = mesh.fingerprint();
    wc.diagnostics = b1.diagnostics;
    return wc;
}

WellConstants generalized_constants(double D1, double p) {
    if (!(p > 2.0)) throw DomainError("generalized_constants: p must be > 2");
    WellConstants wc;
    wc.p = p;
    wc.D1 = D1;
    wc.generalized = true;
    wc.B1 = std::numeric_limits<double>::quiet_NaN();
    wc.lambda1_tilde = std::numeric_limits<double>::quiet_NaN();
    if (D1 <= 0.0) {
        wc.lambda1 = kInf;
        wc.E1 = kInf;
    } else {
        wc.lambda1 = std::pow(p * D1, -1.0 / (p - 2.0));
        wc.E1 = (0.5 - 1.0 / p) * wc.lambda1 * wc.lambda1;
    }
    return wc;
}

WellConstants generalized_constants(const D1Result& d1, double p, const Mesh1D& mesh) {
    WellConstants wc = generalized_constants(d1.D1, p);
    wc.mesh_fingerprint = mesh.fingerprint();
    wc.diagnostics = d1.diagnostics;
    return wc;
}

// ---------------------------------------------------------------------------
// Classification

std::string to_string(Membership m) {
    switch (m) {
        case Membership::Ws: return "Ws";
        case Membership::Wu: return "Wu";
        case Membership::Neither: return "neither";
        case Membership::BoundaryAmbiguous: return "boundary-ambiguous";
    }
    return "unknown";
}

FieldScalars field_scalars(const FemField& u, const SourceTerm& f) {
    FieldScalars s;
    s.J = J_functional(u, f);
    s.K = K_functional(u, f.p());
    s.grad = norm_gradL2(u);
    s.lp = norm_Lp(u, f.p());
    return s;
}

namespace {

double rel_distance(double value, double threshold) {
    if (std::isinf(threshold)) return kInf;
    return std::abs(value - threshold) / std::abs(threshold);
}

}  // namespace

MembershipVerdict classify_scalars(const FieldScalars& s, const WellConstants& wc, bool power_source,
                                   double tol) {
    MembershipVerdict v;
    v.values = s;
    v.all_characterizations = power_source && !wc.generalized;

    const bool zero = s.grad == 0.0;
    const bool below = s.J < wc.E1;
    double margin = rel_distance(s.J, wc.E1);

    auto side = [&](bool small) {
        if (!below) return Membership::Neither;
        return small ? Membership::Ws : Membership::Wu;
    };

    v.by_gradient = side(s.grad < wc.lambda1);
    if (below) margin = std::min(margin, rel_distance(s.grad, wc.lambda1));

    if (v.all_characterizations) {
        v.by_Lp = side(s.lp < wc.lambda1_tilde);
        if (zero) {
            v.by_K = side(true);
        } else {
            v.by_K = side(s.K > 0.0);
        }
        if (below) {
            margin = std::min(margin, rel_distance(s.lp, wc.lambda1_tilde));
            if (!zero) margin = std::min(margin, std::abs(s.K) / (s.grad * s.grad));
        }
        v.agreement = v.by_K == v.by_gradient && v.by_Lp == v.by_gradient;
    } else {
        v.by_K = v.by_Lp = v.by_gradient;
        v.agreement = true;
    }
    v.margin = margin;
    v.label = margin < tol ? Membership::BoundaryAmbiguous : v.by_gradient;
    return v;
}

MembershipVerdict classify(const FemField& u, const WellConstants& wc, const SourceTerm& f, double tol) {
    if (wc.mesh_fingerprint != 0 && wc.mesh_fingerprint != u.mesh().fingerprint())
        throw MismatchError("classify: constants were computed on a different mesh");
    if (wc.p != f.p()) throw MismatchError("classify: constants and source use different p");
    return classify_scalars(field_scalars(u, f), wc, f.kind() == SourceKind::Power, tol);
}

}  // namespace dynheat
