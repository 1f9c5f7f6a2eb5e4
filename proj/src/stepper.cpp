#include "dynheat/stepper.hpp"

#include "dynheat/errors.hpp"
#include "dynheat/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace dynheat {

namespace {

constexpr int kLoadPoints = 3;

struct Assembly {
    std::vector<double> residual;  ///< rows 1..N
    double scale = 0.0;            ///< magnitude of the terms, for the scaled residual
    std::vector<double> load;      ///< full load vector
    double q_value = 0.0;
};

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double norm_inf(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

/// Everything the Newton solve needs for one step.
class StepProblem {
public:
    StepProblem(const SimState& s, double tau, const AssembledOperators& ops, const Mode& mode,
                const BoundaryDamping& q)
        : s_(s), tau_(tau), t_next_(s.t + tau), ops_(ops), mode_(mode), q_(q),
          L_(ops.mesh->length()) {
        if (const auto* forced = std::get_if<ForcedMode>(&mode_)) {
            std::vector<double> g(ops_.mesh->size());
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = forced->g(t_next_, ops_.mesh->node(i));
            forced_load_ = ops_.mass.apply(g);
        }
    }

    FemField field(const std::vector<double>& x) const {
        std::vector<double> c(x.size() + 1, 0.0);
        std::copy(x.begin(), x.end(), c.begin() + 1);
        return FemField(ops_.mesh, std::move(c));
    }

    Assembly assemble_residual(const std::vector<double>& x) const {
        const FemField u = field(x);
        const auto& uc = u.coefficients();
        const auto& u0 = s_.field.coefficients();
        const std::size_t n = uc.size();
        std::vector<double> delta(n);
        for (std::size_t i = 0; i < n; ++i) delta[i] = uc[i] - u0[i];

        Assembly a;
        const auto md = ops_.mass.apply(delta);
        const auto md_abs = ops_.mass.apply_abs(delta);
        const auto au = ops_.stiffness.apply(uc);
        const auto au_abs = ops_.stiffness.apply_abs(uc);
        if (const auto* reaction = std::get_if<ReactionMode>(&mode_)) {
            a.load = load_vector(u, kLoadPoints, [&](double xx, double v) { return reaction->f.eval(xx, v); });
        } else {
            a.load = forced_load_;
        }
        a.q_value = q_.eval(t_next_, L_, delta[n - 1] / tau_);
        a.residual.resize(n - 1);
        for (std::size_t i = 1; i < n; ++i) {
            double r = md[i] / tau_ + au[i] - a.load[i];
            double sc = md_abs[i] / tau_ + au_abs[i] + std::abs(a.load[i]);
            if (i == n - 1) {
                r += a.q_value;
                sc += std::abs(a.q_value);
            }
            a.residual[i - 1] = r;
            a.scale = std::max(a.scale, sc);
        }
        if (!std::isfinite(norm2(a.residual)))
            throw NumericalError("step: non-finite residual", std::numeric_limits<double>::infinity());
        return a;
    }

    double scaled(const Assembly& a) const { return norm_inf(a.residual) / (1.0 + a.scale); }

    TridiagonalMatrix jacobian(const std::vector<double>& x) const {
        TridiagonalMatrix j = ops_.constrained_mass();
        const TridiagonalMatrix a = ops_.constrained_stiffness();
        for (std::size_t i = 0; i < j.size(); ++i) {
            j.diag[i] = j.diag[i] / tau_ + a.diag[i];
            j.lower[i] = j.lower[i] / tau_ + a.lower[i];
            j.upper[i] = j.upper[i] / tau_ + a.upper[i];
        }
        if (const auto* reaction = std::get_if<ReactionMode>(&mode_)) {
            const auto fp = weighted_mass(field(x), kLoadPoints, [&](double xx, double v) {
                return reaction->f.derivative(xx, v);
            }).drop_first();
            for (std::size_t i = 0; i < j.size(); ++i) {
                j.diag[i] -= fp.diag[i];
                j.lower[i] -= fp.lower[i];
                j.upper[i] -= fp.upper[i];
            }
        }
        const double v = (x.back() - s_.field.coefficients().back()) / tau_;
        j.diag.back() += q_.derivative(t_next_, L_, v) / tau_;
        return j;
    }

    double tau() const { return tau_; }
    double t_next() const { return t_next_; }

private:
    const SimState& s_;
    double tau_;
    double t_next_;
    const AssembledOperators& ops_;
    const Mode& mode_;
    const BoundaryDamping& q_;
    double L_;
    std::vector<double> forced_load_;
};

struct SolveResult {
    bool converged = false;
    std::vector<double> x;
    Assembly assembly;
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
};

SolveResult newton(const StepProblem& prob, std::vector<double> x, const StepOptions& opts) {
    SolveResult out;
    try {
        Assembly cur = prob.assemble_residual(x);
        for (int it = 1; it <= opts.max_newton; ++it) {
            const auto jac = prob.jacobian(x);
            std::vector<double> rhs(cur.residual.size());
            for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -cur.residual[i];
            const auto dx = solve_tridiagonal(jac, rhs);

            const double r0 = norm2(cur.residual);
            double lambda = 1.0;
            bool moved = false;
            for (int k = 0; k < 30; ++k, lambda *= 0.5) {
                std::vector<double> xt(x);
                for (std::size_t i = 0; i < xt.size(); ++i) xt[i] += lambda * dx[i];
                Assembly trial;
                try {
                    trial = prob.assemble_residual(xt);
                } catch (const Error&) {
                    continue;
                }
                if (norm2(trial.residual) <= (1.0 - 1e-4 * lambda) * r0 || r0 == 0.0) {
                    x = std::move(xt);
                    cur = std::move(trial);
                    moved = true;
                    break;
                }
            }
            out.iterations = it;
            out.residual = prob.scaled(cur);
            if (out.residual <= opts.newton_tol) {
                out.converged = true;
                break;
            }
            if (!moved) break;
        }
        out.x = std::move(x);
        out.assembly = std::move(cur);
    } catch (const Error&) {
        out.converged = false;
    }
    return out;
}

}  // namespace

SimState SimState::initial(FemField u0, double tau0) {
    if (!(tau0 > 0.0)) throw DomainError("SimState: tau must be positive");
    FemField prev = u0;
    return SimState{0.0, std::move(u0), std::move(prev), tau0, 0, 0.0, 0.0, 0.0};
}

std::string to_string(StepStatus s) {
    switch (s) {
        case StepStatus::Accepted: return "accepted";
        case StepStatus::RetriedSmallerTau: return "retried-smaller-tau";
        case StepStatus::NewtonFailure: return "newton-failure";
        case StepStatus::TauUnderflow: return "tau-underflow";
    }
    return "unknown";
}

StepResult step(const SimState& state, const AssembledOperators& ops, const Mode& mode,
                const BoundaryDamping& q, const StepOptions& opts) {
    if (state.field.mesh().nodes() != ops.mesh->nodes())
        throw MismatchError("step: state and operators use different meshes");
    const auto& u = state.field.coefficients();
    const auto& up = state.prev_field.coefficients();

    double tau = state.tau;
    StepOutcome outcome;
    for (int halving = 0; halving <= opts.max_halvings; ++halving, tau *= 0.5) {
        if (tau < opts.tau_min) {
            outcome.status = StepStatus::TauUnderflow;
            outcome.tau_used = tau;
            outcome.halvings = halving;
            return {state, outcome};
        }
        StepProblem prob(state, tau, ops, mode, q);
        std::vector<double> guess(u.begin() + 1, u.end());
        if (opts.guess == NewtonGuess::Extrapolate && state.step_index > 0)
            for (std::size_t i = 0; i < guess.size(); ++i) guess[i] += u[i + 1] - up[i + 1];

        SolveResult sol = newton(prob, std::move(guess), opts);
        outcome.newton_iterations = sol.iterations;
        outcome.residual = sol.residual;
        if (!sol.converged) continue;

        FemField next = prob.field(sol.x);
        const auto& un = next.coefficients();
        std::vector<double> delta(un.size());
        for (std::size_t i = 0; i < un.size(); ++i) delta[i] = un[i] - u[i];
        const double mass_term = ops.mass.quadratic_form(delta) / tau;
        const double bdy_term = sol.assembly.q_value * delta.back();
        double work = 0.0;
        for (std::size_t i = 0; i < delta.size(); ++i) work += sol.assembly.load[i] * delta[i];

        SimState ns{state.t + tau, std::move(next), state.field, tau, state.step_index + 1,
                    state.diss_interior + mass_term, state.diss_boundary + bdy_term,
                    state.work + work};
        outcome.status = halving == 0 ? StepStatus::Accepted : StepStatus::RetriedSmallerTau;
        outcome.tau_used = tau;
        outcome.halvings = halving;
        outcome.dissipation_rate = (mass_term + bdy_term) / tau;
        return {std::move(ns), outcome};
    }
    outcome.status = StepStatus::NewtonFailure;
    outcome.tau_used = tau;
    outcome.halvings = opts.max_halvings;
    return {state, outcome};
}

double mode_J(const FemField& u, const Mode& mode) {
    if (const auto* reaction = std::get_if<ReactionMode>(&mode)) {
        const double g = norm_gradL2(u);
        const double pot = integrate(u, lp_gauss_points(std::max(reaction->f.p(), reaction->f.q())),
                                     [&](double x, double v) { return reaction->f.potential(x, v); });
        return 0.5 * g * g - pot;
    }
    const double g = norm_gradL2(u);
    return 0.5 * g * g;
}

// ---------------------------------------------------------------------------
// Ledger

void EnergyLedger::record(const SimState& state, const Mode& mode, double Hprime, int newton_iters) {
    LedgerRecord r;
    const FemField& u = state.field;
    r.t = state.t;
    r.J = mode_J(u, mode);
    r.normGrad = norm_gradL2(u);
    r.normLp = norm_Lp(u, p_);
    r.K = r.normGrad * r.normGrad - std::pow(r.normLp, p_);
    r.H = E2_ ? *E2_ - r.J : std::numeric_limits<double>::quiet_NaN();
    r.Hprime = Hprime;
    r.normH1 = norm_H1(u);
    r.trace = trace_gamma1(u);
    r.tau = state.step_index == 0 ? 0.0 : state.tau;
    r.newton_iters = newton_iters;
    r.half_grad_sq = 0.5 * r.normGrad * r.normGrad;
    r.diss_interior = state.diss_interior;
    r.diss_boundary = state.diss_boundary;
    r.work = state.work;
    append(r);
    auto& last = records_.back();
    last.residual = energy_residual(*this, 0, records_.size() - 1);
}

void EnergyLedger::append(const LedgerRecord& r) {
    if (!records_.empty() && !(r.t > records_.back().t))
        throw DomainError("EnergyLedger: records must be strictly increasing in t");
    records_.push_back(r);
}

void EnergyLedger::write_csv(std::ostream& os) const {
    os << kLedgerHeader << '\n';
    for (const auto& r : records_) {
        os << format_double(r.t) << ',' << format_double(r.J) << ',' << format_double(r.K) << ','
           << format_double(r.H) << ',' << format_double(r.normH1) << ',' << format_double(r.normGrad)
           << ',' << format_double(r.normLp) << ',' << format_double(r.trace) << ','
           << format_double(r.residual) << ',' << format_double(r.tau) << ',' << r.newton_iters << '\n';
    }
}

double energy_residual(const EnergyLedger& ledger, std::size_t s_index, std::size_t t_index) {
    if (s_index > t_index || t_index >= ledger.size())
        throw DomainError("energy_residual: index out of range");
    const auto& s = ledger[s_index];
    const auto& t = ledger[t_index];
    const double lhs = (t.half_grad_sq - s.half_grad_sq) + (t.diss_interior - s.diss_interior) +
                       (t.diss_boundary - s.diss_boundary);
    return std::abs(lhs - (t.work - s.work));
}

// ---------------------------------------------------------------------------
// Stability

HadamardReport check_hadamard_stability(const Trajectory& run1, const Trajectory& run2, double slack) {
    if (run1.times != run2.times || run1.fields.size() != run1.times.size() ||
        run2.fields.size() != run2.times.size() || run1.times.empty())
        throw MismatchError("check_hadamard_stability: time grids differ");
    if (run1.fields.front().mesh().nodes() != run2.fields.front().mesh().nodes())
        throw MismatchError("check_hadamard_stability: meshes differ");

    HadamardReport rep;
    for (std::size_t k = 0; k < run1.times.size(); ++k) {
        const double d = norm_H1(run1.fields[k] - run2.fields[k]);
        rep.lhs = std::max(rep.lhs, d * d);
    }
    const auto& mesh = run1.fields.front().mesh_ptr();
    double g_sq = 0.0;
    for (std::size_t k = 1; k < run1.times.size(); ++k) {
        const double t = run1.times[k];
        const FemField dg = FemField::interpolate(
            mesh, [&](double x) { return run1.g(t, x) - run2.g(t, x); }, false);
        g_sq += (run1.times[k] - run1.times[k - 1]) * l2_inner(dg, dg);
    }
    const double d0 = norm_H1(run1.fields.front() - run2.fields.front());
    const double T = run1.times.back() - run1.times.front();
    rep.rhs = 2.0 * (1.0 + T) * (d0 * d0 + g_sq);
    rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : (rep.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.pass = rep.ratio <= 1.0 + slack;
    return rep;
}

// ---------------------------------------------------------------------------
// Step size

TauDecision adapt_tau(double tau, double growth, int newton_iters, const StepOptions& opts) {
    const double g = std::abs(growth);
    const double cap = opts.growth_cap;
    double next = g > cap ? tau * cap / g : tau * (g > 0.0 ? std::min(2.0, cap / g) : 2.0);
    if (3 * newton_iters >= 2 * opts.max_newton) next = std::min(next, 0.5 * tau);
    TauDecision d;
    d.tau = std::clamp(next, opts.tau_min, opts.tau_max);
    d.blowup_flag = g > cap && d.tau <= opts.tau_min;
    return d;
}

TauDecision adapt_tau(const SimState& state, const EnergyLedger& ledger, const StepOptions& opts) {
    if (ledger.size() < 2) return adapt_tau(state.tau, 0.0, 0, opts);
    const auto& a = ledger[ledger.size() - 2];
    const auto& b = ledger.back();
    const double growth = a.normLp > 0.0 ? (b.normLp - a.normLp) / a.normLp : 0.0;
    return adapt_tau(state.tau, growth, b.newton_iters, opts);
}

}  // namespace dynheat
