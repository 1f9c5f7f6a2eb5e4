#pragma once

// Backward Euler for the semi-discrete Galerkin system
//
//   M (u+ - u)/tau + A u+ + e_N Q(t+, L, (u+_N - u_N)/tau) = load,
//
// solved by damped Newton on the unknowns 1..N, and the energy ledger
// kept along accepted steps.

#include "dynheat/mesh.hpp"
#include "dynheat/nonlinearity.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dynheat {

/// Linear problem with right-hand side g(t, x); load = M g(t+) (nodal projection).
struct ForcedMode {
    std::function<double(double t, double x)> g;
};

/// Reaction problem; load = consistent P1 load of f(x, u+), 3-point Gauss.
struct ReactionMode {
    SourceTerm f;
};

using Mode = std::variant<ForcedMode, ReactionMode>;

enum class NewtonGuess { Previous, Extrapolate };

struct StepOptions {
    double tau_min = 1e-12;
    double tau_max = 0.1;
    double newton_tol = 1e-11;
    int max_newton = 30;
    int max_halvings = 30;
    double growth_cap = 0.05;
    NewtonGuess guess = NewtonGuess::Previous;
};

struct SimState {
    double t = 0.0;
    FemField field;
    FemField prev_field;
    double tau = 1e-3;
    long step_index = 0;
    double diss_interior = 0.0;  ///< sum tau |v|_M^2
    double diss_boundary = 0.0;  ///< sum tau Q(v_N) v_N
    double work = 0.0;           ///< sum of load . (u+ - u)

    static SimState initial(FemField u0, double tau0);
};

enum class StepStatus { Accepted, RetriedSmallerTau, NewtonFailure, TauUnderflow };
std::string to_string(StepStatus s);

struct StepOutcome {
    StepStatus status = StepStatus::Accepted;
    int newton_iterations = 0;
    double residual = 0.0;  ///< scaled nonlinear residual of the accepted solve
    double tau_used = 0.0;
    int halvings = 0;
    /// |v|_M^2 + Q(v_N) v_N with v = (u+ - u)/tau; the discrete H'.
    double dissipation_rate = 0.0;
    bool accepted() const {
        return status == StepStatus::Accepted || status == StepStatus::RetriedSmallerTau;
    }
};

struct StepResult {
    SimState state;  ///< unchanged input state when the step failed
    StepOutcome outcome;
};

/// One backward Euler step of length state.tau, halving tau on Newton
/// failure. Failures are reported through the outcome, never thrown.
StepResult step(const SimState& state, const AssembledOperators& ops, const Mode& mode,
                const BoundaryDamping& q, const StepOptions& opts = {});

/// J of the mode: the source potential in reaction mode, F = 0 in forced mode.
double mode_J(const FemField& u, const Mode& mode);

struct LedgerRecord {
    double t = 0.0;
    double J = 0.0;
    double K = 0.0;
    double H = 0.0;       ///< E2 - J, NaN when no E2 is set
    double Hprime = 0.0;  ///< |v|_M^2 + Q(v_N) v_N of the step ending here
    double normH1 = 0.0;
    double normGrad = 0.0;
    double normLp = 0.0;
    double trace = 0.0;
    double residual = 0.0;  ///< energy identity residual over [0, t]
    double tau = 0.0;
    int newton_iters = 0;
    // Cumulative bookkeeping, used by energy_residual.
    double half_grad_sq = 0.0;
    double diss_interior = 0.0;
    double diss_boundary = 0.0;
    double work = 0.0;
};

class EnergyLedger {
public:
    EnergyLedger() = default;
    EnergyLedger(double p, std::optional<double> E2) : p_(p), E2_(E2) {}

    /// Appends a snapshot of `state`; t must increase strictly.
    void record(const SimState& state, const Mode& mode, double Hprime, int newton_iters);
    /// Appends a ready-made record (used by synthetic ledgers).
    void append(const LedgerRecord& r);

    const std::vector<LedgerRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const LedgerRecord& back() const { return records_.back(); }
    const LedgerRecord& operator[](std::size_t i) const { return records_[i]; }
    double p() const { return p_; }
    std::optional<double> E2() const { return E2_; }

    void write_csv(std::ostream& os) const;

private:
    double p_ = 2.0;
    std::optional<double> E2_;
    std::vector<LedgerRecord> records_;
};

inline constexpr const char* kLedgerHeader =
    "t,J,K,H,normH1,normGrad,normLp,trace,residual,tau,newton_iters";

/// |LHS - RHS| of the discrete energy identity between records s and t:
/// 1/2 |grad u|^2 |_s^t + sum tau |v|_M^2 + sum tau Q(v_N) v_N - work,
/// all sums by the same rectangle rule the stepper accumulates.
double energy_residual(const EnergyLedger& ledger, std::size_t s_index, std::size_t t_index);

/// A forced-mode trajectory on a fixed time grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<FemField> fields;
    std::function<double(double t, double x)> g;
};

struct HadamardReport {
    double lhs = 0.0;  ///< sup_t |u1 - u2|_{H1}^2
    double rhs = 0.0;  ///< 2(1+T)(|u01 - u02|_{H1}^2 + |g1 - g2|_{L2(Q_T)}^2)
    double ratio = 0.0;
    bool pass = false;
};

/// Compares two forced runs on the same mesh and time grid. Throws
/// MismatchError when the grids differ.
HadamardReport check_hadamard_stability(const Trajectory& run1, const Trajectory& run2,
                                        double slack = 0.1);

struct TauDecision {
    double tau = 0.0;
    /// tau is pinned at tau_min while the growth is still over the cap.
    bool blowup_flag = false;
};

/// Step-size controller: keeps the relative growth of |u|_p per step under
/// growth_cap and the Newton count under 2/3 of max_newton.
TauDecision adapt_tau(double tau, double growth, int newton_iters, const StepOptions& opts);
/// Same, with the growth read off the last two ledger records.
TauDecision adapt_tau(const SimState& state, const EnergyLedger& ledger, const StepOptions& opts);

}  // namespace dynheat
