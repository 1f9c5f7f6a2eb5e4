#pragma once

// Config-driven runs and the experiment suites built on them.

#include "dynheat/blowup.hpp"
#include "dynheat/config.hpp"
#include "dynheat/potential_well.hpp"
#include "dynheat/stepper.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dynheat {

/// Well constants for the configured source on `mesh`: the B1 family for
/// the pure power source, the D1 family otherwise. The B1 maximizer is
/// kept for the scaled-b1-maximizer profile.
struct WellSetup {
    WellConstants wc;
    FemField maximizer;
};

/// nullopt when p = 2 (no potential well).
std::optional<WellSetup> compute_well(const RunConfig& cfg, const MeshPtr& mesh);

/// The configured initial datum; `well` is required for scaled-b1-maximizer.
FemField initial_field(const RunConfig& cfg, const MeshPtr& mesh, const WellSetup* well);

struct RunOptions {
    bool keep_fields = false;
};

struct SimulationResult {
    EnergyLedger ledger;
    FemField final_field;
    RunEnd end = RunEnd::Unknown;
    BlowupReport blowup;
    std::optional<WellConstants> wc;
    std::optional<MembershipVerdict> initial_verdict;
    std::vector<FemField> fields;  ///< one per ledger record when keep_fields
    long steps = 0;
    std::string message;
    std::uint64_t fingerprint = 0;
};

/// Steps until T_end, blow-up detection or tau-underflow. Throws
/// SolverError when the solver fails without any sign of blow-up.
SimulationResult run_simulation(const RunConfig& cfg, const RunOptions& opts = {});
/// Same with a precomputed well (skips the ascent).
SimulationResult run_simulation(const RunConfig& cfg, const std::optional<WellSetup>& well,
                                const RunOptions& opts = {});
/// Same from an explicit initial field; its mesh replaces mesh.L / mesh.N.
SimulationResult simulate(const RunConfig& cfg, FemField u0, const std::optional<WellSetup>& well,
                          const RunOptions& opts = {});

/// J(u_{k+1}) - J(u_k) <= slack_k with slack_k = 1/2 Lip_k |u_{k+1} - u_k|_M^2,
/// Lip_k a bound on |f'| over the range of both states (sup norm bounded
/// by sqrt(L) |grad u|). `fitted_c` is max (J_{k+1} - J_k)^+ / tau_k^2.
struct MonotonicityCheck {
    bool pass = true;
    double worst_excess = 0.0;
    double fitted_c = 0.0;
};
MonotonicityCheck check_J_monotone(const EnergyLedger& ledger, const SourceTerm& f, double L);

// ---------------------------------------------------------------------------

struct InvariantRun {
    double amplitude = 0.0;
    Membership initial = Membership::Neither;
    std::string expectation;  ///< "Ws", "Wu" or "out of theorem scope"
    int snapshots = 0;
    int ambiguous = 0;
    int violations = 0;
    BlowupStatus status = BlowupStatus::Inconclusive;
    bool persisted = true;
};

struct InvariantSetsReport {
    std::vector<InvariantRun> runs;
    double persistence = 1.0;  ///< fraction of checked snapshots keeping their label
    bool pass = true;
};

/// Runs the scaled-b1-maximizer profile at every ws/wu amplitude and
/// classifies each ledger snapshot against the initial label.
InvariantSetsReport experiment_invariant_sets(const RunConfig& cfg);

struct DependenceRung {
    double epsilon = 0.0;
    double initial_distance = 0.0;  ///< |u0n - u0|_{H1}
    double sup_distance = 0.0;      ///< sup_t |un - u|_{H1}
    double growth_rate = 0.0;       ///< fitted c in A |u0n - u0| e^{ct}
    double prefactor = 0.0;         ///< fitted A
    std::optional<HadamardReport> hadamard;
};

struct DependenceReport {
    std::vector<DependenceRung> rungs;
    std::vector<double> ratios;
    bool ratios_ok = true;
    bool envelope_ok = true;
    bool hadamard_ok = true;
    bool pass = true;
};

/// Base run against initial data perturbed by eps, eps/2, ... along a fixed
/// smooth bump, all with fixed steps. Forced mode adds the stability check.
DependenceReport experiment_dependence(const RunConfig& cfg);

struct ConvergenceReport {
    std::vector<double> temporal_differences;  ///< |u_tau - u_tau/2|_L2 at T
    std::vector<double> spatial_differences;   ///< |u_h - u_h/2|_L2 at T
    std::vector<double> residuals;             ///< energy residual over [0, T], tau and tau/2
    double temporal_order = 0.0;
    double spatial_order = 0.0;
    double residual_ratio = 0.0;
    bool temporal_ok = false;
    bool spatial_ok = false;
    bool residual_ok = false;
    bool pass = false;
};

/// Self-convergence: tau0, tau0/2, tau0/4 on mesh N; N0, 2N0, 4N0 with
/// tau_fine; the energy residual ratio between tau0 and tau0/2.
ConvergenceReport experiment_convergence(const RunConfig& cfg);

struct RefinementLevel {
    int N = 0;
    double growth_cap = 0.0;
    BlowupReport blowup;
};

struct BlowupRefinementReport {
    std::vector<RefinementLevel> levels;
    double relative_change = 0.0;  ///< between the two finest T_max estimates
    bool stable = false;
};

/// Level k doubles N and halves growth_cap, tau0 and tau_max.
BlowupRefinementReport experiment_blowup_refinement(const RunConfig& cfg, int levels = 3);

// ---------------------------------------------------------------------------
// JSON

nlohmann::json json_number(double x);
nlohmann::json report_header(const RunConfig& cfg, const std::string& kind);
nlohmann::json to_json(const WellConstants& wc);
nlohmann::json to_json(const MembershipVerdict& v);
nlohmann::json to_json(const BlowupReport& r);
nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const SimulationResult& r);
nlohmann::json to_json(const InvariantSetsReport& r);
nlohmann::json to_json(const DependenceReport& r);
nlohmann::json to_json(const ConvergenceReport& r);
nlohmann::json to_json(const BlowupRefinementReport& r);

}  // namespace dynheat
