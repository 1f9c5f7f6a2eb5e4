#pragma once

// Run configuration: a flat "key = value" document with a fixed schema.
// Lines starting with '#' are comments, lists are comma separated and
// unknown keys are rejected. `describe_schema()` prints every key.

#include "dynheat/mesh.hpp"
#include "dynheat/nonlinearity.hpp"
#include "dynheat/stepper.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dynheat {

struct RunConfig {
    // mesh
    double L = 1.0;
    int N = 200;
    MassMode mass = MassMode::Consistent;

    // exponents
    double p = 3.0;
    double m = 2.0;
    std::optional<double> mu;  ///< defaults per damping kind
    int n = 1;                 ///< dimension used for region checks

    std::string mode = "reaction";  ///< reaction | forced

    // source
    std::string source_kind = "power";  ///< power | f0 | f1_capped | zero | custom
    double q = 2.0;
    std::vector<double> a_breaks, a_values{0.0};
    std::vector<double> b_breaks, b_values{1.0};
    std::string source_name;
    ParamMap source_params;

    // damping
    std::string damping_kind = "power";  ///< power | Q0 | Q1_weighted | physical | custom
    double damping_a = 0.0;
    double damping_b = 1.0;
    std::optional<double> damping_beta;
    std::string damping_name;
    ParamMap damping_params;

    // forcing (forced mode)
    std::string forcing_kind = "zero";  ///< zero | manufactured | sine
    double forcing_amplitude = 1.0;
    double forcing_frequency = 1.0;

    // initial datum
    std::string profile = "sine-bump";  ///< linear-ramp | sine-bump | scaled-b1-maximizer | nodal-table | manufactured
    double amplitude = 1.0;
    std::vector<double> nodal_values;

    // time
    double T_end = 10.0;
    double tau0 = 1e-3;
    double tau_min = 1e-12;
    double tau_max = 0.05;
    double growth_cap = 0.05;
    bool adaptive = true;
    long max_steps = 2000000;

    // solver
    double newton_tol = 1e-11;
    int max_newton = 30;
    NewtonGuess guess = NewtonGuess::Previous;

    // potential well
    std::string E2_policy = "midpoint";  ///< midpoint | value | none
    double E2 = 0.0;
    double classify_tol = 1e-6;
    int random_starts = 5;

    // blow-up
    double h1_threshold = 1e6;
    double tail_fraction = 0.3;
    int min_points = 10;

    // experiments
    std::vector<double> ws_amplitudes{0.2, 0.4, 0.6, 0.8, 0.95};
    std::vector<double> wu_amplitudes{1.05, 1.1, 1.2, 1.35, 1.5};
    double epsilon = 1e-2;
    int ladder = 3;
    int N0 = 25;
    double tau_fine = 1e-3;
    double hadamard_slack = 0.1;

    // output
    std::string ledger_path;
    std::string report_path;

    std::uint64_t seed = 20240601;

    /// FNV-1a over the canonical text of every key.
    std::uint64_t fingerprint() const;
    /// Every key with its current value, one per line, in schema order.
    std::string canonical_text() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string describe_schema();

SourceTerm make_source(const RunConfig& cfg);
BoundaryDamping make_damping(const RunConfig& cfg);
/// Manufactured forcing is paired with the exact solution
/// A (sin(pi x / 2L) + e^{-t} sin^2(pi x / L)), which is stationary at x = L.
Mode make_mode(const RunConfig& cfg);
StepOptions make_step_options(const RunConfig& cfg);
double manufactured_solution(const RunConfig& cfg, double t, double x);

}  // namespace dynheat
