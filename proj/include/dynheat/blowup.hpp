#pragma once

// Blow-up detection on a ledger and extrapolation of the blow-up time from
// a power-law fit H' ~ C H^{1+beta} on the tail of the run.

#include "dynheat/stepper.hpp"

#include <limits>
#include <optional>
#include <span>
#include <string>

namespace dynheat {

enum class BlowupStatus { GlobalUntilT, BlowupDetected, Inconclusive };
std::string to_string(BlowupStatus s);

/// How the producing run stopped.
enum class RunEnd { Unknown, ReachedEnd, BlowupFlag, Failure };

struct BlowupCriteria {
    double h1_threshold = 1e6;
    double tail_fraction = 0.3;
    int min_points = 10;
};

struct PowerLawFit {
    double C = 0.0;
    double beta = 0.0;
    double r2 = 0.0;
    int points = 0;
};

/// Least squares of log H' against log H; nullopt with fewer than 2 points
/// or a degenerate abscissa.
std::optional<PowerLawFit> fit_power_law(std::span<const double> H, std::span<const double> Hprime);

/// Blow-up time of H' = C H^{1+beta} started from H(t0) = H0:
/// t0 + H0^{-beta} / (C beta). Infinite unless beta > 0 and C > 0.
double extrapolated_blowup_time(double t0, double H0, const PowerLawFit& fit);

struct BlowupReport {
    BlowupStatus status = BlowupStatus::Inconclusive;
    double detection_time = std::numeric_limits<double>::quiet_NaN();
    double T_max = std::numeric_limits<double>::quiet_NaN();
    double T_max_lo = std::numeric_limits<double>::quiet_NaN();
    double T_max_hi = std::numeric_limits<double>::quiet_NaN();
    std::optional<PowerLawFit> fit;
    std::optional<double> beta_bar;  ///< theoretical rate exponent, for comparison only
    std::optional<bool> refinement_stable;
    std::string note;
};

/// Uses the records with H > 0 and H' > 0; the fit takes the last
/// `tail_fraction` of them (at least `min_points`). The confidence window
/// spans the estimates from the full tail and from each of its halves.
BlowupReport detect_and_extrapolate_blowup(const EnergyLedger& ledger, const BlowupCriteria& criteria = {},
                                           RunEnd end = RunEnd::Unknown,
                                           std::optional<double> beta_bar = std::nullopt);

}  // namespace dynheat
