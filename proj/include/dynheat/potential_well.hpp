#pragma once

// Variational constants of the potential well and membership of data in
// the stable / unstable sets.
//
// All constants are computed on the discrete space of a given mesh. They
// approximate the continuum values from below and are reported as such.

#include "dynheat/mesh.hpp"
#include "dynheat/nonlinearity.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dynheat {

/// J(u) = 1/2 |grad u|^2 - int F(x, u).
double J_functional(const FemField& u, const SourceTerm& f);
/// K(u) = |grad u|^2 - |u|_p^p.
double K_functional(const FemField& u, double p);
/// max over lambda > 0 of J(lambda u) for the pure power source:
/// (1/2 - 1/p) (|grad u| / |u|_p)^{2p/(p-2)}. Throws DomainError for u = 0.
double sup_lambda_J(const FemField& u, double p);

struct AscentOptions {
    int random_starts = 5;
    std::uint64_t seed = 20240601;
    double rel_tol = 1e-10;
    int max_iterations = 50000;
    /// Relative spread between starts above which the result is rejected.
    double agreement_tol = 1e-8;
    /// Sine modes in each random start.
    int modes = 6;
    /// p = 2 is a linear eigenvalue problem; allowed only on request.
    bool allow_p2 = false;
};

struct AscentDiagnostics {
    std::vector<double> start_values;
    std::vector<int> iterations;
    double spread = 0.0;  ///< (max - min) / max over starts
};

struct B1Result {
    double B1 = 0.0;
    /// Positive maximizer normalized to |grad u| = 1.
    FemField maximizer;
    AscentDiagnostics diagnostics;
};

/// sup |u|_p / |grad u| over the constrained P1 space by normalized
/// gradient ascent in the energy metric, from the linear ramp plus
/// `random_starts` random smooth profiles.
B1Result compute_B1(MeshPtr mesh, double p, const AscentOptions& opts = {});

struct D1Result {
    double D1 = 0.0;
    FemField maximizer;  ///< |grad u| = 1
    double scale = 1.0;  ///< c maximizing int F(c u) / c^p
    AscentDiagnostics diagnostics;
};

/// sup int F(x,u) / |grad u|^p. The scale sup is taken over c in [1e-6, 1e6].
D1Result compute_D1(MeshPtr mesh, const SourceTerm& f, const AscentOptions& opts = {});

struct WellConstants {
    double p = 0.0;
    double B1 = 0.0;
    double lambda1 = 0.0;
    double lambda1_tilde = 0.0;  ///< NaN for generalized constants
    double E1 = 0.0;             ///< equals the mountain-pass level d
    std::optional<double> D1;
    bool generalized = false;
    std::uint64_t mesh_fingerprint = 0;
    AscentDiagnostics diagnostics;
};

/// lambda1 = B1^{-p/(p-2)}, lambda1~ = B1^{-2/(p-2)}, E1 = (1/2-1/p) lambda1^2.
WellConstants well_constants(double B1, double p);
WellConstants well_constants(const B1Result& b1, double p, const Mesh1D& mesh);
/// lambda1 = (p D1)^{-1/(p-2)}, E1 = (1/2-1/p) lambda1^2; both +inf if D1 <= 0.
WellConstants generalized_constants(double D1, double p);
WellConstants generalized_constants(const D1Result& d1, double p, const Mesh1D& mesh);

enum class Membership { Ws, Wu, Neither, BoundaryAmbiguous };
std::string to_string(Membership m);

struct FieldScalars {
    double J = 0.0;
    double K = 0.0;
    double grad = 0.0;
    double lp = 0.0;
};

FieldScalars field_scalars(const FemField& u, const SourceTerm& f);

struct MembershipVerdict {
    Membership label = Membership::Neither;
    FieldScalars values;
    Membership by_K = Membership::Neither;
    Membership by_gradient = Membership::Neither;
    Membership by_Lp = Membership::Neither;
    bool all_characterizations = false;  ///< false: only the gradient one applies
    bool agreement = true;
    /// Smallest relative distance to a threshold that decides the label.
    double margin = 0.0;
};

inline constexpr double kDefaultClassifyTol = 1e-6;

/// Three characterizations for the pure power source (K-based, gradient
/// norm, Lp norm), the gradient one otherwise. The label comes from the
/// gradient characterization; boundary-ambiguous when margin < tol.
MembershipVerdict classify(const FemField& u, const WellConstants& wc, const SourceTerm& f,
                           double tol = kDefaultClassifyTol);
MembershipVerdict classify_scalars(const FieldScalars& s, const WellConstants& wc,
                                   bool power_source, double tol = kDefaultClassifyTol);

/// Random smooth constrained field: sum of a_k sin((k-1/2) pi x / L) with
/// a_k ~ N(0, 1/k^2). Deterministic in `seed`.
FemField random_smooth_field(MeshPtr mesh, std::uint64_t seed, int modes = 6);

}  // namespace dynheat
