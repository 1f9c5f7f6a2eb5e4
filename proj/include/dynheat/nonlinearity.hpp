#pragma once

// Source term f(x,u) with potential F(x,u) = int_0^u f(x,s) ds, boundary
// damping Q(t,x,v), and sample-based checks of the structural hypotheses
// the well-posedness and blow-up theory relies on.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dynheat {

/// Piecewise-constant coefficient on the spatial interval. `values` has one
/// more entry than `breaks`; value i applies on [breaks[i-1], breaks[i]).
class PiecewiseConstant {
public:
    PiecewiseConstant(double value = 0.0);  // NOLINT
    PiecewiseConstant(std::vector<double> breaks, std::vector<double> values);

    double operator()(double x) const;
    double min() const;
    double max() const;
    bool is_constant() const { return values_.size() == 1; }
    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

enum class SourceKind { Power, F0, F1Capped, Custom };

std::string to_string(SourceKind k);

class SourceTerm {
public:
    using Fn = std::function<double(double x, double u)>;

    /// f = |u|^{p-2} u.
    static SourceTerm power(double p);
    /// f = a(x)|u|^{q-2}u + b(x)|u|^{p-2}u, 2 <= q <= p.
    static SourceTerm f0(double q, double p, PiecewiseConstant a, PiecewiseConstant b);
    /// f = u for |u| <= 1, |u|^{p-2}u for |u| >= 1.
    static SourceTerm f1_capped(double p);
    /// f == 0 (an f0 with vanishing coefficients).
    static SourceTerm zero(double p);
    /// Named user nonlinearity. Without `potential` F is computed by adaptive
    /// Gauss-Kronrod quadrature; without `derivative` by central differences.
    static SourceTerm custom(std::string name, double p, Fn value, Fn derivative = {},
                             Fn potential = {});

    SourceKind kind() const { return kind_; }
    double p() const { return p_; }
    double q() const { return q_; }
    const std::string& name() const { return name_; }
    const PiecewiseConstant& a() const { return a_; }
    const PiecewiseConstant& b() const { return b_; }

    /// f(x,u); throws DomainError on non-finite input.
    double eval(double x, double u) const;
    /// df/du(x,u).
    double derivative(double x, double u) const;
    /// F(x,u); closed form for built-in kinds, quadrature otherwise.
    double potential(double x, double u) const;
    /// F(x,u) by adaptive quadrature to 1e-10 relative, regardless of kind.
    /// Throws NumericalError carrying the achieved tolerance on failure.
    double potential_by_quadrature(double x, double u) const;
    bool has_closed_form_potential() const { return kind_ != SourceKind::Custom || bool(potential_); }

private:
    SourceTerm() = default;

    SourceKind kind_ = SourceKind::Power;
    double p_ = 2.0;
    double q_ = 2.0;
    std::string name_;
    PiecewiseConstant a_;
    PiecewiseConstant b_;
    Fn value_;
    Fn derivative_;
    Fn potential_;
};

enum class DampingKind { Power, Q0, Q1Weighted, Physical, Custom };

std::string to_string(DampingKind k);

class BoundaryDamping {
public:
    using Fn = std::function<double(double t, double x, double v)>;

    /// Q = |v|^{m-2} v.
    static BoundaryDamping power(double m);
    /// Q = a|v|^{mu-2}v + b|v|^{m-2}v, a >= 0, b > 0, 1 < mu <= m.
    static BoundaryDamping q0(double a, double b, double mu, double m);
    /// Q = (1+t)^beta * Q0(v).
    static BoundaryDamping q1_weighted(double a, double b, double mu, double m, double beta);
    /// Q = v + |v|^{m-2} v (refrigerated surrounding fluid).
    static BoundaryDamping physical(double m);
    static BoundaryDamping custom(std::string name, double m, double mu, Fn value, Fn derivative = {});

    /// Copy multiplied by the weight d(t) = (1+t)^beta.
    BoundaryDamping with_weight(double beta) const;

    DampingKind kind() const { return kind_; }
    double m() const { return m_; }
    double mu() const { return mu_; }
    double a() const { return a_; }
    double b() const { return b_; }
    std::optional<double> weight_beta() const { return beta_; }
    const std::string& name() const { return name_; }

    /// d(t); 1 when no weight is set.
    double weight(double t) const;
    double eval(double t, double x, double v) const;
    /// dQ/dv. Powers with exponent below 1 are regularized with
    /// |v| -> sqrt(v^2 + delta^2), delta = 1e-12, so the value stays finite at 0.
    double derivative(double t, double x, double v) const;
    bool has_analytic_derivative() const { return kind_ != DampingKind::Custom || bool(derivative_); }

private:
    BoundaryDamping() = default;

    DampingKind kind_ = DampingKind::Power;
    double m_ = 2.0;
    double mu_ = 2.0;
    double a_ = 0.0;
    double b_ = 1.0;
    std::optional<double> beta_;
    std::string name_;
    Fn value_;
    Fn derivative_;
};

// ---------------------------------------------------------------------------
// Hypothesis validation

/// Sampling window for the validators. Magnitude windows are log-uniform;
/// the "extended" window stretches the core by `window_stretch` on both
/// ends, and a constant is accepted only if it is stable between the two.
struct SampleSpec {
    double x_lo = 0.0;
    double x_hi = 1.0;
    double u_max = 10.0;
    double u_min = 1e-3;
    double t_lo = 0.0;
    double t_hi = 10.0;
    int count = 10000;
    double window_stretch = 1e3;
    double growth_limit = 2.0;
};

struct ValidationReport {
    std::string hypothesis;
    int samples = 0;
    bool pass = false;
    /// <= 0 exactly when pass.
    double worst_margin = 0.0;
    std::map<std::string, double> constants;
    std::string window;
    std::vector<std::string> notes;
};

/// Fits the smallest c7 with
/// |f(x,u1)-f(x,u2)| <= c7 |u1-u2| (1 + |u1|^{p-2} + |u2|^{p-2})
/// on [-u_max, u_max] and on the half window; growth of the fitted constant
/// by more than `growth_limit` flags non-polynomial growth.
ValidationReport validate_F1(const SourceTerm& f, const SampleSpec& spec = {});

struct F2F3Reports {
    ValidationReport f2;
    ValidationReport f3;
};

/// Default epsilon_0 = min(1, p-2)/2.
double default_epsilon0(double p);

/// Smallest c10 >= 0 with F <= (c10/p)|u|^p and largest c11(eps) with
/// f u - (p-eps)F >= c11 |u|^p. F3 needs c11 > 0.
F2F3Reports validate_F2_F3(const SourceTerm& f, double epsilon, const SampleSpec& spec = {});

enum class DampingHypothesis { Q1Q2, Q1Q2Prime };

/// Two-sided power bounds for |v| >= 1, lower (Q1) or two-sided with mu (Q1')
/// bounds for |v| <= 1, Q(t,x,0) = 0, and monotonicity on sampled pairs.
ValidationReport validate_Q(const BoundaryDamping& q, const SampleSpec& spec = {},
                            DampingHypothesis which = DampingHypothesis::Q1Q2);

/// For d(t) = (1+t)^beta the integral int^inf dt/(d^{1/(m-1)} + d^{1/(mu-1)})
/// diverges exactly when beta <= mu - 1. Requires m >= mu > 1.
bool check_overdamping(double beta, double m, double mu);

// ---------------------------------------------------------------------------
// Named registrations for custom kinds (no runtime expression parsing).

using ParamMap = std::map<std::string, double>;
using SourceFactory = std::function<SourceTerm(const ParamMap&)>;
using DampingFactory = std::function<BoundaryDamping(const ParamMap&)>;

void register_source(const std::string& name, SourceFactory factory);
void register_damping(const std::string& name, DampingFactory factory);
/// Throws ConfigError for unknown names.
SourceTerm make_registered_source(const std::string& name, const ParamMap& params);
BoundaryDamping make_registered_damping(const std::string& name, const ParamMap& params);
std::vector<std::string> registered_sources();
std::vector<std::string> registered_dampings();

}  // namespace dynheat
