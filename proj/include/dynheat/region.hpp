#pragma once

// Exponent arithmetic for local existence and blow-up rates: the
// critical Sobolev exponent, admissible (p, m, n) triples, the
// interpolation window for s and the resulting blow-up rate exponents.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dynheat::region {

/// Real number or +infinity. Infinity is a flag, never a large double.
class ExtendedReal {
public:
    constexpr ExtendedReal(double v) : value_(v), infinite_(false) {}  // NOLINT
    static constexpr ExtendedReal infinity() { return ExtendedReal(); }

    constexpr bool is_infinite() const { return infinite_; }
    /// Finite value; throws DomainError when infinite.
    double value() const;

    friend bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

private:
    constexpr ExtendedReal() : value_(0.0), infinite_(true) {}
    double value_;
    bool infinite_;
};

std::ostream& operator<<(std::ostream& os, const ExtendedReal& x);

struct ExponentTriple {
    double p;  ///< source exponent, >= 2
    double m;  ///< damping exponent, > 1
    int n;     ///< spatial dimension, >= 1
};

/// 2* = 2n/(n-2) for n >= 3, infinity for n = 1, 2.
ExtendedReal critical_exponent(int n);

/// Largest p allowed by 2 <= p <= 1 + 2*/2 (infinite for n <= 2).
ExtendedReal p_max(int n);

bool p_admissible(double p, int n);

/// m0(p) = (2(n+1)p - 4(n-1)) / (n(p-2) + 4).
double m0(double p, int n);

/// Supremum of m0 over the admissible p range; for n <= 2 this is the
/// (unattained) limit 2(n+1)/n as p -> infinity.
double m0_supremum(int n);

/// p > 2, 2 <= p <= 1 + 2*/2, m > 1 and m < m0(p).
bool blowup_admissible(double p, double m, int n);
inline bool blowup_admissible(const ExponentTriple& e) { return blowup_admissible(e.p, e.m, e.n); }

struct SWindow {
    double lo;
    double hi;
    bool empty() const { return !(lo < hi); }
    double midpoint() const { return 0.5 * (lo + hi); }
};

/// Raw bounds lo = max{1/2, n/2 - (n-1)/m}, hi = min{1, 2/m, (p/m-1)/(p/2-1)}
/// with no admissibility check. Requires p > 2.
SWindow s_window_bounds(double p, double m, int n);

/// Open window of admissible s; throws DomainError for inadmissible triples.
SWindow s_window(double p, double m, int n);

struct RateExponents {
    double alpha_bar;
    double beta_bar;
};

/// alpha_bar = -[1 - s - p(1/m - s/2)]/p and beta_bar = min{alpha_bar, 1/2 - 1/p}.
/// Throws DomainError when s is outside the open window of the triple.
RateExponents rate_exponents(const ExponentTriple& e, double s);

/// Rate exponents at the window midpoint.
RateExponents default_rate_exponents(const ExponentTriple& e);

struct GridRow {
    double p;
    double m;
    bool blowup_admissible;
    bool p_admissible;
};

struct Range {
    double lo;
    double hi;
};

/// Uniform (p, m) grid with `resolution` points per axis (inclusive ends).
std::vector<GridRow> emit_region_grid(int n, Range p_range, Range m_range, int resolution);

/// Default ranges: p in [2, min(p_max, 6)] and m in [1, m0_supremum(n) + 0.5].
std::pair<Range, Range> default_ranges(int n);

void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows);

}  // namespace dynheat::region
