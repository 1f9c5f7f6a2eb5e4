#include "dynheat/region.hpp"

#include "dynheat/errors.hpp"
#include "dynheat/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace dynheat::region {

double ExtendedReal::value() const {
    if (infinite_) throw DomainError("ExtendedReal: value() of infinity");
    return value_;
}

std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    if (x.is_infinite()) return os << "inf";
    return os << x.value();
}

ExtendedReal critical_exponent(int n) {
    if (n < 1) throw DomainError("critical_exponent: n must be >= 1");
    if (n <= 2) return ExtendedReal::infinity();
    return 2.0 * n / (n - 2.0);
}

ExtendedReal p_max(int n) {
    const auto crit = critical_exponent(n);
    if (crit.is_infinite()) return ExtendedReal::infinity();
    return 1.0 + crit.value() / 2.0;
}

bool p_admissible(double p, int n) {
    if (!std::isfinite(p) || p < 2.0) return false;
    const auto pm = p_max(n);
    return pm.is_infinite() || p <= pm.value();
}

double m0(double p, int n) {
    if (n < 1) throw DomainError("m0: n must be >= 1");
    return (2.0 * (n + 1) * p - 4.0 * (n - 1)) / (n * (p - 2.0) + 4.0);
}

double m0_supremum(int n) {
    // m0 is strictly increasing in p (its derivative has numerator 8), so the
    // supremum sits at the right end of the admissible range.
    const auto pm = p_max(n);
    if (pm.is_infinite()) return 2.0 * (n + 1) / n;
    return m0(pm.value(), n);
}

bool blowup_admissible(double p, double m, int n) {
    if (!(p > 2.0) || !p_admissible(p, n)) return false;
    if (!(m > 1.0) || !std::isfinite(m)) return false;
    return m < m0(p, n);
}

SWindow s_window_bounds(double p, double m, int n) {
    if (!(p > 2.0)) throw DomainError("s_window: p must be > 2");
    if (!(m > 1.0)) throw DomainError("s_window: m must be > 1");
    const double lo = std::max(0.5, n / 2.0 - (n - 1.0) / m);
    const double hi = std::min({1.0, 2.0 / m, (p / m - 1.0) / (p / 2.0 - 1.0)});
    return {lo, hi};
}

SWindow s_window(double p, double m, int n) {
    if (!blowup_admissible(p, m, n)) {
        std::ostringstream msg;
        msg << "s_window: inadmissible triple (p=" << p << ", m=" << m << ", n=" << n << ")";
        throw DomainError(msg.str());
    }
    const auto w = s_window_bounds(p, m, n);
    if (w.empty()) throw DomainError("s_window: empty window for admissible triple");
    return w;
}

RateExponents rate_exponents(const ExponentTriple& e, double s) {
    const auto w = s_window(e.p, e.m, e.n);
    if (!(s > w.lo && s < w.hi)) {
        std::ostringstream msg;
        msg << "rate_exponents: s=" << s << " outside (" << w.lo << ", " << w.hi << ")";
        throw DomainError(msg.str());
    }
    const double alpha = -(1.0 - s - e.p * (1.0 / e.m - s / 2.0)) / e.p;
    return {alpha, std::min(alpha, 0.5 - 1.0 / e.p)};
}

RateExponents default_rate_exponents(const ExponentTriple& e) {
    return rate_exponents(e, s_window(e.p, e.m, e.n).midpoint());
}

std::vector<GridRow> emit_region_grid(int n, Range p_range, Range m_range, int resolution) {
    if (resolution < 2) throw DomainError("emit_region_grid: resolution must be >= 2");
    if (!(p_range.hi > p_range.lo) || !(m_range.hi > m_range.lo))
        throw DomainError("emit_region_grid: empty range");
    std::vector<GridRow> rows;
    rows.reserve(static_cast<std::size_t>(resolution) * resolution);
    for (int i = 0; i < resolution; ++i) {
        const double p = p_range.lo + (p_range.hi - p_range.lo) * i / (resolution - 1);
        for (int j = 0; j < resolution; ++j) {
            const double m = m_range.lo + (m_range.hi - m_range.lo) * j / (resolution - 1);
            rows.push_back({p, m, blowup_admissible(p, m, n), p_admissible(p, n)});
        }
    }
    return rows;
}

std::pair<Range, Range> default_ranges(int n) {
    const auto pm = p_max(n);
    const double p_hi = pm.is_infinite() ? 6.0 : std::min(pm.value(), 6.0);
    return {{2.0, p_hi}, {1.0, m0_supremum(n) + 0.5}};
}

void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows) {
    os << "p,m,blowup_admissible,p_admissible\n";
    for (const auto& r : rows) {
        os << format_double(r.p) << ',' << format_double(r.m) << ','
           << (r.blowup_admissible ? 1 : 0) << ',' << (r.p_admissible ? 1 : 0) << '\n';
    }
}

}  // namespace dynheat::region
