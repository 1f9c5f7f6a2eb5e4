#include "dynheat/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dynheat {

std::string to_string(BlowupStatus s) {
    switch (s) {
        case BlowupStatus::GlobalUntilT: return "global-until-T";
        case BlowupStatus::BlowupDetected: return "blowup-detected";
        case BlowupStatus::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::optional<PowerLawFit> fit_power_law(std::span<const double> H, std::span<const double> Hprime) {
    const std::size_t n = std::min(H.size(), Hprime.size());
    if (n < 2) return std::nullopt;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(H[i] > 0.0) || !(Hprime[i] > 0.0)) return std::nullopt;
        sx += std::log(H[i]);
        sy += std::log(Hprime[i]);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(H[i]) - mx, dy = std::log(Hprime[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) return std::nullopt;
    const double slope = sxy / sxx;
    PowerLawFit fit;
    fit.beta = slope - 1.0;
    fit.C = std::exp(my - slope * mx);
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    fit.points = static_cast<int>(n);
    return fit;
}

double extrapolated_blowup_time(double t0, double H0, const PowerLawFit& fit) {
    if (!(fit.beta > 0.0) || !(fit.C > 0.0) || !(H0 > 0.0)) return std::numeric_limits<double>::infinity();
    return t0 + std::pow(H0, -fit.beta) / (fit.C * fit.beta);
}

BlowupReport detect_and_extrapolate_blowup(const EnergyLedger& ledger, const BlowupCriteria& criteria,
                                           RunEnd end, std::optional<double> beta_bar) {
    BlowupReport rep;
    rep.beta_bar = beta_bar;

    bool over = false;
    for (const auto& r : ledger.records()) {
        if (r.normH1 > criteria.h1_threshold) {
            over = true;
            rep.detection_time = r.t;
            break;
        }
    }
    if (!over && end == RunEnd::BlowupFlag && !ledger.empty()) rep.detection_time = ledger.back().t;
    const bool detected = over || end == RunEnd::BlowupFlag;
    if (detected)
        rep.status = BlowupStatus::BlowupDetected;
    else if (end == RunEnd::ReachedEnd)
        rep.status = BlowupStatus::GlobalUntilT;

    std::vector<const LedgerRecord*> usable;
    for (const auto& r : ledger.records())
        if (r.H > 0.0 && r.Hprime > 0.0 && std::isfinite(r.H) && std::isfinite(r.Hprime)) usable.push_back(&r);
    // Only the trailing run of usable records counts as the tail.
    std::size_t take = static_cast<std::size_t>(std::ceil(criteria.tail_fraction * usable.size()));
    take = std::max<std::size_t>(take, static_cast<std::size_t>(criteria.min_points));
    if (usable.size() < static_cast<std::size_t>(criteria.min_points) || ledger.empty() ||
        usable.back() != &ledger.back()) {
        rep.note = "insufficient tail data (need H > 0 and H' > 0 on the final records)";
        return rep;
    }
    take = std::min(take, usable.size());
    std::vector<double> H, Hp, t;
    for (std::size_t i = usable.size() - take; i < usable.size(); ++i) {
        H.push_back(usable[i]->H);
        Hp.push_back(usable[i]->Hprime);
        t.push_back(usable[i]->t);
    }
    for (std::size_t i = 1; i < H.size(); ++i) {
        if (!(H[i] > H[i - 1])) {
            rep.note = "non-monotone tail: H does not increase";
            return rep;
        }
    }

    const auto fit = fit_power_law(H, Hp);
    if (!fit || !(fit->beta > 0.0) || !(fit->C > 0.0)) {
        rep.note = "tail does not follow H' ~ C H^{1+beta} with beta > 0";
        if (fit) rep.fit = fit;
        return rep;
    }
    rep.fit = fit;
    rep.T_max = extrapolated_blowup_time(t.back(), H.back(), *fit);

    const std::size_t half = H.size() / 2;
    double lo = rep.T_max, hi = rep.T_max;
    for (const auto& [a, b] : {std::pair{std::size_t{0}, half}, std::pair{half, H.size()}}) {
        if (b - a < 2) continue;
        const auto part = fit_power_law(std::span(H).subspan(a, b - a), std::span(Hp).subspan(a, b - a));
        if (!part) continue;
        const double tm = extrapolated_blowup_time(t.back(), H.back(), *part);
        lo = std::min(lo, tm);
        hi = std::max(hi, tm);
    }
    rep.T_max_lo = lo;
    rep.T_max_hi = hi;
    if (!detected) rep.note = "fit available but no blow-up was detected";
    return rep;
}

}  // namespace dynheat
