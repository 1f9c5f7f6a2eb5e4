#include "dynheat/experiments.hpp"

#include "dynheat/errors.hpp"
#include "dynheat/region.hpp"
#include "dynheat/report.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

namespace dynheat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_power_source(const SourceTerm& f) { return f.kind() == SourceKind::Power; }

}  // namespace

std::optional<WellSetup> compute_well(const RunConfig& cfg, const MeshPtr& mesh) {
    if (!(cfg.p > 2.0)) return std::nullopt;
    AscentOptions opts;
    opts.random_starts = cfg.random_starts;
    opts.seed = cfg.seed;
    auto b1 = compute_B1(mesh, cfg.p, opts);
    const SourceTerm f = make_source(cfg);
    if (is_power_source(f)) {
        WellConstants wc = well_constants(b1, cfg.p, *mesh);
        return WellSetup{std::move(wc), std::move(b1.maximizer)};
    }
    const auto d1 = compute_D1(mesh, f, opts);
    WellConstants wc = generalized_constants(d1, cfg.p, *mesh);
    wc.B1 = b1.B1;
    return WellSetup{std::move(wc), std::move(b1.maximizer)};
}

FemField initial_field(const RunConfig& cfg, const MeshPtr& mesh, const WellSetup* well) {
    const double A = cfg.amplitude, L = mesh->length();
    const double pi = std::numbers::pi;
    if (cfg.profile == "linear-ramp") return FemField::interpolate(mesh, [&](double x) { return A * x / L; });
    if (cfg.profile == "sine-bump")
        return FemField::interpolate(mesh, [&](double x) { return A * std::sin(0.5 * pi * x / L); });
    if (cfg.profile == "manufactured")
        return FemField::interpolate(mesh, [&](double x) { return manufactured_solution(cfg, 0.0, x); });
    if (cfg.profile == "nodal-table") {
        if (cfg.nodal_values.size() != mesh->size()) throw ConfigError("initial.values must have N+1 entries");
        if (cfg.nodal_values.front() != 0.0) throw ConfigError("initial.values must start with 0");
        std::vector<double> c(cfg.nodal_values);
        for (auto& v : c) v *= A;
        return FemField(mesh, std::move(c));
    }
    // scaled-b1-maximizer
    if (!well) throw ConfigError("scaled-b1-maximizer needs p > 2");
    if (!std::isfinite(well->wc.lambda1)) throw ConfigError("scaled-b1-maximizer: lambda1 is infinite");
    return (A * well->wc.lambda1) * well->maximizer.transfer(mesh);
}

SimulationResult simulate(const RunConfig& cfg, FemField u0, const std::optional<WellSetup>& well,
                          const RunOptions& opts) {
    const MeshPtr mesh = u0.mesh_ptr();
    const auto ops = assemble(mesh, cfg.mass);
    const SourceTerm f = make_source(cfg);
    const BoundaryDamping q = make_damping(cfg);
    const Mode mode = make_mode(cfg);
    const StepOptions sopts = make_step_options(cfg);

    SimulationResult res{EnergyLedger{}, u0, RunEnd::Unknown, {}, std::nullopt, std::nullopt, {}, 0, {},
                         cfg.fingerprint()};
    std::optional<double> E2;
    if (well && cfg.mode == "reaction") {
        res.wc = well->wc;
        res.initial_verdict = classify(u0, well->wc, f, cfg.classify_tol);
        if (cfg.E2_policy == "midpoint" && std::isfinite(well->wc.E1))
            E2 = 0.5 * (J_functional(u0, f) + well->wc.E1);
    }
    if (cfg.E2_policy == "value") E2 = cfg.E2;

    std::optional<double> beta_bar;
    if (cfg.mode == "reaction" && region::blowup_admissible(cfg.p, cfg.m, cfg.n))
        beta_bar = region::default_rate_exponents({cfg.p, cfg.m, cfg.n}).beta_bar;

    res.ledger = EnergyLedger(cfg.p, E2);
    SimState state = SimState::initial(std::move(u0), cfg.adaptive ? std::min(cfg.tau0, cfg.tau_max) : cfg.tau0);
    res.ledger.record(state, mode, 0.0, 0);
    if (opts.keep_fields) res.fields.push_back(state.field);

    const double t_end = cfg.T_end;
    double last_growth = 0.0;
    while (state.t < t_end * (1.0 - 1e-12)) {
        if (res.steps >= cfg.max_steps) throw SolverError("run_simulation: step budget exhausted");
        if (!cfg.adaptive) state.tau = cfg.tau0;
        state.tau = std::min(state.tau, t_end - state.t);

        auto r = step(state, ops, mode, q, sopts);
        if (!r.outcome.accepted()) {
            std::ostringstream d;
            d << "t=" << state.t << " tau=" << r.outcome.tau_used << " status=" << to_string(r.outcome.status)
              << " residual=" << r.outcome.residual << " |u|_H1=" << norm_H1(state.field);
            if (r.outcome.status == StepStatus::TauUnderflow && last_growth > cfg.growth_cap) {
                res.end = RunEnd::BlowupFlag;
                res.message = "tau underflow while growing: " + d.str();
                break;
            }
            throw SolverError("run_simulation: " + to_string(r.outcome.status), d.str());
        }
        const double lp_before = res.ledger.back().normLp;
        state = std::move(r.state);
        ++res.steps;
        res.ledger.record(state, mode, r.outcome.dissipation_rate, r.outcome.newton_iterations);
        if (opts.keep_fields) res.fields.push_back(state.field);
        last_growth = lp_before > 0.0 ? (res.ledger.back().normLp - lp_before) / lp_before : 0.0;

        if (res.ledger.back().normH1 > cfg.h1_threshold) {
            res.end = RunEnd::BlowupFlag;
            res.message = "H1 norm exceeded threshold";
            break;
        }
        if (cfg.adaptive) {
            const auto d = adapt_tau(state, res.ledger, sopts);
            state.tau = d.tau;
            if (d.blowup_flag) {
                res.end = RunEnd::BlowupFlag;
                res.message = "step pinned at tau_min with growth over the cap";
                break;
            }
        }
    }
    if (res.end == RunEnd::Unknown) res.end = RunEnd::ReachedEnd;
    res.final_field = state.field;
    BlowupCriteria crit{cfg.h1_threshold, cfg.tail_fraction, cfg.min_points};
    res.blowup = detect_and_extrapolate_blowup(res.ledger, crit, res.end, beta_bar);
    return res;
}

SimulationResult run_simulation(const RunConfig& cfg, const std::optional<WellSetup>& well,
                                const RunOptions& opts) {
    const MeshPtr mesh = build_mesh(cfg.L, cfg.N);
    return simulate(cfg, initial_field(cfg, mesh, well ? &*well : nullptr), well, opts);
}

SimulationResult run_simulation(const RunConfig& cfg, const RunOptions& opts) {
    const MeshPtr mesh = build_mesh(cfg.L, cfg.N);
    std::optional<WellSetup> well;
    if (cfg.mode == "reaction" || cfg.profile == "scaled-b1-maximizer") well = compute_well(cfg, mesh);
    return simulate(cfg, initial_field(cfg, mesh, well ? &*well : nullptr), well, opts);
}

MonotonicityCheck check_J_monotone(const EnergyLedger& ledger, const SourceTerm& f, double L) {
    MonotonicityCheck out;
    auto lipschitz = [&](double R) {
        if (f.kind() == SourceKind::Power) return (f.p() - 1.0) * std::pow(R, f.p() - 2.0);
        double lip = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double s = -R + 2.0 * R * i / 200.0;
            for (int j = 0; j <= 4; ++j) lip = std::max(lip, std::abs(f.derivative(L * j / 4.0, s)));
        }
        return lip;
    };
    for (std::size_t k = 1; k < ledger.size(); ++k) {
        const auto& a = ledger[k - 1];
        const auto& b = ledger[k];
        const double dJ = b.J - a.J;
        const double delta_sq = b.tau * (b.diss_interior - a.diss_interior);
        const double R = std::sqrt(L) * std::max(a.normGrad, b.normGrad);
        const double slack = 0.5 * lipschitz(R) * delta_sq + 1e-13 * (1.0 + std::abs(a.J));
        out.worst_excess = std::max(out.worst_excess, dJ - slack);
        if (dJ > 0.0 && b.tau > 0.0) out.fitted_c = std::max(out.fitted_c, dJ / (b.tau * b.tau));
    }
    out.pass = out.worst_excess <= 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Invariant sets

InvariantSetsReport experiment_invariant_sets(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.mode = "reaction";
    cfg.profile = "scaled-b1-maximizer";
    const MeshPtr mesh = build_mesh(cfg.L, cfg.N);
    const auto well = compute_well(cfg, mesh);
    if (!well) throw ConfigError("invariant-sets needs p > 2");
    const SourceTerm f = make_source(cfg);

    InvariantSetsReport rep;
    int checked = 0, kept = 0;
    std::vector<double> amps(cfg.ws_amplitudes);
    amps.insert(amps.end(), cfg.wu_amplitudes.begin(), cfg.wu_amplitudes.end());
    // Independent runs share the immutable well; results are merged in order.
    std::vector<std::future<SimulationResult>> pending;
    for (double a : amps) {
        RunConfig c = cfg;
        c.amplitude = a;
        pending.push_back(std::async(std::launch::async, [c, &well] { return run_simulation(c, well); }));
    }
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double a = amps[i];
        const auto sim = pending[i].get();
        InvariantRun run;
        run.amplitude = a;
        run.initial = sim.initial_verdict->label;
        run.status = sim.blowup.status;
        const bool in_scope = run.initial == Membership::Ws || run.initial == Membership::Wu;
        run.expectation = in_scope ? to_string(run.initial) : "out of theorem scope";
        for (const auto& r : sim.ledger.records()) {
            ++run.snapshots;
            const auto v = classify_scalars({r.J, r.K, r.normGrad, r.normLp}, well->wc, is_power_source(f),
                                            cfg.classify_tol);
            if (v.label == Membership::BoundaryAmbiguous) {
                ++run.ambiguous;
                continue;
            }
            if (!in_scope) continue;
            ++checked;
            if (v.label != run.initial)
                ++run.violations;
            else
                ++kept;
        }
        run.persisted = run.violations == 0;
        rep.pass = rep.pass && run.persisted;
        rep.runs.push_back(run);
    }
    rep.persistence = checked > 0 ? static_cast<double>(kept) / checked : 1.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Continuous dependence

DependenceReport experiment_dependence(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.adaptive = false;
    const MeshPtr mesh = build_mesh(cfg.L, cfg.N);
    std::optional<WellSetup> well;
    if (cfg.mode == "reaction" || cfg.profile == "scaled-b1-maximizer") well = compute_well(cfg, mesh);
    const FemField u0 = initial_field(cfg, mesh, well ? &*well : nullptr);

    const double L = cfg.L;
    FemField bump = FemField::interpolate(mesh, [L](double x) { return std::sin(1.5 * std::numbers::pi * x / L); });
    bump *= 1.0 / norm_H1(bump);

    const RunOptions keep{true};
    const auto ref = simulate(cfg, u0, well, keep);
    const Mode mode = make_mode(cfg);
    const auto* forced = std::get_if<ForcedMode>(&mode);

    DependenceReport rep;
    double eps = cfg.epsilon;
    for (int k = 0; k < cfg.ladder; ++k, eps *= 0.5) {
        const auto pert = simulate(cfg, u0 + eps * bump, well, keep);
        if (pert.ledger.size() != ref.ledger.size())
            throw ExperimentFailure("depend: perturbed run left the reference time grid");
        DependenceRung rung;
        rung.epsilon = eps;
        rung.initial_distance = norm_H1(pert.fields.front() - ref.fields.front());
        std::vector<double> ts, logs;
        for (std::size_t i = 0; i < ref.fields.size(); ++i) {
            if (pert.ledger[i].t != ref.ledger[i].t)
                throw ExperimentFailure("depend: perturbed run left the reference time grid");
            const double d = norm_H1(pert.fields[i] - ref.fields[i]);
            rung.sup_distance = std::max(rung.sup_distance, d);
            if (d > 0.0 && rung.initial_distance > 0.0) {
                ts.push_back(ref.ledger[i].t);
                logs.push_back(std::log(d / rung.initial_distance));
            }
        }
        if (ts.size() >= 2) {
            double mt = 0, ml = 0;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                mt += ts[i];
                ml += logs[i];
            }
            mt /= ts.size();
            ml /= ts.size();
            double stt = 0, stl = 0;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                stt += (ts[i] - mt) * (ts[i] - mt);
                stl += (ts[i] - mt) * (logs[i] - ml);
            }
            rung.growth_rate = stt > 0.0 ? stl / stt : 0.0;
            double logA = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ts.size(); ++i) logA = std::max(logA, logs[i] - rung.growth_rate * ts[i]);
            rung.prefactor = std::exp(logA);
        }
        if (!std::isfinite(rung.growth_rate) || !std::isfinite(rung.prefactor)) rep.envelope_ok = false;
        if (forced) {
            Trajectory a{{}, ref.fields, forced->g}, b{{}, pert.fields, forced->g};
            for (const auto& r : ref.ledger.records()) a.times.push_back(r.t);
            b.times = a.times;
            rung.hadamard = check_hadamard_stability(a, b, cfg.hadamard_slack);
            rep.hadamard_ok = rep.hadamard_ok && rung.hadamard->pass;
        }
        rep.rungs.push_back(rung);
    }
    for (std::size_t k = 0; k + 1 < rep.rungs.size(); ++k) {
        const double r = rep.rungs[k].sup_distance / rep.rungs[k + 1].sup_distance;
        rep.ratios.push_back(r);
        if (!(r >= 1.6 && r <= 2.4)) rep.ratios_ok = false;
    }
    rep.pass = rep.ratios_ok && rep.envelope_ok && rep.hadamard_ok;
    return rep;
}

// ---------------------------------------------------------------------------
// Convergence

ConvergenceReport experiment_convergence(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.adaptive = false;
    ConvergenceReport rep;

    std::vector<FemField> temporal;
    for (int k = 0; k < 3; ++k) {
        RunConfig c = cfg;
        c.tau0 = cfg.tau0 / (1 << k);
        c.tau_min = std::min(c.tau_min, c.tau0 * 1e-6);
        const auto sim = run_simulation(c);
        if (sim.end != RunEnd::ReachedEnd) throw ExperimentFailure("convergence: run did not reach T_end");
        temporal.push_back(sim.final_field);
        if (k < 2) rep.residuals.push_back(sim.ledger.back().residual);
    }
    for (int k = 0; k < 2; ++k) rep.temporal_differences.push_back(norm_L2(temporal[k] - temporal[k + 1]));

    std::vector<FemField> spatial;
    const MeshPtr finest = build_mesh(cfg.L, cfg.N0 * 4);
    for (int k = 0; k < 3; ++k) {
        RunConfig c = cfg;
        c.N = cfg.N0 << k;
        c.tau0 = cfg.tau_fine;
        c.tau_min = std::min(c.tau_min, c.tau0 * 1e-6);
        const auto sim = run_simulation(c);
        if (sim.end != RunEnd::ReachedEnd) throw ExperimentFailure("convergence: run did not reach T_end");
        spatial.push_back(sim.final_field.transfer(finest));
    }
    for (int k = 0; k < 2; ++k) rep.spatial_differences.push_back(norm_L2(spatial[k] - spatial[k + 1]));

    rep.temporal_order = std::log2(rep.temporal_differences[0] / rep.temporal_differences[1]);
    rep.spatial_order = std::log2(rep.spatial_differences[0] / rep.spatial_differences[1]);
    rep.residual_ratio = rep.residuals[0] / rep.residuals[1];
    rep.temporal_ok = rep.temporal_order >= 0.8 && rep.temporal_order <= 1.2;
    rep.spatial_ok = rep.spatial_order >= 1.7 && rep.spatial_order <= 2.3;
    rep.residual_ok = rep.residual_ratio >= 1.7 && rep.residual_ratio <= 2.3;
    rep.pass = rep.temporal_ok && rep.spatial_ok && rep.residual_ok;
    return rep;
}

BlowupRefinementReport experiment_blowup_refinement(const RunConfig& base, int levels) {
    if (levels < 2) throw DomainError("experiment_blowup_refinement: need at least 2 levels");
    BlowupRefinementReport rep;
    for (int k = 0; k < levels; ++k) {
        RunConfig c = base;
        const double s = std::ldexp(1.0, -k);
        c.N = base.N << k;
        c.growth_cap = base.growth_cap * s;
        c.tau0 = base.tau0 * s;
        c.tau_max = base.tau_max * s;
        const auto sim = run_simulation(c);
        rep.levels.push_back({c.N, c.growth_cap, sim.blowup});
    }
    const double a = rep.levels[levels - 2].blowup.T_max, b = rep.levels[levels - 1].blowup.T_max;
    rep.relative_change = std::abs(a - b) / std::abs(b);
    rep.stable = std::isfinite(rep.relative_change) && rep.relative_change < 0.05;
    return rep;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json json_number(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

nlohmann::json report_header(const RunConfig& cfg, const std::string& kind) {
    return {{"kind", kind}, {"module_version", std::string(kModuleVersion)}, {"config_fingerprint", hex64(cfg.fingerprint())}};
}

nlohmann::json to_json(const WellConstants& wc) {
    nlohmann::json j{{"p", json_number(wc.p)},
                     {"B1", json_number(wc.B1)},
                     {"lambda1", json_number(wc.lambda1)},
                     {"lambda1_tilde", json_number(wc.lambda1_tilde)},
                     {"E1", json_number(wc.E1)},
                     {"generalized", wc.generalized},
                     {"mesh_fingerprint", hex64(wc.mesh_fingerprint)},
                     {"discrete", "subspace value, approximates the continuum constant from below"}};
    if (wc.D1) j["D1"] = json_number(*wc.D1);
    nlohmann::json starts = nlohmann::json::array();
    for (double v : wc.diagnostics.start_values) starts.push_back(json_number(v));
    j["diagnostics"] = {{"start_values", starts},
                        {"iterations", wc.diagnostics.iterations},
                        {"spread", json_number(wc.diagnostics.spread)}};
    return j;
}

nlohmann::json to_json(const MembershipVerdict& v) {
    return {{"label", to_string(v.label)},
            {"J", json_number(v.values.J)},
            {"K", json_number(v.values.K)},
            {"grad_norm", json_number(v.values.grad)},
            {"lp_norm", json_number(v.values.lp)},
            {"by_K", to_string(v.by_K)},
            {"by_gradient", to_string(v.by_gradient)},
            {"by_Lp", to_string(v.by_Lp)},
            {"all_characterizations", v.all_characterizations},
            {"agreement", v.agreement},
            {"margin", json_number(v.margin)}};
}

nlohmann::json to_json(const BlowupReport& r) {
    nlohmann::json j{{"status", to_string(r.status)},
                     {"detection_time", json_number(r.detection_time)},
                     {"T_max", json_number(r.T_max)},
                     {"T_max_window", {json_number(r.T_max_lo), json_number(r.T_max_hi)}},
                     {"note", r.note}};
    if (r.fit)
        j["fit"] = {{"C", json_number(r.fit->C)},
                    {"beta", json_number(r.fit->beta)},
                    {"r2", json_number(r.fit->r2)},
                    {"points", r.fit->points}};
    if (r.beta_bar) j["beta_bar_theory"] = json_number(*r.beta_bar);
    if (r.refinement_stable) j["refinement_stable"] = *r.refinement_stable;
    return j;
}

nlohmann::json to_json(const ValidationReport& r) {
    nlohmann::json constants = nlohmann::json::object();
    for (const auto& [k, v] : r.constants) constants[k] = json_number(v);
    return {{"hypothesis", r.hypothesis},
            {"samples", r.samples},
            {"pass", r.pass},
            {"worst_margin", json_number(r.worst_margin)},
            {"constants", constants},
            {"window", r.window},
            {"notes", r.notes},
            {"empirical", "constants are fitted on the sampled window only"}};
}

nlohmann::json to_json(const SimulationResult& r) {
    const char* ends[] = {"unknown", "reached-end", "blowup-flag", "failure"};
    nlohmann::json j{{"end", ends[static_cast<int>(r.end)]},
                     {"steps", r.steps},
                     {"final_time", json_number(r.ledger.back().t)},
                     {"message", r.message},
                     {"blowup", to_json(r.blowup)},
                     {"records", r.ledger.size()}};
    if (r.wc) j["well_constants"] = to_json(*r.wc);
    if (r.initial_verdict) j["initial_verdict"] = to_json(*r.initial_verdict);
    if (r.ledger.E2()) {
        j["E2"] = json_number(*r.ledger.E2());
        j["E2_convention"] = "midpoint (J(u0) + E1) / 2 unless configured";
    }
    return j;
}

nlohmann::json to_json(const InvariantSetsReport& r) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& x : r.runs)
        runs.push_back({{"amplitude", json_number(x.amplitude)},
                        {"initial", to_string(x.initial)},
                        {"expectation", x.expectation},
                        {"snapshots", x.snapshots},
                        {"ambiguous", x.ambiguous},
                        {"violations", x.violations},
                        {"status", to_string(x.status)},
                        {"persisted", x.persisted}});
    return {{"runs", runs}, {"persistence", json_number(r.persistence)}, {"pass", r.pass}};
}

nlohmann::json to_json(const DependenceReport& r) {
    nlohmann::json rungs = nlohmann::json::array();
    for (const auto& x : r.rungs) {
        nlohmann::json j{{"epsilon", json_number(x.epsilon)},
                         {"initial_distance", json_number(x.initial_distance)},
                         {"sup_distance", json_number(x.sup_distance)},
                         {"growth_rate", json_number(x.growth_rate)},
                         {"prefactor", json_number(x.prefactor)}};
        if (x.hadamard)
            j["stability"] = {{"lhs", json_number(x.hadamard->lhs)},
                              {"rhs", json_number(x.hadamard->rhs)},
                              {"ratio", json_number(x.hadamard->ratio)},
                              {"pass", x.hadamard->pass}};
        rungs.push_back(j);
    }
    nlohmann::json ratios = nlohmann::json::array();
    for (double x : r.ratios) ratios.push_back(json_number(x));
    return {{"rungs", rungs},       {"ratios", ratios},           {"ratios_ok", r.ratios_ok},
            {"envelope_ok", r.envelope_ok}, {"stability_ok", r.hadamard_ok}, {"pass", r.pass}};
}

nlohmann::json to_json(const ConvergenceReport& r) {
    auto arr = [](const std::vector<double>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (double x : v) a.push_back(json_number(x));
        return a;
    };
    return {{"temporal_differences", arr(r.temporal_differences)},
            {"spatial_differences", arr(r.spatial_differences)},
            {"residuals", arr(r.residuals)},
            {"temporal_order", json_number(r.temporal_order)},
            {"spatial_order", json_number(r.spatial_order)},
            {"residual_ratio", json_number(r.residual_ratio)},
            {"temporal_ok", r.temporal_ok},
            {"spatial_ok", r.spatial_ok},
            {"residual_ok", r.residual_ok},
            {"pass", r.pass}};
}

nlohmann::json to_json(const BlowupRefinementReport& r) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : r.levels)
        levels.push_back({{"N", l.N}, {"growth_cap", json_number(l.growth_cap)}, {"blowup", to_json(l.blowup)}});
    return {{"levels", levels}, {"relative_change", json_number(r.relative_change)}, {"stable", r.stable}};
}

}  // namespace dynheat
