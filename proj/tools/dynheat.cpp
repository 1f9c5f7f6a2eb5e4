// Command line front end. Exit codes: 0 ok, 1 config error, 2 solver
// failure, 3 failed check or experiment.

#include "dynheat/errors.hpp"
#include "dynheat/experiments.hpp"
#include "dynheat/region.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace dynheat;

namespace {

void emit(const nlohmann::json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    os << j.dump(2) << '\n';
}

int cmd_simulate(const RunConfig& cfg) {
    const auto sim = run_simulation(cfg);
    if (!cfg.ledger_path.empty()) {
        std::ofstream os(cfg.ledger_path);
        if (!os) throw ConfigError("cannot write " + cfg.ledger_path);
        sim.ledger.write_csv(os);
    }
    auto j = report_header(cfg, "simulate");
    j["result"] = to_json(sim);
    emit(j, cfg.report_path);
    return 0;
}

int cmd_classify(const RunConfig& cfg) {
    const MeshPtr mesh = build_mesh(cfg.L, cfg.N);
    const auto well = compute_well(cfg, mesh);
    if (!well) throw ConfigError("classify needs p > 2");
    const FemField u0 = initial_field(cfg, mesh, &*well);
    auto j = report_header(cfg, "classify");
    j["well_constants"] = to_json(well->wc);
    j["verdict"] = to_json(classify(u0, well->wc, make_source(cfg), cfg.classify_tol));
    emit(j, cfg.report_path);
    return 0;
}

int cmd_well(const RunConfig& cfg) {
    const auto well = compute_well(cfg, build_mesh(cfg.L, cfg.N));
    if (!well) throw ConfigError("well-constants needs p > 2");
    auto j = report_header(cfg, "well-constants");
    j["well_constants"] = to_json(well->wc);
    emit(j, cfg.report_path);
    return 0;
}

int cmd_validate(const RunConfig& cfg) {
    const SourceTerm f = make_source(cfg);
    const BoundaryDamping q = make_damping(cfg);
    SampleSpec spec;
    spec.x_hi = cfg.L;
    auto j = report_header(cfg, "validate");
    bool pass = true;
    auto add = [&](const ValidationReport& r) {
        j["reports"].push_back(to_json(r));
        pass = pass && r.pass;
    };
    add(validate_F1(f, spec));
    const auto f23 = validate_F2_F3(f, default_epsilon0(f.p()), spec);
    add(f23.f2);
    add(f23.f3);
    add(validate_Q(q, spec, cfg.mu ? DampingHypothesis::Q1Q2Prime : DampingHypothesis::Q1Q2));
    if (cfg.damping_beta && cfg.mu) {
        const bool ok = check_overdamping(*cfg.damping_beta, cfg.m, *cfg.mu);
        j["overdamping"] = {{"beta", *cfg.damping_beta}, {"non_overdamped", ok}};
    }
    j["pass"] = pass;
    emit(j, cfg.report_path);
    return pass ? 0 : 3;
}

template <class Fn>
int cmd_experiment(const RunConfig& cfg, const std::string& kind, Fn fn) {
    const auto rep = fn(cfg);
    auto j = report_header(cfg, kind);
    j["result"] = to_json(rep);
    emit(j, cfg.report_path);
    return rep.pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semilinear heat equation with a dynamical boundary condition"};
    app.require_subcommand(1);

    std::string config_path;
    std::string report_override, ledger_override;
    auto add_config_cmd = [&](const std::string& name, const std::string& help) {
        auto* c = app.add_subcommand(name, help);
        c->add_option("config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
        c->add_option("--report", report_override, "JSON report path (default stdout)");
        return c;
    };
    auto* simulate = add_config_cmd("simulate", "run one simulation");
    simulate->add_option("--ledger", ledger_override, "ledger CSV path");
    auto* classify_cmd = add_config_cmd("classify", "classify the initial datum");
    auto* well = add_config_cmd("well-constants", "compute the well constants");
    auto* validate = add_config_cmd("validate", "check the nonlinearity hypotheses");
    auto* convergence = add_config_cmd("convergence", "self-convergence study");
    auto* depend = add_config_cmd("depend", "continuous dependence ladder");
    auto* invariant = add_config_cmd("invariant-sets", "label persistence grid");
    auto* schema = app.add_subcommand("schema", "print the config schema");

    auto* region_cmd = app.add_subcommand("region", "exponent region grid as CSV");
    int n = 1, resolution = 41;
    std::vector<double> p_range, m_range;
    std::string out;
    region_cmd->add_option("--n", n, "space dimension")->required()->check(CLI::Range(1, 1000));
    region_cmd->add_option("--p", p_range, "p range: lo hi")->expected(2);
    region_cmd->add_option("--m", m_range, "m range: lo hi")->expected(2);
    region_cmd->add_option("--resolution", resolution, "points per axis")->check(CLI::Range(2, 100000));
    region_cmd->add_option("--out", out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*schema) {
            std::cout << describe_schema();
            return 0;
        }
        if (*region_cmd) {
            auto [pr, mr] = region::default_ranges(n);
            if (!p_range.empty()) pr = {p_range[0], p_range[1]};
            if (!m_range.empty()) mr = {m_range[0], m_range[1]};
            const auto rows = region::emit_region_grid(n, pr, mr, resolution);
            if (out.empty()) {
                region::write_grid_csv(std::cout, rows);
            } else {
                std::ofstream os(out);
                if (!os) throw ConfigError("cannot write " + out);
                region::write_grid_csv(os, rows);
            }
            return 0;
        }

        RunConfig cfg = load_config(config_path);
        if (!report_override.empty()) cfg.report_path = report_override;
        if (!ledger_override.empty()) cfg.ledger_path = ledger_override;

        if (*simulate) return cmd_simulate(cfg);
        if (*classify_cmd) return cmd_classify(cfg);
        if (*well) return cmd_well(cfg);
        if (*validate) return cmd_validate(cfg);
        if (*convergence) return cmd_experiment(cfg, "convergence", experiment_convergence);
        if (*depend) return cmd_experiment(cfg, "depend", experiment_dependence);
        if (*invariant) return cmd_experiment(cfg, "invariant-sets", experiment_invariant_sets);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        if (!e.diagnostics().empty()) std::cerr << "  " << e.diagnostics() << '\n';
        return 2;
    } catch (const ExperimentFailure& e) {
        std::cerr << "experiment failure: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
