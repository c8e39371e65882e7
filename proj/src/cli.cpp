#include "stvc/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "stvc/stn.hpp"
#include "stvc/validation.hpp"

namespace stvc {

SimulatedData simulate_dataset(const RunConfig& cfg, std::uint64_t seed) {
    const auto& spec = cfg.simulation;
    Rng rng(seed);
    SimulatedData sim;
    PanelData& panel = sim.panel;

    if (spec.covariates_from) {
        const auto source = read_panel_file(*spec.covariates_from, cfg.ingestion);
        panel.n = source.n;
        panel.T = source.T;
        panel.p = source.p;
        panel.x = source.x;
        panel.unit_labels = source.unit_labels;
        panel.time_labels = source.time_labels;
    } else {
        if (spec.n < 1 || spec.T < 1 || spec.p < 1) throw std::invalid_argument("simulate needs n, T, p >= 1");
        panel.n = spec.n;
        panel.T = spec.T;
        panel.p = spec.p;
        panel.x.resize(panel.sites() * panel.p);
        for (auto& v : panel.x) v = rng.standard_normal();
    }
    if (spec.tau.size() != 1 && spec.tau.size() != static_cast<std::size_t>(panel.n)) {
        throw std::invalid_argument("simulate.tau must be a scalar or one value per unit");
    }

    const auto sys = neighborhoods_for(cfg, panel.n, panel.T);
    const int p = panel.p;
    sim.alpha = spec.alpha;
    sim.beta.assign(panel.sites() * p, spec.beta_value);
    if (spec.beta_mode == "stn") {
        STNParams prior{cfg.hyper.m0, cfg.hyper.c0, {}};
        for (std::size_t s = 0; s < panel.sites(); ++s) prior.c.push_back(cfg.hyper.weight(s));
        for (int k = 0; k < p; ++k) {
            const auto draw = sample_stn_forward(prior, sys, rng);
            for (std::size_t s = 0; s < panel.sites(); ++s) sim.beta[s * p + k] = draw.beta[s];
        }
    } else if (spec.beta_mode != "constant") {
        throw std::invalid_argument("unknown beta_mode '" + spec.beta_mode + "'");
    }
    sim.tau.resize(panel.n);
    for (int i = 0; i < panel.n; ++i) sim.tau[i] = spec.tau.size() == 1 ? spec.tau.front() : spec.tau[i];

    panel.y.resize(panel.sites());
    for (std::size_t s = 0; s < panel.sites(); ++s) {
        double eta = sim.alpha;
        for (int k = 0; k < p; ++k) eta += sim.beta[s * p + k] * panel.covariate(s, k);
        panel.y[s] = rng.normal(eta, sim.tau[s / panel.T]);
    }
    panel.validate();
    return sim;
}

json truth_to_json(const SimulatedData& sim, const RunConfig& cfg, std::uint64_t seed) {
    json j;
    j["alpha"] = sim.alpha;
    j["tau"] = sim.tau;
    json beta = json::array();
    const auto& panel = sim.panel;
    for (int i = 1; i <= panel.n; ++i) {
        for (int t = 1; t <= panel.T; ++t) {
            for (int k = 0; k < panel.p; ++k) {
                beta.push_back({{"unit", i}, {"time", t}, {"k", k + 1},
                                {"value", sim.beta[panel.flat({i, t}) * panel.p + k]}});
            }
        }
    }
    j["beta"] = std::move(beta);
    j["seed"] = seed;
    j["generator"] = std::string(Rng::kName);
    j["config"] = to_json(cfg);
    j["config"].erase("out");
    return j;
}

FitOutcome fit_model(const RunConfig& cfg, const PanelData& data) {
    FitOutcome outcome;
    FitReport& report = outcome.report;
    report.dataset = cfg.dataset;
    report.model_tag = cfg.model;
    if (cfg.model == ModelTag::STVC) {
        const auto sys = neighborhoods_for(cfg, data.n, data.T);
        outcome.chain = run_chain(data, cfg.hyper, sys, cfg.chain);
        report.neighborhood.kind = to_string(cfg.neighborhood.kind);
        report.neighborhood.q = cfg.neighborhood.kind == NeighborhoodKind::spatial ? 0 : cfg.neighborhood.q;
        report.neighborhood.c = cfg.hyper.c.size() == 1 ? cfg.hyper.c.front() : std::nan("");
        report.neighborhood.median_size = neighborhood_stats(sys).median;
    } else {
        outcome.chain = fit_reference(data, cfg.hyper, cfg.model, cfg.chain);
        report.neighborhood.kind = to_string(cfg.model);
    }
    report.cpo = cpo(outcome.chain, data);
    report.lpml = lpml(report.cpo);
    report.summaries = summarize(outcome.chain, cfg.level);
    return outcome;
}

namespace {

/// The run config echoed into chain files, minus the output directory so
/// that reruns elsewhere produce identical bytes.
json chain_echo(const RunConfig& cfg) {
    auto j = to_json(cfg);
    j.erase("out");
    return j;
}

void write_fit_outputs(const RunConfig& cfg, const PanelData& data, const FitOutcome& fit) {
    persist_chain(fit.chain, cfg.out / "chain.csv", chain_echo(cfg));
    write_text_file(cfg.out / "report.json", to_json(fit.report, cfg, data).dump(2) + "\n");
    write_text_file(cfg.out / "summary.csv", summaries_to_csv(fit.report.summaries));
}

int run_fit(const std::string& config_path, const std::string& out_dir, const std::optional<std::uint64_t>& seed,
            const std::optional<double>& level, std::ostream& out) {
    RunConfig cfg = read_run_config(config_path);
    if (!out_dir.empty()) cfg.out = out_dir;
    if (seed) cfg.chain.seed = *seed;
    if (level) cfg.level = *level;
    cfg.validate();
    const auto data = read_panel_file(cfg.data, cfg.ingestion);
    try {
        const auto fit = fit_model(cfg, data);
        write_fit_outputs(cfg, data, fit);
        out << "model: " << to_string(cfg.model) << "\n"
            << "retained samples: " << fit.chain.samples.size() << "\n"
            << "LPML: " << format_double(fit.report.lpml) << "\n"
            << "outputs: " << cfg.out.string() << "\n";
    } catch (const NumericalError& e) {
        write_text_file(cfg.out / "state_dump.txt", e.dump());
        throw;
    }
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_dir, const std::optional<std::uint64_t>& seed,
                 std::ostream& out) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : read_run_config(config_path);
    if (config_path.empty()) cfg.out = "simulated";
    if (!out_dir.empty()) cfg.out = out_dir;
    const std::uint64_t s = seed.value_or(cfg.chain.seed);
    cfg.chain.seed = s;
    const auto sim = simulate_dataset(cfg, s);
    write_text_file(cfg.out / "panel.csv", panel_to_csv(sim.panel));
    write_text_file(cfg.out / "truth.json", truth_to_json(sim, cfg, s).dump(2) + "\n");
    out << "simulated " << sim.panel.n << " units x " << sim.panel.T << " times, p = " << sim.panel.p << "\n"
        << "outputs: " << cfg.out.string() << "\n";
    return 0;
}

int run_validate(std::int64_t reps, const std::optional<std::uint64_t>& seed, const std::string& out_dir,
                 std::ostream& out) {
    ValidationOptions opts;
    opts.reps = reps;
    if (seed) opts.seed = *seed;
    const auto report = run_validation(opts);
    const std::filesystem::path dir = out_dir.empty() ? "validation" : out_dir;
    write_text_file(dir / "validation_report.json", report.to_json().dump(2) + "\n");
    for (const auto& c : report.checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (c.detail.contains("verdict")) out << "  verdict=" << c.detail["verdict"].get<std::string>();
        out << "\n";
    }
    out << "report: " << (dir / "validation_report.json").string() << "\n";
    return report.all_passed() ? 0 : 1;
}

int run_summarize(const std::string& config_path, const std::string& chain_path, const std::string& out_dir,
                  const std::optional<double>& level, std::ostream& out) {
    RunConfig cfg = read_run_config(config_path);
    if (!out_dir.empty()) cfg.out = out_dir;
    if (level) cfg.level = *level;
    const auto data = read_panel_file(cfg.data, cfg.ingestion);
    const auto chain = load_chain(chain_path);
    cfg.chain.iterations = chain.config.iterations;
    cfg.chain.burn_in = chain.config.burn_in;
    cfg.chain.thin = chain.config.thin;
    cfg.chain.seed = chain.config.seed;
    cfg.model = chain.model_tag;

    FitReport report;
    report.dataset = cfg.dataset;
    report.model_tag = chain.model_tag;
    if (chain.model_tag == ModelTag::STVC) {
        const auto sys = neighborhoods_for(cfg, data.n, data.T);
        report.neighborhood = {to_string(cfg.neighborhood.kind),
                               cfg.neighborhood.kind == NeighborhoodKind::spatial ? 0 : cfg.neighborhood.q,
                               cfg.hyper.c.size() == 1 ? cfg.hyper.c.front() : std::nan(""),
                               neighborhood_stats(sys).median};
    } else {
        report.neighborhood.kind = to_string(chain.model_tag);
    }
    report.cpo = cpo(chain, data);
    report.lpml = lpml(report.cpo);
    report.summaries = summarize(chain, cfg.level);
    write_text_file(cfg.out / "report.json", to_json(report, cfg, data).dump(2) + "\n");
    write_text_file(cfg.out / "summary.csv", summaries_to_csv(report.summaries));
    out << "retained samples: " << chain.samples.size() << "\n"
        << "LPML: " << format_double(report.lpml) << "\n";
    return 0;
}

int run_compare(const std::vector<std::string>& paths, const std::string& out_dir, std::ostream& out) {
    std::vector<FitReport> reports;
    for (const auto& path : paths) reports.push_back(report_from_json(json::parse(read_text_file(path))));
    const auto rows = compare(reports);
    if (!out_dir.empty()) {
        const std::filesystem::path dir(out_dir);
        write_text_file(dir / "ranking.csv", ranking_to_csv(rows));
        json j = json::array();
        for (const auto& r : rows) {
            j.push_back({{"source", paths[r.input_position]},
                         {"dataset", r.dataset},
                         {"model_tag", r.model_tag},
                         {"type", r.neighborhood.kind},
                         {"q", r.neighborhood.q},
                         {"c", r.neighborhood.c},
                         {"median_size", r.neighborhood.median_size},
                         {"lpml", r.lpml},
                         {"best", r.best_in_group}});
        }
        write_text_file(dir / "ranking.json", j.dump(2) + "\n");
    }
    out << std::left << std::setw(10) << "dataset" << std::setw(9) << "model" << std::setw(6) << "type"
        << std::setw(4) << "q" << std::setw(8) << "c" << std::setw(8) << "med|d|" << std::setw(14) << "LPML"
        << "best\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(10) << r.dataset << std::setw(9) << r.model_tag << std::setw(6)
            << r.neighborhood.kind << std::setw(4) << (r.neighborhood.q > 0 ? std::to_string(r.neighborhood.q) : "-")
            << std::setw(8) << format_double(r.neighborhood.c) << std::setw(8)
            << format_double(r.neighborhood.median_size) << std::setw(14) << format_double(r.lpml)
            << (r.best_in_group ? "*" : "") << "\n";
    }
    return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian regression with spatio-temporal varying coefficients", "stvc"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> level;
    std::int64_t reps = 1'000'000;
    std::string chain_path;
    std::vector<std::string> reports;

    auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler and write chain, report and summaries");
    fit->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", out_dir, "Output directory (overrides config)");
    fit->add_option("--seed", seed, "Chain seed (overrides config)");
    fit->add_option("--level", level, "Credible level")->check(CLI::Range(0.0, 1.0));

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic panel from the STN prior");
    simulate->add_option("--config", config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    simulate->add_option("--out", out_dir, "Output directory");
    simulate->add_option("--seed", seed, "Simulation seed");

    auto* validate = app.add_subcommand("validate", "Run the property and oracle suite");
    validate->add_option("--reps", reps, "Monte Carlo replications for correlation checks")
        ->check(CLI::Range(std::int64_t{10000}, std::int64_t{1'000'000'000}));
    validate->add_option("--seed", seed, "Base seed");
    validate->add_option("--out", out_dir, "Output directory");

    auto* summarize_cmd = app.add_subcommand("summarize", "Recompute LPML and summaries from a stored chain");
    summarize_cmd->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    summarize_cmd->add_option("--chain", chain_path, "Chain CSV")->required()->check(CLI::ExistingFile);
    summarize_cmd->add_option("--out", out_dir, "Output directory");
    summarize_cmd->add_option("--level", level, "Credible level")->check(CLI::Range(0.0, 1.0));

    auto* compare_cmd = app.add_subcommand("compare", "Rank fit reports by LPML");
    compare_cmd->add_option("reports", reports, "Report JSON files")->required()->expected(2, -1)->check(CLI::ExistingFile);
    compare_cmd->add_option("--out", out_dir, "Output directory for ranking.csv and ranking.json");

    std::vector<const char*> argv{"stvc"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*fit) return run_fit(config, out_dir, seed, level, out);
        if (*simulate) return run_simulate(config, out_dir, seed, out);
        if (*validate) return run_validate(reps, seed, out_dir, out);
        if (*summarize_cmd) return run_summarize(config, chain_path, out_dir, level, out);
        if (*compare_cmd) return run_compare(reports, out_dir, out);
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace stvc
