#include "ssdf/experiment.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

using namespace ssdf;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

Format parse_format(const std::string& s)
{
    if (s == "csv")
        return Format::Csv;
    if (s == "jsonl")
        return Format::Jsonl;
    throw ConfigError("field 'format': unknown value '" + s + "'");
}

void print_summary(const ExperimentReport& r)
{
    const auto& s = r.summary;
    std::cout << strategy_string(r.config.strategy) << " env=" << env_string(r.config.environment)
              << " Y=" << r.config.attack_total << " seed=" << r.config.seed
              << " protected=" << s.protected_fraction_final << " correct_packets=" << s.mean_correct_packets
              << " non_beneficial_J=" << s.total_non_beneficial_J << " converged=" << s.converged << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"SSDF attack/defense simulator for WSN spectrum reports"};
    app.require_subcommand(1);

    std::string config_path, env, strategy, pu, format = "csv", out = "out";
    double attack = -1, defense = -1, xi = -1, alpha = -1;
    int rounds = 0, nodes = 0;
    long long seed = -1;

    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("--config", config_path, "key = value config file");
    run->add_option("--env", env, "OL|ON|UL|UN|IL|IN");
    run->add_option("--attack-budget", attack, "total attack budget Y")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--defense-budget", defense, "total defense budget X")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--strategy", strategy, "proposed|random|equal");
    run->add_option("--rounds", rounds, "number of rounds")->check(CLI::PositiveNumber);
    run->add_option("--nodes", nodes, "number of sensor nodes")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "random seed")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--pu", pu, "fluct|nonfluct");
    run->add_option("--xi", xi, "weak-list threshold")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--alpha", alpha, "attacker increment")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--out", out, "output directory");
    run->add_option("--format", format, "csv|jsonl");

    std::string grid_path;
    int threads = 0;
    auto* sw = app.add_subcommand("sweep", "run a grid of scenarios");
    sw->add_option("--grid", grid_path, "grid file (comma-separated values expand)")->required();
    sw->add_option("--out", out, "output directory");
    sw->add_option("--format", format, "csv|jsonl");
    sw->add_option("--threads", threads, "worker threads (capped by SSDF_ARENA_THREADS)");

    std::string kind;
    double pf = 0.1;
    auto* cv = app.add_subcommand("curves", "emit ROC or Pd-SNR tables");
    cv->add_option("--kind", kind, "roc|pd-snr")->required();
    cv->add_option("--config", config_path, "key = value config file");
    cv->add_option("--env", env, "single environment (default: all six)");
    cv->add_option("--pf", pf, "false-alarm target for pd-snr");
    cv->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        ScenarioConfig cfg;
        if (!config_path.empty())
            cfg = load_config(config_path, cfg);

        if (*run) {
            if (!env.empty())
                apply(cfg, "environment", env);
            if (attack >= 0)
                cfg.attack_total = attack;
            if (defense >= 0)
                cfg.defense_total = defense;
            if (!strategy.empty())
                cfg.strategy = parse_strategy(strategy);
            if (rounds)
                cfg.rounds = rounds;
            if (nodes)
                cfg.n_nodes = nodes;
            if (seed >= 0)
                cfg.seed = static_cast<std::uint64_t>(seed);
            if (!pu.empty())
                cfg.pu_model = parse_pu(pu);
            if (xi >= 0)
                cfg.xi = xi;
            if (alpha >= 0)
                cfg.alpha = alpha;
            Format f = parse_format(format);
            cfg.validate();
            ExperimentReport rep = run_scenario(cfg);
            emit({rep}, f, out);
            print_summary(rep);
        } else if (*sw) {
            Format f = parse_format(format);
            auto configs = load_grid(grid_path);
            auto reports = sweep(configs, threads > 0 ? threads : sweep_threads());
            emit(reports, f, out);
            int failed = 0;
            for (const auto& r : reports)
                failed += !r.error.empty();
            std::cout << reports.size() << " scenarios, " << failed << " failed, written to " << out << '\n';
            if (failed)
                return kRuntimeError;
        } else if (*cv) {
            std::filesystem::create_directories(out);
            if (kind == "roc") {
                if (!env.empty())
                    parse_env(env);
                auto tables = environment_roc(cfg, linspace(0.01, 0.99, 99));
                for (const auto& t : tables)
                    if (env.empty() || t.name == "roc_" + env)
                        write_curve(t, "pf", (std::filesystem::path(out) / (t.name + ".csv")).string());
            } else if (kind == "pd-snr") {
                write_curve({"pd_snr", pd_vs_snr(pf, linspace(-20.0, 20.0, 81))}, "snr_db",
                            (std::filesystem::path(out) / "pd_snr.csv").string());
            } else {
                throw ConfigError("field 'kind': unknown value '" + kind + "'");
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
