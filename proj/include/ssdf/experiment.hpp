#pragma once

#include "ssdf/game_engine.hpp"
#include "ssdf/tdma_sim.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ssdf {

inline constexpr const char* kArtifactVersion = "ssdf-arena 0.1.0";

enum class Strategy { Proposed, Random, EqualWeight };
enum class Opening { Dirichlet, Uniform };

struct ScenarioConfig {
    int n_nodes = 50;
    double defense_total = 20.0;
    double attack_total = 8.0;
    Strategy strategy = Strategy::Proposed;
    EnvName environment = EnvName::UL;
    PUModel pu_model = PUModel::FluctuatingRayleigh;
    int rounds = 20;
    std::uint64_t seed = 1;
    // Negative means "derive from X/N": xi = 0.7 X/N, alpha = 0.4 xi.
    double xi = -1.0;
    double alpha = -1.0;
    double hw_failure_rate = 0.05;
    int power_level = 31;
    int ack_level = 31;
    double d0 = kDefaultD0;
    double pl0 = kDefaultPL0;
    double distance_m = 125.0;
    ShadowMode shadow_mode = ShadowMode::Gaussian;
    Opening attack_opening = Opening::Dirichlet;
    bool anticipate = true;
    int payload_bytes = 120;
    int max_attempts = 10;
    double budget_scale_mw = 1.0;
    int sensing_samples = 1250;
    double pf_target = 0.1;
    int fusion_k = 0;
    std::string table_overrides;

    double resolved_xi() const;
    double resolved_alpha() const;
    void validate() const;
    LinkProfile link_profile() const;
};

struct Summary {
    double protected_fraction_final = 0.0;
    double mean_correct_packets = 0.0;
    double total_non_beneficial_J = 0.0;
    bool converged = false;
    int rounds_to_equilibrium = -1;
};

struct ExperimentReport {
    ScenarioConfig config;
    std::vector<RoundMetrics> per_round;
    std::vector<RoundRecord> game_records;
    std::vector<std::string> ledger_rows;  // CSV lines, one per account per round
    Summary summary;
    double max_ledger_error = 0.0;
    std::string error;  // nonempty when the scenario failed inside a sweep
};

// keep_detail retains game records and ledger rows for emission.
ExperimentReport run_scenario(const ScenarioConfig& config, bool keep_detail = true);

// Summary recomputed from per_round plus the stored final flags.
Summary summarize(const std::vector<RoundMetrics>& per_round, const Summary& flags);

int sweep_threads();
std::vector<ExperimentReport> sweep(const std::vector<ScenarioConfig>& configs, int parallelism);

enum class Format { Csv, Jsonl };

void emit(const std::vector<ExperimentReport>& reports, Format format, const std::string& dir);

struct CurveTable {
    std::string name;
    std::vector<CurvePoint> points;
};

// One ROC table per environment at the scenario geometry.
std::vector<CurveTable> environment_roc(const ScenarioConfig& base, const std::vector<double>& pf_grid);
void write_curve(const CurveTable& table, const std::string& x_name, const std::string& path);

// key = value parsing with optional [section] headers.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(const std::string& path);
void apply(ScenarioConfig& config, const std::string& key, const std::string& value);
ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {});
// Grid file: values may be comma-separated lists; expands the cartesian product.
std::vector<ScenarioConfig> load_grid(const std::string& path, int* seeds_per_point = nullptr,
                                      std::uint64_t* base_seed = nullptr);

std::string config_json(const ScenarioConfig& c);
std::string strategy_string(Strategy s);
Strategy parse_strategy(const std::string& s);
PUModel parse_pu(const std::string& s);
std::string pu_string(PUModel m);

} // namespace ssdf
