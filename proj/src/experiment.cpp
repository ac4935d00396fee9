#include "ssdf/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <thread>
#include <tuple>

namespace ssdf {

namespace fs = std::filesystem;

double ScenarioConfig::resolved_xi() const
{
    return xi >= 0.0 ? xi : 0.7 * defense_total / n_nodes;
}

double ScenarioConfig::resolved_alpha() const
{
    return alpha >= 0.0 ? alpha : 0.4 * resolved_xi();
}

static void require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok)
        throw ConfigError("field '" + field + "': " + what);
}

void ScenarioConfig::validate() const
{
    require(n_nodes >= 1, "n_nodes", "must be at least 1");
    require(defense_total > 0.0, "defense_total", "must be positive");
    require(attack_total >= 0.0, "attack_total", "must be nonnegative");
    require(rounds >= 1, "rounds", "must be at least 1");
    require(hw_failure_rate >= 0.0 && hw_failure_rate <= 1.0, "hw_failure_rate", "must lie in [0,1]");
    require(d0 > 0.0, "d0", "must be positive");
    require(distance_m >= d0, "distance_m", "must be at least d0");
    require(payload_bytes >= 1, "payload_bytes", "must be at least 1");
    require(max_attempts >= 1, "max_attempts", "must be at least 1");
    require(budget_scale_mw >= 0.0, "budget_scale_mw", "must be nonnegative");
    require(sensing_samples >= 1, "sensing_samples", "must be at least 1");
    require(pf_target > 0.0 && pf_target < 1.0, "pf_target", "must lie in (0,1)");
    require(fusion_k >= 0, "fusion_k", "must be nonnegative");
    require(xi < 0.0 || std::isfinite(xi), "xi", "must be finite");
    require(alpha < 0.0 || std::isfinite(alpha), "alpha", "must be finite");
    try {
        ssdf::power_level(power_level, default_tables());
    } catch (const DomainError&) {
        require(false, "power_level", "not a CC2420 level (3,7,...,31)");
    }
    try {
        ssdf::power_level(ack_level, default_tables());
    } catch (const DomainError&) {
        require(false, "ack_level", "not a CC2420 level (3,7,...,31)");
    }
}

LinkProfile ScenarioConfig::link_profile() const
{
    LinkProfile l;
    l.power_level = power_level;
    l.ack_level = ack_level;
    l.distance_m = distance_m;
    l.d0_m = d0;
    l.pl0_db = pl0;
    l.shadow = shadow_mode;
    l.payload_bytes = payload_bytes;
    l.max_attempts = max_attempts;
    l.budget_scale_mw = budget_scale_mw;
    l.sensing_samples = sensing_samples;
    l.pf_target = pf_target;
    l.pu_model = pu_model;
    if (!table_overrides.empty())
        l.tables = load_overrides(table_overrides);
    return l;
}

namespace {

Eigen::VectorXd dirichlet(int n, double total, Rng& rng)
{
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = -std::log1p(-uniform01(rng));
    double s = v.sum();
    if (s <= 0.0)
        return Eigen::VectorXd::Constant(n, total / n);
    return v * (total / s);
}

std::vector<int> hw_schedule(int n, double rate, int rounds, Rng& rng)
{
    std::vector<int> when(n, 0);
    int k = static_cast<int>(std::lround(rate * n));
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i)
        idx[i] = i;
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(uniform01(rng) * (n - i));
        std::swap(idx[i], idx[j]);
        when[idx[i]] = 1 + static_cast<int>(uniform01(rng) * rounds);
    }
    return when;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

ExperimentReport run_scenario(const ScenarioConfig& config, bool keep_detail)
{
    config.validate();
    ExperimentReport rep;
    rep.config = config;
    LinkProfile link = config.link_profile();
    const Environment& env = environment(config.environment, link.tables);
    const int n = config.n_nodes;

    Rng opening(derive_seed(config.seed, 0, 1));
    Rng strategy(derive_seed(config.seed, 0, 2));
    Rng radio(derive_seed(config.seed, 0, 3));

    BudgetVector defense = BudgetVector::equal(n, config.defense_total);
    BudgetVector attack{config.attack_opening == Opening::Dirichlet
                            ? dirichlet(n, config.attack_total, opening)
                            : Eigen::VectorXd::Constant(n, config.attack_total / n),
                        config.attack_total};

    GameState state = make_state(defense, attack, config.resolved_xi(), config.resolved_alpha());
    state.defender_active = config.strategy == Strategy::Proposed;
    state.anticipate = config.anticipate;
    state.hw_failure_round = hw_schedule(n, config.hw_failure_rate, config.rounds, opening);

    EnergyLedger ledger(n, link.energy);
    FusionRule rule{config.fusion_k};
    Summary flags;

    for (int t = 1; t <= config.rounds; ++t) {
        if (config.strategy == Strategy::Random)
            state.defense.amounts = dirichlet(n, config.defense_total, strategy);
        StepResult step = step_round(state);
        state = std::move(step.state);
        if (flags.rounds_to_equilibrium < 0 && is_nash_equilibrium(state))
            flags.rounds_to_equilibrium = state.round;
        RoundMetrics m = simulate_round(state, env, link, ledger, radio, rule);
        m.round = t;
        rep.per_round.push_back(m);
        rep.max_ledger_error = std::max(rep.max_ledger_error, ledger_identity_error(ledger));
        if (keep_detail) {
            rep.game_records.push_back(std::move(step.record));
            std::ostringstream os;
            write_ledger_rows(os, ledger, t);
            std::string line;
            std::istringstream is(os.str());
            while (std::getline(is, line))
                rep.ledger_rows.push_back(line);
        }
    }
    flags.converged = is_nash_equilibrium(state);
    flags.total_non_beneficial_J = ledger.non_beneficial_total();
    rep.summary = summarize(rep.per_round, flags);
    return rep;
}

Summary summarize(const std::vector<RoundMetrics>& per_round, const Summary& flags)
{
    Summary s = flags;
    s.protected_fraction_final = per_round.empty() ? 0.0 : per_round.back().protected_fraction;
    double c = 0.0;
    for (const auto& m : per_round)
        c += m.correct_packets;
    s.mean_correct_packets = per_round.empty() ? 0.0 : c / per_round.size();
    return s;
}

int sweep_threads()
{
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    int n = hw > 0 ? hw : 1;
    if (const char* env = std::getenv("SSDF_ARENA_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0)
            n = std::min(n, cap);
    }
    return n;
}

std::vector<ExperimentReport> sweep(const std::vector<ScenarioConfig>& configs, int parallelism)
{
    if (configs.empty())
        throw ConfigError("sweep: empty scenario list");
    std::vector<ExperimentReport> out(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
            try {
                out[i] = run_scenario(configs[i], false);
            } catch (const std::exception& e) {
                out[i].config = configs[i];
                out[i].error = e.what();
            }
        }
    };
    int threads = std::clamp(std::min(parallelism, sweep_threads()), 1, static_cast<int>(configs.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    return out;
}

std::string strategy_string(Strategy s)
{
    switch (s) {
    case Strategy::Proposed: return "proposed";
    case Strategy::Random: return "random";
    case Strategy::EqualWeight: return "equal";
    }
    return "";
}

Strategy parse_strategy(const std::string& s)
{
    if (s == "proposed")
        return Strategy::Proposed;
    if (s == "random")
        return Strategy::Random;
    if (s == "equal")
        return Strategy::EqualWeight;
    throw ConfigError("field 'strategy': unknown value '" + s + "'");
}

PUModel parse_pu(const std::string& s)
{
    if (s == "fluct")
        return PUModel::FluctuatingRayleigh;
    if (s == "nonfluct")
        return PUModel::Nonfluctuating;
    throw ConfigError("field 'pu_model': unknown value '" + s + "'");
}

std::string pu_string(PUModel m) { return m == PUModel::Nonfluctuating ? "nonfluct" : "fluct"; }

std::string config_json(const ScenarioConfig& c)
{
    nlohmann::ordered_json j;
    j["n_nodes"] = c.n_nodes;
    j["defense_total"] = c.defense_total;
    j["attack_total"] = c.attack_total;
    j["strategy"] = strategy_string(c.strategy);
    j["environment"] = env_string(c.environment);
    j["pu_model"] = pu_string(c.pu_model);
    j["rounds"] = c.rounds;
    j["seed"] = c.seed;
    j["xi"] = c.resolved_xi();
    j["alpha"] = c.resolved_alpha();
    j["hw_failure_rate"] = c.hw_failure_rate;
    j["power_level"] = c.power_level;
    j["ack_level"] = c.ack_level;
    j["d0"] = c.d0;
    j["pl0"] = c.pl0;
    j["distance_m"] = c.distance_m;
    j["shadow_mode"] = shadow_mode_string(c.shadow_mode);
    j["attack_opening"] = c.attack_opening == Opening::Dirichlet ? "dirichlet" : "uniform";
    j["anticipate"] = c.anticipate;
    j["payload_bytes"] = c.payload_bytes;
    j["max_attempts"] = c.max_attempts;
    j["budget_scale_mw"] = c.budget_scale_mw;
    j["sensing_samples"] = c.sensing_samples;
    j["pf_target"] = c.pf_target;
    j["fusion_k"] = c.fusion_k;
    j["table_overrides"] = c.table_overrides;
    return j.dump();
}

namespace {

std::ofstream open_out(const fs::path& p)
{
    std::ofstream os(p, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write " + p.string());
    return os;
}

struct GroupKey {
    EnvName env;
    double y;
    double x;
    int n;
    bool operator<(const GroupKey& o) const
    {
        return std::tie(env, y, x, n) < std::tie(o.env, o.y, o.x, o.n);
    }
};

} // namespace

void emit(const std::vector<ExperimentReport>& reports, Format format, const std::string& dir)
{
    if (reports.empty())
        throw ConfigError("emit: no reports to write");
    fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec)
        throw std::runtime_error("cannot create " + root.string() + ": " + ec.message());
    const bool csv = format == Format::Csv;
    const bool single = reports.size() == 1;

    {
        auto os = open_out(root / (csv ? "runs.csv" : "runs.jsonl"));
        if (csv)
            os << "scenario,strategy,environment,attack_total,defense_total,seed,protected_fraction_final,"
                  "mean_correct_packets,total_non_beneficial_J,converged,rounds_to_equilibrium,error\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            const auto& s = r.summary;
            if (csv) {
                std::string err = r.error;
                std::replace(err.begin(), err.end(), ',', ';');
                std::replace(err.begin(), err.end(), '\n', ' ');
                os << i << ',' << strategy_string(r.config.strategy) << ',' << env_string(r.config.environment)
                   << ',' << fmt(r.config.attack_total) << ',' << fmt(r.config.defense_total) << ','
                   << r.config.seed << ',' << fmt(s.protected_fraction_final) << ','
                   << fmt(s.mean_correct_packets) << ',' << fmt(s.total_non_beneficial_J) << ','
                   << (s.converged ? 1 : 0) << ',' << s.rounds_to_equilibrium << ',' << err << '\n';
            } else {
                nlohmann::ordered_json j;
                j["scenario"] = i;
                j["strategy"] = strategy_string(r.config.strategy);
                j["environment"] = env_string(r.config.environment);
                j["attack_total"] = r.config.attack_total;
                j["defense_total"] = r.config.defense_total;
                j["seed"] = r.config.seed;
                j["protected_fraction_final"] = s.protected_fraction_final;
                j["mean_correct_packets"] = s.mean_correct_packets;
                j["total_non_beneficial_J"] = s.total_non_beneficial_J;
                j["converged"] = s.converged;
                j["rounds_to_equilibrium"] = s.rounds_to_equilibrium;
                j["error"] = r.error;
                os << j.dump() << '\n';
            }
        }
    }

    {
        auto os = open_out(root / (csv ? "rounds.csv" : "rounds.jsonl"));
        if (csv)
            os << (single ? "" : "scenario,") << "round,correct_packets,protected_fraction,fc_decision,energy_delta_J\n";
        for (std::size_t i = 0; i < reports.size(); ++i)
            for (const auto& m : reports[i].per_round) {
                if (csv) {
                    if (!single)
                        os << i << ',';
                    os << m.round << ',' << m.correct_packets << ',' << fmt(m.protected_fraction) << ','
                       << m.fc_decision << ',' << fmt(m.energy_delta_J) << '\n';
                } else if (single) {
                    os << metrics_to_json(m) << '\n';
                } else {
                    auto j = nlohmann::ordered_json::parse(metrics_to_json(m));
                    nlohmann::ordered_json k;
                    k["scenario"] = i;
                    k.update(j);
                    os << k.dump() << '\n';
                }
            }
    }

    if (single && !reports[0].game_records.empty()) {
        auto os = open_out(root / "game.jsonl");
        for (const auto& r : reports[0].game_records)
            os << record_to_json(r) << '\n';
    }
    if (single && !reports[0].ledger_rows.empty()) {
        auto os = open_out(root / "energy.csv");
        write_ledger_header(os);
        for (const auto& line : reports[0].ledger_rows)
            os << line << '\n';
    }

    // Seed-averaged protected fraction per round, one table per (env, Y, X, N).
    std::map<GroupKey, std::array<std::vector<double>, 3>> sums;
    std::map<GroupKey, std::array<int, 3>> counts;
    for (const auto& r : reports) {
        if (!r.error.empty())
            continue;
        GroupKey key{r.config.environment, r.config.attack_total, r.config.defense_total, r.config.n_nodes};
        int s = static_cast<int>(r.config.strategy);
        auto& v = sums[key][s];
        if (v.size() < r.per_round.size())
            v.resize(r.per_round.size(), 0.0);
        for (std::size_t t = 0; t < r.per_round.size(); ++t)
            v[t] += r.per_round[t].protected_fraction;
        counts[key][s] += 1;
    }
    for (const auto& [key, arr] : sums) {
        std::string name = "protection_" + env_string(key.env) + "_Y" + fmt(key.y) + ".csv";
        auto os = open_out(root / name);
        os << "round,proposed,random,equal\n";
        std::size_t rounds = std::max({arr[0].size(), arr[1].size(), arr[2].size()});
        for (std::size_t t = 0; t < rounds; ++t) {
            os << t + 1;
            for (int s = 0; s < 3; ++s) {
                os << ',';
                if (t < arr[s].size() && counts[key][s] > 0)
                    os << fmt(arr[s][t] / counts[key][s]);
            }
            os << '\n';
        }
    }

    {
        nlohmann::ordered_json meta;
        meta["version"] = kArtifactVersion;
        meta["scenarios"] = reports.size();
        auto& cfgs = meta["configs"] = nlohmann::ordered_json::array();
        for (const auto& r : reports)
            cfgs.push_back(nlohmann::ordered_json::parse(config_json(r.config)));
        auto os = open_out(root / "meta.json");
        os << meta.dump(2) << '\n';
    }
}

std::vector<CurveTable> environment_roc(const ScenarioConfig& base, const std::vector<double>& pf_grid)
{
    LinkProfile link = base.link_profile();
    std::vector<CurveTable> out;
    for (int e = 0; e < 6; ++e) {
        const Environment& env = environment(static_cast<EnvName>(e), link.tables);
        double shadow = base.shadow_mode == ShadowMode::Literal ? env.shadow_sigma_db : 0.0;
        LinkBudget lb = link_budget(env, link, shadow);
        out.push_back({"roc_" + env_string(env.name), roc_curve(link.sensing_samples * lb.snr_fwd, pf_grid)});
    }
    return out;
}

void write_curve(const CurveTable& table, const std::string& x_name, const std::string& path)
{
    auto os = open_out(path);
    os << x_name << ",pd_nonfluct,pd_fluct\n";
    for (const auto& p : table.points)
        os << fmt(p.x) << ',' << fmt(p.pd_nonfluct) << ',' << fmt(p.pd_fluct) << '\n';
}

static std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

KeyValues read_key_values(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::string t = trim(line);
        if (t.empty() || (t.front() == '[' && t.back() == ']'))
            continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

static double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': not a number: '" + v + "'");
    }
}

static long long to_int(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        long long d = std::stoll(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': not an integer: '" + v + "'");
    }
}

static bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError("field '" + key + "': not a boolean: '" + v + "'");
}

void apply(ScenarioConfig& c, const std::string& key, const std::string& v)
{
    if (key == "n_nodes" || key == "nodes")
        c.n_nodes = static_cast<int>(to_int(key, v));
    else if (key == "defense_total" || key == "defense_budget")
        c.defense_total = to_double(key, v);
    else if (key == "attack_total" || key == "attack_budget")
        c.attack_total = to_double(key, v);
    else if (key == "strategy")
        c.strategy = parse_strategy(v);
    else if (key == "environment" || key == "env")
        try {
            c.environment = parse_env(v);
        } catch (const ConfigError&) {
            throw ConfigError("field 'environment': unknown value '" + v + "'");
        }
    else if (key == "pu_model" || key == "pu")
        c.pu_model = parse_pu(v);
    else if (key == "rounds")
        c.rounds = static_cast<int>(to_int(key, v));
    else if (key == "seed")
        c.seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "xi")
        c.xi = to_double(key, v);
    else if (key == "alpha")
        c.alpha = to_double(key, v);
    else if (key == "hw_failure_rate")
        c.hw_failure_rate = to_double(key, v);
    else if (key == "power_level" || key == "m")
        c.power_level = static_cast<int>(to_int(key, v));
    else if (key == "ack_level" || key == "u")
        c.ack_level = static_cast<int>(to_int(key, v));
    else if (key == "d0")
        c.d0 = to_double(key, v);
    else if (key == "pl0")
        c.pl0 = to_double(key, v);
    else if (key == "distance_m" || key == "distance")
        c.distance_m = to_double(key, v);
    else if (key == "shadow_mode")
        try {
            c.shadow_mode = parse_shadow_mode(v);
        } catch (const ConfigError&) {
            throw ConfigError("field 'shadow_mode': unknown value '" + v + "'");
        }
    else if (key == "attack_opening") {
        if (v == "dirichlet")
            c.attack_opening = Opening::Dirichlet;
        else if (v == "uniform")
            c.attack_opening = Opening::Uniform;
        else
            throw ConfigError("field 'attack_opening': unknown value '" + v + "'");
    } else if (key == "anticipate")
        c.anticipate = to_bool(key, v);
    else if (key == "payload_bytes")
        c.payload_bytes = static_cast<int>(to_int(key, v));
    else if (key == "max_attempts")
        c.max_attempts = static_cast<int>(to_int(key, v));
    else if (key == "budget_scale_mw")
        c.budget_scale_mw = to_double(key, v);
    else if (key == "sensing_samples")
        c.sensing_samples = static_cast<int>(to_int(key, v));
    else if (key == "pf_target")
        c.pf_target = to_double(key, v);
    else if (key == "fusion_k")
        c.fusion_k = static_cast<int>(to_int(key, v));
    else if (key == "table_overrides")
        c.table_overrides = v;
    else
        throw ConfigError("unknown config key '" + key + "'");
}

ScenarioConfig load_config(const std::string& path, ScenarioConfig base)
{
    for (const auto& [k, v] : read_key_values(path))
        apply(base, k, v);
    return base;
}

static std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(trim(item));
    return out;
}

std::vector<ScenarioConfig> load_grid(const std::string& path, int* seeds_per_point, std::uint64_t* base_seed)
{
    KeyValues kv = read_key_values(path);
    int seeds = 1;
    std::uint64_t base = 1;
    if (auto it = kv.find("seeds"); it != kv.end()) {
        seeds = static_cast<int>(to_int("seeds", it->second));
        require(seeds >= 1, "seeds", "must be at least 1");
        kv.erase(it);
    }
    if (auto it = kv.find("base_seed"); it != kv.end()) {
        base = static_cast<std::uint64_t>(to_int("base_seed", it->second));
        kv.erase(it);
    }
    std::vector<ScenarioConfig> points{ScenarioConfig{}};
    for (const auto& [k, v] : kv) {
        std::vector<ScenarioConfig> next;
        auto values = split_list(v);
        require(!values.empty(), k, "empty value list");
        for (const auto& p : points)
            for (const auto& val : values) {
                ScenarioConfig c = p;
                apply(c, k, val);
                next.push_back(c);
            }
        points = std::move(next);
    }
    // Replicate r of every grid point runs on seed derive_seed(base, r).
    std::vector<ScenarioConfig> out;
    for (const auto& p : points)
        for (int r = 0; r < seeds; ++r) {
            ScenarioConfig c = p;
            c.seed = derive_seed(base, static_cast<std::uint64_t>(r));
            c.validate();
            out.push_back(c);
        }
    if (seeds_per_point)
        *seeds_per_point = seeds;
    if (base_seed)
        *base_seed = base;
    return out;
}

} // namespace ssdf
