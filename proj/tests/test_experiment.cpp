#include "ssdf/experiment.hpp"

#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

using namespace ssdf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("ssdf_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path write_file(const std::string& name, const std::string& text)
{
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p;
}

ScenarioConfig small_config()
{
    ScenarioConfig c;
    c.n_nodes = 10;
    c.defense_total = 4.0;
    c.attack_total = 1.5;
    c.rounds = 6;
    return c;
}

} // namespace

TEST_SUITE("experiment")
{
    TEST_CASE("derived parameters and validation")
    {
        ScenarioConfig c;
        CHECK(c.resolved_xi() == doctest::Approx(0.28));
        CHECK(c.resolved_alpha() == doctest::Approx(0.112));
        c.xi = 0.2;
        CHECK(c.resolved_alpha() == doctest::Approx(0.08));
        CHECK_NOTHROW(ScenarioConfig{}.validate());

        ScenarioConfig bad;
        bad.n_nodes = 0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = {};
        bad.attack_total = -1.0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = {};
        bad.power_level = 4;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = {};
        bad.hw_failure_rate = 1.5;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = {};
        bad.rounds = 0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("config file parsing")
    {
        auto p = write_file("ssdf_cfg.ini", "[scenario]\nnodes = 20 # comment\nattack_budget = 3.5\nenv = ON\n"
                                            "strategy = random\npu = nonfluct\nanticipate = false\n");
        ScenarioConfig c = load_config(p.string());
        CHECK(c.n_nodes == 20);
        CHECK(c.attack_total == 3.5);
        CHECK(c.environment == EnvName::ON);
        CHECK(c.strategy == Strategy::Random);
        CHECK(c.pu_model == PUModel::Nonfluctuating);
        CHECK_FALSE(c.anticipate);
        CHECK(c.defense_total == 20.0);

        auto typo = write_file("ssdf_cfg_bad.ini", "nodez = 20\n");
        CHECK_THROWS_AS(load_config(typo.string()), ConfigError);
        auto badnum = write_file("ssdf_cfg_num.ini", "attack_budget = eight\n");
        CHECK_THROWS_WITH_AS(load_config(badnum.string()), doctest::Contains("attack_budget"), ConfigError);
        auto badenv = write_file("ssdf_cfg_env.ini", "env = XX\n");
        CHECK_THROWS_WITH_AS(load_config(badenv.string()), doctest::Contains("environment"), ConfigError);
        auto noeq = write_file("ssdf_cfg_noeq.ini", "nodes 20\n");
        CHECK_THROWS_AS(read_key_values(noeq.string()), ConfigError);
        CHECK_THROWS_AS(load_config("/nonexistent/cfg.ini"), ConfigError);
    }

    TEST_CASE("grid expansion")
    {
        auto p = write_file("ssdf_grid.ini",
                            "attack_budget = 8, 17\nenv = UL, ON\nstrategy = proposed, equal\nseeds = 3\nbase_seed = 5\n"
                            "rounds = 4\n");
        int seeds = 0;
        std::uint64_t base = 0;
        auto grid = load_grid(p.string(), &seeds, &base);
        CHECK(seeds == 3);
        CHECK(base == 5);
        REQUIRE(grid.size() == 24);
        CHECK(grid[0].seed == derive_seed(5, 0));
        CHECK(grid[1].seed == derive_seed(5, 1));
        CHECK(grid[3].seed == grid[0].seed);
        for (const auto& c : grid)
            CHECK(c.rounds == 4);

        auto bad = write_file("ssdf_grid_bad.ini", "attack_budget = 8, -1\n");
        CHECK_THROWS_AS(load_grid(bad.string()), ConfigError);
    }

    TEST_CASE("zero attack leaves every node protected")
    {
        ScenarioConfig c = small_config();
        c.attack_total = 0.0;
        c.hw_failure_rate = 0.0;
        auto rep = run_scenario(c);
        CHECK(rep.summary.protected_fraction_final == 1.0);
        CHECK(rep.summary.converged);
        CHECK(rep.summary.rounds_to_equilibrium >= 0);
    }

    TEST_CASE("report shapes and summary consistency")
    {
        ScenarioConfig c = small_config();
        auto rep = run_scenario(c);
        REQUIRE(rep.per_round.size() == 6);
        CHECK(rep.game_records.size() == 6);
        CHECK(rep.ledger_rows.size() == 6 * 11);
        CHECK(rep.per_round.front().round == 1);
        CHECK(rep.per_round.back().round == 6);
        CHECK(rep.max_ledger_error <= 1e-12);
        Summary again = summarize(rep.per_round, rep.summary);
        CHECK(again.protected_fraction_final == rep.summary.protected_fraction_final);
        CHECK(again.mean_correct_packets == rep.summary.mean_correct_packets);
        CHECK(rep.summary.total_non_beneficial_J > 0.0);
        double pf = rep.summary.protected_fraction_final;
        CHECK(pf >= 0.0);
        CHECK(pf <= 1.0);

        auto lean = run_scenario(c, false);
        CHECK(lean.game_records.empty());
        CHECK(lean.summary.mean_correct_packets == rep.summary.mean_correct_packets);
    }

    TEST_CASE("equal-weight and random strategies keep their budgets")
    {
        for (Strategy s : {Strategy::EqualWeight, Strategy::Random}) {
            ScenarioConfig c = small_config();
            c.strategy = s;
            auto rep = run_scenario(c);
            for (const auto& r : rep.game_records)
                for (const auto& t : r.transfers)
                    CHECK(t.player == Player::Attacker);
        }
    }

    TEST_CASE("sweep preserves order and isolates failures")
    {
        std::vector<ScenarioConfig> cfgs;
        for (int i = 0; i < 6; ++i) {
            ScenarioConfig c = small_config();
            c.seed = 100 + i;
            cfgs.push_back(c);
        }
        cfgs[2].n_nodes = -3;
        auto reps = sweep(cfgs, 3);
        REQUIRE(reps.size() == 6);
        CHECK_FALSE(reps[2].error.empty());
        for (int i : {0, 1, 3, 4, 5}) {
            CHECK(reps[i].error.empty());
            CHECK(reps[i].config.seed == 100u + i);
            CHECK(reps[i].summary.mean_correct_packets == run_scenario(cfgs[i], false).summary.mean_correct_packets);
        }
        CHECK_THROWS_AS(sweep({}, 2), ConfigError);
        CHECK(sweep_threads() >= 1);
    }

    TEST_CASE("single-run emission")
    {
        auto dir = temp_dir("emit_single");
        auto rep = run_scenario(small_config());
        emit({rep}, Format::Csv, dir.string());
        for (const char* f : {"runs.csv", "rounds.csv", "game.jsonl", "energy.csv", "meta.json"})
            CHECK(fs::exists(dir / f));
        std::string runs = slurp(dir / "runs.csv");
        CHECK(runs.rfind("scenario,strategy,environment,", 0) == 0);
        std::string rounds = slurp(dir / "rounds.csv");
        CHECK(rounds.rfind("round,correct_packets,protected_fraction,fc_decision,energy_delta_J\n", 0) == 0);
        CHECK(std::count(rounds.begin(), rounds.end(), '\n') == 7);
        auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
        CHECK(meta["version"] == kArtifactVersion);

        auto jdir = temp_dir("emit_jsonl");
        emit({rep}, Format::Jsonl, jdir.string());
        std::istringstream is(slurp(jdir / "rounds.jsonl"));
        std::string line;
        int n = 0;
        while (std::getline(is, line)) {
            auto j = nlohmann::json::parse(line);
            CHECK(j.contains("protected_fraction"));
            ++n;
        }
        CHECK(n == 6);
        CHECK_THROWS_AS(emit({}, Format::Csv, dir.string()), ConfigError);
    }

    TEST_CASE("multi-run emission averages protection per strategy")
    {
        std::vector<ScenarioConfig> cfgs;
        for (Strategy s : {Strategy::Proposed, Strategy::Random, Strategy::EqualWeight})
            for (int r = 0; r < 2; ++r) {
                ScenarioConfig c = small_config();
                c.strategy = s;
                c.seed = derive_seed(9, r);
                cfgs.push_back(c);
            }
        auto reps = sweep(cfgs, 2);
        auto dir = temp_dir("emit_multi");
        emit(reps, Format::Csv, dir.string());
        CHECK_FALSE(fs::exists(dir / "game.jsonl"));
        std::string table = slurp(dir / "protection_UL_Y1.5.csv");
        CHECK(table.rfind("round,proposed,random,equal\n", 0) == 0);
        CHECK(std::count(table.begin(), table.end(), '\n') == 7);
        double want = (reps[0].per_round[0].protected_fraction + reps[1].per_round[0].protected_fraction) / 2;
        std::istringstream is(table);
        std::string header, first;
        std::getline(is, header);
        std::getline(is, first);
        CHECK(std::stod(first.substr(first.find(',') + 1)) == doctest::Approx(want));
        std::string rounds = slurp(dir / "rounds.csv");
        CHECK(rounds.rfind("scenario,round,", 0) == 0);
    }

    TEST_CASE("sweep output is reproducible")
    {
        std::vector<ScenarioConfig> cfgs;
        for (int r = 0; r < 4; ++r) {
            ScenarioConfig c = small_config();
            c.seed = derive_seed(3, r);
            cfgs.push_back(c);
        }
        auto a = temp_dir("det_a"), b = temp_dir("det_b");
        emit(sweep(cfgs, 4), Format::Csv, a.string());
        emit(sweep(cfgs, 1), Format::Csv, b.string());
        for (const auto& e : fs::directory_iterator(a))
            CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }

    TEST_CASE("environment ROC tables")
    {
        ScenarioConfig c;
        auto tables = environment_roc(c, {0.01, 0.1, 0.5});
        REQUIRE(tables.size() == 6);
        for (const auto& t : tables) {
            REQUIRE(t.points.size() == 3);
            for (const auto& p : t.points) {
                CHECK(p.pd_fluct >= p.x - 1e-12);
                CHECK(p.pd_nonfluct >= p.x - 1e-12);
            }
        }
        auto path = temp_dir("curve") / "roc.csv";
        fs::create_directories(path.parent_path());
        write_curve(tables[0], "pf", path.string());
        CHECK(slurp(path).rfind("pf,", 0) == 0);
    }

    TEST_CASE("proposed strictly beats equal weight on ON at Y=17")
    {
        int strict = 0;
        for (int r = 0; r < 100; ++r) {
            ScenarioConfig c;
            c.environment = EnvName::ON;
            c.attack_total = 17;
            c.seed = derive_seed(17, r);
            double proposed = run_scenario(c, false).summary.mean_correct_packets;
            c.strategy = Strategy::EqualWeight;
            strict += run_scenario(c, false).summary.mean_correct_packets < proposed;
        }
        CHECK(strict >= 95);
    }

    TEST_CASE("string helpers")
    {
        CHECK(parse_strategy("proposed") == Strategy::Proposed);
        CHECK(parse_strategy(strategy_string(Strategy::EqualWeight)) == Strategy::EqualWeight);
        CHECK_THROWS_AS(parse_strategy("greedy"), ConfigError);
        CHECK(parse_pu(pu_string(PUModel::FluctuatingRayleigh)) == PUModel::FluctuatingRayleigh);
        CHECK_THROWS_AS(parse_pu("swerling9"), ConfigError);
        auto j = nlohmann::json::parse(config_json(ScenarioConfig{}));
        CHECK(j["n_nodes"] == 50);
    }
}
