#include "ssdf/tdma_sim.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace ssdf;

namespace {

GameState clean_game(int n, double x_each = 0.4)
{
    return make_state(BudgetVector::equal(n, x_each * n), {Eigen::VectorXd::Zero(n), 0.0}, 0.3, 0.15);
}

} // namespace

TEST_SUITE("tdma_sim")
{
    TEST_CASE("schedule layout")
    {
        TimingProfile t;
        Schedule s = build_schedule(50, t);
        CHECK(s.round_length_s == doctest::Approx(243.9e-3));
        REQUIRE(s.slots.size() == 50);
        for (std::size_t i = 1; i < s.slots.size(); ++i)
            CHECK(s.slots[i].start_s >= s.slots[i - 1].start_s + s.slots[i - 1].duration_s + t.guard_s - 1e-15);
        CHECK(build_schedule(1, t).round_length_s == t.slot_s);
        CHECK_THROWS_AS(build_schedule(0, t), DomainError);
    }

    TEST_CASE("link budget at the default geometry")
    {
        LinkProfile link;
        LinkBudget ol = link_budget(environment(EnvName::OL), link, 0.0);
        CHECK(ol.path_loss_db == doctest::Approx(90.945).epsilon(1e-5));
        CHECK(linear_to_db(ol.snr_fwd) == doctest::Approx(2.055).epsilon(1e-3));
        CHECK(ol.snr_rev == doctest::Approx(ol.snr_fwd));
        link.ack_level = 3;
        CHECK(link_budget(environment(EnvName::OL), link, 0.0).snr_rev < ol.snr_fwd);
    }

    TEST_CASE("clean UL slot delivers on the first attempt")
    {
        LinkProfile link;
        link.distance_m = 20.0;
        link.shadow = ShadowMode::Deterministic;
        GameState g = clean_game(4);
        Rng rng(3);
        int first = 0;
        const int trials = 2000;
        for (int k = 0; k < trials; ++k) {
            SlotOutcome o = simulate_slot(0, g, environment(EnvName::UL), link, rng);
            CHECK(o.report_valid);
            first += o.attempts == 1 && o.handshakes == 1;
        }
        CHECK(first > 0.99 * trials);
    }

    TEST_CASE("invalid reports carry no correct packets")
    {
        LinkProfile link;
        link.distance_m = 20.0;
        GameState g = clean_game(3);
        g.statuses[1].state = NodeState::Malicious;
        g.attack.amounts[2] = 1.0;
        g.attack.total = 1.0;
        g.utilities = compute_utilities(g.defense, g.attack);
        Rng rng(9);
        SlotOutcome bad = simulate_slot(1, g, environment(EnvName::UL), link, rng);
        CHECK_FALSE(bad.report_valid);
        CHECK(bad.sender.non_beneficial_J == doctest::Approx(bad.sender.buckets.sum()));
        SlotOutcome corrupt = simulate_slot(2, g, environment(EnvName::UL), link, rng);
        CHECK_FALSE(corrupt.report_valid);

        EnergyLedger ledger(3, link.energy);
        g.round = 1;
        RoundMetrics m = simulate_round(g, environment(EnvName::UL), link, ledger, rng);
        CHECK(m.correct_packets <= 1);
        CHECK(m.protected_fraction == doctest::Approx(1.0 / 3.0));
        CHECK(ledger_identity_error(ledger) <= 1e-12);
    }

    TEST_CASE("saturated link stops at the attempt cap")
    {
        LinkProfile link;
        link.distance_m = 2000.0;
        link.shadow = ShadowMode::Deterministic;
        GameState g = clean_game(1, 0.0);
        Rng rng(1);
        SlotOutcome o = simulate_slot(0, g, environment(EnvName::ON), link, rng);
        CHECK(o.attempts == link.max_attempts);
        CHECK(o.delivered == 0);
        CHECK(o.handshakes == 0);
        CHECK(o.sender.non_beneficial_J == doctest::Approx(o.sender.buckets.sum()));
    }

    TEST_CASE("attack budget degrades delivery")
    {
        LinkProfile link;
        link.shadow = ShadowMode::Deterministic;
        GameState g = clean_game(2, 0.0);
        g.attack.amounts << 0.0, 2e-7;
        g.attack.total = 2e-7;
        Rng rng(2);
        int att_clean = 0, att_jammed = 0;
        for (int k = 0; k < 500; ++k) {
            att_clean += simulate_slot(0, g, environment(EnvName::UL), link, rng).attempts;
            att_jammed += simulate_slot(1, g, environment(EnvName::UL), link, rng).attempts;
        }
        CHECK(att_jammed > att_clean);
    }

    TEST_CASE("fusion rule")
    {
        CHECK(fuse(3, 5, {}) == 1);
        CHECK(fuse(2, 5, {}) == 0);
        CHECK(fuse(2, 4, {}) == 1);
        CHECK(fuse(0, 0, {}) == 0);
        CHECK(fuse(1, 5, {1}) == 1);
        CHECK(fuse(4, 5, {5}) == 0);
    }

    TEST_CASE("clean network detects a present primary user")
    {
        LinkProfile link;
        link.distance_m = 20.0;
        GameState g = clean_game(10);
        g.round = 1;
        EnergyLedger ledger(10, link.energy);
        Rng rng(4);
        RoundMetrics m = simulate_round(g, environment(EnvName::UL), link, ledger, rng);
        CHECK(m.fc_decision == 1);
        CHECK(m.correct_packets == 10);
        CHECK(m.energy_delta_J > 0.0);
        CHECK(m.non_beneficial_delta_J >= 0.0);
    }

    TEST_CASE("sleep and acquisition are booked per live node")
    {
        LinkProfile link;
        link.distance_m = 20.0;
        link.shadow = ShadowMode::Deterministic;
        GameState g = clean_game(5);
        g.round = 1;
        EnergyLedger ledger(5, link.energy);
        Rng rng(8);
        simulate_round(g, environment(EnvName::UL), link, ledger, rng);
        const auto& b = ledger.nodes[0].buckets;
        CHECK(b.acq_J == doctest::Approx(57e-6));
        CHECK(b.sleep_J > 0.0);
        CHECK(b.sleep_J < link.energy.p_off_w * build_schedule(5, link.slot_timing()).round_length_s);
        CHECK(ledger.fc.buckets.sum() > 0.0);
    }

    TEST_CASE("dead nodes are skipped")
    {
        LinkProfile link;
        GameState g = clean_game(3);
        EnergyLedger ledger(3, link.energy);
        ledger.nodes[1].dead = true;
        Rng rng(5);
        simulate_round(g, environment(EnvName::UL), link, ledger, rng);
        CHECK(ledger.nodes[1].buckets.sum() == 0.0);
        CHECK(ledger.nodes[0].buckets.sum() > 0.0);
        EnergyLedger wrong(2, link.energy);
        CHECK_THROWS_AS(simulate_round(g, environment(EnvName::UL), link, wrong, rng), DimensionError);
    }

    TEST_CASE("seeded rounds are reproducible")
    {
        LinkProfile link;
        GameState g = clean_game(8);
        g.attack.amounts[3] = 0.5;
        g.attack.total = 0.5;
        g.utilities = compute_utilities(g.defense, g.attack);
        auto once = [&] {
            EnergyLedger ledger(8, link.energy);
            Rng rng(77);
            RoundMetrics m = simulate_round(g, environment(EnvName::OL), link, ledger, rng);
            return metrics_to_json(m) + std::to_string(ledger.non_beneficial_total());
        };
        CHECK(once() == once());
    }

    TEST_CASE("packet split follows payload size")
    {
        LinkProfile link;
        CHECK(link.packets_per_report() == 1);
        link.payload_bytes = 50;
        CHECK(link.packets_per_report() == 3);
        CHECK(link.slot_timing().pkt_bytes == 58);
    }

    TEST_CASE("metrics json")
    {
        RoundMetrics m;
        m.round = 2;
        m.correct_packets = 40;
        m.protected_fraction = 0.8;
        auto j = nlohmann::json::parse(metrics_to_json(m));
        CHECK(j["round"] == 2);
        CHECK(j["correct_packets"] == 40);
        CHECK(j.contains("energy_delta_J"));
    }
}
