#pragma once

#include "ssdf/detector.hpp"
#include "ssdf/energy_model.hpp"
#include "ssdf/game_engine.hpp"
#include "ssdf/link_model.hpp"

#include <string>
#include <vector>

namespace ssdf {

struct Slot {
    int node;
    double start_s;
    double duration_s;
};

struct Schedule {
    std::vector<Slot> slots;
    double guard_s = 0.0;
    double round_length_s = 0.0;
};

Schedule build_schedule(int n_nodes, const TimingProfile& timing);

struct LinkProfile {
    int power_level = 31;
    int ack_level = 31;
    double distance_m = 125.0;
    double d0_m = kDefaultD0;
    double pl0_db = kDefaultPL0;
    ShadowMode shadow = ShadowMode::Gaussian;
    int report_bytes = 120;
    int payload_bytes = 120;  // D
    int header_bytes = 8;     // H
    int max_attempts = 10;
    double budget_scale_mw = 1.0;
    int sensing_samples = 1250;
    double pf_target = 0.1;
    PUModel pu_model = PUModel::FluctuatingRayleigh;
    bool pu_present = true;
    TimingProfile timing;
    EnergyConstants energy;
    LinkTables tables = default_tables();

    int packets_per_report() const { return (report_bytes + payload_bytes - 1) / payload_bytes; }
    TimingProfile slot_timing() const;
};

struct LinkBudget {
    double path_loss_db;
    double received_dbm;
    double snr_fwd;  // linear, before budgets
    double snr_rev;  // linear, ACK direction
};

LinkBudget link_budget(const Environment& env, const LinkProfile& link, double shadow_db);

struct SlotOutcome {
    int node = 0;
    int attempts = 0;     // summed over the node's packets
    int packets = 0;
    int delivered = 0;    // packets whose data reached the FC
    int handshakes = 0;   // packets whose ACK also came back
    bool report_valid = false;
    bool vote_present = false;
    double energy_sender_J = 0.0;
    double energy_receiver_J = 0.0;
    Debit sender;
    Debit receiver;
};

SlotOutcome simulate_slot(int node, const GameState& game, const Environment& env, const LinkProfile& link, Rng& rng);

struct RoundMetrics {
    int round = 0;
    int correct_packets = 0;
    double protected_fraction = 0.0;
    int fc_decision = 0;
    double energy_delta_J = 0.0;
    double non_beneficial_delta_J = 0.0;
};

struct FusionRule {
    int k = 0;  // 0 = majority: present iff present votes >= ceil(votes / 2)
};

int fuse(int present_votes, int total_votes, const FusionRule& rule);

RoundMetrics simulate_round(const GameState& game, const Environment& env, const LinkProfile& link,
                            EnergyLedger& ledger, Rng& rng, const FusionRule& rule = {});

std::string metrics_to_json(const RoundMetrics& m);

} // namespace ssdf
