#include "ssdf/tdma_sim.hpp"

#include <algorithm>
#include <json.hpp>

namespace ssdf {

Schedule build_schedule(int n_nodes, const TimingProfile& timing)
{
    if (n_nodes < 1)
        throw DomainError("build_schedule: need at least one node");
    Schedule s;
    s.guard_s = timing.guard_s;
    double t = 0.0;
    for (int i = 0; i < n_nodes; ++i) {
        s.slots.push_back({i, t, timing.slot_s});
        t += timing.slot_s + timing.guard_s;
    }
    s.round_length_s = n_nodes * timing.slot_s + (n_nodes - 1) * timing.guard_s;
    return s;
}

TimingProfile LinkProfile::slot_timing() const
{
    TimingProfile t = timing;
    t.pkt_bytes = payload_bytes + header_bytes;
    return t;
}

LinkBudget link_budget(const Environment& env, const LinkProfile& link, double shadow_db)
{
    LinkBudget b;
    b.path_loss_db = path_loss_db(env, link.distance_m, link.d0_m, link.pl0_db, shadow_db);
    b.received_dbm = received_power_dbm(power_level(link.power_level, link.tables), b.path_loss_db);
    b.snr_fwd = db_to_linear(link_snr_db(b.received_dbm, env));
    double rev_dbm = received_power_dbm(power_level(link.ack_level, link.tables), b.path_loss_db);
    b.snr_rev = db_to_linear(link_snr_db(rev_dbm, env));
    return b;
}

SlotOutcome simulate_slot(int node, const GameState& game, const Environment& env, const LinkProfile& link, Rng& rng)
{
    const TimingProfile tm = link.slot_timing();
    const EnergyConstants& c = link.energy;
    const PowerLevel& lvl = power_level(link.power_level, link.tables);
    const PowerLevel& ack_lvl = power_level(link.ack_level, link.tables);

    LinkBudget lb = link_budget(env, link, shadow_sample(env, link.shadow, rng));
    double x = game.defense.amounts[node] * link.budget_scale_mw;
    double y = game.attack.amounts[node] * link.budget_scale_mw;
    double snr = effective_snr(dbm_to_mw(lb.received_dbm), x, y, 1.0, dbm_to_mw(env.noise_floor_dbm));
    double p_data = packet_success_prob(snr, tm.pkt_bytes);
    double p_ack = packet_success_prob(lb.snr_rev, tm.ack_bytes);

    SlotOutcome out;
    out.node = node;
    bool benevolent = game.statuses[node].state == NodeState::Benevolent;
    bool corrupted = game.utilities[node] < -1e-9;
    out.report_valid = benevolent && !corrupted;

    const double tp = tm.pkt_tx_s(), ta = tm.ack_tx_s();
    const double s_tx = tx_energy(lvl, tp), s_rx = c.p_cr_w * (tm.slot_s - tp);
    const double r_rx_ok = c.p_cr_w * (tm.slot_s - ta), r_tx_ack = tx_energy(ack_lvl, ta);
    const double r_rx_fail = c.p_cr_w * tm.slot_s;

    out.packets = link.packets_per_report();
    for (int p = 0; p < out.packets; ++p) {
        std::vector<double> u(2 * link.max_attempts);
        for (double& v : u)
            v = uniform01(rng);
        bool data_seen = false, done = false;
        for (int a = 0; a < link.max_attempts && !done; ++a) {
            ++out.attempts;
            bool data_ok = u[2 * a] < p_data;
            done = data_ok && u[2 * a + 1] < p_ack;
            data_seen = data_seen || data_ok;
            double se = s_tx + s_rx;
            double re = data_ok ? r_rx_ok + r_tx_ack : r_rx_fail;
            out.sender.buckets.tx_J += s_tx;
            out.sender.buckets.rx_J += s_rx;
            if (data_ok) {
                out.receiver.buckets.rx_J += r_rx_ok;
                out.receiver.buckets.tx_J += r_tx_ack;
            } else {
                out.receiver.buckets.rx_J += r_rx_fail;
            }
            if (!done || !out.report_valid) {
                out.sender.non_beneficial_J += se;
                out.receiver.non_beneficial_J += re;
            }
        }
        out.sender.buckets.proc_J += c.e_dpp_j;
        if (!done || !out.report_valid)
            out.sender.non_beneficial_J += c.e_dpp_j;
        if (data_seen) {
            ++out.delivered;
            out.receiver.buckets.proc_J += c.e_dpp_j;
            if (!out.report_valid)
                out.receiver.non_beneficial_J += c.e_dpp_j;
        }
        out.handshakes += done;
    }

    double gamma = link.sensing_samples * lb.snr_fwd;
    double pd = roc_point(link.pf_target, gamma, link.pu_model);
    bool sensed = uniform01(rng) < (link.pu_present ? pd : link.pf_target);
    out.vote_present = corrupted ? !sensed : sensed;

    out.energy_sender_J = out.sender.buckets.sum();
    out.energy_receiver_J = out.receiver.buckets.sum();
    return out;
}

int fuse(int present_votes, int total_votes, const FusionRule& rule)
{
    if (total_votes <= 0)
        return 0;
    int k = rule.k > 0 ? rule.k : (total_votes + 1) / 2;
    return present_votes >= k ? 1 : 0;
}

RoundMetrics simulate_round(const GameState& game, const Environment& env, const LinkProfile& link,
                            EnergyLedger& ledger, Rng& rng, const FusionRule& rule)
{
    const int n = game.size();
    if (static_cast<int>(ledger.nodes.size()) != n)
        throw DimensionError("simulate_round: ledger and game disagree on node count");
    const TimingProfile tm = link.slot_timing();
    const EnergyConstants& c = link.energy;
    const int packets = link.packets_per_report();
    Schedule sched = build_schedule(n * packets, tm);

    RoundMetrics m;
    m.round = game.round;
    m.protected_fraction = protected_fraction(game);
    RoundDebits debits;
    debits.nodes.resize(n);
    int present = 0, votes = 0;
    double nb_before = ledger.non_beneficial_total();

    for (int i = 0; i < n; ++i) {
        if (ledger.nodes[i].dead)
            continue;
        SlotOutcome o = simulate_slot(i, game, env, link, rng);
        Debit& d = debits.nodes[i];
        d = o.sender;
        d.buckets.acq_J += c.e_da_j(tm);
        double active = o.attempts * tm.slot_s;
        d.buckets.sleep_J += c.p_off_w * std::max(0.0, sched.round_length_s - active);
        debits.fc.buckets += o.receiver.buckets;
        debits.fc.non_beneficial_J += o.receiver.non_beneficial_J;
        if (o.report_valid)
            m.correct_packets += o.delivered;
        if (o.delivered > 0 && game.statuses[i].state == NodeState::Benevolent) {
            ++votes;
            present += o.vote_present;
        }
    }
    m.energy_delta_J = account_round(ledger, debits, game.round);
    m.non_beneficial_delta_J = ledger.non_beneficial_total() - nb_before;
    m.fc_decision = fuse(present, votes, rule);
    return m;
}

std::string metrics_to_json(const RoundMetrics& m)
{
    nlohmann::ordered_json j;
    j["round"] = m.round;
    j["correct_packets"] = m.correct_packets;
    j["protected_fraction"] = m.protected_fraction;
    j["fc_decision"] = m.fc_decision;
    j["energy_delta_J"] = m.energy_delta_J;
    return j.dump();
}

} // namespace ssdf
