#include "ssdf/energy_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace ssdf {

void TimingProfile::validate() const
{
    if (!(rate_bps > 0.0) || !(slot_s > 0.0) || guard_s < 0.0 || acq_s < 0.0)
        throw DomainError("timing: rate and slot must be positive, guard and acquisition nonnegative");
    if (pkt_tx_s() > slot_s || ack_tx_s() > slot_s)
        throw DomainError("timing: packet or ACK does not fit in a slot");
}

double tx_energy(const PowerLevel& level, double pkt_time_s)
{
    if (pkt_time_s < 0.0)
        throw DomainError("tx_energy: negative duration");
    return level.consumed_mw * 1e-3 * pkt_time_s;
}

double slot_tx_energy(const PowerLevel& level, const TimingProfile& timing, const EnergyConstants& c)
{
    double tp = timing.pkt_tx_s();
    return tx_energy(level, tp) + c.p_cr_w * (timing.slot_s - tp);
}

double sender_total_energy(const PowerLevel& level_data, const PowerLevel&, double p_shs,
                           const TimingProfile& timing, const EnergyConstants& c)
{
    return c.e_dpp_j + expected_retransmissions(p_shs) * slot_tx_energy(level_data, timing, c);
}

double receiver_handshake_energy(const TimingProfile& timing, const PowerLevel& level_ack, const EnergyConstants& c)
{
    double ta = timing.ack_tx_s();
    return c.p_cr_w * (timing.slot_s - ta) + tx_energy(level_ack, ta);
}

double receiver_failed_energy(const TimingProfile& timing, const EnergyConstants& c)
{
    return c.p_cr_w * timing.slot_s;
}

double receiver_total_energy(double p_s_data, double p_f_ack, double p_shs, const TimingProfile& timing,
                             const PowerLevel& level_ack, const EnergyConstants& c)
{
    if (std::abs(p_shs - p_s_data * (1.0 - p_f_ack)) > 1e-9)
        throw DomainError("receiver_total_energy: p_shs != p_s_data * (1 - p_f_ack)");
    double re = expected_retransmissions(p_shs);
    double shs = receiver_handshake_energy(timing, level_ack, c);
    double fhs = receiver_failed_energy(timing, c);
    return c.e_dpp_j + re * (p_shs * shs + p_s_data * p_f_ack * shs + (1.0 - p_s_data) * fhs);
}

Buckets& Buckets::operator+=(const Buckets& o)
{
    tx_J += o.tx_J;
    rx_J += o.rx_J;
    proc_J += o.proc_J;
    sleep_J += o.sleep_J;
    acq_J += o.acq_J;
    return *this;
}

EnergyLedger::EnergyLedger(int n, const EnergyConstants& c) : nodes(n), initial_J(c.battery_j)
{
    for (auto& a : nodes)
        a.battery_J = c.battery_j;
    fc.battery_J = c.battery_j;
}

double EnergyLedger::non_beneficial_total() const
{
    double s = fc.non_beneficial_J;
    for (const auto& a : nodes)
        s += a.non_beneficial_J;
    return s;
}

static double book(Account& a, const Debit& d, const std::string& who, int round, std::vector<std::string>& log)
{
    if (a.dead)
        return 0.0;
    double total = d.buckets.sum();
    if (total > a.battery_J) {
        a.dead = true;
        log.push_back("round " + std::to_string(round) + ": " + who + " battery exhausted");
        return 0.0;
    }
    a.buckets += d.buckets;
    a.battery_J -= total;
    a.non_beneficial_J += d.non_beneficial_J;
    return total;
}

double account_round(EnergyLedger& ledger, const RoundDebits& outcomes, int round)
{
    if (outcomes.nodes.size() != ledger.nodes.size())
        throw DimensionError("account_round: outcome count does not match ledger");
    double total = 0.0;
    for (std::size_t i = 0; i < ledger.nodes.size(); ++i)
        total += book(ledger.nodes[i], outcomes.nodes[i], "node " + std::to_string(i), round, ledger.log);
    total += book(ledger.fc, outcomes.fc, "fc", round, ledger.log);
    return total;
}

double ledger_identity_error(const EnergyLedger& ledger)
{
    auto err = [&](const Account& a) {
        return std::abs((ledger.initial_J - a.battery_J) - a.buckets.sum()) / ledger.initial_J;
    };
    double e = err(ledger.fc);
    for (const auto& a : ledger.nodes)
        e = std::max(e, err(a));
    return e;
}

void write_ledger_header(std::ostream& os)
{
    os << "round,node,tx_J,rx_J,proc_J,sleep_J,acq_J,battery_J,non_beneficial_J\n";
}

static void row(std::ostream& os, int round, const std::string& node, const Account& a)
{
    char buf[320];
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", round, node.c_str(),
                  a.buckets.tx_J, a.buckets.rx_J, a.buckets.proc_J, a.buckets.sleep_J, a.buckets.acq_J,
                  a.battery_J, a.non_beneficial_J);
    os << buf;
}

void write_ledger_rows(std::ostream& os, const EnergyLedger& ledger, int round)
{
    for (std::size_t i = 0; i < ledger.nodes.size(); ++i)
        row(os, round, std::to_string(i), ledger.nodes[i]);
    row(os, round, "fc", ledger.fc);
}

} // namespace ssdf
