#pragma once

#include "ssdf/link_model.hpp"

#include <string>
#include <vector>

namespace ssdf {

struct TimingProfile {
    double slot_s = 4.78e-3;
    double guard_s = 100e-6;
    double rate_bps = 250e3;
    double acq_s = 5e-3;
    int pkt_bytes = 128;  // D + H
    int ack_bytes = 12;

    double pkt_tx_s() const { return pkt_bytes * 8.0 / rate_bps; }
    double ack_tx_s() const { return ack_bytes * 8.0 / rate_bps; }
    void validate() const;
};

struct EnergyConstants {
    double p_cr_w = 69e-3;
    double e_dpp_j = 12.66e-6;
    double p_off_w = 3e-6;
    double p_da_w = 11.4e-3;
    double battery_j = 15e3;

    double e_da_j(const TimingProfile& t) const { return p_da_w * t.acq_s; }
};

double tx_energy(const PowerLevel& level, double pkt_time_s);
double slot_tx_energy(const PowerLevel& level, const TimingProfile& timing, const EnergyConstants& c = {});
double sender_total_energy(const PowerLevel& level_data, const PowerLevel& level_ack, double p_shs,
                           const TimingProfile& timing, const EnergyConstants& c = {});
double receiver_handshake_energy(const TimingProfile& timing, const PowerLevel& level_ack, const EnergyConstants& c = {});
double receiver_failed_energy(const TimingProfile& timing, const EnergyConstants& c = {});
double receiver_total_energy(double p_s_data, double p_f_ack, double p_shs, const TimingProfile& timing,
                             const PowerLevel& level_ack, const EnergyConstants& c = {});

struct Buckets {
    double tx_J = 0, rx_J = 0, proc_J = 0, sleep_J = 0, acq_J = 0;

    double sum() const { return tx_J + rx_J + proc_J + sleep_J + acq_J; }
    Buckets& operator+=(const Buckets& o);
};

struct Account {
    Buckets buckets;
    double battery_J = 0;
    double non_beneficial_J = 0;
    bool dead = false;
};

// One node's (or the FC's) energy for one round, split into buckets, plus the
// part of it that bought nothing.
struct Debit {
    Buckets buckets;
    double non_beneficial_J = 0;
};

struct EnergyLedger {
    std::vector<Account> nodes;
    Account fc;
    double initial_J = 0;
    std::vector<std::string> log;

    EnergyLedger() = default;
    EnergyLedger(int n, const EnergyConstants& c);
    double non_beneficial_total() const;
};

struct RoundDebits {
    std::vector<Debit> nodes;
    Debit fc;
};

// Books one round; returns total joules actually debited.
double account_round(EnergyLedger& ledger, const RoundDebits& outcomes, int round);

// max |(B - battery) - sum(buckets)| / B over every account.
double ledger_identity_error(const EnergyLedger& ledger);

void write_ledger_header(std::ostream& os);
void write_ledger_rows(std::ostream& os, const EnergyLedger& ledger, int round);

} // namespace ssdf
