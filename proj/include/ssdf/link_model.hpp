#pragma once

#include "ssdf/common.hpp"

#include <array>
#include <string>

namespace ssdf {

enum class EnvName { OL, ON, UL, UN, IL, IN };

struct Environment {
    EnvName name;
    double path_loss_exponent;
    double shadow_sigma_db;
    double noise_floor_dbm;
};

struct PowerLevel {
    int level;
    double consumed_mw;
    double antenna_dbm;
};

enum class ShadowMode { Gaussian, Deterministic, Literal };

// Mutable copies of the built-in tables; load_overrides edits these.
struct LinkTables {
    std::array<Environment, 6> envs;
    std::array<PowerLevel, 8> levels;
};

const LinkTables& default_tables();
LinkTables load_overrides(const std::string& path, LinkTables base = default_tables());

const Environment& environment(EnvName name, const LinkTables& t = default_tables());
const PowerLevel& power_level(int m, const LinkTables& t = default_tables());

EnvName parse_env(const std::string& s);
std::string env_string(EnvName e);
ShadowMode parse_shadow_mode(const std::string& s);
std::string shadow_mode_string(ShadowMode m);

constexpr double kDefaultD0 = 1.0;
constexpr double kDefaultPL0 = 40.2;
constexpr double kProcessGain = 8.0;

double path_loss_db(const Environment& env, double distance_m, double d0_m, double pl0_db, double shadow_sample_db);
double received_power_dbm(const PowerLevel& level, double path_loss_db);
double link_snr_db(double received_dbm, const Environment& env);
double ber(double snr_linear, double process_gain = kProcessGain);
double packet_success_prob(double snr_linear, int length_bytes);
double handshake_success_prob(double snr_fwd, int data_bytes, double snr_rev, int ack_bytes);
double expected_retransmissions(double p_shs);

double shadow_sample(const Environment& env, ShadowMode mode, Rng& rng);

} // namespace ssdf
