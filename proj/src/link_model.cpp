#include "ssdf/link_model.hpp"

#include "ssdf/detector.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ssdf {

const LinkTables& default_tables()
{
    static const LinkTables t{
        {{
            {EnvName::OL, 2.42, 3.12, -93.0},
            {EnvName::ON, 3.51, 2.95, -93.0},
            {EnvName::UL, 1.45, 2.45, -92.0},
            {EnvName::UN, 3.15, 3.19, -92.0},
            {EnvName::IL, 1.64, 3.29, -88.0},
            {EnvName::IN, 2.38, 2.25, -88.0},
        }},
        {{
            {3, 25.5, -25.0},
            {7, 29.7, -15.0},
            {11, 33.6, -10.0},
            {15, 37.5, -7.0},
            {19, 41.7, -5.0},
            {23, 45.6, -3.0},
            {27, 49.5, -1.0},
            {31, 52.2, 0.0},
        }},
    };
    return t;
}

const Environment& environment(EnvName name, const LinkTables& t)
{
    return t.envs[static_cast<int>(name)];
}

const PowerLevel& power_level(int m, const LinkTables& t)
{
    for (const auto& p : t.levels)
        if (p.level == m)
            return p;
    throw DomainError("unknown power level " + std::to_string(m));
}

static const char* kEnvNames[] = {"OL", "ON", "UL", "UN", "IL", "IN"};

EnvName parse_env(const std::string& s)
{
    for (int i = 0; i < 6; ++i)
        if (s == kEnvNames[i])
            return static_cast<EnvName>(i);
    throw ConfigError("unknown environment '" + s + "'");
}

std::string env_string(EnvName e) { return kEnvNames[static_cast<int>(e)]; }

ShadowMode parse_shadow_mode(const std::string& s)
{
    if (s == "gaussian")
        return ShadowMode::Gaussian;
    if (s == "deterministic")
        return ShadowMode::Deterministic;
    if (s == "literal")
        return ShadowMode::Literal;
    throw ConfigError("unknown shadow mode '" + s + "'");
}

std::string shadow_mode_string(ShadowMode m)
{
    switch (m) {
    case ShadowMode::Gaussian: return "gaussian";
    case ShadowMode::Deterministic: return "deterministic";
    case ShadowMode::Literal: return "literal";
    }
    return "";
}

// Lines look like "env.ON = 3.51 2.95 -93" or "level.31 = 52.2 0".
LinkTables load_overrides(const std::string& path, LinkTables t)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open override file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::istringstream key(line.substr(0, eq));
        std::istringstream val(line.substr(eq + 1));
        std::string k;
        key >> k;
        auto dot = k.find('.');
        std::string kind = k.substr(0, dot), id = dot == std::string::npos ? "" : k.substr(dot + 1);
        if (kind == "env") {
            Environment& e = t.envs[static_cast<int>(parse_env(id))];
            if (!(val >> e.path_loss_exponent >> e.shadow_sigma_db >> e.noise_floor_dbm))
                throw ConfigError(path + ":" + std::to_string(lineno) + ": env row needs n sigma Pn");
        } else if (kind == "level") {
            int m = std::stoi(id);
            bool found = false;
            for (auto& p : t.levels)
                if (p.level == m) {
                    if (!(val >> p.consumed_mw >> p.antenna_dbm))
                        throw ConfigError(path + ":" + std::to_string(lineno) + ": level row needs Pct PtA");
                    found = true;
                }
            if (!found)
                throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown level " + id);
        } else {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key " + k);
        }
    }
    return t;
}

double path_loss_db(const Environment& env, double distance_m, double d0_m, double pl0_db, double shadow_sample_db)
{
    if (!(d0_m > 0.0) || distance_m < d0_m)
        throw DomainError("path_loss_db: need distance >= d0 > 0");
    return pl0_db + 10.0 * env.path_loss_exponent * std::log10(distance_m / d0_m) + shadow_sample_db;
}

double received_power_dbm(const PowerLevel& level, double pl_db) { return level.antenna_dbm - pl_db; }

double link_snr_db(double received_dbm, const Environment& env) { return received_dbm - env.noise_floor_dbm; }

double ber(double snr_linear, double process_gain)
{
    if (snr_linear < 0.0 || !(process_gain > 0.0))
        throw DomainError("ber: negative snr or nonpositive process gain");
    return qfunc(std::sqrt(2.0 * snr_linear * process_gain));
}

double packet_success_prob(double snr_linear, int length_bytes)
{
    if (snr_linear < 0.0 || length_bytes < 0)
        throw DomainError("packet_success_prob: negative input");
    double b = qfunc(std::sqrt(16.0 * snr_linear));
    return std::exp(8.0 * length_bytes * std::log1p(-b));
}

double handshake_success_prob(double snr_fwd, int data_bytes, double snr_rev, int ack_bytes)
{
    return packet_success_prob(snr_fwd, data_bytes) * packet_success_prob(snr_rev, ack_bytes);
}

double expected_retransmissions(double p_shs)
{
    if (p_shs <= 0.0)
        throw UnreachableLink("expected_retransmissions: handshake never succeeds");
    if (p_shs > 1.0)
        throw DomainError("expected_retransmissions: probability above 1");
    return 1.0 / p_shs;
}

double shadow_sample(const Environment& env, ShadowMode mode, Rng& rng)
{
    switch (mode) {
    case ShadowMode::Gaussian: {
        double u1 = uniform01(rng), u2 = uniform01(rng);
        if (u1 <= 0.0)
            u1 = 0x1.0p-53;
        return env.shadow_sigma_db * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    case ShadowMode::Deterministic: return 0.0;
    case ShadowMode::Literal: return env.shadow_sigma_db;
    }
    return 0.0;
}

} // namespace ssdf
