#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ssdf {

constexpr double kBudgetTol = 1e-9;

struct BudgetVector {
    Eigen::VectorXd amounts;
    double total = 0.0;

    static BudgetVector equal(int n, double total);
    int size() const { return static_cast<int>(amounts.size()); }
    double sum() const { return amounts.sum(); }
    // Throws DomainError if an amount is negative or the sum exceeds total.
    void check() const;
};

enum class NodeState { Benevolent, SuspectedHwFailure, Malicious };

struct NodeStatus {
    NodeState state = NodeState::Benevolent;
    int negative_streak = 0;
    bool ever_negative = false;
};

enum class Player { Defender, Attacker };

struct Transfer {
    Player player;
    int from;
    int to;
    double amount;
};

struct GameState {
    int round = 0;
    BudgetVector defense;
    BudgetVector attack;
    Eigen::VectorXd utilities;
    std::vector<NodeStatus> statuses;
    std::vector<int> strong_list;
    std::vector<int> weak_list;
    double xi = 0.0;
    double alpha = 0.0;

    bool defender_active = true;
    bool anticipate = true;
    // Round in which a node's report spontaneously reads negative (0 = never).
    std::vector<int> hw_failure_round;
    // Times the defender has lifted a node out of suspicion (at most once).
    std::vector<int> rescues;

    // Attacker memory and per-round flags.
    Eigen::VectorXd seen_defense;
    std::vector<std::uint64_t> history;
    bool partial_attack = false;
    bool partial_defense = false;
    bool compromised = false;

    int size() const { return defense.size(); }
};

GameState make_state(const BudgetVector& defense, const BudgetVector& attack, double xi, double alpha);

struct RoundRecord {
    int round = 0;
    Eigen::VectorXd utilities;
    std::vector<NodeState> statuses;
    std::vector<Transfer> transfers;
    double protected_fraction = 0.0;
    bool consolidated = false;
    bool partial_attack = false;
    bool partial_defense = false;
};

Eigen::VectorXd compute_utilities(const BudgetVector& defense, const BudgetVector& attack);

void classify_nodes(GameState& state, const Eigen::VectorXd& utilities);

// Uses state.utilities. Sets state.compromised when no node is benevolent.
void partition_lists(GameState& state);

// extra[r] is added to node r's required transfer (attacker anticipation).
void attacker_redistribute(GameState& state, const Eigen::VectorXd& extra, std::vector<Transfer>* log = nullptr);
void attacker_redistribute(GameState& state, std::vector<Transfer>* log = nullptr);
void defender_redistribute(GameState& state, std::vector<Transfer>* log = nullptr);

// Attacker re-optimization when the chase stalls or cycles: kill the cheapest
// protected node with budget pooled from the other protected nodes.
bool attacker_consolidate(GameState& state, std::vector<Transfer>* log = nullptr);

double protected_fraction(const GameState& state);
int live_kills(const GameState& state);

bool is_nash_equilibrium(const GameState& state);

struct StepResult {
    GameState state;
    RoundRecord record;
};

StepResult step_round(const GameState& state);

struct GameConfig {
    BudgetVector defense;
    BudgetVector attack;
    double xi = 0.0;
    double alpha = 0.0;
    int max_rounds = 20;
    bool defender_active = true;
    bool anticipate = true;
    std::vector<int> hw_failure_round;
};

struct EquilibriumRun {
    GameState state;
    std::vector<RoundRecord> records;
    bool converged = false;
    int rounds = 0;
};

EquilibriumRun run_to_equilibrium(const GameConfig& config);

BudgetVector brute_force_best_response(const Eigen::VectorXd& defense, double attack_total, double granularity);

// Kill count and damage sum(min(U,0)) of an attack against a defense.
int count_kills(const Eigen::VectorXd& defense, const Eigen::VectorXd& attack);

std::string state_string(NodeState s);
std::string record_to_json(const RoundRecord& r);

} // namespace ssdf
