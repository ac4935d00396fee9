#include "ssdf/game_engine.hpp"

#include "ssdf/common.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

namespace ssdf {

namespace {

// A report counts as compromised only when its utility is clearly below zero.
constexpr double kNegTol = 1e-9;

bool negative(double u) { return u < -kNegTol; }

std::uint64_t fnv(std::uint64_t h, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t state_key(const GameState& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int i = 0; i < s.size(); ++i) {
        h = fnv(h, static_cast<std::uint64_t>(std::llround(s.defense.amounts[i] * 1e9)));
        h = fnv(h, static_cast<std::uint64_t>(std::llround(s.attack.amounts[i] * 1e9)));
        h = fnv(h, static_cast<std::uint64_t>(s.statuses[i].state));
    }
    return h;
}

void move(Eigen::VectorXd& v, int from, int to, double amount)
{
    v[from] -= amount;
    v[to] += amount;
    if (v[from] < 0.0 && v[from] > -kBudgetTol)
        v[from] = 0.0;
}

bool benevolent(const GameState& s, int i) { return s.statuses[i].state == NodeState::Benevolent; }

} // namespace

BudgetVector BudgetVector::equal(int n, double total)
{
    return {Eigen::VectorXd::Constant(n, n > 0 ? total / n : 0.0), total};
}

void BudgetVector::check() const
{
    if ((amounts.array() < -kBudgetTol).any())
        throw DomainError("budget vector has a negative amount");
    if (sum() > total + kBudgetTol)
        throw DomainError("budget vector exceeds its total");
}

GameState make_state(const BudgetVector& defense, const BudgetVector& attack, double xi, double alpha)
{
    GameState s;
    s.defense = defense;
    s.attack = attack;
    s.utilities = compute_utilities(defense, attack);
    s.statuses.assign(defense.size(), {});
    s.hw_failure_round.assign(defense.size(), 0);
    s.rescues.assign(defense.size(), 0);
    s.xi = xi;
    s.alpha = alpha;
    return s;
}

Eigen::VectorXd compute_utilities(const BudgetVector& defense, const BudgetVector& attack)
{
    if (defense.size() != attack.size())
        throw DimensionError("compute_utilities: defense and attack cover different node counts");
    return defense.amounts - attack.amounts;
}

void classify_nodes(GameState& state, const Eigen::VectorXd& utilities)
{
    if (utilities.size() != state.size())
        throw DimensionError("classify_nodes: utility vector size mismatch");
    for (int i = 0; i < state.size(); ++i) {
        NodeStatus& st = state.statuses[i];
        if (st.state == NodeState::Malicious)
            continue;
        if (negative(utilities[i])) {
            ++st.negative_streak;
            st.ever_negative = true;
            st.state = st.negative_streak >= 2 ? NodeState::Malicious : NodeState::SuspectedHwFailure;
        } else {
            st.negative_streak = 0;
            st.state = NodeState::Benevolent;
        }
    }
}

void partition_lists(GameState& state)
{
    const Eigen::VectorXd& u = state.utilities;
    state.strong_list.clear();
    state.weak_list.clear();
    for (int i = 0; i < state.size(); ++i) {
        if (!benevolent(state, i))
            continue;
        (u[i] > state.xi ? state.strong_list : state.weak_list).push_back(i);
    }
    std::stable_sort(state.strong_list.begin(), state.strong_list.end(),
                     [&](int a, int b) { return u[a] > u[b]; });
    std::stable_sort(state.weak_list.begin(), state.weak_list.end(),
                     [&](int a, int b) { return u[a] < u[b]; });
    state.compromised = state.strong_list.empty() && state.weak_list.empty();
}

void defender_redistribute(GameState& state, std::vector<Transfer>* log)
{
    Eigen::VectorXd& x = state.defense.amounts;
    Eigen::VectorXd uc = state.utilities;
    const double xi = state.xi;
    state.partial_defense = false;
    if (xi <= 0.0)
        return;
    // Weak reports first, then suspected reports that one xi lifts back to >= 0.
    std::vector<int> targets = state.weak_list;
    std::vector<int> suspected;
    for (int i = 0; i < state.size(); ++i)
        if (state.statuses[i].state == NodeState::SuspectedHwFailure && state.rescues[i] == 0 &&
            !negative(uc[i] + xi))
            suspected.push_back(i);
    std::stable_sort(suspected.begin(), suspected.end(), [&](int a, int b) { return uc[a] > uc[b]; });
    targets.insert(targets.end(), suspected.begin(), suspected.end());
    for (int r : targets) {
        int donor = -1;
        for (int d : state.strong_list)
            if (uc[d] > xi && x[d] >= xi - kBudgetTol && (donor < 0 || uc[d] > uc[donor]))
                donor = d;
        if (donor < 0) {
            state.partial_defense = true;
            break;
        }
        double amount = std::min(xi, x[donor]);
        move(x, donor, r, amount);
        if (state.statuses[r].state == NodeState::SuspectedHwFailure)
            ++state.rescues[r];
        uc[donor] -= amount;
        uc[r] += amount;
        if (log)
            log->push_back({Player::Defender, donor, r, amount});
    }
}

void attacker_redistribute(GameState& state, const Eigen::VectorXd& extra, std::vector<Transfer>* log)
{
    Eigen::VectorXd& y = state.attack.amounts;
    const Eigen::VectorXd& u = state.utilities;
    state.partial_attack = false;
    std::vector<int> order = state.weak_list;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return u[a] > u[b]; });
    for (int r : order) {
        double need = u[r] + state.alpha + (extra.size() ? extra[r] : 0.0);
        if (need <= kBudgetTol)
            continue;
        for (int q : state.strong_list) {
            if (need <= kBudgetTol)
                break;
            double take = std::min(need, y[q]);
            if (take <= kBudgetTol)
                continue;
            move(y, q, r, take);
            need -= take;
            if (log)
                log->push_back({Player::Attacker, q, r, take});
        }
        if (need > kBudgetTol)
            state.partial_attack = true;
    }
}

void attacker_redistribute(GameState& state, std::vector<Transfer>* log)
{
    attacker_redistribute(state, Eigen::VectorXd(), log);
}

bool attacker_consolidate(GameState& state, std::vector<Transfer>* log)
{
    Eigen::VectorXd& y = state.attack.amounts;
    const Eigen::VectorXd& x = state.defense.amounts;
    Eigen::VectorXd un = x - y;
    std::vector<int> free;
    for (int i = 0; i < state.size(); ++i)
        if (benevolent(state, i) && !negative(un[i]))
            free.push_back(i);

    std::vector<int> targets = free;
    std::stable_sort(targets.begin(), targets.end(), [&](int a, int b) { return x[a] < x[b]; });
    std::vector<int> pool = free;
    std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) { return un[a] > un[b]; });

    for (int r : targets) {
        double need = un[r] + state.alpha;
        double avail = 0.0;
        for (int q : pool)
            if (q != r)
                avail += y[q];
        if (avail + kBudgetTol < need)
            continue;
        for (int q : pool) {
            if (need <= kBudgetTol)
                break;
            if (q == r)
                continue;
            double take = std::min(need, y[q]);
            if (take <= kBudgetTol)
                continue;
            move(y, q, r, take);
            need -= take;
            if (log)
                log->push_back({Player::Attacker, q, r, take});
        }
        return true;
    }
    return false;
}

double protected_fraction(const GameState& state)
{
    if (state.size() == 0)
        return 0.0;
    int n = 0;
    for (int i = 0; i < state.size(); ++i)
        if (benevolent(state, i) && !negative(state.utilities[i]))
            ++n;
    return static_cast<double>(n) / state.size();
}

int live_kills(const GameState& state)
{
    Eigen::VectorXd u = compute_utilities(state.defense, state.attack);
    int k = 0;
    for (int i = 0; i < state.size(); ++i)
        if (state.statuses[i].state != NodeState::Malicious && negative(u[i]))
            ++k;
    return k;
}

bool is_nash_equilibrium(const GameState& state)
{
    const Eigen::VectorXd& x = state.defense.amounts;
    const Eigen::VectorXd& y = state.attack.amounts;
    Eigen::VectorXd u = x - y;
    std::vector<int> live;
    for (int i = 0; i < state.size(); ++i)
        if (state.statuses[i].state != NodeState::Malicious)
            live.push_back(i);

    int kills = 0;
    double budget = 0.0;
    std::vector<double> costs;
    for (int i : live) {
        kills += negative(u[i]);
        budget += y[i];
        costs.push_back(x[i] + state.alpha);
    }
    std::sort(costs.begin(), costs.end());
    int reachable = 0;
    for (double c : costs) {
        if (c > budget + kBudgetTol)
            break;
        budget -= c;
        ++reachable;
    }
    if (reachable > kills)
        return false;

    for (int r : live) {
        if (!negative(u[r]) || negative(u[r] + state.xi))
            continue;
        for (int d : live)
            if (d != r && x[d] >= state.xi - kBudgetTol && (!negative(u[d] - state.xi) || negative(u[d])))
                return false;
    }
    return true;
}

StepResult step_round(const GameState& state)
{
    if (is_nash_equilibrium(state)) {
        RoundRecord rec;
        rec.round = state.round;
        rec.utilities = state.utilities;
        for (const auto& st : state.statuses)
            rec.statuses.push_back(st.state);
        rec.protected_fraction = protected_fraction(state);
        return {state, rec};
    }

    GameState s = state;
    const int n = s.size();
    s.round += 1;

    std::uint64_t key = state_key(s);
    bool cycle = std::find(s.history.begin(), s.history.end(), key) != s.history.end();
    if (!cycle)
        s.history.push_back(key);

    Eigen::VectorXd extra = Eigen::VectorXd::Zero(n);
    if (s.anticipate && s.seen_defense.size() == n)
        extra = (s.defense.amounts - s.seen_defense).cwiseMax(0.0);
    s.seen_defense = s.defense.amounts;

    Eigen::VectorXd observed = compute_utilities(s.defense, s.attack);
    for (int i = 0; i < n; ++i)
        if (i < static_cast<int>(s.hw_failure_round.size()) && s.hw_failure_round[i] == s.round)
            observed[i] = -std::abs(observed[i]) - 1e-3;

    classify_nodes(s, observed);
    s.utilities = observed;
    partition_lists(s);

    RoundRecord rec;
    std::vector<Transfer> defense_moves, attack_moves;
    s.partial_defense = false;
    if (s.defender_active)
        defender_redistribute(s, &defense_moves);
    attacker_redistribute(s, extra, &attack_moves);

    rec.transfers = defense_moves;
    rec.transfers.insert(rec.transfers.end(), attack_moves.begin(), attack_moves.end());
    if ((defense_moves.empty() && attack_moves.empty()) || cycle)
        rec.consolidated = attacker_consolidate(s, &rec.transfers);

    s.utilities = compute_utilities(s.defense, s.attack);
    rec.round = s.round;
    rec.utilities = s.utilities;
    for (const auto& st : s.statuses)
        rec.statuses.push_back(st.state);
    rec.protected_fraction = protected_fraction(s);
    rec.partial_attack = s.partial_attack;
    rec.partial_defense = s.partial_defense;
    return {std::move(s), std::move(rec)};
}

EquilibriumRun run_to_equilibrium(const GameConfig& config)
{
    if (config.max_rounds < 1)
        throw DomainError("run_to_equilibrium: max_rounds must be at least 1");
    config.defense.check();
    config.attack.check();
    EquilibriumRun run;
    run.state = make_state(config.defense, config.attack, config.xi, config.alpha);
    run.state.defender_active = config.defender_active;
    run.state.anticipate = config.anticipate;
    if (!config.hw_failure_round.empty())
        run.state.hw_failure_round = config.hw_failure_round;
    for (int t = 0; t < config.max_rounds; ++t) {
        if (is_nash_equilibrium(run.state))
            break;
        StepResult r = step_round(run.state);
        run.state = std::move(r.state);
        run.records.push_back(std::move(r.record));
    }
    run.converged = is_nash_equilibrium(run.state);
    run.rounds = run.state.round;
    return run;
}

int count_kills(const Eigen::VectorXd& defense, const Eigen::VectorXd& attack)
{
    if (defense.size() != attack.size())
        throw DimensionError("count_kills: size mismatch");
    int k = 0;
    for (Eigen::Index i = 0; i < defense.size(); ++i)
        k += negative(defense[i] - attack[i]);
    return k;
}

BudgetVector brute_force_best_response(const Eigen::VectorXd& defense, double attack_total, double granularity)
{
    const int n = static_cast<int>(defense.size());
    if (!(granularity > 0.0) || attack_total < 0.0)
        throw DomainError("brute_force_best_response: granularity must be positive and total nonnegative");
    if (n > 8)
        throw SizeError("brute_force_best_response: more than 8 nodes");
    double ratio = attack_total / granularity;
    if (ratio > 20.0 + 1e-9)
        throw SizeError("brute_force_best_response: more than 20 budget units");
    const int units = static_cast<int>(std::floor(ratio + 1e-9));

    BudgetVector best{Eigen::VectorXd::Zero(n), attack_total};
    if (n == 0)
        return best;
    int best_kills = -1;
    double best_damage = 0.0;
    Eigen::VectorXd y(n);
    std::vector<int> alloc(n, 0);

    auto evaluate = [&] {
        for (int i = 0; i < n; ++i)
            y[i] = alloc[i] * granularity;
        Eigen::VectorXd u = defense - y;
        int kills = 0;
        double damage = 0.0;
        for (int i = 0; i < n; ++i) {
            kills += negative(u[i]);
            damage += std::min(u[i], 0.0);
        }
        if (kills > best_kills || (kills == best_kills && damage < best_damage - 1e-12)) {
            best_kills = kills;
            best_damage = damage;
            best.amounts = y;
        }
    };
    // Node 0 takes the most units first.
    auto rec = [&](auto&& self, int i, int left) -> void {
        if (i == n - 1) {
            alloc[i] = left;
            evaluate();
            return;
        }
        for (int k = left; k >= 0; --k) {
            alloc[i] = k;
            self(self, i + 1, left - k);
        }
    };
    rec(rec, 0, units);
    return best;
}

std::string state_string(NodeState s)
{
    switch (s) {
    case NodeState::Benevolent: return "benevolent";
    case NodeState::SuspectedHwFailure: return "hw_failure";
    case NodeState::Malicious: return "malicious";
    }
    return "";
}

std::string record_to_json(const RoundRecord& r)
{
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["utilities"] = std::vector<double>(r.utilities.data(), r.utilities.data() + r.utilities.size());
    auto& st = j["statuses"] = nlohmann::ordered_json::array();
    for (auto s : r.statuses)
        st.push_back(state_string(s));
    auto& tr = j["transfers"] = nlohmann::ordered_json::array();
    for (const auto& t : r.transfers)
        tr.push_back({{"player", t.player == Player::Defender ? "defender" : "attacker"},
                      {"from", t.from},
                      {"to", t.to},
                      {"amount", t.amount}});
    j["protected_fraction"] = r.protected_fraction;
    return j.dump();
}

} // namespace ssdf
