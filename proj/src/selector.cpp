#include "squadforge/selector.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "squadforge/errors.hpp"

namespace squadforge {

using nlohmann::json;

std::string Formation::to_string() const {
    return std::to_string(counts[0]) + "-" + std::to_string(counts[1]) + "-" + std::to_string(counts[2]) + "-" +
           std::to_string(counts[3]);
}

void SelectionConstraints::validate() const {
    int lo = 0;
    int hi = 0;
    for (std::size_t p = 0; p < 4; ++p) {
        if (min_count[p] < 0 || max_count[p] < min_count[p]) {
            throw ConfigError("invalid formation bounds for " + std::string(squadforge::to_string(kAllPositions[p])));
        }
        lo += min_count[p];
        hi += max_count[p];
    }
    if (squad_size < 1 || squad_size < lo || squad_size > hi) {
        throw ConfigError("squad size " + std::to_string(squad_size) + " is incompatible with the formation bounds");
    }
    if (club_cap_enabled && club_cap < 1) throw ConfigError("club cap must be >= 1");
    if (budget_enabled && !(budget >= 0.0)) throw ConfigError("budget must be >= 0");
}

std::vector<Formation> legal_formations(const SelectionConstraints& c) {
    std::vector<Formation> out;
    for (int g = c.min_count[0]; g <= c.max_count[0]; ++g) {
        for (int d = c.min_count[1]; d <= c.max_count[1]; ++d) {
            for (int m = c.min_count[2]; m <= c.max_count[2]; ++m) {
                const int f = c.squad_size - g - d - m;
                if (f >= c.min_count[3] && f <= c.max_count[3]) out.push_back(Formation{{g, d, m, f}});
            }
        }
    }
    return out;
}

double Lineup::objective() const {
    double sum = 0.0;
    double captain_score = 0.0;
    for (const auto& p : players) {
        sum += p.predicted_score;
        if (p.player_id == captain) captain_score = p.predicted_score;
    }
    return sum + captain_score;
}

PlayerId choose_captain(std::span<const Candidate> players) {
    if (players.empty()) throw PreconditionError("cannot choose a captain from an empty set");
    const Candidate* best = &players.front();
    for (const auto& p : players) {
        if (p.predicted_score > best->predicted_score ||
            (p.predicted_score == best->predicted_score && p.player_id < best->player_id)) {
            best = &p;
        }
    }
    return best->player_id;
}

namespace {

// Pool sorted by player_id with dense team indices. Index order == id order,
// so comparing sorted index vectors compares sorted id sets.
struct Pool {
    std::vector<Candidate> items;
    std::vector<int> team;
    int team_count = 0;
    std::vector<int> by_score;  // indices, score descending then id ascending
};

Pool prepare(std::span<const Candidate> candidates) {
    Pool pool;
    pool.items.assign(candidates.begin(), candidates.end());
    std::sort(pool.items.begin(), pool.items.end(),
              [](const auto& a, const auto& b) { return a.player_id < b.player_id; });
    std::map<TeamId, int> teams;
    for (std::size_t i = 0; i < pool.items.size(); ++i) {
        const auto& c = pool.items[i];
        if (i > 0 && c.player_id == pool.items[i - 1].player_id) {
            throw ValidationError("duplicate candidate " + c.player_id);
        }
        if (!std::isfinite(c.predicted_score)) throw ValidationError("candidate " + c.player_id + " has a non-finite score");
        if (!std::isfinite(c.cost)) throw ValidationError("candidate " + c.player_id + " has a non-finite cost");
        pool.team.push_back(teams.try_emplace(c.team_id, static_cast<int>(teams.size())).first->second);
    }
    pool.team_count = static_cast<int>(teams.size());
    pool.by_score.resize(pool.items.size());
    std::iota(pool.by_score.begin(), pool.by_score.end(), 0);
    std::stable_sort(pool.by_score.begin(), pool.by_score.end(), [&](int a, int b) {
        return pool.items[static_cast<std::size_t>(a)].predicted_score >
               pool.items[static_cast<std::size_t>(b)].predicted_score;
    });
    return pool;
}

double score_of(const Pool& pool, int i) { return pool.items[static_cast<std::size_t>(i)].predicted_score; }
Position position_of(const Pool& pool, int i) { return pool.items[static_cast<std::size_t>(i)].position; }
std::size_t slot(Position p) { return static_cast<std::size_t>(p); }

struct Best {
    bool found = false;
    double objective = 0.0;
    std::vector<int> chosen;  // ascending indices
};

// Sum in id order plus the top score: the same arithmetic as Lineup::objective().
double objective_of(const Pool& pool, const std::vector<int>& chosen_sorted) {
    double sum = 0.0;
    double top = -std::numeric_limits<double>::infinity();
    for (int i : chosen_sorted) {
        sum += score_of(pool, i);
        top = std::max(top, score_of(pool, i));
    }
    return sum + top;
}

void offer(Best& best, double objective, std::vector<int> chosen_sorted) {
    if (!best.found || objective > best.objective ||
        (objective == best.objective && chosen_sorted < best.chosen)) {
        best.found = true;
        best.objective = objective;
        best.chosen = std::move(chosen_sorted);
    }
}

Lineup to_lineup(const Pool& pool, const std::vector<int>& chosen) {
    Lineup l;
    for (int i : chosen) {
        const auto& c = pool.items[static_cast<std::size_t>(i)];
        l.players.push_back(c);
        ++l.formation.counts[slot(c.position)];
    }
    l.captain = choose_captain(l.players);
    return l;
}

double tolerance(double v) { return 1e-9 * std::max(1.0, std::abs(v)); }

enum class Pick : signed char { Free, In, Out };
using Restriction = std::vector<Pick>;

// Successive shortest paths with a queue-based Bellman-Ford; unit capacities
// on every path, so each augmentation adds one player.
class MinCostFlow {
public:
    explicit MinCostFlow(std::size_t nodes) : adj_(nodes) {}

    std::size_t add_edge(int from, int to, int cap, double cost) {
        auto& out = adj_[static_cast<std::size_t>(from)];
        auto& back = adj_[static_cast<std::size_t>(to)];
        out.push_back({to, cap, cost, back.size()});
        back.push_back({from, 0, -cost, out.size() - 1});
        return out.size() - 1;
    }

    bool saturated(int from, std::size_t edge) const { return adj_[static_cast<std::size_t>(from)][edge].cap == 0; }

    std::optional<double> push(int source, int sink, int units) {
        const std::size_t n = adj_.size();
        double total = 0.0;
        constexpr double kInf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(n);
        std::vector<int> prev_node(n);
        std::vector<std::size_t> prev_edge(n);
        std::vector<char> queued(n);
        for (int unit = 0; unit < units; ++unit) {
            std::fill(dist.begin(), dist.end(), kInf);
            std::fill(queued.begin(), queued.end(), 0);
            std::deque<int> queue{source};
            dist[static_cast<std::size_t>(source)] = 0.0;
            while (!queue.empty()) {
                const auto v = static_cast<std::size_t>(queue.front());
                queue.pop_front();
                queued[v] = 0;
                for (std::size_t e = 0; e < adj_[v].size(); ++e) {
                    const Edge& edge = adj_[v][e];
                    const auto to = static_cast<std::size_t>(edge.to);
                    if (edge.cap <= 0 || !(dist[v] + edge.cost < dist[to] - 1e-12)) continue;
                    dist[to] = dist[v] + edge.cost;
                    prev_node[to] = static_cast<int>(v);
                    prev_edge[to] = e;
                    if (!queued[to]) {
                        queued[to] = 1;
                        queue.push_back(edge.to);
                    }
                }
            }
            if (dist[static_cast<std::size_t>(sink)] == kInf) return std::nullopt;
            for (int v = sink; v != source;) {
                const auto vv = static_cast<std::size_t>(v);
                Edge& edge = adj_[static_cast<std::size_t>(prev_node[vv])][prev_edge[vv]];
                edge.cap -= 1;
                adj_[vv][edge.rev].cap += 1;
                v = prev_node[vv];
            }
            total += dist[static_cast<std::size_t>(sink)];
        }
        return total;
    }

private:
    struct Edge {
        int to;
        int cap;
        double cost;
        std::size_t rev;
    };
    std::vector<std::vector<Edge>> adj_;
};

// Largest score sum of a squad with exactly the formation's counts that holds
// every forced player, avoids excluded ones and respects the club cap.
std::optional<double> max_sum(const Pool& pool, const SelectionConstraints& c, const Formation& f,
                              const Restriction& r, std::vector<int>* chosen) {
    std::array<int, 4> need = f.counts;
    const int cap = c.club_cap_enabled ? c.club_cap : c.squad_size;
    std::vector<int> room(static_cast<std::size_t>(pool.team_count), cap);
    double base = 0.0;
    std::vector<int> picked;
    for (std::size_t i = 0; i < pool.items.size(); ++i) {
        if (r[i] != Pick::In) continue;
        if (--need[slot(pool.items[i].position)] < 0) return std::nullopt;
        if (--room[static_cast<std::size_t>(pool.team[i])] < 0) return std::nullopt;
        base += pool.items[i].predicted_score;
        picked.push_back(static_cast<int>(i));
    }
    const int units = need[0] + need[1] + need[2] + need[3];
    double total = base;
    if (units > 0) {
        const int source = 0, sink = 1, first_team = 6;
        const int first_player = first_team + pool.team_count;
        MinCostFlow flow(static_cast<std::size_t>(first_player) + pool.items.size());
        for (int p = 0; p < 4; ++p) {
            if (need[static_cast<std::size_t>(p)] > 0) flow.add_edge(2 + p, sink, need[static_cast<std::size_t>(p)], 0.0);
        }
        for (int t = 0; t < pool.team_count; ++t) {
            if (room[static_cast<std::size_t>(t)] > 0) flow.add_edge(source, first_team + t, room[static_cast<std::size_t>(t)], 0.0);
        }
        std::vector<std::pair<int, std::size_t>> player_edges;
        for (std::size_t i = 0; i < pool.items.size(); ++i) {
            const auto p = slot(pool.items[i].position);
            if (r[i] != Pick::Free || need[p] == 0 || room[static_cast<std::size_t>(pool.team[i])] == 0) continue;
            const int team_node = first_team + pool.team[i];
            const int player_node = first_player + static_cast<int>(i);
            player_edges.emplace_back(team_node, flow.add_edge(team_node, player_node, 1, -pool.items[i].predicted_score));
            flow.add_edge(player_node, 2 + static_cast<int>(p), 1, 0.0);
        }
        const auto cost = flow.push(source, sink, units);
        if (!cost) return std::nullopt;
        total -= *cost;
        if (chosen) {
            std::size_t k = 0;
            for (std::size_t i = 0; i < pool.items.size(); ++i) {
                const auto p = slot(pool.items[i].position);
                if (r[i] != Pick::Free || need[p] == 0 || room[static_cast<std::size_t>(pool.team[i])] == 0) continue;
                if (flow.saturated(player_edges[k].first, player_edges[k].second)) picked.push_back(static_cast<int>(i));
                ++k;
            }
        }
    }
    if (chosen) {
        std::sort(picked.begin(), picked.end());
        *chosen = std::move(picked);
    }
    return total;
}

// Best objective under a restriction, ignoring the budget. The captain bonus
// is handled by forcing each stronger candidate in turn.
Best best_without_budget(const Pool& pool, const SelectionConstraints& c, Restriction& r) {
    Best best;
    for (const auto& f : legal_formations(c)) {
        std::vector<int> base_set;
        const auto base = max_sum(pool, c, f, r, &base_set);
        if (!base) continue;
        double top = -std::numeric_limits<double>::infinity();
        for (int i : base_set) top = std::max(top, score_of(pool, i));
        if (!best.found || top + *base > best.objective) {
            best = {true, top + *base, base_set};
        }
        for (int i : pool.by_score) {
            const double s = score_of(pool, i);
            if (s <= top || s + *base <= best.objective) break;
            if (r[static_cast<std::size_t>(i)] != Pick::Free) continue;
            r[static_cast<std::size_t>(i)] = Pick::In;
            std::vector<int> set;
            const auto sum = max_sum(pool, c, f, r, &set);
            r[static_cast<std::size_t>(i)] = Pick::Free;
            if (sum && s + *sum > best.objective) best = {true, s + *sum, set};
        }
    }
    return best;
}

// Depth-first search over players in score order for the budgeted problem.
class BudgetSearch {
public:
    BudgetSearch(const Pool& pool, const SelectionConstraints& c) : pool_(pool), c_(c) {
        const std::size_t n = pool.items.size();
        before_.assign(n + 1, {0, 0, 0, 0});
        for (auto& pre : prefix_) pre.assign(1, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const int i = pool.by_score[k];
            const auto p = slot(position_of(pool, i));
            before_[k + 1] = before_[k];
            ++before_[k + 1][p];
            prefix_[p].push_back(prefix_[p].back() + score_of(pool, i));
            head_[p].push_back(score_of(pool, i));
            cheapest_[p].push_back(pool.items[static_cast<std::size_t>(i)].cost);
        }
        for (auto& costs : cheapest_) {
            std::sort(costs.begin(), costs.end());
            std::vector<double> pre{0.0};
            for (double v : costs) pre.push_back(pre.back() + v);
            costs = std::move(pre);
        }
        club_.assign(static_cast<std::size_t>(pool.team_count), 0);
    }

    // Highest objective above `floor` (or any when floor is -inf); with
    // `first_only` the search stops at the first squad reaching the floor.
    Best run(const Restriction& r, double floor, bool first_only) {
        r_ = &r;
        floor_ = floor;
        first_only_ = first_only;
        forced_ = static_cast<int>(std::count(r.begin(), r.end(), Pick::In));
        best_ = Best{};
        for (const auto& f : legal_formations(c_)) {
            need_ = f.counts;
            std::fill(club_.begin(), club_.end(), 0);
            chosen_.clear();
            forced_taken_ = 0;
            search(0, 0.0, 0.0, std::nullopt);
            if (first_only_ && best_.found) break;
        }
        return best_;
    }

private:
    bool done() const { return first_only_ && best_.found; }

    double threshold() const { return best_.found ? best_.objective : floor_; }

    std::optional<double> bound(std::size_t k, double sum, std::optional<double> captain) const {
        double b = sum;
        double top_remaining = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < 4; ++p) {
            if (need_[p] == 0) continue;
            const auto start = static_cast<std::size_t>(before_[k][p]);
            const auto& pre = prefix_[p];
            if (start + static_cast<std::size_t>(need_[p]) >= pre.size()) return std::nullopt;
            b += pre[start + static_cast<std::size_t>(need_[p])] - pre[start];
            top_remaining = std::max(top_remaining, head_[p][start]);
        }
        return b + (captain ? *captain : top_remaining);
    }

    bool budget_ok(double cost) const {
        double lower = cost;
        for (std::size_t p = 0; p < 4; ++p) lower += cheapest_[p][static_cast<std::size_t>(need_[p])];
        return lower <= c_.budget + 1e-9;
    }

    void search(std::size_t k, double sum, double cost, std::optional<double> captain) {
        if (done()) return;
        if (need_ == std::array<int, 4>{0, 0, 0, 0}) {
            if (forced_taken_ != forced_ || cost > c_.budget + 1e-9) return;
            std::vector<int> sorted = chosen_;
            std::sort(sorted.begin(), sorted.end());
            const double value = objective_of(pool_, sorted);
            if (best_.found ? value > best_.objective : value >= floor_) best_ = {true, value, std::move(sorted)};
            return;
        }
        const std::size_t n = pool_.by_score.size();
        for (; k < n; ++k) {
            const int i = pool_.by_score[k];
            const Pick pick = (*r_)[static_cast<std::size_t>(i)];
            const bool wanted = need_[slot(position_of(pool_, i))] > 0;
            if (pick == Pick::In && !wanted) return;
            if (pick != Pick::Out && wanted) break;
        }
        if (k >= n) return;
        const auto b = bound(k, sum, captain);
        if (!b) return;
        if (best_.found ? *b <= threshold() : *b < threshold()) return;
        if (!budget_ok(cost)) return;

        const int i = pool_.by_score[k];
        const auto& item = pool_.items[static_cast<std::size_t>(i)];
        const auto p = slot(item.position);
        const auto t = static_cast<std::size_t>(pool_.team[static_cast<std::size_t>(i)]);
        const bool forced = (*r_)[static_cast<std::size_t>(i)] == Pick::In;
        if (!c_.club_cap_enabled || club_[t] < c_.club_cap) {
            --need_[p];
            ++club_[t];
            forced_taken_ += forced ? 1 : 0;
            chosen_.push_back(i);
            search(k + 1, sum + item.predicted_score, cost + item.cost,
                   captain ? captain : std::optional<double>(item.predicted_score));
            chosen_.pop_back();
            forced_taken_ -= forced ? 1 : 0;
            --club_[t];
            ++need_[p];
        }
        if (!forced) search(k + 1, sum, cost, captain);
    }

    const Pool& pool_;
    const SelectionConstraints& c_;
    std::vector<std::array<int, 4>> before_;
    std::array<std::vector<double>, 4> prefix_;
    std::array<std::vector<double>, 4> head_;
    std::array<std::vector<double>, 4> cheapest_;
    const Restriction* r_ = nullptr;
    double floor_ = 0.0;
    bool first_only_ = false;
    int forced_ = 0;
    int forced_taken_ = 0;
    Best best_;
    std::array<int, 4> need_{};
    std::vector<int> club_;
    std::vector<int> chosen_;
};

// Upper bound on any squad that holds the forced players and `extra`,
// ignoring positions, clubs and budget.
double loose_bound(const Pool& pool, const SelectionConstraints& c, const Restriction& r, int extra) {
    double sum = score_of(pool, extra);
    double top = sum;
    int count = 1;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] != Pick::In) continue;
        sum += pool.items[i].predicted_score;
        top = std::max(top, pool.items[i].predicted_score);
        ++count;
    }
    for (int i : pool.by_score) {
        if (count >= c.squad_size) break;
        if (i == extra || r[static_cast<std::size_t>(i)] != Pick::Free) continue;
        sum += score_of(pool, i);
        top = std::max(top, score_of(pool, i));
        ++count;
    }
    return sum + top;
}

[[noreturn]] void throw_infeasible(const Pool& pool, const SelectionConstraints& c) {
    std::array<int, 4> have{};
    for (const auto& item : pool.items) ++have[slot(item.position)];
    bool any_formation = false;
    for (const auto& f : legal_formations(c)) {
        bool fits = true;
        for (std::size_t p = 0; p < 4; ++p) fits = fits && have[p] >= f.counts[p];
        any_formation = any_formation || fits;
    }
    if (!any_formation) {
        for (std::size_t p = 0; p < 4; ++p) {
            if (have[p] < c.min_count[p]) {
                throw InfeasibleError("formation: need at least " + std::to_string(c.min_count[p]) + " " +
                                      std::string(to_string(kAllPositions[p])) + ", pool has " +
                                      std::to_string(have[p]));
            }
        }
        throw InfeasibleError("formation: pool of " + std::to_string(pool.items.size()) +
                              " players cannot fill any legal formation");
    }
    if (c.club_cap_enabled) {
        Restriction r(pool.items.size(), Pick::Free);
        bool feasible = false;
        for (const auto& f : legal_formations(c)) feasible = feasible || max_sum(pool, c, f, r, nullptr).has_value();
        if (!feasible) {
            throw InfeasibleError("club_cap: no legal formation with at most " + std::to_string(c.club_cap) +
                                  " players per team");
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", c.budget);
    throw InfeasibleError(std::string("budget: no legal lineup costs at most ") + buf);
}

bool feasible_subset(const Pool& pool, const SelectionConstraints& c, const std::vector<int>& chosen,
                     std::vector<int>& club) {
    std::array<int, 4> counts{};
    double cost = 0.0;
    std::fill(club.begin(), club.end(), 0);
    for (int i : chosen) {
        const auto& item = pool.items[static_cast<std::size_t>(i)];
        ++counts[slot(item.position)];
        cost += item.cost;
        if (c.club_cap_enabled && ++club[static_cast<std::size_t>(pool.team[static_cast<std::size_t>(i)])] > c.club_cap) {
            return false;
        }
    }
    for (std::size_t p = 0; p < 4; ++p) {
        if (counts[p] < c.min_count[p] || counts[p] > c.max_count[p]) return false;
    }
    return !c.budget_enabled || cost <= c.budget + 1e-9;
}

}  // namespace

Lineup select_lineup(std::span<const Candidate> candidates, const SelectionConstraints& constraints) {
    constraints.validate();
    const Pool pool = prepare(candidates);
    const std::size_t n = pool.items.size();
    Restriction r(n, Pick::Free);
    std::optional<BudgetSearch> budget;
    if (constraints.budget_enabled) budget.emplace(pool, constraints);
    constexpr double kNoFloor = -std::numeric_limits<double>::infinity();
    auto optimum = [&](double floor, bool first_only) {
        return budget ? budget->run(r, floor, first_only) : best_without_budget(pool, constraints, r);
    };

    const Best first = optimum(kNoFloor, false);
    if (!first.found) throw_infeasible(pool, constraints);
    const double target = first.objective - tolerance(first.objective);

    // Smallest id set among the optimal squads: admit ids in ascending order
    // whenever an optimal squad still exists with them.
    std::vector<int> witness = first.chosen;
    int admitted = 0;
    for (std::size_t i = 0; i < n && admitted < constraints.squad_size; ++i) {
        const int id = static_cast<int>(i);
        if (std::binary_search(witness.begin(), witness.end(), id)) {
            r[i] = Pick::In;
            ++admitted;
            continue;
        }
        if (loose_bound(pool, constraints, r, id) < target) {
            r[i] = Pick::Out;
            continue;
        }
        r[i] = Pick::In;
        const Best with = optimum(target, true);
        if (with.found && with.objective >= target) {
            witness = with.chosen;
            ++admitted;
        } else {
            r[i] = Pick::Out;
        }
    }
    return to_lineup(pool, witness);
}

Lineup brute_force_lineup(std::span<const Candidate> candidates, const SelectionConstraints& constraints) {
    constraints.validate();
    if (candidates.size() > kBruteForceLimit) {
        throw RefusalError("brute force refuses pools larger than " + std::to_string(kBruteForceLimit) +
                           " candidates (got " + std::to_string(candidates.size()) + ")");
    }
    const Pool pool = prepare(candidates);
    const auto n = static_cast<int>(pool.items.size());
    const int k = constraints.squad_size;
    Best best;
    if (n >= k) {
        std::vector<int> chosen(static_cast<std::size_t>(k));
        std::iota(chosen.begin(), chosen.end(), 0);
        std::vector<int> club(static_cast<std::size_t>(pool.team_count), 0);
        for (;;) {
            if (feasible_subset(pool, constraints, chosen, club)) offer(best, objective_of(pool, chosen), chosen);
            int pos = k - 1;
            while (pos >= 0 && chosen[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
            if (pos < 0) break;
            ++chosen[static_cast<std::size_t>(pos)];
            for (int j = pos + 1; j < k; ++j) chosen[static_cast<std::size_t>(j)] = chosen[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    if (!best.found) throw_infeasible(pool, constraints);
    return to_lineup(pool, best.chosen);
}

std::vector<std::string> lineup_violations(const Lineup& lineup, const SelectionConstraints& c) {
    std::vector<std::string> out;
    if (static_cast<int>(lineup.players.size()) != c.squad_size) {
        out.push_back("lineup has " + std::to_string(lineup.players.size()) + " players, expected " +
                      std::to_string(c.squad_size));
    }
    std::array<int, 4> counts{};
    std::map<TeamId, int> clubs;
    std::set<PlayerId> ids;
    double cost = 0.0;
    for (const auto& p : lineup.players) {
        ++counts[static_cast<std::size_t>(p.position)];
        ++clubs[p.team_id];
        cost += p.cost;
        if (!ids.insert(p.player_id).second) out.push_back("duplicate player " + p.player_id);
    }
    for (std::size_t p = 0; p < 4; ++p) {
        if (counts[p] < c.min_count[p] || counts[p] > c.max_count[p]) {
            out.push_back(std::string(to_string(kAllPositions[p])) + " count " + std::to_string(counts[p]) +
                          " outside " + std::to_string(c.min_count[p]) + ".." + std::to_string(c.max_count[p]));
        }
        if (counts[p] != lineup.formation.counts[p]) out.push_back("formation does not match player positions");
    }
    if (c.club_cap_enabled) {
        for (const auto& [team, n] : clubs) {
            if (n > c.club_cap) out.push_back("team " + team + " has " + std::to_string(n) + " players");
        }
    }
    if (c.budget_enabled && cost > c.budget + 1e-9) out.push_back("lineup exceeds the budget");
    if (ids.count(lineup.captain) == 0) {
        out.push_back("captain " + lineup.captain + " is not in the lineup");
    } else if (choose_captain(lineup.players) != lineup.captain) {
        out.push_back("captain " + lineup.captain + " is not the top predicted scorer");
    }
    return out;
}

json to_json(const Candidate& c) {
    return {{"player_id", c.player_id},
            {"position", std::string(to_string(c.position))},
            {"team_id", c.team_id},
            {"predicted_score", c.predicted_score},
            {"cost", c.cost}};
}

Candidate candidate_from_json(const json& j) {
    try {
        Candidate c;
        c.player_id = j.at("player_id").get<std::string>();
        c.position = parse_position(j.at("position").get<std::string>());
        c.team_id = j.at("team_id").get<std::string>();
        c.predicted_score = j.at("predicted_score").get<double>();
        c.cost = j.value("cost", 0.0);
        return c;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed candidate: ") + e.what());
    }
}

json to_json(const Lineup& l) {
    json players = json::array();
    for (const auto& p : l.players) players.push_back(to_json(p));
    return {{"formation", l.formation.to_string()},
            {"captain", l.captain},
            {"objective", l.objective()},
            {"players", std::move(players)}};
}

}  // namespace squadforge
