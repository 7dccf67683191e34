#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "squadforge/domain.hpp"

namespace squadforge {

struct Candidate {
    PlayerId player_id;
    Position position = Position::GK;
    TeamId team_id;
    double predicted_score = 0.0;
    double cost = 0.0;

    bool operator==(const Candidate&) const = default;
};

// Per-position counts, indexed by Position.
struct Formation {
    std::array<int, 4> counts{};

    int of(Position p) const { return counts[static_cast<std::size_t>(p)]; }
    std::string to_string() const;  // "1-4-4-2"
    bool operator==(const Formation&) const = default;
};

struct SelectionConstraints {
    std::array<int, 4> min_count{1, 3, 2, 1};
    std::array<int, 4> max_count{1, 5, 5, 3};
    int squad_size = 11;
    bool club_cap_enabled = true;
    int club_cap = 3;
    bool budget_enabled = false;
    double budget = 100.0;

    void validate() const;
};

// Every formation within the bounds that sums to squad_size (8 under the
// official rules).
std::vector<Formation> legal_formations(const SelectionConstraints& constraints);

struct Lineup {
    std::vector<Candidate> players;  // sorted by player_id
    PlayerId captain;
    Formation formation;

    // Sum of predicted scores with the captain counted twice.
    double objective() const;
};

// Argmax of predicted_score; ties go to the lowest player_id.
PlayerId choose_captain(std::span<const Candidate> players);

// Exact maximizer of the lineup objective.
// Ties resolve to the lexicographically smallest sorted player_id set.
// Throws InfeasibleError naming the binding constraint.
Lineup select_lineup(std::span<const Candidate> pool, const SelectionConstraints& constraints = {});

inline constexpr std::size_t kBruteForceLimit = 22;

// Exhaustive enumeration of all squad_size-subsets; same objective, tie-break
// and errors as select_lineup. Throws RefusalError above 22 candidates.
Lineup brute_force_lineup(std::span<const Candidate> pool, const SelectionConstraints& constraints = {});

// Empty when the lineup satisfies every rule; otherwise one message per violation.
std::vector<std::string> lineup_violations(const Lineup& lineup, const SelectionConstraints& constraints = {});

nlohmann::json to_json(const Lineup& lineup);
nlohmann::json to_json(const Candidate& candidate);
Candidate candidate_from_json(const nlohmann::json& j);

}  // namespace squadforge
