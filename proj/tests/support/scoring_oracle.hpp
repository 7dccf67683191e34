#pragma once

#include <random>

#include "squadforge/domain.hpp"

namespace squadforge::testing {

// Second, deliberately naive implementation of the 2018/19 points rules:
// one branch per rule, per-unit loops instead of division.
inline int oracle_points(const PlayerGameweekRecord& r) {
    int pts = 0;
    if (r.minutes >= 1 && r.minutes <= 59) pts += 1;
    if (r.minutes >= 60) pts += 2;

    int per_goal = 0;
    int per_clean_sheet = 0;
    switch (r.position) {
        case Position::GK: per_goal = 6; per_clean_sheet = 4; break;
        case Position::DEF: per_goal = 6; per_clean_sheet = 4; break;
        case Position::MID: per_goal = 5; per_clean_sheet = 1; break;
        case Position::FWD: per_goal = 4; per_clean_sheet = 0; break;
    }
    for (int i = 0; i < r.goals; ++i) pts += per_goal;
    for (int i = 0; i < r.assists; ++i) pts += 3;
    if (r.clean_sheet && r.minutes >= 60) pts += per_clean_sheet;

    if (r.position == Position::GK) {
        for (int s = 3; s <= r.saves; s += 3) pts += 1;
    }
    if (r.position == Position::GK || r.position == Position::DEF) {
        for (int c = 2; c <= r.goals_conceded; c += 2) pts -= 1;
    }
    for (int i = 0; i < r.penalties_saved; ++i) pts += 5;
    for (int i = 0; i < r.penalties_missed; ++i) pts -= 2;
    for (int i = 0; i < r.yellow_cards; ++i) pts -= 1;
    for (int i = 0; i < r.red_cards; ++i) pts -= 3;
    for (int i = 0; i < r.own_goals; ++i) pts -= 2;
    return pts + r.bonus;
}

// Valid record with every scoring field exercised.
inline PlayerGameweekRecord random_scoring_record(std::mt19937_64& rng, int index) {
    auto pick = [&](int hi) { return static_cast<int>(rng() % static_cast<unsigned>(hi + 1)); };
    PlayerGameweekRecord r;
    r.player_id = "r" + std::to_string(index);
    r.gameweek = 1 + pick(37);
    r.position = static_cast<Position>(pick(3));
    r.team_id = "T";
    r.opponent_team_id = "U";
    const int bucket = pick(3);
    r.minutes = bucket == 0 ? 0 : (bucket == 1 ? 1 + pick(58) : 59 + pick(31));
    const bool played = r.minutes > 0;
    r.goals = played ? pick(4) : 0;
    r.assists = played ? pick(3) : 0;
    r.clean_sheet = played && pick(1) == 1;
    r.saves = pick(11);
    r.goals_conceded = pick(7);
    r.penalties_saved = pick(1);
    r.penalties_missed = pick(1);
    r.yellow_cards = pick(1);
    r.red_cards = pick(3) == 0 ? 1 : 0;
    r.own_goals = pick(4) == 0 ? 1 : 0;
    r.bonus = pick(3);
    r.cost = 5.0;
    return r;
}

}  // namespace squadforge::testing
