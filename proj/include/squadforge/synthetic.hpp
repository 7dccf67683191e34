#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "squadforge/domain.hpp"
#include "squadforge/features.hpp"
#include "squadforge/odds.hpp"
#include "squadforge/sentiment.hpp"

namespace squadforge {

// Seeded toy league. Each gameweek every team gets a strength shock that the
// bookmaker prices into the odds, and every player a form shock that blog
// posts describe; both move the actual returns.
struct SyntheticOptions {
    std::uint64_t seed = 1;
    int teams = 6;          // even
    int gameweeks = 12;
    double team_shock = 0.8;    // sd of the per-gameweek team strength shock
    double form_shock = 1.0;    // sd of the per-gameweek player form shock
    double document_rate = 0.85;  // chance a player is written about in a gameweek
};

struct SyntheticSeason {
    std::vector<Snapshot> snapshots;  // gameweeks 1..N
    std::map<int, std::vector<FixtureOdds>> fixtures;
    std::map<int, std::vector<SentimentDocument>> documents;
    std::vector<RosterEntry> roster;
    std::string lexicon_tsv;
    std::string negations_txt;
};

// 10 players per team: 2 GK, 3 DEF, 3 MID, 2 FWD.
SyntheticSeason generate_season(const SyntheticOptions& options);

StreamData stream_data(const SyntheticSeason& season);

// Fills `store` with every snapshot.
void load_into(const SyntheticSeason& season, SnapshotStore& store);

// Writes the season as feed files under `dir`:
//   feeds/players_gwNN.json, feeds/odds_gwNN.json   (file-mode feed source)
//   odds/gw_NN.json, documents/gw_NN.jsonl          (stream data)
//   aliases.json, lexicon.tsv, negations.txt
void write_season(const SyntheticSeason& season, const std::filesystem::path& dir);

}  // namespace squadforge
