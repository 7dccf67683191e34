#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "squadforge/domain.hpp"
#include "squadforge/gbm.hpp"
#include "squadforge/odds.hpp"
#include "squadforge/sentiment.hpp"

namespace squadforge {

enum class Stream : std::uint8_t { Stats, Odds, Sentiment };

// A set of enabled data streams. Stats is always required.
struct StreamSet {
    bool stats = true;
    bool odds = false;
    bool sentiment = false;

    bool contains(Stream s) const;
    bool operator==(const StreamSet&) const = default;

    static StreamSet stats_only() { return {true, false, false}; }
    static StreamSet all() { return {true, true, true}; }
};

// "stats,odds,sentiment" <-> StreamSet. Parsing rejects unknown names.
StreamSet parse_streams(std::string_view text);
std::string to_string(const StreamSet& streams);
std::string_view to_string(Stream s);

inline constexpr const char* kFeatureSchemaVersion = "features-v1";
inline constexpr int kRollingWindow = 3;

struct FeatureSchema {
    Position position = Position::GK;
    std::vector<std::string> names;
    std::map<std::string, Stream> stream_of;
    std::string schema_version = kFeatureSchemaVersion;
    StreamSet streams;

    std::optional<std::size_t> index_of(std::string_view name) const;
};

// Throws ConfigError when stats is not enabled.
FeatureSchema schema(Position position, const StreamSet& streams);

struct LabeledExample {
    PlayerId player_id;
    int gameweek = 0;
    std::vector<double> x;
    std::optional<int> y;  // absent for prediction rows
    std::vector<std::uint8_t> missing_mask;
};

// Value stored in masked cells.
double missing_sentinel();

// `history` holds the player's records from gameweeks before `target_gw`
// only, ascending. Returns nullopt when there is no history.
std::optional<LabeledExample> build_example(std::span<const PlayerGameweekRecord> history,
                                            const PlayerPreview& target, int target_gw,
                                            std::optional<int> target_points,
                                            const std::optional<OddsFeatures>& odds,
                                            const std::optional<PlayerSentiment>& sentiment,
                                            const FeatureSchema& schema);

// Odds and blog documents keyed by gameweek, plus the roster and lexicon used
// to turn documents into per-player sentiment.
class StreamData {
public:
    StreamData() = default;
    StreamData(const StreamData& other);
    StreamData& operator=(const StreamData& other);

    void set_fixtures(int gameweek, std::vector<FixtureOdds> fixtures);
    void set_documents(int gameweek, std::vector<SentimentDocument> documents);
    void set_roster(std::vector<RosterEntry> roster);
    void set_lexicon(Lexicon lexicon);
    void set_document_cap(int cap);

    const std::vector<FixtureOdds>* fixtures(int gameweek) const;
    const std::vector<RosterEntry>& roster() const { return roster_; }

    // nullopt when no priced fixture for the team exists in that gameweek.
    std::optional<OddsFeatures> odds_for(int gameweek, const TeamId& team, bool was_home) const;
    // nullopt when no document batch exists for that gameweek.
    std::optional<PlayerSentiment> sentiment_for(int gameweek, const PlayerId& player) const;

    // Loads <dir>/odds/gw_NN.json and <dir>/documents/gw_NN.jsonl files that exist.
    void load_directory(const std::filesystem::path& data_dir);

private:
    std::map<int, std::vector<FixtureOdds>> fixtures_;
    std::map<int, std::vector<SentimentDocument>> documents_;
    std::vector<RosterEntry> roster_;
    std::optional<NameIndex> names_;
    std::optional<Lexicon> lexicon_;
    int cap_ = kMaxDocuments;
    mutable std::map<int, std::map<PlayerId, PlayerSentiment>> sentiment_cache_;
    mutable std::mutex cache_mutex_;
};

struct TrainingSet {
    FeatureSchema schema;
    FeatureMatrix x;
    std::vector<int> y;                              // empty for prediction sets
    std::vector<std::pair<PlayerId, int>> keys;      // (player_id, target gameweek)
};

// Rows for every eligible player of `position` and every target gameweek g
// with 2 <= g <= up_to_gw - 1, built from snapshots before up_to_gw only.
// Ordered by (player_id, gameweek).
TrainingSet build_training_set(const SnapshotStore& store, const StreamData& streams, int up_to_gw,
                               Position position, const StreamSet& enabled);

// Unlabeled rows for the eligible players of `position` at target_gw.
TrainingSet build_prediction_set(const SnapshotStore& store, const StreamData& streams, int target_gw,
                                 Position position, const StreamSet& enabled);

// Pre-match player list for target_gw: the stored preview when the gameweek
// exists, otherwise the latest earlier snapshot's players with fixtures taken
// from the odds for target_gw.
std::vector<PlayerPreview> gameweek_preview(const SnapshotStore& store, const StreamData& streams,
                                            int target_gw);

// features_<POS>.csv (header = schema names, masked cells "NA"),
// labels_<POS>.csv and features_<POS>.schema.json.
void export_csv(const TrainingSet& set, const std::filesystem::path& out_dir);

}  // namespace squadforge
