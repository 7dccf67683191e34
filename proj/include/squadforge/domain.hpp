#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace squadforge {

enum class Position : std::uint8_t { GK = 0, DEF = 1, MID = 2, FWD = 3 };

inline constexpr std::array<Position, 4> kAllPositions = {Position::GK, Position::DEF,
                                                           Position::MID, Position::FWD};

std::string_view to_string(Position p);
// Throws ValidationError on anything outside {GK, DEF, MID, FWD}.
Position parse_position(std::string_view code);

enum class Availability : std::uint8_t { Available, Injured, Doubtful, Suspended, Unavailable };

std::string_view to_string(Availability a);
Availability parse_availability(std::string_view code);

using PlayerId = std::string;
using TeamId = std::string;

struct PlayerGameweekRecord {
    PlayerId player_id;
    int gameweek = 0;
    Position position = Position::GK;
    TeamId team_id;
    int minutes = 0;
    int goals = 0;
    int assists = 0;
    int saves = 0;
    int bonus = 0;
    int yellow_cards = 0;
    int red_cards = 0;
    int own_goals = 0;
    int penalties_missed = 0;
    int penalties_saved = 0;
    int goals_conceded = 0;
    bool clean_sheet = false;
    double influence = 0.0;
    double creativity = 0.0;
    double threat = 0.0;
    int total_points = 0;
    bool was_home = false;
    TeamId opponent_team_id;
    double cost = 0.0;
    Availability availability = Availability::Available;

    bool operator==(const PlayerGameweekRecord&) const = default;
};

// Throws ValidationError naming the offending field.
void validate(const PlayerGameweekRecord& record);

nlohmann::json to_json(const PlayerGameweekRecord& record);
PlayerGameweekRecord record_from_json(const nlohmann::json& j);

// What is known about a player before a gameweek is played: no outcomes.
struct PlayerPreview {
    PlayerId player_id;
    Position position = Position::GK;
    TeamId team_id;
    bool was_home = false;
    TeamId opponent_team_id;
    double cost = 0.0;
    Availability availability = Availability::Available;

    bool operator==(const PlayerPreview&) const = default;
};

PlayerPreview preview_of(const PlayerGameweekRecord& record);

struct Snapshot {
    int gameweek = 0;
    std::vector<PlayerGameweekRecord> records;  // sorted by player_id
    std::string content_digest;                 // sha256 hex of the canonical body

    bool operator==(const Snapshot&) const = default;
};

// Validates, sorts records by player_id and stamps the digest.
Snapshot make_snapshot(int gameweek, std::vector<PlayerGameweekRecord> records);

// Checks the snapshot invariants; throws ValidationError.
void validate(const Snapshot& snapshot);

// Canonical body: sorted keys, no whitespace. The digest covers exactly this.
std::string canonical_body(const Snapshot& snapshot);
std::string compute_digest(const Snapshot& snapshot);

std::string serialize(const Snapshot& snapshot);
Snapshot deserialize_snapshot(std::string_view text);

// Append-only, one canonical JSON file per gameweek (gw_<NN>.json) plus
// index.json. Single writer, many readers; files are written to a temporary
// name and renamed into place.
class SnapshotStore {
public:
    explicit SnapshotStore(std::filesystem::path directory);

    // Returns the stored gameweek. Re-putting an identical snapshot is a no-op.
    int put(const Snapshot& snapshot);

    // Snapshots with gameweek < up_to_gameweek, ascending.
    std::vector<Snapshot> get_history(int up_to_gameweek) const;

    std::optional<Snapshot> get(int gameweek) const;

    // Pre-match view of a stored gameweek (fixture, price, availability) with
    // every outcome field stripped. Empty when the gameweek is not stored.
    std::vector<PlayerPreview> preview(int gameweek) const;
    std::vector<int> gameweeks() const;
    bool contains(int gameweek) const;

    const std::filesystem::path& directory() const { return directory_; }

    static std::string file_name(int gameweek);

private:
    void load();
    void write_index() const;

    std::filesystem::path directory_;
    std::map<int, Snapshot> snapshots_;
    mutable std::mutex mutex_;
};

// Drops injured, suspended and unavailable players, and players who did not
// play in the previous gameweek (absent from previous_minutes counts as 0).
std::vector<PlayerGameweekRecord> filter_eligible(
    std::span<const PlayerGameweekRecord> records,
    const std::map<PlayerId, int>& previous_minutes);

// 1 iff the player scored strictly more than six points.
int label_captain(int total_points);

// Atomically replaces `path` with `contents` (write to temp + rename).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

}  // namespace squadforge
