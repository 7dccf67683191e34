#include "squadforge/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "squadforge/errors.hpp"

namespace squadforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Position p) {
    switch (p) {
        case Position::GK: return "GK";
        case Position::DEF: return "DEF";
        case Position::MID: return "MID";
        case Position::FWD: return "FWD";
    }
    return "?";
}

Position parse_position(std::string_view code) {
    if (code == "GK") return Position::GK;
    if (code == "DEF") return Position::DEF;
    if (code == "MID") return Position::MID;
    if (code == "FWD") return Position::FWD;
    throw ValidationError("unknown position code '" + std::string(code) + "'");
}

std::string_view to_string(Availability a) {
    switch (a) {
        case Availability::Available: return "available";
        case Availability::Injured: return "injured";
        case Availability::Doubtful: return "doubtful";
        case Availability::Suspended: return "suspended";
        case Availability::Unavailable: return "unavailable";
    }
    return "?";
}

Availability parse_availability(std::string_view code) {
    if (code == "available") return Availability::Available;
    if (code == "injured") return Availability::Injured;
    if (code == "doubtful") return Availability::Doubtful;
    if (code == "suspended") return Availability::Suspended;
    if (code == "unavailable") return Availability::Unavailable;
    throw ValidationError("unknown availability '" + std::string(code) + "'");
}

void validate(const PlayerGameweekRecord& r) {
    auto fail = [&](const std::string& what) {
        throw ValidationError("record " + r.player_id + " gw " + std::to_string(r.gameweek) +
                              ": " + what);
    };
    if (r.player_id.empty()) fail("empty player_id");
    if (r.team_id.empty()) fail("empty team_id");
    if (r.gameweek < 1 || r.gameweek > 38) fail("gameweek out of range 1..38");
    if (r.minutes < 0) fail("negative minutes");
    const std::pair<const char*, int> counts[] = {
        {"goals", r.goals},
        {"assists", r.assists},
        {"saves", r.saves},
        {"bonus", r.bonus},
        {"yellow_cards", r.yellow_cards},
        {"red_cards", r.red_cards},
        {"own_goals", r.own_goals},
        {"penalties_missed", r.penalties_missed},
        {"penalties_saved", r.penalties_saved},
        {"goals_conceded", r.goals_conceded},
    };
    for (const auto& [name, value] : counts) {
        if (value < 0) fail(std::string("negative ") + name);
    }
    const std::pair<const char*, double> indices[] = {
        {"influence", r.influence}, {"creativity", r.creativity}, {"threat", r.threat},
        {"cost", r.cost}};
    for (const auto& [name, value] : indices) {
        if (!(value >= 0.0) || !std::isfinite(value)) fail(std::string("invalid ") + name);
    }
    if (r.minutes == 0 && (r.goals != 0 || r.assists != 0 || r.clean_sheet)) {
        fail("goals/assists/clean_sheet recorded with zero minutes");
    }
}

json to_json(const PlayerGameweekRecord& r) {
    json j;
    j["player_id"] = r.player_id;
    j["gameweek"] = r.gameweek;
    j["position"] = std::string(to_string(r.position));
    j["team_id"] = r.team_id;
    j["minutes"] = r.minutes;
    j["goals"] = r.goals;
    j["assists"] = r.assists;
    j["saves"] = r.saves;
    j["bonus"] = r.bonus;
    j["yellow_cards"] = r.yellow_cards;
    j["red_cards"] = r.red_cards;
    j["own_goals"] = r.own_goals;
    j["penalties_missed"] = r.penalties_missed;
    j["penalties_saved"] = r.penalties_saved;
    j["goals_conceded"] = r.goals_conceded;
    j["clean_sheet"] = r.clean_sheet;
    j["influence"] = r.influence;
    j["creativity"] = r.creativity;
    j["threat"] = r.threat;
    j["total_points"] = r.total_points;
    j["was_home"] = r.was_home;
    j["opponent_team_id"] = r.opponent_team_id;
    j["cost"] = r.cost;
    j["availability"] = std::string(to_string(r.availability));
    return j;
}

namespace {

template <typename T>
T field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(std::string("missing field '") + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("field '") + name + "' has the wrong type");
    }
}

}  // namespace

PlayerGameweekRecord record_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("record is not a JSON object");
    PlayerGameweekRecord r;
    r.player_id = field<std::string>(j, "player_id");
    r.gameweek = field<int>(j, "gameweek");
    r.position = parse_position(field<std::string>(j, "position"));
    r.team_id = field<std::string>(j, "team_id");
    r.minutes = field<int>(j, "minutes");
    r.goals = field<int>(j, "goals");
    r.assists = field<int>(j, "assists");
    r.saves = field<int>(j, "saves");
    r.bonus = field<int>(j, "bonus");
    r.yellow_cards = field<int>(j, "yellow_cards");
    r.red_cards = field<int>(j, "red_cards");
    r.own_goals = field<int>(j, "own_goals");
    r.penalties_missed = field<int>(j, "penalties_missed");
    r.penalties_saved = field<int>(j, "penalties_saved");
    r.goals_conceded = field<int>(j, "goals_conceded");
    r.clean_sheet = field<bool>(j, "clean_sheet");
    r.influence = field<double>(j, "influence");
    r.creativity = field<double>(j, "creativity");
    r.threat = field<double>(j, "threat");
    r.total_points = field<int>(j, "total_points");
    r.was_home = field<bool>(j, "was_home");
    r.opponent_team_id = field<std::string>(j, "opponent_team_id");
    r.cost = field<double>(j, "cost");
    r.availability = parse_availability(field<std::string>(j, "availability"));
    return r;
}

void validate(const Snapshot& s) {
    if (s.gameweek < 1 || s.gameweek > 38) {
        throw ValidationError("snapshot gameweek " + std::to_string(s.gameweek) +
                              " out of range 1..38");
    }
    std::set<std::string_view> seen;
    for (const auto& r : s.records) {
        if (r.gameweek != s.gameweek) {
            throw ValidationError("record " + r.player_id + " has gameweek " +
                                  std::to_string(r.gameweek) + " in snapshot for gameweek " +
                                  std::to_string(s.gameweek));
        }
        if (!seen.insert(r.player_id).second) {
            throw ValidationError("duplicate player_id " + r.player_id + " in gameweek " +
                                  std::to_string(s.gameweek));
        }
        validate(r);
    }
}

Snapshot make_snapshot(int gameweek, std::vector<PlayerGameweekRecord> records) {
    Snapshot s;
    s.gameweek = gameweek;
    s.records = std::move(records);
    validate(s);
    std::sort(s.records.begin(), s.records.end(),
              [](const auto& a, const auto& b) { return a.player_id < b.player_id; });
    s.content_digest = compute_digest(s);
    return s;
}

std::string canonical_body(const Snapshot& s) {
    std::vector<const PlayerGameweekRecord*> sorted;
    sorted.reserve(s.records.size());
    for (const auto& r : s.records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->player_id < b->player_id; });
    json records = json::array();
    for (const auto* r : sorted) records.push_back(to_json(*r));
    json body;
    body["gameweek"] = s.gameweek;
    body["records"] = std::move(records);
    return body.dump();
}

std::string compute_digest(const Snapshot& s) { return sha256_hex(canonical_body(s)); }

std::string serialize(const Snapshot& s) {
    json j = json::parse(canonical_body(s));
    j["content_digest"] = compute_digest(s);
    j["schema_version"] = 1;
    return j.dump() + "\n";
}

Snapshot deserialize_snapshot(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("snapshot is not valid JSON: ") + e.what());
    }
    Snapshot s;
    s.gameweek = field<int>(j, "gameweek");
    const auto& records = j.at("records");
    if (!records.is_array()) throw ParseError("snapshot 'records' is not an array");
    for (const auto& rj : records) s.records.push_back(record_from_json(rj));
    validate(s);
    s.content_digest = compute_digest(s);
    if (auto it = j.find("content_digest"); it != j.end() && it->get<std::string>() != s.content_digest) {
        throw ValidationError("snapshot for gameweek " + std::to_string(s.gameweek) +
                              " fails its content digest");
    }
    return s;
}

// --- store -----------------------------------------------------------------

SnapshotStore::SnapshotStore(fs::path directory) : directory_(std::move(directory)) {
    std::error_code ec;
    fs::create_directories(directory_, ec);
    if (ec) throw IoError("cannot create store directory " + directory_.string() + ": " + ec.message());
    load();
}

std::string SnapshotStore::file_name(int gameweek) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "gw_%02d.json", gameweek);
    return buf;
}

void SnapshotStore::load() {
    std::lock_guard lock(mutex_);
    snapshots_.clear();
    for (const auto& entry : fs::directory_iterator(directory_)) {
        const auto name = entry.path().filename().string();
        if (!entry.is_regular_file() || name.rfind("gw_", 0) != 0 || entry.path().extension() != ".json") {
            continue;
        }
        Snapshot s = deserialize_snapshot(read_file(entry.path()));
        if (file_name(s.gameweek) != name) {
            throw ValidationError("file " + name + " holds gameweek " + std::to_string(s.gameweek));
        }
        snapshots_.emplace(s.gameweek, std::move(s));
    }
}

void SnapshotStore::write_index() const {
    json index = json::array();
    for (const auto& [gw, s] : snapshots_) {
        index.push_back({{"gameweek", gw}, {"digest", s.content_digest}});
    }
    write_file_atomic(directory_ / "index.json", json{{"snapshots", index}}.dump() + "\n");
}

int SnapshotStore::put(const Snapshot& snapshot) {
    validate(snapshot);
    const std::string digest = compute_digest(snapshot);
    std::lock_guard lock(mutex_);
    if (auto it = snapshots_.find(snapshot.gameweek); it != snapshots_.end()) {
        if (it->second.content_digest == digest) return snapshot.gameweek;
        throw ConflictError("gameweek " + std::to_string(snapshot.gameweek) +
                            " already stored with digest " + it->second.content_digest);
    }
    Snapshot canonical = make_snapshot(snapshot.gameweek, snapshot.records);
    write_file_atomic(directory_ / file_name(canonical.gameweek), serialize(canonical));
    snapshots_.emplace(canonical.gameweek, std::move(canonical));
    write_index();
    return snapshot.gameweek;
}

std::vector<Snapshot> SnapshotStore::get_history(int up_to_gameweek) const {
    std::lock_guard lock(mutex_);
    std::vector<Snapshot> out;
    for (auto it = snapshots_.begin(); it != snapshots_.end() && it->first < up_to_gameweek; ++it) {
        out.push_back(it->second);
    }
    return out;
}

std::optional<Snapshot> SnapshotStore::get(int gameweek) const {
    std::lock_guard lock(mutex_);
    if (auto it = snapshots_.find(gameweek); it != snapshots_.end()) return it->second;
    return std::nullopt;
}

std::vector<PlayerPreview> SnapshotStore::preview(int gameweek) const {
    std::lock_guard lock(mutex_);
    std::vector<PlayerPreview> out;
    if (auto it = snapshots_.find(gameweek); it != snapshots_.end()) {
        for (const auto& r : it->second.records) out.push_back(preview_of(r));
    }
    return out;
}

std::vector<int> SnapshotStore::gameweeks() const {
    std::lock_guard lock(mutex_);
    std::vector<int> out;
    for (const auto& [gw, _] : snapshots_) out.push_back(gw);
    return out;
}

bool SnapshotStore::contains(int gameweek) const {
    std::lock_guard lock(mutex_);
    return snapshots_.count(gameweek) != 0;
}

// --- pure operations ---------------------------------------------------------

std::vector<PlayerGameweekRecord> filter_eligible(std::span<const PlayerGameweekRecord> records,
                                                  const std::map<PlayerId, int>& previous_minutes) {
    std::vector<PlayerGameweekRecord> out;
    for (const auto& r : records) {
        if (r.availability == Availability::Injured || r.availability == Availability::Suspended ||
            r.availability == Availability::Unavailable) {
            continue;
        }
        auto it = previous_minutes.find(r.player_id);
        if (it == previous_minutes.end() || it->second <= 0) continue;
        out.push_back(r);
    }
    return out;
}

int label_captain(int total_points) { return total_points > 6 ? 1 : 0; }

PlayerPreview preview_of(const PlayerGameweekRecord& r) {
    return PlayerPreview{r.player_id, r.position, r.team_id, r.was_home,
                         r.opponent_team_id, r.cost, r.availability};
}

// --- file helpers ------------------------------------------------------------

void write_file_atomic(const fs::path& path, std::string_view contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("internal", "sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

}  // namespace squadforge
