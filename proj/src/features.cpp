#include "squadforge/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "squadforge/errors.hpp"
#include "squadforge/ingest.hpp"

namespace squadforge {

namespace fs = std::filesystem;
using nlohmann::json;

// --- streams -------------------------------------------------------------------------

bool StreamSet::contains(Stream s) const {
    switch (s) {
        case Stream::Stats: return stats;
        case Stream::Odds: return odds;
        case Stream::Sentiment: return sentiment;
    }
    return false;
}

std::string_view to_string(Stream s) {
    switch (s) {
        case Stream::Stats: return "stats";
        case Stream::Odds: return "odds";
        case Stream::Sentiment: return "sentiment";
    }
    return "?";
}

StreamSet parse_streams(std::string_view text) {
    StreamSet out{false, false, false};
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item == "stats") {
            out.stats = true;
        } else if (item == "odds") {
            out.odds = true;
        } else if (item == "sentiment") {
            out.sentiment = true;
        } else if (!item.empty()) {
            throw ConfigError("unknown stream '" + item + "' (expected stats, odds, sentiment)");
        }
    }
    if (!out.stats && !out.odds && !out.sentiment) throw ConfigError("no streams enabled");
    if (!out.stats) throw ConfigError("the stats stream is always required");
    return out;
}

std::string to_string(const StreamSet& s) {
    std::string out;
    for (Stream st : {Stream::Stats, Stream::Odds, Stream::Sentiment}) {
        if (!s.contains(st)) continue;
        if (!out.empty()) out += ",";
        out += to_string(st);
    }
    return out;
}

// --- schema --------------------------------------------------------------------------

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    return std::nullopt;
}

FeatureSchema schema(Position position, const StreamSet& streams) {
    if (!streams.stats && !streams.odds && !streams.sentiment) throw ConfigError("no streams enabled");
    if (!streams.stats) throw ConfigError("the stats stream is always required");
    FeatureSchema s;
    s.position = position;
    s.streams = streams;
    auto add = [&](const char* name, Stream stream) {
        s.names.emplace_back(name);
        s.stream_of.emplace(name, stream);
    };
    for (const char* name : {"prev_points", "points_rolling3", "minutes_rolling3", "influence_rolling3",
                             "creativity_rolling3", "threat_rolling3", "bonus_prev", "cost", "was_home"}) {
        add(name, Stream::Stats);
    }
    const bool defensive = position == Position::GK || position == Position::DEF;
    switch (position) {
        case Position::GK:
            add("saves_prev", Stream::Stats);
            add("clean_sheet_rate", Stream::Stats);
            break;
        case Position::DEF:
            add("clean_sheet_rate", Stream::Stats);
            break;
        case Position::MID:
        case Position::FWD:
            add("goals_rolling3", Stream::Stats);
            add("assists_rolling3", Stream::Stats);
            break;
    }
    if (streams.odds) {
        add("win_probability", Stream::Odds);
        add("draw_probability", Stream::Odds);
        if (defensive) {
            add("loss_probability", Stream::Odds);
            add("expected_low_scoring", Stream::Odds);
        }
    }
    if (streams.sentiment) {
        add("mean_polarity", Stream::Sentiment);
        add("mention_count", Stream::Sentiment);
    }
    return s;
}

double missing_sentinel() { return std::numeric_limits<double>::quiet_NaN(); }

// --- examples ------------------------------------------------------------------------

std::optional<LabeledExample> build_example(std::span<const PlayerGameweekRecord> history,
                                            const PlayerPreview& target, int target_gw,
                                            std::optional<int> target_points,
                                            const std::optional<OddsFeatures>& odds,
                                            const std::optional<PlayerSentiment>& sentiment,
                                            const FeatureSchema& schema) {
    if (history.empty()) return std::nullopt;
    for (const auto& r : history) {
        if (r.gameweek >= target_gw) {
            throw PreconditionError("history for " + r.player_id + " contains gameweek " +
                                    std::to_string(r.gameweek) + " >= target " + std::to_string(target_gw));
        }
    }
    const auto& last = history.back();
    const std::size_t window = std::min<std::size_t>(kRollingWindow, history.size());
    const auto recent = history.subspan(history.size() - window);
    auto mean = [&](auto&& get) {
        double sum = 0.0;
        for (const auto& r : recent) sum += get(r);
        return sum / static_cast<double>(recent.size());
    };

    LabeledExample ex;
    ex.player_id = target.player_id;
    ex.gameweek = target_gw;
    if (target_points) ex.y = label_captain(*target_points);
    ex.x.reserve(schema.names.size());
    ex.missing_mask.reserve(schema.names.size());
    auto put = [&](std::optional<double> v) {
        ex.x.push_back(v ? *v : missing_sentinel());
        ex.missing_mask.push_back(v ? 0 : 1);
    };

    for (const auto& name : schema.names) {
        if (name == "prev_points") put(last.total_points);
        else if (name == "points_rolling3") put(mean([](const auto& r) { return r.total_points; }));
        else if (name == "minutes_rolling3") put(mean([](const auto& r) { return r.minutes; }));
        else if (name == "influence_rolling3") put(mean([](const auto& r) { return r.influence; }));
        else if (name == "creativity_rolling3") put(mean([](const auto& r) { return r.creativity; }));
        else if (name == "threat_rolling3") put(mean([](const auto& r) { return r.threat; }));
        else if (name == "bonus_prev") put(last.bonus);
        else if (name == "cost") put(target.cost);
        else if (name == "was_home") put(target.was_home ? 1.0 : 0.0);
        else if (name == "saves_prev") put(last.saves);
        else if (name == "clean_sheet_rate") put(mean([](const auto& r) { return r.clean_sheet ? 1.0 : 0.0; }));
        else if (name == "goals_rolling3") put(mean([](const auto& r) { return r.goals; }));
        else if (name == "assists_rolling3") put(mean([](const auto& r) { return r.assists; }));
        else if (name == "win_probability") put(odds ? std::optional(odds->win_probability) : std::nullopt);
        else if (name == "draw_probability") put(odds ? std::optional(odds->draw_probability) : std::nullopt);
        else if (name == "loss_probability") put(odds ? std::optional(odds->loss_probability) : std::nullopt);
        else if (name == "expected_low_scoring") put(odds ? odds->expected_low_scoring : std::nullopt);
        else if (name == "mean_polarity") put(sentiment ? std::optional(sentiment->mean_polarity) : std::nullopt);
        else if (name == "mention_count")
            put(sentiment ? std::optional<double>(sentiment->mention_count) : std::nullopt);
        else throw ConfigError("schema names unknown feature '" + name + "'");
    }
    return ex;
}

// --- stream data -----------------------------------------------------------------------

StreamData::StreamData(const StreamData& other)
    : fixtures_(other.fixtures_),
      documents_(other.documents_),
      roster_(other.roster_),
      names_(other.names_),
      lexicon_(other.lexicon_),
      cap_(other.cap_) {}

StreamData& StreamData::operator=(const StreamData& other) {
    if (this == &other) return *this;
    fixtures_ = other.fixtures_;
    documents_ = other.documents_;
    roster_ = other.roster_;
    names_ = other.names_;
    lexicon_ = other.lexicon_;
    cap_ = other.cap_;
    std::lock_guard lock(cache_mutex_);
    sentiment_cache_.clear();
    return *this;
}

void StreamData::set_fixtures(int gameweek, std::vector<FixtureOdds> fixtures) {
    for (const auto& f : fixtures) validate(f);
    fixtures_[gameweek] = std::move(fixtures);
}

void StreamData::set_documents(int gameweek, std::vector<SentimentDocument> documents) {
    for (std::size_t i = 1; i < documents.size(); ++i) {
        if (documents[i].rank < documents[i - 1].rank) {
            throw PreconditionError("documents for gameweek " + std::to_string(gameweek) + " are not sorted by rank");
        }
    }
    documents_[gameweek] = std::move(documents);
    std::lock_guard lock(cache_mutex_);
    sentiment_cache_.erase(gameweek);
}

void StreamData::set_roster(std::vector<RosterEntry> roster) {
    roster_ = std::move(roster);
    names_.emplace(roster_);
    std::lock_guard lock(cache_mutex_);
    sentiment_cache_.clear();
}

void StreamData::set_lexicon(Lexicon lexicon) {
    lexicon_ = std::move(lexicon);
    std::lock_guard lock(cache_mutex_);
    sentiment_cache_.clear();
}

void StreamData::set_document_cap(int cap) {
    if (cap < 1 || cap > kMaxDocuments) throw ConfigError("document cap must be within 1..100");
    cap_ = cap;
    std::lock_guard lock(cache_mutex_);
    sentiment_cache_.clear();
}

const std::vector<FixtureOdds>* StreamData::fixtures(int gameweek) const {
    auto it = fixtures_.find(gameweek);
    return it == fixtures_.end() ? nullptr : &it->second;
}

std::optional<OddsFeatures> StreamData::odds_for(int gameweek, const TeamId& team, bool was_home) const {
    const auto* list = fixtures(gameweek);
    if (list == nullptr) return std::nullopt;
    for (const auto& f : *list) {
        const bool ours = was_home ? f.home_team_id == team : f.away_team_id == team;
        if (!ours) continue;
        const auto markets = normalize_fixture(f);
        try {
            return fixture_features(markets, was_home ? Side::Home : Side::Away);
        } catch (const FeatureUnavailableError&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<PlayerSentiment> StreamData::sentiment_for(int gameweek, const PlayerId& player) const {
    auto docs = documents_.find(gameweek);
    if (docs == documents_.end()) return std::nullopt;
    if (!names_ || !lexicon_) throw ConfigError("sentiment stream needs a roster and a lexicon");
    std::lock_guard lock(cache_mutex_);
    auto cached = sentiment_cache_.find(gameweek);
    if (cached == sentiment_cache_.end()) {
        cached = sentiment_cache_.emplace(gameweek, aggregate_all(docs->second, roster_, *names_, *lexicon_, cap_)).first;
    }
    if (auto it = cached->second.find(player); it != cached->second.end()) return it->second;
    PlayerSentiment neutral;
    neutral.player_id = player;
    neutral.documents_considered = std::min<int>(cap_, static_cast<int>(docs->second.size()));
    return neutral;
}

void StreamData::load_directory(const fs::path& data_dir) {
    auto gameweek_of = [](const fs::path& p) -> std::optional<int> {
        const auto stem = p.stem().string();
        if (stem.rfind("gw_", 0) != 0) return std::nullopt;
        try {
            return std::stoi(stem.substr(3));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    std::vector<fs::path> files;
    if (fs::is_directory(data_dir / "odds")) {
        for (const auto& e : fs::directory_iterator(data_dir / "odds")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        if (p.extension() != ".json") continue;
        if (auto gw = gameweek_of(p)) set_fixtures(*gw, parse_odds_payload(read_file(p), *gw));
    }
    files.clear();
    if (fs::is_directory(data_dir / "documents")) {
        for (const auto& e : fs::directory_iterator(data_dir / "documents")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        if (p.extension() != ".jsonl") continue;
        if (auto gw = gameweek_of(p)) set_documents(*gw, load_documents(p));
    }
}

// --- training / prediction sets -------------------------------------------------------------

namespace {

using HistoryIndex = std::map<PlayerId, std::vector<PlayerGameweekRecord>>;

HistoryIndex index_history(const std::vector<Snapshot>& history) {
    HistoryIndex out;
    for (const auto& s : history) {
        for (const auto& r : s.records) out[r.player_id].push_back(r);
    }
    return out;
}

std::span<const PlayerGameweekRecord> history_before(const HistoryIndex& index, const PlayerId& id, int gameweek) {
    auto it = index.find(id);
    if (it == index.end()) return {};
    const auto& v = it->second;
    auto end = std::lower_bound(v.begin(), v.end(), gameweek,
                                [](const PlayerGameweekRecord& r, int g) { return r.gameweek < g; });
    return {v.data(), static_cast<std::size_t>(end - v.begin())};
}

std::map<PlayerId, int> minutes_of(const Snapshot* s) {
    std::map<PlayerId, int> out;
    if (s == nullptr) return out;
    for (const auto& r : s->records) out[r.player_id] = r.minutes;
    return out;
}

bool is_available(Availability a) {
    return a != Availability::Injured && a != Availability::Suspended && a != Availability::Unavailable;
}

TrainingSet assemble(const FeatureSchema& sch, std::vector<LabeledExample> rows, bool labeled) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.player_id != b.player_id ? a.player_id < b.player_id : a.gameweek < b.gameweek;
    });
    TrainingSet out;
    out.schema = sch;
    out.x = FeatureMatrix(0, sch.names.size());
    for (const auto& r : rows) {
        out.x.append_row(r.x, r.missing_mask);
        if (labeled) out.y.push_back(*r.y);
        out.keys.emplace_back(r.player_id, r.gameweek);
    }
    return out;
}

std::optional<OddsFeatures> odds_if(const StreamSet& enabled, const StreamData& streams, int gw,
                                    const PlayerPreview& p) {
    if (!enabled.odds) return std::nullopt;
    return streams.odds_for(gw, p.team_id, p.was_home);
}

std::optional<PlayerSentiment> sentiment_if(const StreamSet& enabled, const StreamData& streams, int gw,
                                            const PlayerId& id) {
    if (!enabled.sentiment) return std::nullopt;
    return streams.sentiment_for(gw, id);
}

}  // namespace

TrainingSet build_training_set(const SnapshotStore& store, const StreamData& streams, int up_to_gw,
                               Position position, const StreamSet& enabled) {
    if (up_to_gw < 3) throw PreconditionError("training needs up_to_gw >= 3");
    const FeatureSchema sch = schema(position, enabled);
    const auto history = store.get_history(up_to_gw);
    const auto index = index_history(history);
    std::map<int, const Snapshot*> by_gw;
    for (const auto& s : history) by_gw[s.gameweek] = &s;

    std::vector<LabeledExample> rows;
    for (int g = 2; g <= up_to_gw - 1; ++g) {
        auto it = by_gw.find(g);
        if (it == by_gw.end()) continue;
        auto prev = by_gw.find(g - 1);
        const auto eligible =
            filter_eligible(it->second->records, minutes_of(prev == by_gw.end() ? nullptr : prev->second));
        for (const auto& rec : eligible) {
            if (rec.position != position) continue;
            const auto target = preview_of(rec);
            auto ex = build_example(history_before(index, rec.player_id, g), target, g, rec.total_points,
                                    odds_if(enabled, streams, g, target),
                                    sentiment_if(enabled, streams, g, rec.player_id), sch);
            if (ex) rows.push_back(std::move(*ex));
        }
    }
    if (rows.empty()) {
        throw EmptyDatasetError("no training rows for " + std::string(to_string(position)) + " before gameweek " +
                                std::to_string(up_to_gw) + " (no eligible players with prior appearances)");
    }
    return assemble(sch, std::move(rows), true);
}

std::vector<PlayerPreview> gameweek_preview(const SnapshotStore& store, const StreamData& streams, int target_gw) {
    auto stored = store.preview(target_gw);
    if (!stored.empty()) return stored;
    const auto history = store.get_history(target_gw);
    if (history.empty()) return {};
    std::vector<PlayerPreview> out;
    const auto* fixtures = streams.fixtures(target_gw);
    for (const auto& r : history.back().records) {
        PlayerPreview p = preview_of(r);
        if (fixtures != nullptr) {
            for (const auto& f : *fixtures) {
                if (f.home_team_id == p.team_id) {
                    p.was_home = true;
                    p.opponent_team_id = f.away_team_id;
                    break;
                }
                if (f.away_team_id == p.team_id) {
                    p.was_home = false;
                    p.opponent_team_id = f.home_team_id;
                    break;
                }
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

TrainingSet build_prediction_set(const SnapshotStore& store, const StreamData& streams, int target_gw,
                                 Position position, const StreamSet& enabled) {
    if (target_gw < 2) throw PreconditionError("prediction needs target_gw >= 2");
    const FeatureSchema sch = schema(position, enabled);
    const auto history = store.get_history(target_gw);
    const auto index = index_history(history);
    const Snapshot* prev = nullptr;
    if (!history.empty() && history.back().gameweek == target_gw - 1) prev = &history.back();
    const auto prev_minutes = minutes_of(prev);

    std::vector<LabeledExample> rows;
    for (const auto& p : gameweek_preview(store, streams, target_gw)) {
        if (p.position != position || !is_available(p.availability)) continue;
        auto m = prev_minutes.find(p.player_id);
        if (m == prev_minutes.end() || m->second <= 0) continue;
        auto ex = build_example(history_before(index, p.player_id, target_gw), p, target_gw, std::nullopt,
                                odds_if(enabled, streams, target_gw, p),
                                sentiment_if(enabled, streams, target_gw, p.player_id), sch);
        if (ex) rows.push_back(std::move(*ex));
    }
    return assemble(sch, std::move(rows), false);
}

// --- export ----------------------------------------------------------------------------

void export_csv(const TrainingSet& set, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    const std::string pos(to_string(set.schema.position));

    std::string features;
    for (std::size_t c = 0; c < set.schema.names.size(); ++c) {
        if (c) features += ",";
        features += set.schema.names[c];
    }
    features += "\n";
    char buf[64];
    for (std::size_t r = 0; r < set.x.rows(); ++r) {
        for (std::size_t c = 0; c < set.x.cols(); ++c) {
            if (c) features += ",";
            if (set.x.is_missing(r, c)) {
                features += "NA";
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", set.x.at(r, c));
                features += buf;
            }
        }
        features += "\n";
    }
    write_file_atomic(out_dir / ("features_" + pos + ".csv"), features);

    std::string labels = "player_id,gameweek,label\n";
    for (std::size_t r = 0; r < set.keys.size(); ++r) {
        labels += set.keys[r].first + "," + std::to_string(set.keys[r].second) + ",";
        labels += r < set.y.size() ? std::to_string(set.y[r]) : std::string("NA");
        labels += "\n";
    }
    write_file_atomic(out_dir / ("labels_" + pos + ".csv"), labels);

    json sidecar{{"position", pos},
                 {"streams", to_string(set.schema.streams)},
                 {"schema_version", set.schema.schema_version},
                 {"names", set.schema.names},
                 {"rows", set.x.rows()}};
    write_file_atomic(out_dir / ("features_" + pos + ".schema.json"), sidecar.dump(2) + "\n");
}

}  // namespace squadforge
