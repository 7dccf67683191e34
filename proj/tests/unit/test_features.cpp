#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "squadforge/errors.hpp"
#include "squadforge/features.hpp"
#include "squadforge/synthetic.hpp"
#include "test_support.hpp"

using namespace squadforge;
using squadforge::testing::sample_record;
using squadforge::testing::TempDir;

namespace {

// FeatureMatrix equality that treats masked (NaN) cells as equal.
bool same_matrix(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            if (a.is_missing(r, c) != b.is_missing(r, c)) return false;
            if (!a.is_missing(r, c) && a.at(r, c) != b.at(r, c)) return false;
        }
    }
    return true;
}

// Scrambles every outcome field of gameweeks >= from, keeping records valid.
std::vector<Snapshot> scramble_from(const std::vector<Snapshot>& season, int from, std::mt19937_64& rng) {
    std::vector<Snapshot> out;
    for (const auto& s : season) {
        if (s.gameweek < from) {
            out.push_back(s);
            continue;
        }
        std::vector<PlayerGameweekRecord> records = s.records;
        for (auto& r : records) {
            r.minutes = static_cast<int>(rng() % 91);
            const bool played = r.minutes > 0;
            r.goals = played ? static_cast<int>(rng() % 4) : 0;
            r.assists = played ? static_cast<int>(rng() % 3) : 0;
            r.clean_sheet = played && rng() % 2 == 0;
            r.saves = static_cast<int>(rng() % 7);
            r.bonus = static_cast<int>(rng() % 4);
            r.influence = static_cast<double>(rng() % 500) / 10.0;
            r.creativity = static_cast<double>(rng() % 500) / 10.0;
            r.threat = static_cast<double>(rng() % 500) / 10.0;
            r.total_points = static_cast<int>(rng() % 25) - 2;
        }
        out.push_back(make_snapshot(s.gameweek, records));
    }
    return out;
}

}  // namespace

TEST(Streams, ParseAndFormat) {
    EXPECT_EQ(parse_streams("stats,odds"), (StreamSet{true, true, false}));
    EXPECT_EQ(to_string(StreamSet::all()), "stats,odds,sentiment");
    EXPECT_THROW(parse_streams("stats,weather"), ConfigError);
}

TEST(Schema, PositionSpecificColumnsAndStreams) {
    const auto gk = schema(Position::GK, StreamSet::stats_only());
    EXPECT_TRUE(gk.index_of("saves_prev").has_value());
    EXPECT_FALSE(gk.index_of("goals_rolling3").has_value());
    const auto fwd = schema(Position::FWD, StreamSet::all());
    EXPECT_TRUE(fwd.index_of("goals_rolling3").has_value());
    EXPECT_TRUE(fwd.index_of("mean_polarity").has_value());
    EXPECT_FALSE(fwd.index_of("expected_low_scoring").has_value());
    EXPECT_TRUE(schema(Position::DEF, StreamSet::all()).index_of("expected_low_scoring").has_value());
    for (const auto& name : fwd.names) EXPECT_EQ(fwd.stream_of.count(name), 1u);
    EXPECT_EQ(fwd.stream_of.at("win_probability"), Stream::Odds);
    EXPECT_THROW(schema(Position::MID, StreamSet{false, true, true}), ConfigError);
}

TEST(BuildExample, RollingMeansOverLastThree) {
    std::vector<PlayerGameweekRecord> history;
    for (int gw = 1; gw <= 4; ++gw) {
        auto r = sample_record("p", gw, Position::MID, "A");
        r.total_points = gw * 2;
        r.goals = gw % 2;
        history.push_back(r);
    }
    PlayerPreview target = preview_of(sample_record("p", 5, Position::MID, "A"));
    target.was_home = true;
    const auto s = schema(Position::MID, StreamSet::all());
    const auto ex = build_example(history, target, 5, 9, std::nullopt, std::nullopt, s);
    ASSERT_TRUE(ex.has_value());
    EXPECT_EQ(ex->y, 1);
    EXPECT_DOUBLE_EQ(ex->x[*s.index_of("prev_points")], 8.0);
    EXPECT_DOUBLE_EQ(ex->x[*s.index_of("points_rolling3")], (4.0 + 6.0 + 8.0) / 3.0);
    EXPECT_DOUBLE_EQ(ex->x[*s.index_of("goals_rolling3")], (0.0 + 1.0 + 0.0) / 3.0);
    EXPECT_DOUBLE_EQ(ex->x[*s.index_of("was_home")], 1.0);
    const auto win = *s.index_of("win_probability");
    EXPECT_EQ(ex->missing_mask[win], 1);
    EXPECT_TRUE(std::isnan(ex->x[win]));

    EXPECT_FALSE(build_example({}, target, 5, 9, std::nullopt, std::nullopt, s).has_value());
    EXPECT_THROW(build_example(history, target, 4, 9, std::nullopt, std::nullopt, s), PreconditionError);
}

TEST(TrainingSet, RowsComeOnlyFromEarlierGameweeks) {
    SyntheticOptions opt;
    opt.seed = 21;
    opt.gameweeks = 8;
    const auto season = generate_season(opt);
    TempDir dir("train_rows");
    SnapshotStore store(dir.path());
    load_into(season, store);
    const auto streams = stream_data(season);
    for (Position p : kAllPositions) {
        const auto set = build_training_set(store, streams, 6, p, StreamSet::all());
        ASSERT_GT(set.x.rows(), 0u);
        EXPECT_EQ(set.x.rows(), set.y.size());
        EXPECT_EQ(set.x.cols(), set.schema.names.size());
        EXPECT_TRUE(std::is_sorted(set.keys.begin(), set.keys.end()));
        for (const auto& [id, gw] : set.keys) {
            EXPECT_GE(gw, 2);
            EXPECT_LE(gw, 5);
        }
    }
}

TEST(TrainingSet, NoLeakageProperty) {
    std::mt19937_64 rng(4);
    for (std::uint64_t seed : {31u, 32u, 33u}) {
        SyntheticOptions opt;
        opt.seed = seed;
        opt.gameweeks = 9;
        const auto season = generate_season(opt);
        const auto streams = stream_data(season);
        for (int g = 3; g <= 9; g += 3) {
            TempDir a("leak_a"), b("leak_b");
            SnapshotStore clean(a.path()), scrambled(b.path());
            for (const auto& s : season.snapshots) clean.put(s);
            for (const auto& s : scramble_from(season.snapshots, g, rng)) scrambled.put(s);
            for (Position p : kAllPositions) {
                const auto t1 = build_training_set(clean, streams, g, p, StreamSet::all());
                const auto t2 = build_training_set(scrambled, streams, g, p, StreamSet::all());
                EXPECT_TRUE(same_matrix(t1.x, t2.x)) << "train gw " << g;
                EXPECT_EQ(t1.y, t2.y);
                EXPECT_EQ(t1.keys, t2.keys);
                const auto p1 = build_prediction_set(clean, streams, g, p, StreamSet::all());
                const auto p2 = build_prediction_set(scrambled, streams, g, p, StreamSet::all());
                EXPECT_TRUE(same_matrix(p1.x, p2.x)) << "predict gw " << g;
                EXPECT_EQ(p1.keys, p2.keys);
                EXPECT_TRUE(p1.y.empty());
            }
        }
    }
}

TEST(Preview, FallsBackToLatestSnapshotAndOdds) {
    SyntheticOptions opt;
    opt.seed = 5;
    opt.gameweeks = 6;
    const auto season = generate_season(opt);
    TempDir dir("preview_fallback");
    SnapshotStore store(dir.path());
    for (const auto& s : season.snapshots) {
        if (s.gameweek <= 5) store.put(s);
    }
    const auto streams = stream_data(season);
    const auto stored = gameweek_preview(store, streams, 5);
    EXPECT_EQ(stored, store.preview(5));
    const auto ahead = gameweek_preview(store, streams, 6);
    EXPECT_EQ(ahead.size(), season.snapshots[5].records.size());
    std::map<PlayerId, PlayerPreview> actual;
    for (const auto& r : season.snapshots[5].records) actual[r.player_id] = preview_of(r);
    for (const auto& pv : ahead) {
        EXPECT_EQ(pv.was_home, actual.at(pv.player_id).was_home) << pv.player_id;
        EXPECT_EQ(pv.opponent_team_id, actual.at(pv.player_id).opponent_team_id);
    }
}

TEST(ExportCsv, WritesFeaturesLabelsAndSchema) {
    SyntheticOptions opt;
    opt.gameweeks = 5;
    const auto season = generate_season(opt);
    TempDir dir("export");
    SnapshotStore store(dir / "store");
    load_into(season, store);
    const auto set = build_training_set(store, stream_data(season), 5, Position::DEF, StreamSet::all());
    export_csv(set, dir / "out");
    const auto features = read_file(dir / "out" / "features_DEF.csv");
    EXPECT_EQ(features.substr(0, features.find('\n')).find("prev_points"), 0u);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "labels_DEF.csv"));
    const auto schema_json = nlohmann::json::parse(read_file(dir / "out" / "features_DEF.schema.json"));
    EXPECT_EQ(schema_json.dump().find(kFeatureSchemaVersion) != std::string::npos, true);
    std::size_t lines = 0;
    for (char c : features) lines += c == '\n';
    EXPECT_EQ(lines, set.x.rows() + 1);
}
