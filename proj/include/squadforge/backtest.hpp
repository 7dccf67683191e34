#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "squadforge/domain.hpp"
#include "squadforge/features.hpp"
#include "squadforge/gbm.hpp"
#include "squadforge/selector.hpp"

namespace squadforge {

// Official points rules. Indexed arrays follow Position order.
struct ScoringTable {
    std::string version = "2018-19";
    int appearance_short = 1;  // 1-59 minutes
    int appearance_full = 2;   // 60+ minutes
    std::array<int, 4> goal{6, 6, 5, 4};
    int assist = 3;
    std::array<int, 4> clean_sheet{4, 4, 1, 0};  // needs 60+ minutes
    int saves_per_point = 3;                     // goalkeepers only
    int conceded_per_deduction = 2;              // GK and DEF
    int penalty_save = 5;
    int penalty_miss = -2;
    int yellow_card = -1;
    int red_card = -3;
    int own_goal = -2;

    bool operator==(const ScoringTable&) const = default;
};

const ScoringTable& official_scoring_2018_19();

// Table for a named season; throws ConfigError for unknown versions.
ScoringTable scoring_table(std::string_view version);

int score_player(const PlayerGameweekRecord& record, const ScoringTable& table = official_scoring_2018_19());

// Sum over the XI with the captain counted twice. Players missing from
// `actuals` score 0.
int score_lineup(const Lineup& lineup, const std::map<PlayerId, PlayerGameweekRecord>& actuals,
                 const ScoringTable& table = official_scoring_2018_19());

struct BacktestConfig {
    std::string name;  // defaults to the stream names joined by '+'
    StreamSet streams;
};

BacktestConfig make_config(const StreamSet& streams);

struct BacktestOptions {
    GbmParams params;
    bool sweep = false;  // grid search per position and gameweek instead of fixed params
    std::vector<GbmParams> grid;  // empty: default_grid(params)
    int k_folds = 3;
    double precision_threshold = 0.5;
    SelectionConstraints constraints;
    ScoringTable table = official_scoring_2018_19();
};

struct GameweekResult {
    int gameweek = 0;
    int points = 0;
    int cumulative = 0;
    std::array<std::optional<double>, 4> precision;  // nullopt: no predicted positives
    Lineup lineup;
};

struct ConfigSeries {
    BacktestConfig config;
    std::vector<GameweekResult> gameweeks;
    int total_points = 0;
    double average_points = 0.0;
    std::array<std::optional<double>, 4> precision;  // pooled over the season
};

struct BacktestReport {
    int first_gw = 0;
    int last_gw = 0;
    std::vector<ConfigSeries> series;
};

// Walk-forward replay. For each gameweek g and configuration: train on data
// before g, predict g's eligible players, pick the XI and score it against
// g's actual records. Throws GapError when gameweeks 1..last_gw are not all
// stored and PreconditionError when first_gw < 3.
BacktestReport replay_season(const SnapshotStore& store, const StreamData& streams,
                             std::span<const BacktestConfig> configs, const BacktestOptions& options,
                             int first_gw, int last_gw);

// Reference figures for the 2018/19 season, printed next to real-data
// results. Not a pass/fail target.
struct ReferenceTargets {
    double baseline_average = 52.0;
    double multi_stream_average = 63.0;
    int baseline_total = 1994;
    int multi_stream_total = 2314;
};

std::string report_csv(const BacktestReport& report);
std::string cumulative_svg(const BacktestReport& report);
std::string report_summary(const BacktestReport& report, bool include_reference);

// Writes report.csv, cumulative.svg and summary.txt. Throws ValidationError
// on an empty report and IoError with the path on write failures.
void emit_report(const BacktestReport& report, const std::filesystem::path& out_dir,
                 bool include_reference = false);

}  // namespace squadforge
