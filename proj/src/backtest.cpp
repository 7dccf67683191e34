#include "squadforge/backtest.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "squadforge/errors.hpp"

namespace squadforge {

const ScoringTable& official_scoring_2018_19() {
    static const ScoringTable table{};
    return table;
}

ScoringTable scoring_table(std::string_view version) {
    if (version == official_scoring_2018_19().version) return official_scoring_2018_19();
    throw ConfigError("unknown scoring table '" + std::string(version) + "'");
}

int score_player(const PlayerGameweekRecord& r, const ScoringTable& t) {
    const auto pos = static_cast<std::size_t>(r.position);
    int points = 0;
    if (r.minutes >= 60) {
        points += t.appearance_full;
    } else if (r.minutes > 0) {
        points += t.appearance_short;
    }
    points += r.goals * t.goal[pos];
    points += r.assists * t.assist;
    if (r.clean_sheet && r.minutes >= 60) points += t.clean_sheet[pos];
    if (r.position == Position::GK && t.saves_per_point > 0) points += r.saves / t.saves_per_point;
    if ((r.position == Position::GK || r.position == Position::DEF) && t.conceded_per_deduction > 0) {
        points -= r.goals_conceded / t.conceded_per_deduction;
    }
    points += r.penalties_saved * t.penalty_save;
    points += r.penalties_missed * t.penalty_miss;
    points += r.yellow_cards * t.yellow_card;
    points += r.red_cards * t.red_card;
    points += r.own_goals * t.own_goal;
    points += r.bonus;
    return points;
}

int score_lineup(const Lineup& lineup, const std::map<PlayerId, PlayerGameweekRecord>& actuals,
                 const ScoringTable& table) {
    int total = 0;
    for (const auto& p : lineup.players) {
        const auto it = actuals.find(p.player_id);
        if (it == actuals.end()) continue;
        const int s = score_player(it->second, table);
        total += p.player_id == lineup.captain ? 2 * s : s;
    }
    return total;
}

BacktestConfig make_config(const StreamSet& streams) {
    std::string name = to_string(streams);
    std::replace(name.begin(), name.end(), ',', '+');
    return {name, streams};
}

namespace {

struct PositionPredictions {
    std::vector<double> scores;
    std::vector<int> labels;
};

std::optional<double> safe_precision(const PositionPredictions& p, double threshold) {
    try {
        return precision_at(p.scores, p.labels, threshold);
    } catch (const UndefinedMetricError&) {
        return std::nullopt;
    }
}

GbmParams choose_params(const TrainingSet& train, const BacktestOptions& options) {
    if (!options.sweep) return options.params;
    const std::vector<GbmParams> grid = options.grid.empty() ? default_grid(options.params) : options.grid;
    try {
        return sweep(train.x, train.y, {}, grid, options.k_folds, options.params.seed).best;
    } catch (const ConfigError&) {
        // too few examples of a class for the requested folds
        return options.params;
    }
}

void check_range(const SnapshotStore& store, int first_gw, int last_gw) {
    if (first_gw < 3) throw PreconditionError("first replayable gameweek is 3, got " + std::to_string(first_gw));
    if (last_gw < first_gw) {
        throw PreconditionError("empty gameweek range " + std::to_string(first_gw) + ".." + std::to_string(last_gw));
    }
    std::string missing;
    for (int g = 1; g <= last_gw; ++g) {
        if (store.contains(g)) continue;
        missing += (missing.empty() ? "" : ",") + std::to_string(g);
    }
    if (!missing.empty()) throw GapError("missing gameweeks: " + missing);
}

}  // namespace

BacktestReport replay_season(const SnapshotStore& store, const StreamData& streams,
                             std::span<const BacktestConfig> configs, const BacktestOptions& options,
                             int first_gw, int last_gw) {
    if (configs.empty()) throw ConfigError("backtest needs at least one configuration");
    options.params.validate();
    options.constraints.validate();
    check_range(store, first_gw, last_gw);

    BacktestReport report;
    report.first_gw = first_gw;
    report.last_gw = last_gw;
    for (const auto& config : configs) {
        ConfigSeries series;
        series.config = config;
        std::array<PositionPredictions, 4> pooled;
        int cumulative = 0;
        for (int g = first_gw; g <= last_gw; ++g) {
            const Snapshot actual_snapshot = *store.get(g);
            std::map<PlayerId, PlayerGameweekRecord> actuals;
            for (const auto& r : actual_snapshot.records) actuals.emplace(r.player_id, r);
            std::map<PlayerId, PlayerPreview> previews;
            for (auto& p : gameweek_preview(store, streams, g)) previews.emplace(p.player_id, p);

            GameweekResult result;
            result.gameweek = g;
            std::vector<Candidate> pool;
            for (Position pos : kAllPositions) {
                const TrainingSet train = build_training_set(store, streams, g, pos, config.streams);
                const BoostedModel model =
                    fit(train.x, train.y, {}, choose_params(train, options), train.schema.names,
                        train.schema.schema_version);
                const TrainingSet target = build_prediction_set(store, streams, g, pos, config.streams);
                const std::vector<double> proba = predict_proba(model, target.x);

                PositionPredictions week;
                for (std::size_t i = 0; i < proba.size(); ++i) {
                    const PlayerId& id = target.keys[i].first;
                    const PlayerPreview& preview = previews.at(id);
                    pool.push_back(Candidate{id, pos, preview.team_id, proba[i], preview.cost});
                    const auto it = actuals.find(id);
                    const int label = it == actuals.end() ? 0 : label_captain(it->second.total_points);
                    week.scores.push_back(proba[i]);
                    week.labels.push_back(label);
                }
                const auto idx = static_cast<std::size_t>(pos);
                result.precision[idx] = safe_precision(week, options.precision_threshold);
                pooled[idx].scores.insert(pooled[idx].scores.end(), week.scores.begin(), week.scores.end());
                pooled[idx].labels.insert(pooled[idx].labels.end(), week.labels.begin(), week.labels.end());
            }
            result.lineup = select_lineup(pool, options.constraints);
            result.points = score_lineup(result.lineup, actuals, options.table);
            cumulative += result.points;
            result.cumulative = cumulative;
            series.gameweeks.push_back(std::move(result));
        }
        series.total_points = cumulative;
        series.average_points = static_cast<double>(cumulative) / static_cast<double>(series.gameweeks.size());
        for (std::size_t p = 0; p < 4; ++p) series.precision[p] = safe_precision(pooled[p], options.precision_threshold);
        report.series.push_back(std::move(series));
    }
    return report;
}

// --- output ----------------------------------------------------------------------------

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string precision_cell(const std::optional<double>& p) { return p ? fmt("%.6f", *p) : "NA"; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void require_nonempty(const BacktestReport& report) {
    if (report.series.empty() || report.series.front().gameweeks.empty()) {
        throw ValidationError("report has no gameweeks");
    }
}

}  // namespace

std::string report_csv(const BacktestReport& report) {
    require_nonempty(report);
    std::string out = "gameweek,config,gw_points,cumulative_points,precision_gk,precision_def,precision_mid,precision_fwd\n";
    const std::size_t weeks = report.series.front().gameweeks.size();
    for (std::size_t w = 0; w < weeks; ++w) {
        for (const auto& s : report.series) {
            const auto& r = s.gameweeks.at(w);
            out += std::to_string(r.gameweek) + "," + csv_field(s.config.name) + "," + std::to_string(r.points) + "," +
                   std::to_string(r.cumulative);
            for (const auto& p : r.precision) out += "," + precision_cell(p);
            out += "\n";
        }
    }
    return out;
}

std::string cumulative_svg(const BacktestReport& report) {
    require_nonempty(report);
    static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    const double width = 800, height = 480, left = 70, right = 190, top = 40, bottom = 60;
    const double plot_w = width - left - right, plot_h = height - top - bottom;

    int lo = 0, hi = 0;
    for (const auto& s : report.series) {
        for (const auto& r : s.gameweeks) {
            lo = std::min(lo, r.cumulative);
            hi = std::max(hi, r.cumulative);
        }
    }
    if (hi == lo) hi = lo + 1;
    const int g0 = report.first_gw, g1 = report.last_gw;
    auto x_of = [&](int g) {
        return g1 == g0 ? left + plot_w / 2 : left + plot_w * (g - g0) / static_cast<double>(g1 - g0);
    };
    auto y_of = [&](double v) { return top + plot_h * (1.0 - (v - lo) / static_cast<double>(hi - lo)); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">Cumulative points</text>\n";
    // axes
    svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\"/>\n";
    for (int g = g0; g <= g1; ++g) {
        svg << "<text x=\"" << fmt("%.2f", x_of(g)) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\">" << g << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        svg << "<text x=\"" << left - 8 << "\" y=\"" << fmt("%.2f", y_of(v) + 4) << "\" text-anchor=\"end\">"
            << fmt("%.0f", v) << "</text>\n";
        svg << "<line x1=\"" << left << "\" y1=\"" << fmt("%.2f", y_of(v)) << "\" x2=\"" << left + plot_w
            << "\" y2=\"" << fmt("%.2f", y_of(v)) << "\" stroke=\"#dddddd\"/>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">Gameweek</text>\n";
    svg << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << top + plot_h / 2 << ")\">Cumulative points</text>\n";
    for (std::size_t i = 0; i < report.series.size(); ++i) {
        const auto& s = report.series[i];
        const char* color = kColors[i % std::size(kColors)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < s.gameweeks.size(); ++k) {
            const auto& r = s.gameweeks[k];
            svg << (k ? " " : "") << fmt("%.2f", x_of(r.gameweek)) << "," << fmt("%.2f", y_of(r.cumulative));
        }
        svg << "\"/>\n";
        const double ly = top + 10 + 20.0 * static_cast<double>(i);
        svg << "<line x1=\"" << left + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 40
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << left + plot_w + 46 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.config.name)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string report_summary(const BacktestReport& report, bool include_reference) {
    require_nonempty(report);
    std::ostringstream out;
    out << "gameweeks " << report.first_gw << "-" << report.last_gw << "\n";
    for (const auto& s : report.series) {
        out << s.config.name << ": total " << s.total_points << ", average " << fmt("%.2f", s.average_points)
            << " per gameweek, precision GK " << precision_cell(s.precision[0]) << " DEF "
            << precision_cell(s.precision[1]) << " MID " << precision_cell(s.precision[2]) << " FWD "
            << precision_cell(s.precision[3]) << "\n";
    }
    if (include_reference) {
        const ReferenceTargets ref;
        out << "reference 2018/19 (non-binding; published averages disagree between sources):\n"
            << "  stats baseline: average " << fmt("%.0f", ref.baseline_average) << " per gameweek, total "
            << ref.baseline_total << "\n"
            << "  multi-stream: average " << fmt("%.0f", ref.multi_stream_average) << " per gameweek, total "
            << ref.multi_stream_total << "\n";
    }
    return out.str();
}

void emit_report(const BacktestReport& report, const std::filesystem::path& out_dir, bool include_reference) {
    require_nonempty(report);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    write_file_atomic(out_dir / "report.csv", report_csv(report));
    write_file_atomic(out_dir / "cumulative.svg", cumulative_svg(report));
    write_file_atomic(out_dir / "summary.txt", report_summary(report, include_reference));
}

}  // namespace squadforge
