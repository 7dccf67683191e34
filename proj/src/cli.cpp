#include "squadforge/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "squadforge/backtest.hpp"
#include "squadforge/config.hpp"
#include "squadforge/errors.hpp"
#include "squadforge/features.hpp"
#include "squadforge/gbm.hpp"
#include "squadforge/ingest.hpp"
#include "squadforge/selector.hpp"
#include "squadforge/synthetic.hpp"

namespace squadforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> gameweek;
    std::optional<int> from;
    std::optional<int> to;
    std::vector<std::string> streams;
    std::string out;
    std::string models;
    std::string pool;
    std::string model;
    int gameweeks = 12;
};

std::string two_digit(int v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", v);
    return buf;
}

Config context(const Options& o) {
    Config c = load_config(o.config);
    if (o.seed) {
        c.seed = *o.seed;
        c.gbm.seed = *o.seed;
    }
    return c;
}

StreamSet streams_of(const Options& o) {
    if (o.streams.empty()) return StreamSet::all();
    if (o.streams.size() > 1) throw ConfigError("--streams given more than once");
    return parse_streams(o.streams.front());
}

int require_gameweek(const Options& o) {
    if (!o.gameweek) throw ConfigError("--gameweek is required");
    if (*o.gameweek < 1 || *o.gameweek > 38) throw ValidationError("gameweek must be within 1..38");
    return *o.gameweek;
}

fs::path out_dir(const Options& o, const fs::path& fallback) { return o.out.empty() ? fallback : fs::path(o.out); }

std::vector<RosterEntry> load_any_roster(const Config& c) {
    for (const fs::path& p : {c.aliases, c.data_dir / "aliases.json", c.data_dir / "roster.json"}) {
        if (!p.empty() && fs::exists(p)) return load_roster(p);
    }
    return {};
}

StreamData load_streams(const Config& c) {
    StreamData sd;
    auto gameweek_of = [](const fs::path& p) -> std::optional<int> {
        const auto stem = p.stem().string();
        if (stem.rfind("gw_", 0) != 0) return std::nullopt;
        try {
            return std::stoi(stem.substr(3));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    auto files_in = [](const fs::path& dir, const char* ext) {
        std::vector<fs::path> files;
        if (fs::is_directory(dir)) {
            for (const auto& e : fs::directory_iterator(dir)) {
                if (e.path().extension() == ext) files.push_back(e.path());
            }
        }
        std::sort(files.begin(), files.end());
        return files;
    };
    for (const auto& p : files_in(c.data_dir / "odds", ".json")) {
        if (auto g = gameweek_of(p)) sd.set_fixtures(*g, parse_odds_payload(read_file(p), *g));
    }
    for (const auto& p : files_in(c.documents_dir, ".jsonl")) {
        if (auto g = gameweek_of(p)) sd.set_documents(*g, load_documents(p, c.query_tag));
    }
    sd.set_roster(load_any_roster(c));
    if (fs::exists(c.lexicon)) sd.set_lexicon(load_lexicon(c.lexicon, fs::exists(c.negations) ? c.negations : fs::path()));
    sd.set_document_cap(c.max_documents);
    return sd;
}

GbmParams params_for(const Config& c, const TrainingSet& ts) {
    if (!c.sweep) return c.gbm;
    const auto grid = c.grid();
    return sweep(ts.x, ts.y, {}, grid, c.k_folds, c.seed).best;
}

BoostedModel train_position(const Config& c, const SnapshotStore& store, const StreamData& sd, int gw,
                            Position pos, const StreamSet& streams) {
    const TrainingSet ts = build_training_set(store, sd, gw, pos, streams);
    return fit(ts.x, ts.y, {}, params_for(c, ts), ts.schema.names, ts.schema.schema_version);
}

std::string model_file(Position p) { return "model_" + std::string(to_string(p)) + ".json"; }

std::vector<Candidate> predict_pool(const Config& c, const Options& o, int gw) {
    const SnapshotStore store(c.store_dir());
    const StreamData sd = load_streams(c);
    const StreamSet streams = streams_of(o);
    std::map<PlayerId, PlayerPreview> previews;
    for (auto& p : gameweek_preview(store, sd, gw)) previews.emplace(p.player_id, p);
    std::vector<Candidate> pool;
    for (Position pos : kAllPositions) {
        BoostedModel model;
        if (!o.models.empty()) {
            model = deserialize_model(read_file(fs::path(o.models) / model_file(pos)));
        } else {
            model = train_position(c, store, sd, gw, pos, streams);
        }
        const TrainingSet target = build_prediction_set(store, sd, gw, pos, streams);
        if (model.feature_names != target.schema.names) {
            throw ValidationError("model for " + std::string(to_string(pos)) +
                                  " was trained on different features than --streams " + to_string(streams));
        }
        const auto proba = predict_proba(model, target.x);
        for (std::size_t i = 0; i < proba.size(); ++i) {
            const auto& preview = previews.at(target.keys[i].first);
            pool.push_back(Candidate{preview.player_id, pos, preview.team_id, proba[i], preview.cost});
        }
    }
    return pool;
}

void write_or_print(const Options& o, const std::string& text, std::ostream& out) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    const fs::path path(o.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file_atomic(path, text);
}

// --- subcommands -----------------------------------------------------------------

void cmd_ingest(const Options& o, std::ostream& out) {
    const Config c = context(o);
    int first = 0, last = 0;
    if (o.gameweek) {
        first = last = require_gameweek(o);
    } else if (o.from && o.to) {
        first = *o.from;
        last = *o.to;
    } else {
        throw ConfigError("ingest needs --gameweek or --from/--to");
    }
    if (first < 1 || last > 38 || first > last) throw ValidationError("gameweek range must be within 1..38");
    SnapshotStore store(c.store_dir());
    FeedClient players(c.players_feed);
    FeedClient odds(c.odds_feed);
    std::map<PlayerId, RosterEntry> roster;
    const fs::path roster_path = c.data_dir / "roster.json";
    if (fs::exists(roster_path)) {
        for (auto& e : load_roster(roster_path)) roster[e.player_id] = e;
    }
    for (int g = first; g <= last; ++g) {
        const std::string raw = players.fetch_raw(kPlayersEndpoint, g);
        const auto records = parse_players_payload(raw, g);
        for (auto& e : parse_players_roster(raw)) roster[e.player_id] = e;
        store.put(make_snapshot(g, records));
        const auto fixtures = parse_odds_payload(odds.fetch_raw(kOddsEndpoint, g), g);
        fs::create_directories(c.data_dir / "odds");
        write_file_atomic(c.data_dir / "odds" / ("gw_" + two_digit(g) + ".json"), odds_payload(g, fixtures));
        out << "gameweek " << g << ": " << records.size() << " players, " << fixtures.size() << " fixtures\n";
    }
    json arr = json::array();
    for (const auto& [id, e] : roster) arr.push_back({{"player_id", id}, {"full_name", e.full_name}, {"aliases", e.aliases}});
    write_file_atomic(roster_path, json{{"players", arr}}.dump(1) + "\n");
}

void cmd_features(const Options& o, std::ostream& out) {
    const Config c = context(o);
    const int gw = require_gameweek(o);
    const SnapshotStore store(c.store_dir());
    const StreamData sd = load_streams(c);
    const fs::path dir = out_dir(o, c.data_dir / "features");
    for (Position pos : kAllPositions) {
        const TrainingSet ts = build_training_set(store, sd, gw, pos, streams_of(o));
        export_csv(ts, dir);
        out << to_string(pos) << ": " << ts.x.rows() << " rows, " << ts.x.cols() << " features\n";
    }
}

void cmd_train(const Options& o, std::ostream& out) {
    const Config c = context(o);
    const int gw = require_gameweek(o);
    const SnapshotStore store(c.store_dir());
    const StreamData sd = load_streams(c);
    const fs::path dir = out_dir(o, c.models_dir());
    fs::create_directories(dir);
    for (Position pos : kAllPositions) {
        const BoostedModel model = train_position(c, store, sd, gw, pos, streams_of(o));
        write_file_atomic(dir / model_file(pos), serialize(model));
        out << to_string(pos) << ": " << model.trees.size() << " trees -> " << (dir / model_file(pos)).string() << "\n";
    }
}

void cmd_sweep(const Options& o, std::ostream& out) {
    const Config c = context(o);
    const int gw = require_gameweek(o);
    const SnapshotStore store(c.store_dir());
    const StreamData sd = load_streams(c);
    const fs::path dir = out_dir(o, c.data_dir / "sweep");
    fs::create_directories(dir);
    const auto grid = c.grid();
    for (Position pos : kAllPositions) {
        const TrainingSet ts = build_training_set(store, sd, gw, pos, streams_of(o));
        const SweepResult r = sweep(ts.x, ts.y, {}, grid, c.k_folds, c.seed);
        std::string csv = "n_trees,max_depth,learning_rate,mean_auc\n";
        char line[128];
        for (const auto& p : r.curve) {
            std::snprintf(line, sizeof line, "%d,%d,%.6g,%.6f\n", p.params.n_trees, p.params.max_depth,
                          p.params.learning_rate, p.mean_auc);
            csv += line;
        }
        const fs::path file = dir / ("sweep_" + std::string(to_string(pos)) + ".csv");
        write_file_atomic(file, csv);
        std::snprintf(line, sizeof line, "%s: best n_trees=%d max_depth=%d learning_rate=%.6g auc=%.6f\n",
                      std::string(to_string(pos)).c_str(), r.best.n_trees, r.best.max_depth, r.best.learning_rate,
                      r.best_auc);
        out << line;
    }
}

void cmd_predict(const Options& o, std::ostream& out) {
    const Config c = context(o);
    auto pool = predict_pool(c, o, require_gameweek(o));
    std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
        return a.predicted_score != b.predicted_score ? a.predicted_score > b.predicted_score : a.player_id < b.player_id;
    });
    std::string csv = "player_id,position,team_id,cost,probability\n";
    char line[256];
    for (const auto& p : pool) {
        std::snprintf(line, sizeof line, "%s,%s,%s,%.1f,%.6f\n", p.player_id.c_str(),
                      std::string(to_string(p.position)).c_str(), p.team_id.c_str(), p.cost, p.predicted_score);
        csv += line;
    }
    write_or_print(o, csv, out);
}

void cmd_lineup(const Options& o, std::ostream& out) {
    const Config c = context(o);
    std::vector<Candidate> pool;
    if (!o.pool.empty()) {
        json j;
        try {
            j = json::parse(read_file(o.pool));
        } catch (const json::parse_error& e) {
            throw ParseError("pool file is not valid JSON: " + std::string(e.what()));
        }
        const json& list = j.is_object() ? j.at("candidates") : j;
        for (const auto& item : list) pool.push_back(candidate_from_json(item));
    } else {
        pool = predict_pool(c, o, require_gameweek(o));
    }
    const Lineup lineup = select_lineup(pool, c.selection);
    write_or_print(o, to_json(lineup).dump(2) + "\n", out);
}

void cmd_backtest(const Options& o, std::ostream& out) {
    const Config c = context(o);
    const int first = o.from.value_or(c.backtest_from);
    const int last = o.to.value_or(c.backtest_to);
    const SnapshotStore store(c.store_dir());
    const StreamData sd = load_streams(c);
    std::vector<BacktestConfig> configs;
    if (o.streams.empty()) {
        for (const auto& s : c.backtest_configs) configs.push_back(make_config(s));
    } else {
        for (const auto& s : o.streams) configs.push_back(make_config(parse_streams(s)));
    }
    BacktestOptions opts;
    opts.params = c.gbm;
    opts.sweep = c.sweep;
    opts.grid = c.grid();
    opts.k_folds = c.k_folds;
    opts.precision_threshold = c.precision_threshold;
    opts.constraints = c.selection;
    opts.table = scoring_table(c.scoring);
    const BacktestReport report = replay_season(store, sd, configs, opts, first, last);
    const fs::path dir = out_dir(o, c.data_dir / "backtest");
    emit_report(report, dir, c.reference_targets);
    out << report_summary(report, c.reference_targets);
}

void cmd_importance(const Options& o, std::ostream& out) {
    const Config c = context(o);
    auto print = [&](const BoostedModel& m) {
        const auto shares = importance(m);
        std::vector<std::pair<std::string, double>> rows(shares.begin(), shares.end());
        std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        char line[256];
        for (const auto& [name, v] : rows) {
            std::snprintf(line, sizeof line, "%s\t%.6f\n", name.c_str(), v);
            out << line;
        }
    };
    if (!o.model.empty()) {
        print(deserialize_model(read_file(o.model)));
        return;
    }
    const int gw = require_gameweek(o);
    const SnapshotStore store(c.store_dir());
    const StreamData sd = load_streams(c);
    for (Position pos : kAllPositions) {
        out << "# " << to_string(pos) << "\n";
        print(train_position(c, store, sd, gw, pos, streams_of(o)));
    }
}

void cmd_synth(const Options& o, std::ostream& out) {
    if (o.out.empty()) throw ConfigError("synth needs --out");
    SyntheticOptions so;
    so.seed = o.seed.value_or(1);
    so.gameweeks = o.gameweeks;
    const SyntheticSeason season = generate_season(so);
    const fs::path dir(o.out);
    write_season(season, dir);
    const std::string config = "# synthetic season, seed " + std::to_string(so.seed) +
                               "\ndata_dir = \".\"\nseed = " + std::to_string(so.seed) +
                               "\n\n[backtest]\nfrom = 3\nto = " + std::to_string(so.gameweeks) +
                               "\nconfigurations = [\"stats\", \"stats,odds,sentiment\"]\n";
    write_file_atomic(dir / "squadforge.toml", config);
    out << "wrote " << so.gameweeks << " gameweeks to " << dir.string() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fantasy football lineup selection from stats, betting odds and blog sentiment", "squadforge"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Config file (TOML subset)");
        sub->add_option("--seed", o.seed, "Random seed (overrides the config)");
    };
    auto gameweek = [&](CLI::App* sub, const char* what) { sub->add_option("--gameweek", o.gameweek, what); };
    auto streams = [&](CLI::App* sub) {
        sub->add_option("--streams", o.streams, "Data streams, e.g. stats,odds,sentiment");
    };

    auto* ingest = app.add_subcommand("ingest", "Fetch and cache player stats and odds for gameweeks");
    common(ingest);
    gameweek(ingest, "Gameweek to fetch");
    ingest->add_option("--from", o.from, "First gameweek to fetch");
    ingest->add_option("--to", o.to, "Last gameweek to fetch");

    auto* features = app.add_subcommand("features", "Export per-position feature matrices as CSV");
    common(features);
    gameweek(features, "Use gameweeks before this one");
    streams(features);
    features->add_option("--out", o.out, "Output directory");

    auto* train = app.add_subcommand("train", "Fit and save per-position models");
    common(train);
    gameweek(train, "Train on gameweeks before this one");
    streams(train);
    train->add_option("--out", o.out, "Model directory");

    auto* sweep_cmd = app.add_subcommand("sweep", "Grid search with cross-validated AUC");
    common(sweep_cmd);
    gameweek(sweep_cmd, "Use gameweeks before this one");
    streams(sweep_cmd);
    sweep_cmd->add_option("--out", o.out, "Directory for sweep_<POS>.csv");

    auto* predict = app.add_subcommand("predict", "Predict captain-worthiness for a gameweek");
    common(predict);
    gameweek(predict, "Gameweek to predict");
    streams(predict);
    predict->add_option("--models", o.models, "Directory with saved models (default: train now)");
    predict->add_option("--out", o.out, "CSV output file (default: stdout)");

    auto* lineup = app.add_subcommand("lineup", "Select the starting XI and captain");
    common(lineup);
    gameweek(lineup, "Gameweek to pick for");
    streams(lineup);
    lineup->add_option("--models", o.models, "Directory with saved models (default: train now)");
    lineup->add_option("--pool", o.pool, "JSON candidate list instead of predicting");
    lineup->add_option("--out", o.out, "JSON output file (default: stdout)");

    auto* backtest = app.add_subcommand("backtest", "Replay a season and write reports");
    common(backtest);
    backtest->add_option("--from", o.from, "First gameweek to replay (>= 3)");
    backtest->add_option("--to", o.to, "Last gameweek to replay");
    backtest->add_option("--streams", o.streams, "Configuration to replay (repeatable)");
    backtest->add_option("--out", o.out, "Report directory");

    auto* importance_cmd = app.add_subcommand("importance", "Print normalized feature importances");
    common(importance_cmd);
    gameweek(importance_cmd, "Train on gameweeks before this one");
    streams(importance_cmd);
    importance_cmd->add_option("--model", o.model, "Saved model file to inspect");

    auto* synth = app.add_subcommand("synth", "Write a synthetic season as feed files");
    synth->add_option("--seed", o.seed, "Generator seed");
    synth->add_option("--gameweeks", o.gameweeks, "Season length")->check(CLI::Range(1, 38));
    synth->add_option("--out", o.out, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: usage: " << msg << "\n";
        err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return 2;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "ingest") cmd_ingest(o, out);
        if (name == "features") cmd_features(o, out);
        if (name == "train") cmd_train(o, out);
        if (name == "sweep") cmd_sweep(o, out);
        if (name == "predict") cmd_predict(o, out);
        if (name == "lineup") cmd_lineup(o, out);
        if (name == "backtest") cmd_backtest(o, out);
        if (name == "importance") cmd_importance(o, out);
        if (name == "synth") cmd_synth(o, out);
    } catch (const Error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: " << e.kind() << ": " << msg << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: io: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        err << "error: parse: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace squadforge
