#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "squadforge/backtest.hpp"
#include "squadforge/features.hpp"
#include "squadforge/gbm.hpp"
#include "squadforge/ingest.hpp"
#include "squadforge/selector.hpp"

namespace squadforge {

// Values of the small TOML subset we accept: strings, integers, floats,
// booleans and single-line arrays of those.
using TomlScalar = std::variant<std::string, std::int64_t, double, bool>;
using TomlValue = std::variant<std::string, std::int64_t, double, bool, std::vector<TomlScalar>>;

// "section.key" -> value; top-level keys have no prefix.
using TomlTable = std::map<std::string, TomlValue>;

// Throws ParseError with the line number on malformed input and on
// duplicate keys.
TomlTable parse_toml(std::string_view text);

struct Config {
    std::filesystem::path data_dir = "data";
    std::uint64_t seed = 0;

    FeedSource players_feed;
    FeedSource odds_feed;

    std::filesystem::path lexicon;    // empty: <data_dir>/lexicon.tsv
    std::filesystem::path negations;  // empty: <data_dir>/negations.txt
    std::filesystem::path aliases;    // empty: <data_dir>/aliases.json, else roster.json
    std::filesystem::path documents_dir;  // empty: <data_dir>/documents
    std::string query_tag;
    int max_documents = kMaxDocuments;

    GbmParams gbm;
    bool sweep = false;
    int k_folds = 3;
    std::vector<int> grid_n_trees{50, 100, 200};
    std::vector<int> grid_max_depth{2, 3, 4};
    std::vector<double> grid_learning_rate{0.05, 0.1, 0.3};

    SelectionConstraints selection;

    int backtest_from = 3;
    int backtest_to = 38;
    std::vector<StreamSet> backtest_configs{StreamSet::stats_only(), StreamSet::all()};
    double precision_threshold = 0.5;
    std::string scoring = "2018-19";
    bool reference_targets = false;

    std::filesystem::path store_dir() const { return data_dir / "store"; }
    std::filesystem::path models_dir() const { return data_dir / "models"; }
    std::vector<GbmParams> grid() const;
};

// Unknown sections or keys and out-of-range values are rejected with
// ConfigError. Relative paths resolve against `base_dir`.
Config config_from_toml(const TomlTable& table, const std::filesystem::path& base_dir);

// Reads the file (or defaults when `path` is empty) and applies the
// SQUADFORGE_DATA_DIR override.
Config load_config(const std::filesystem::path& path);

}  // namespace squadforge
