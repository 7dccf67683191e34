#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "squadforge/config.hpp"
#include "squadforge/errors.hpp"
#include "test_support.hpp"

using namespace squadforge;
using squadforge::testing::TempDir;

namespace {

std::filesystem::path write_config(const TempDir& dir, const std::string& text) {
    const auto path = dir / "squadforge.toml";
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST(Toml, ScalarsArraysAndComments) {
    const auto t = parse_toml(R"(
# top comment
data_dir = "data"   # trailing comment
seed = 42

[gbm]
learning_rate = 0.25
sweep = true
grid_max_depth = [2, 3]
name = "a \"quoted\" # not a comment"
)");
    EXPECT_EQ(std::get<std::string>(t.at("data_dir")), "data");
    EXPECT_EQ(std::get<std::int64_t>(t.at("seed")), 42);
    EXPECT_DOUBLE_EQ(std::get<double>(t.at("gbm.learning_rate")), 0.25);
    EXPECT_TRUE(std::get<bool>(t.at("gbm.sweep")));
    const auto& arr = std::get<std::vector<TomlScalar>>(t.at("gbm.grid_max_depth"));
    ASSERT_EQ(arr.size(), 2u);
    EXPECT_EQ(std::get<std::int64_t>(arr[1]), 3);
    EXPECT_EQ(std::get<std::string>(t.at("gbm.name")), "a \"quoted\" # not a comment");
}

TEST(Toml, ErrorsCarryLineNumbers) {
    try {
        parse_toml("a = 1\nb = \n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_toml("a = 1\na = 2\n"), ParseError);
    EXPECT_THROW(parse_toml("[unterminated\n"), ParseError);
    EXPECT_THROW(parse_toml("s = \"open\n"), ParseError);
}

TEST(Config, ParsesSectionsAndResolvesPaths) {
    TempDir dir("cfg");
    const auto path = write_config(dir, R"(
data_dir = "season"
seed = 7

[feeds.players]
kind = "http"
location = "http://example.invalid/api"
rate_limit = 30
token_env = "SQUADFORGE_TEST_TOKEN"

[gbm]
n_trees = 40
positive_class_weight = "auto"
grid_n_trees = [10, 20]

[selector]
club_cap = false
budget = true
budget_value = 83.5

[backtest]
from = 4
to = 9
configurations = ["stats", "stats,odds"]
reference_targets = true
)");
    ::setenv("SQUADFORGE_TEST_TOKEN", "abc", 1);
    ::unsetenv("SQUADFORGE_DATA_DIR");
    const auto c = load_config(path);
    EXPECT_EQ(c.data_dir, dir.path() / "season");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.players_feed.kind, SourceKind::Http);
    EXPECT_EQ(c.players_feed.rate_limit, 30);
    EXPECT_EQ(c.players_feed.token, "abc");
    EXPECT_EQ(c.gbm.n_trees, 40);
    EXPECT_FALSE(c.gbm.positive_class_weight.has_value());
    EXPECT_FALSE(c.selection.club_cap_enabled);
    EXPECT_TRUE(c.selection.budget_enabled);
    EXPECT_DOUBLE_EQ(c.selection.budget, 83.5);
    EXPECT_EQ(c.backtest_from, 4);
    EXPECT_EQ(c.backtest_configs, (std::vector<StreamSet>{StreamSet::stats_only(), StreamSet{true, true, false}}));
    EXPECT_TRUE(c.reference_targets);
    EXPECT_EQ(c.grid().size(), 2u * 3u * 3u);
    EXPECT_EQ(c.lexicon, c.data_dir / "lexicon.tsv");
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    TempDir dir("cfg_bad");
    EXPECT_THROW(load_config(write_config(dir, "colour = \"red\"\n")), ConfigError);
    EXPECT_THROW(load_config(write_config(dir, "[gbm]\nlearning_rat = 0.1\n")), ConfigError);
    EXPECT_THROW(load_config(write_config(dir, "[nonsense]\nx = 1\n")), ConfigError);
    EXPECT_THROW(load_config(write_config(dir, "[gbm]\nlearning_rate = 2.0\n")), ConfigError);
    EXPECT_THROW(load_config(write_config(dir, "[gbm]\nn_trees = \"many\"\n")), ConfigError);
    EXPECT_THROW(load_config(write_config(dir, "[backtest]\nfrom = 2\n")), ConfigError);
    EXPECT_THROW(load_config(write_config(dir, "[backtest]\nconfigurations = [\"odds\"]\n")), ConfigError);
    EXPECT_THROW(load_config(dir / "missing.toml"), Error);
}

TEST(Config, DataDirEnvironmentOverride) {
    TempDir dir("cfg_env");
    const auto path = write_config(dir, "data_dir = \"from_file\"\n");
    ::setenv("SQUADFORGE_DATA_DIR", "/tmp/elsewhere", 1);
    const auto c = load_config(path);
    ::unsetenv("SQUADFORGE_DATA_DIR");
    EXPECT_EQ(c.data_dir, "/tmp/elsewhere");
    EXPECT_EQ(c.store_dir(), std::filesystem::path("/tmp/elsewhere") / "store");
    EXPECT_EQ(load_config(path).data_dir, dir.path() / "from_file");
}
