#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "squadforge/cli.hpp"
#include "squadforge/domain.hpp"
#include "test_support.hpp"

using namespace squadforge;
using squadforge::testing::TempDir;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Result r;
    r.code = run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Synthetic season on disk with every gameweek ingested.
class CliSeason : public ::testing::Test {
protected:
    void SetUp() override {
        ::unsetenv("SQUADFORGE_DATA_DIR");
        config_ = (dir_ / "squadforge.toml").string();
        ASSERT_EQ(cli({"synth", "--seed", "4", "--gameweeks", "6", "--out", dir_.path().string()}).code, 0);
        const auto ingest = cli({"ingest", "--config", config_, "--from", "1", "--to", "6"});
        ASSERT_EQ(ingest.code, 0) << ingest.err;
    }

    TempDir dir_{"cli"};
    std::string config_;
};

std::string slurp_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) all += f.filename().string() + "\n" + read_file(f);
    return all;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    auto r = cli({"frobnicate"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("error: usage:", 0), 0u) << r.err;
    r = cli({"lineup", "--no-such-flag"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--pool"), std::string::npos);
    EXPECT_EQ(cli({}).code, 2);
}

TEST(Cli, HelpForEverySubcommandListsFlags) {
    const std::map<std::string, std::vector<std::string>> flags{
        {"ingest", {"--config", "--gameweek", "--from", "--to", "--seed"}},
        {"features", {"--config", "--gameweek", "--streams", "--out"}},
        {"train", {"--config", "--gameweek", "--streams", "--out", "--seed"}},
        {"sweep", {"--config", "--gameweek", "--streams", "--out"}},
        {"predict", {"--config", "--gameweek", "--models", "--out"}},
        {"lineup", {"--config", "--gameweek", "--pool", "--out"}},
        {"backtest", {"--config", "--from", "--to", "--streams", "--out", "--seed"}},
        {"importance", {"--config", "--model", "--gameweek"}},
        {"synth", {"--seed", "--gameweeks", "--out"}},
    };
    for (const auto& [cmd, expected] : flags) {
        const auto r = cli({cmd, "--help"});
        EXPECT_EQ(r.code, 0) << cmd;
        for (const auto& f : expected) EXPECT_NE(r.out.find(f), std::string::npos) << cmd << " " << f;
    }
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, ConfigErrorsExitOne) {
    TempDir dir("cli_cfg");
    const auto path = dir / "bad.toml";
    std::ofstream(path) << "unknown_key = 1\n";
    const auto r = cli({"backtest", "--config", path.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.err.rfind("error: config:", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, InfeasibleLineupNamesConstraint) {
    TempDir dir("cli_pool");
    const auto pool = dir / "pool.json";
    std::ofstream(pool) << R"([
      {"player_id":"a","position":"GK","team_id":"x","predicted_score":1.0},
      {"player_id":"b","position":"DEF","team_id":"x","predicted_score":1.0},
      {"player_id":"c","position":"FWD","team_id":"y","predicted_score":1.0}
    ])";
    const auto r = cli({"lineup", "--pool", pool.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("error: infeasible: formation"), std::string::npos) << r.err;
}

TEST(Cli, BinaryReportsExitCodes) {
    const std::string bin = SQUADFORGE_CLI_PATH;
    auto status = [&](const std::string& args) {
        const int raw = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    EXPECT_EQ(status("--help"), 0);
    EXPECT_EQ(status("train --bogus"), 2);
    EXPECT_EQ(status("importance --model /nonexistent/model.json"), 1);
}

TEST_F(CliSeason, TrainIsByteIdenticalOnRerun) {
    const auto a = dir_ / "models_a";
    const auto b = dir_ / "models_b";
    ASSERT_EQ(cli({"train", "--config", config_, "--gameweek", "5", "--out", a.string()}).code, 0);
    ASSERT_EQ(cli({"train", "--config", config_, "--gameweek", "5", "--out", b.string()}).code, 0);
    EXPECT_TRUE(std::filesystem::exists(a / "model_GK.json"));
    EXPECT_EQ(slurp_dir(a), slurp_dir(b));

    const auto imp = cli({"importance", "--model", (a / "model_FWD.json").string()});
    EXPECT_EQ(imp.code, 0);
    EXPECT_NE(imp.out.find("prev_points"), std::string::npos);
}

TEST_F(CliSeason, BacktestIsByteIdenticalOnRerun) {
    const auto a = dir_ / "bt_a";
    const auto b = dir_ / "bt_b";
    const auto r1 = cli({"backtest", "--config", config_, "--from", "3", "--to", "6", "--out", a.string()});
    ASSERT_EQ(r1.code, 0) << r1.err;
    const auto r2 = cli({"backtest", "--config", config_, "--from", "3", "--to", "6", "--out", b.string()});
    ASSERT_EQ(r2.code, 0);
    EXPECT_EQ(r1.out, r2.out);
    for (const char* f : {"report.csv", "cumulative.svg", "summary.txt"}) {
        ASSERT_TRUE(std::filesystem::exists(a / f)) << f;
        EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
    }
}

TEST_F(CliSeason, PredictLineupAndFeatures) {
    const auto pred = cli({"predict", "--config", config_, "--gameweek", "6"});
    ASSERT_EQ(pred.code, 0) << pred.err;
    EXPECT_EQ(pred.out.rfind("player_id,position,team_id,cost,probability", 0), 0u);

    const auto lineup = cli({"lineup", "--config", config_, "--gameweek", "6", "--streams", "stats,odds"});
    ASSERT_EQ(lineup.code, 0) << lineup.err;
    const auto j = nlohmann::json::parse(lineup.out);
    EXPECT_EQ(j.at("players").size(), 11u);

    const auto feats = cli({"features", "--config", config_, "--gameweek", "6", "--out", (dir_ / "f").string()});
    ASSERT_EQ(feats.code, 0) << feats.err;
    EXPECT_TRUE(std::filesystem::exists(dir_ / "f" / "features_MID.csv"));

    const auto bad = cli({"backtest", "--config", config_, "--from", "2", "--to", "6"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("error: "), std::string::npos);
}

TEST_F(CliSeason, DataDirEnvironmentOverride) {
    ::setenv("SQUADFORGE_DATA_DIR", (dir_ / "nowhere").string().c_str(), 1);
    const auto r = cli({"backtest", "--config", config_, "--from", "3", "--to", "4"});
    ::unsetenv("SQUADFORGE_DATA_DIR");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("error: gap: missing gameweeks: 1,2,3,4"), std::string::npos) << r.err;
}
